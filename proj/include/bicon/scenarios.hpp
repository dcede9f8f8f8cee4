#ifndef BICON_SCENARIOS_HPP
#define BICON_SCENARIOS_HPP

#include "bicon/manifest.hpp"
#include "bicon/maximal.hpp"

namespace bicon {

// Built-in scenario registry: complete manifests addressable by name.
std::vector<std::string> scenario_names();
Manifest scenario(const std::string& name);

// the maximal flat-leaf demo as a manifest (gauge expressions included)
Manifest maximal_demo_manifest(int n, int p);

}  // namespace bicon

#endif

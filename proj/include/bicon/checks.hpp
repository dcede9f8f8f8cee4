#ifndef BICON_CHECKS_HPP
#define BICON_CHECKS_HPP

#include "bicon/manifest.hpp"
#include "bicon/scenarios.hpp"
#include "bicon/structure.hpp"

namespace bicon {

struct CheckResult {
  std::string name;
  Verdict verdict = Verdict::Fail;
  double max_residual = 0.0;
  int points = 0;
  nlohmann::json details;
};

std::vector<CheckResult> check_metric(const Manifest& m);
std::vector<CheckResult> check_root(const Manifest& m);
std::vector<CheckResult> check_bcvf(const Manifest& m, const std::string& field);
std::vector<CheckResult> check_gauge_free(const Manifest& m, const std::string& field);
std::vector<CheckResult> check_kerr_schild(const Manifest& m, const std::string& field,
                                           const std::string& k_name);
std::vector<CheckResult> check_split(const Manifest& m);
std::vector<CheckResult> check_structure(const Manifest& m);
std::vector<CheckResult> check_constraints(const Manifest& m, const std::string& field);
std::vector<CheckResult> check_normal_system(const Manifest& m, const std::string& field);
std::vector<CheckResult> check_integrability(const Manifest& m, const std::string& field);
std::vector<CheckResult> check_rank_appendix(const Manifest& m);
std::vector<CheckResult> check_bound(int n, int p);
std::vector<CheckResult> check_maximal_demo(int n, int p);
std::vector<CheckResult> check_flow(const Manifest& m, const std::string& field, double s,
                                    int steps_per_unit);

nlohmann::json make_report(const Manifest* m, const std::vector<CheckResult>& results);
int exit_code_for(const std::vector<CheckResult>& results);

}  // namespace bicon

#endif

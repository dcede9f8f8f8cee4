#ifndef BICON_MANIFEST_HPP
#define BICON_MANIFEST_HPP

#include <map>

#include "json.hpp"

#include "bicon/symmetry.hpp"

namespace bicon {

struct ValidationError : Error {
  using Error::Error;
};

struct SquareRootSpecJson {
  enum Kind { None, Direct, Form, Blocks } kind = None;
  std::vector<std::vector<std::string>> direct;  // n x n components
  std::vector<std::vector<std::string>> form;    // p factor 1-forms
  std::vector<std::string> blocks;               // coordinate names of the first block
};

// One JSON document describing a chart, metric, optional square root,
// named vector fields with optional gauge expressions, the sampling domain
// and the tolerances.  schema: 1.
struct Manifest {
  int schema = 1;
  std::string name;
  std::vector<std::string> coordinates;
  std::vector<std::vector<std::string>> metric;
  SquareRootSpecJson root;
  std::map<std::string, std::vector<std::string>> fields;
  std::map<std::string, std::pair<std::string, std::string>> gauges;  // alpha, beta
  std::map<std::string, std::vector<std::string>> one_forms;
  Point base;
  std::vector<double> half_widths;
  int sample_count = 32;
  std::uint64_t seed = 42;
  Tolerances tol;
  int jet_order = 4;

  static Manifest from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  // fills the default domain when none was declared
  void finalize();
  // parses every expression and checks the structural invariants; throws
  // ValidationError with a field-level message
  void validate() const;

  int dim() const { return static_cast<int>(coordinates.size()); }
  Chart chart() const;
  MetricField metric_field() const;
  bool has_root() const { return root.kind != SquareRootSpecJson::None; }
  RootFieldPtr root_field() const;
  VectorField field(const std::string& fname) const;
  std::optional<GaugeFields> gauge_fields(const std::string& fname) const;
  std::vector<ScalarField> one_form(const std::string& fname) const;
  // deterministic: the base point first, then seeded uniform draws
  std::vector<Point> sample_points() const;
};

}  // namespace bicon

#endif

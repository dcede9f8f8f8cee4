#include "bicon/manifest.hpp"

#include <cmath>
#include <sstream>

namespace bicon {

using nlohmann::json;

namespace {

std::vector<std::vector<std::string>> string_matrix(const json& j, const std::string& where) {
  if (!j.is_array()) throw ValidationError(where + ": expected an array of rows");
  std::vector<std::vector<std::string>> out;
  for (const auto& row : j) {
    if (!row.is_array()) throw ValidationError(where + ": expected rows of strings");
    std::vector<std::string> r;
    for (const auto& c : row) {
      if (!c.is_string()) throw ValidationError(where + ": entries must be strings");
      r.push_back(c.get<std::string>());
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

Manifest Manifest::from_json(const json& j) {
  Manifest m;
  if (j.contains("schema")) m.schema = j.at("schema").get<int>();
  if (m.schema != 1) throw ValidationError("schema: only version 1 is supported");
  if (j.contains("name")) m.name = j.at("name").get<std::string>();
  if (!j.contains("coordinates"))
    throw ValidationError("coordinates: required field is missing");
  for (const auto& c : j.at("coordinates")) m.coordinates.push_back(c.get<std::string>());
  if (!j.contains("metric")) throw ValidationError("metric: required field is missing");
  m.metric = string_matrix(j.at("metric"), "metric");
  if (j.contains("square_root")) {
    const auto& r = j.at("square_root");
    int kinds = r.contains("components") + r.contains("form") + r.contains("blocks");
    if (kinds != 1)
      throw ValidationError(
          "square_root: exactly one of components | form | blocks is required");
    if (r.contains("components")) {
      m.root.kind = SquareRootSpecJson::Direct;
      m.root.direct = string_matrix(r.at("components"), "square_root.components");
    } else if (r.contains("form")) {
      m.root.kind = SquareRootSpecJson::Form;
      m.root.form = string_matrix(r.at("form"), "square_root.form");
    } else {
      m.root.kind = SquareRootSpecJson::Blocks;
      for (const auto& b : r.at("blocks")) m.root.blocks.push_back(b.get<std::string>());
    }
  }
  if (j.contains("fields"))
    for (const auto& [k, v] : j.at("fields").items()) {
      std::vector<std::string> comps;
      for (const auto& c : v) comps.push_back(c.get<std::string>());
      m.fields[k] = std::move(comps);
    }
  if (j.contains("gauges"))
    for (const auto& [k, v] : j.at("gauges").items())
      m.gauges[k] = {v.at("alpha").get<std::string>(), v.at("beta").get<std::string>()};
  if (j.contains("one_forms"))
    for (const auto& [k, v] : j.at("one_forms").items()) {
      std::vector<std::string> comps;
      for (const auto& c : v) comps.push_back(c.get<std::string>());
      m.one_forms[k] = std::move(comps);
    }
  if (j.contains("domain")) {
    const auto& d = j.at("domain");
    if (d.contains("base"))
      for (const auto& v : d.at("base")) m.base.push_back(v.get<double>());
    if (d.contains("half_widths"))
      for (const auto& v : d.at("half_widths")) m.half_widths.push_back(v.get<double>());
  }
  m.finalize();
  if (j.contains("sampling")) {
    const auto& s = j.at("sampling");
    if (s.contains("count")) m.sample_count = s.at("count").get<int>();
    if (s.contains("seed")) m.seed = s.at("seed").get<std::uint64_t>();
  }
  if (j.contains("tolerances")) {
    const auto& t = j.at("tolerances");
    if (t.contains("pass")) m.tol.pass = t.at("pass").get<double>();
    if (t.contains("fail")) m.tol.fail = t.at("fail").get<double>();
    if (t.contains("fd_step")) m.tol.fd_step = t.at("fd_step").get<double>();
  }
  if (j.contains("jet_order")) m.jet_order = j.at("jet_order").get<int>();
  return m;
}

json Manifest::to_json() const {
  json j;
  j["schema"] = schema;
  j["name"] = name;
  j["coordinates"] = coordinates;
  j["metric"] = metric;
  if (root.kind == SquareRootSpecJson::Direct) j["square_root"]["components"] = root.direct;
  if (root.kind == SquareRootSpecJson::Form) j["square_root"]["form"] = root.form;
  if (root.kind == SquareRootSpecJson::Blocks) j["square_root"]["blocks"] = root.blocks;
  if (!fields.empty()) {
    json f;
    for (const auto& [k, v] : fields) f[k] = v;
    j["fields"] = f;
  }
  if (!gauges.empty()) {
    json gsec;
    for (const auto& [k, v] : gauges) {
      gsec[k]["alpha"] = v.first;
      gsec[k]["beta"] = v.second;
    }
    j["gauges"] = gsec;
  }
  if (!one_forms.empty()) {
    json f;
    for (const auto& [k, v] : one_forms) f[k] = v;
    j["one_forms"] = f;
  }
  j["domain"]["base"] = base;
  j["domain"]["half_widths"] = half_widths;
  j["sampling"]["count"] = sample_count;
  j["sampling"]["seed"] = seed;
  j["tolerances"]["pass"] = tol.pass;
  j["tolerances"]["fail"] = tol.fail;
  j["tolerances"]["fd_step"] = tol.fd_step;
  j["jet_order"] = jet_order;
  return j;
}

Chart Manifest::chart() const { return make_chart(coordinates); }

void Manifest::finalize() {
  if (base.empty()) base.assign(coordinates.size(), 0.1);
  if (half_widths.empty()) half_widths.assign(coordinates.size(), 0.5);
}

void Manifest::validate() const {
  const int n = dim();
  if (n < 1) throw ValidationError("coordinates: at least one coordinate is required");
  for (int i = 0; i < n; ++i)
    for (int k = i + 1; k < n; ++k)
      if (coordinates[i] == coordinates[k])
        throw ValidationError("coordinates: duplicate name \"" + coordinates[i] + "\"");
  Chart ch = chart();
  auto parse_at = [&](const std::string& src, const std::string& where) {
    try {
      return ScalarField::parse(src, ch);
    } catch (const Error& e) {
      throw ValidationError(where + ": " + e.what());
    }
  };
  if (static_cast<int>(metric.size()) != n)
    throw ValidationError("metric: expected " + std::to_string(n) + " rows");
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(metric[i].size()) != n)
      throw ValidationError("metric: row " + std::to_string(i) + " has wrong length");
    for (int k = 0; k < n; ++k)
      parse_at(metric[i][k], "metric[" + std::to_string(i) + "][" + std::to_string(k) + "]");
  }
  if (static_cast<int>(base.size()) != n)
    throw ValidationError("domain.base: expected " + std::to_string(n) + " entries");
  if (static_cast<int>(half_widths.size()) != n)
    throw ValidationError("domain.half_widths: expected " + std::to_string(n) + " entries");
  for (double h : half_widths)
    if (!(h > 0.0)) throw ValidationError("domain.half_widths: entries must be positive");
  if (sample_count < 1) throw ValidationError("sampling.count: must be at least 1");
  if (!(tol.pass < tol.fail))
    throw ValidationError("tolerances: pass must be smaller than fail");
  if (jet_order < 0 || jet_order > 8)
    throw ValidationError("jet_order: expected a value in [0, 8]");
  // numeric symmetry of the metric at the base point
  for (int i = 0; i < n; ++i)
    for (int k = i + 1; k < n; ++k) {
      double a = parse_at(metric[i][k], "metric").value(base);
      double b = parse_at(metric[k][i], "metric").value(base);
      if (std::abs(a - b) > 1e-12 * std::max(1.0, std::abs(a)))
        throw ValidationError("metric: not symmetric at the base point (entry " +
                              std::to_string(i) + "," + std::to_string(k) + ")");
    }
  switch (root.kind) {
    case SquareRootSpecJson::Direct: {
      if (static_cast<int>(root.direct.size()) != n)
        throw ValidationError("square_root.components: expected " + std::to_string(n) + " rows");
      for (const auto& row : root.direct) {
        if (static_cast<int>(row.size()) != n)
          throw ValidationError("square_root.components: wrong row length");
        for (const auto& c : row) parse_at(c, "square_root.components");
      }
      break;
    }
    case SquareRootSpecJson::Form: {
      if (root.form.empty())
        throw ValidationError("square_root.form: at least one factor required");
      for (const auto& row : root.form) {
        if (static_cast<int>(row.size()) != n)
          throw ValidationError("square_root.form: factor has wrong component count");
        for (const auto& c : row) parse_at(c, "square_root.form");
      }
      break;
    }
    case SquareRootSpecJson::Blocks: {
      for (const auto& b : root.blocks) {
        bool found = false;
        for (const auto& c : coordinates) found = found || (c == b);
        if (!found)
          throw ValidationError("square_root.blocks: unknown coordinate \"" + b + "\"");
      }
      if (root.blocks.empty() || static_cast<int>(root.blocks.size()) >= n)
        throw ValidationError("square_root.blocks: block must be a proper nonempty subset");
      break;
    }
    case SquareRootSpecJson::None: break;
  }
  for (const auto& [k, v] : fields) {
    if (static_cast<int>(v.size()) != n)
      throw ValidationError("fields." + k + ": expected " + std::to_string(n) + " components");
    for (const auto& c : v) parse_at(c, "fields." + k);
  }
  for (const auto& [k, v] : gauges) {
    if (!fields.count(k))
      throw ValidationError("gauges." + k + ": no such field declared");
    parse_at(v.first, "gauges." + k + ".alpha");
    parse_at(v.second, "gauges." + k + ".beta");
  }
  for (const auto& [k, v] : one_forms) {
    if (static_cast<int>(v.size()) != n)
      throw ValidationError("one_forms." + k + ": expected " + std::to_string(n) +
                            " components");
    for (const auto& c : v) parse_at(c, "one_forms." + k);
  }
}

MetricField Manifest::metric_field() const {
  return MetricField::from_strings(chart(), metric);
}

RootFieldPtr Manifest::root_field() const {
  Chart ch = chart();
  switch (root.kind) {
    case SquareRootSpecJson::Direct:
      return std::make_shared<DirectRootField>(DirectRootField::from_strings(ch, root.direct));
    case SquareRootSpecJson::Form:
      return std::make_shared<FormRootField>(SimpleFormSpec::from_strings(ch, root.form));
    case SquareRootSpecJson::Blocks: {
      std::vector<int> idx;
      for (const auto& b : root.blocks)
        for (int i = 0; i < dim(); ++i)
          if (coordinates[i] == b) idx.push_back(i);
      return std::make_shared<BlockRootField>(idx, dim());
    }
    case SquareRootSpecJson::None: break;
  }
  throw ValidationError("manifest declares no square root but the check needs one");
}

VectorField Manifest::field(const std::string& fname) const {
  auto it = fields.find(fname);
  if (it == fields.end()) throw ValidationError("unknown field \"" + fname + "\"");
  return VectorField::from_strings(chart(), it->second);
}

std::optional<GaugeFields> Manifest::gauge_fields(const std::string& fname) const {
  auto it = gauges.find(fname);
  if (it == gauges.end()) return std::nullopt;
  GaugeFields g;
  g.alpha = ScalarField::parse(it->second.first, chart());
  g.beta = ScalarField::parse(it->second.second, chart());
  return g;
}

std::vector<ScalarField> Manifest::one_form(const std::string& fname) const {
  auto it = one_forms.find(fname);
  if (it == one_forms.end()) throw ValidationError("unknown one-form \"" + fname + "\"");
  std::vector<ScalarField> out;
  for (const auto& c : it->second) out.push_back(ScalarField::parse(c, chart()));
  return out;
}

std::vector<Point> Manifest::sample_points() const {
  std::vector<Point> pts;
  pts.push_back(base);
  // xorshift64*; platform-independent
  std::uint64_t state = seed ? seed : 0x9e3779b97f4a7c15ull;
  auto next = [&state]() {
    state ^= state >> 12;
    state ^= state << 25;
    state ^= state >> 27;
    return state * 0x2545f4914f6cdd1dull;
  };
  const int n = dim();
  for (int i = 1; i < sample_count; ++i) {
    Point x(n);
    for (int c = 0; c < n; ++c) {
      double u = static_cast<double>(next() >> 11) * 0x1.0p-53;
      x[c] = base[c] + (2.0 * u - 1.0) * half_widths[c];
    }
    pts.push_back(std::move(x));
  }
  return pts;
}

}  // namespace bicon

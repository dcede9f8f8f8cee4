#include "bicon/scenarios.hpp"

#include <sstream>

namespace bicon {

namespace {

std::vector<std::vector<std::string>> diag(const std::vector<std::string>& d) {
  const int n = static_cast<int>(d.size());
  std::vector<std::vector<std::string>> m(n, std::vector<std::string>(n, "0"));
  for (int i = 0; i < n; ++i) m[i][i] = d[i];
  return m;
}

Manifest from_maximal(const MaximalSpace& space, const std::string& name) {
  Manifest m;
  m.name = name;
  m.coordinates = *space.chart;
  const int n = static_cast<int>(m.coordinates.size());
  m.metric.assign(n, std::vector<std::string>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m.metric[i][j] = space.metric.comp(i, j).printed();
  // the builder puts the first leaf on the leading coordinates; recover its
  // dimension from the translation count
  m.root.kind = SquareRootSpecJson::Blocks;
  int p = 0;
  for (const auto& e : space.fields)
    if (e.name.rfind("l1-tr", 0) == 0) ++p;
  for (int i = 0; i < p; ++i) m.root.blocks.push_back(m.coordinates[i]);
  for (const auto& e : space.fields) {
    std::vector<std::string> comps;
    for (const auto& c : e.field.comp) comps.push_back(c.printed());
    m.fields[e.name] = comps;
    m.gauges[e.name] = {e.gauges.alpha.printed(), e.gauges.beta.printed()};
  }
  return m;
}

Manifest minkowski4() {
  Manifest m;
  m.name = "minkowski";
  m.coordinates = {"t", "x", "y", "z"};
  m.metric = diag({"1", "-1", "-1", "-1"});
  m.root.kind = SquareRootSpecJson::Form;
  m.root.form = {{"sqrt(2)", "0", "0", "0"}};
  m.fields["rot-xy"] = {"0", "-y", "x", "0"};
  m.gauges["rot-xy"] = {"0", "0"};
  m.fields["boost-tx"] = {"x", "t", "0", "0"};
  m.fields["neg-quadratic"] = {"x^2", "0", "0", "0"};
  m.fields["neg-twist"] = {"0", "y*z", "x*t", "0"};
  return m;
}

Manifest rw_expanding() {
  Manifest m;
  m.name = "rw-expanding";
  m.coordinates = {"t", "x", "y", "z"};
  m.metric = diag({"1", "-exp(2*t)", "-exp(2*t)", "-exp(2*t)"});
  m.root.kind = SquareRootSpecJson::Form;
  m.root.form = {{"sqrt(2)", "0", "0", "0"}};
  m.fields["xi"] = {"1", "0", "0", "0"};
  m.gauges["xi"] = {"1", "-1"};
  m.fields["neg-shear"] = {"0", "t*x", "0", "0"};
  return m;
}

Manifest rw_rigid() {
  Manifest m;
  m.name = "rw-rigid";
  m.coordinates = {"t", "x", "y", "z"};
  m.metric = diag({"1", "-1", "-1", "-1"});
  m.root.kind = SquareRootSpecJson::Form;
  m.root.form = {{"sqrt(2)", "0", "0", "0"}};
  m.fields["xi"] = {"1", "0", "0", "0"};
  m.gauges["xi"] = {"0", "0"};
  return m;
}

Manifest sphere_warp() {
  Manifest m;
  m.name = "sphere-warp";
  m.coordinates = {"th", "ph"};
  m.metric = {{"1", "0"}, {"0", "sin(th)^2"}};
  m.base = {1.1, 0.4};
  m.half_widths = {0.35, 0.35};
  return m;
}

Manifest breakable_63() {
  Chart chart = make_chart({"x1", "x2", "x3", "x4", "x5", "x6"});
  auto g0 = diag({"1", "1", "1"});
  auto g1 = diag({"1", "1", "1"});
  BreakableSpace b = breakable_builder(chart, 3, "exp(x1 + x6)", "1", g0, g1);
  Manifest m;
  m.name = "breakable-6-3";
  m.coordinates = *chart;
  m.metric.assign(6, std::vector<std::string>(6));
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) m.metric[i][j] = b.metric.comp(i, j).printed();
  m.root.kind = SquareRootSpecJson::Blocks;
  m.root.blocks = {"x1", "x2", "x3"};
  auto put = [&](const char* name, const VectorField& v) {
    std::vector<std::string> comps;
    for (const auto& c : v.comp) comps.push_back(c.printed());
    m.fields[name] = comps;
  };
  put("xi", b.xi);
  put("xi1", b.xi1);
  put("xi2", b.xi2);
  m.gauges["xi"] = {b.gauges.alpha.printed(), b.gauges.beta.printed()};
  return m;
}

Manifest breakable_generic_63() {
  Chart chart = make_chart({"x1", "x2", "x3", "x4", "x5", "x6"});
  auto g0 = diag({"1", "1 + x5^2", "1"});
  auto g1 = diag({"1", "1 + (x2*x5)^2", "1"});
  BreakableSpace b = breakable_builder(chart, 3, "exp((x1 + x6)*(1 + x4^2))",
                                       "exp(x6*(1 + x2^2))", g0, g1);
  Manifest m;
  m.name = "breakable-generic-6-3";
  m.coordinates = *chart;
  m.metric.assign(6, std::vector<std::string>(6));
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) m.metric[i][j] = b.metric.comp(i, j).printed();
  m.root.kind = SquareRootSpecJson::Blocks;
  m.root.blocks = {"x1", "x2", "x3"};
  std::vector<std::string> comps;
  for (const auto& c : b.xi.comp) comps.push_back(c.printed());
  m.fields["xi"] = comps;
  m.gauges["xi"] = {b.gauges.alpha.printed(), b.gauges.beta.printed()};
  return m;
}

Manifest adapted_demo() {
  Chart chart = make_chart({"x1", "x2", "x3", "x4"});
  auto g0 = std::vector<std::vector<std::string>>{{"1", "0", "0", "0"},
                                                  {"0", "1", "0", "0"},
                                                  {"0", "0", "0", "0"},
                                                  {"0", "0", "0", "0"}};
  auto g1 = std::vector<std::vector<std::string>>{{"0", "0", "0", "0"},
                                                  {"0", "0", "0", "0"},
                                                  {"0", "0", "1", "0"},
                                                  {"0", "0", "0", "1"}};
  AdaptedSpace a = adapted_chart_builder(chart, {0, 1}, g0, g1, "x1*x2", "sin(x1)");
  Manifest m;
  m.name = "adapted-demo";
  m.coordinates = *chart;
  m.metric.assign(4, std::vector<std::string>(4));
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) m.metric[i][j] = a.metric.comp(i, j).printed();
  m.root.kind = SquareRootSpecJson::Blocks;
  m.root.blocks = {"x1", "x2"};
  m.fields["xi"] = {"1", "0", "0", "0"};
  ScalarField alpha(chart, e_mul(e_num(0.5), e_add(a.expected_phi.ast(), a.expected_chi.ast())));
  ScalarField beta(chart, e_mul(e_num(0.5), e_sub(a.expected_phi.ast(), a.expected_chi.ast())));
  m.gauges["xi"] = {alpha.printed(), beta.printed()};
  return m;
}

Manifest kerr_schild_flat() {
  Manifest m;
  m.name = "kerr-schild-flat";
  m.coordinates = {"t", "x", "y", "z"};
  m.metric = diag({"1", "-1", "-1", "-1"});
  m.one_forms["k"] = {"1", "-1", "0", "0"};
  m.one_forms["k-bad"] = {"1", "0", "0", "0"};
  m.fields["xi"] = {"1", "0", "0", "0"};
  m.fields["dil"] = {"t", "x", "y", "z"};
  return m;
}

Manifest partial_dilation() {
  Manifest m;
  m.name = "partial-dilation";
  m.coordinates = {"x1", "x2", "x3", "x4"};
  m.metric = diag({"1", "1", "1", "1"});
  m.root.kind = SquareRootSpecJson::Form;
  m.root.form = {{"x1", "x2", "x3", "x4"}};
  m.fields["dil"] = {"x1", "x2", "x3", "x4"};
  m.gauges["dil"] = {"2", "0"};
  // rho xi with d(rho) parallel to xi-flat: rho = x.x, gauges from
  //   alpha' = xi^2 gamma + alpha rho, beta' = xi^2 gamma + beta rho
  m.fields["rho-dil"] = {"(x1^2 + x2^2 + x3^2 + x4^2)*x1", "(x1^2 + x2^2 + x3^2 + x4^2)*x2",
                         "(x1^2 + x2^2 + x3^2 + x4^2)*x3", "(x1^2 + x2^2 + x3^2 + x4^2)*x4"};
  m.gauges["rho-dil"] = {"4*(x1^2 + x2^2 + x3^2 + x4^2)", "2*(x1^2 + x2^2 + x3^2 + x4^2)"};
  // rho xi with generic rho = x1: fails for this root
  m.fields["bad-rho-dil"] = {"x1*x1", "x1*x2", "x1*x3", "x1*x4"};
  m.base = {1.0, 1.0, 1.0, 1.0};
  m.half_widths = {0.2, 0.2, 0.2, 0.2};
  return m;
}

Manifest dilation_flat_product() {
  // flat 3+3 product; the first-leaf dilation has closed-form flow e^s x
  FlatLeafProductSpec spec;
  spec.p = 3;
  spec.q = 3;
  spec.sig1 = {1, 1, 1};
  spec.sig2 = {1, 1, 1};
  spec.twist1 = "1";
  spec.twist2 = "1";
  Manifest m = from_maximal(build_maximal(spec), "dilation-flat");
  m.base = {0.3, 0.25, 0.2, 0.3, 0.25, 0.2};
  m.half_widths = std::vector<double>(6, 0.25);
  return m;
}

Manifest split_control_1() {
  Manifest m = maximal_demo_manifest(7, 3);
  m.name = "split-control-1";
  // breaking the double-twisted form: one block entry scaled by (1 + x4^2)
  m.metric[0][0] = "(" + m.metric[0][0] + ")*(1 + x4^2)";
  m.fields.clear();
  m.gauges.clear();
  return m;
}

Manifest split_control_2() {
  Manifest m = breakable_generic_63();
  m.name = "split-control-2";
  m.fields.clear();
  m.gauges.clear();
  return m;
}

}  // namespace

Manifest maximal_demo_manifest(int n, int p) {
  if (p < 1 || p >= n) throw Error("maximal demo needs 1 <= p <= n-1");
  FlatLeafProductSpec spec;
  spec.p = p;
  spec.q = n - p;
  spec.sig1.assign(p, 1);
  spec.sig2.assign(n - p, 1);
  // twists tied to coordinates of both leaves so the product is genuinely
  // double-twisted
  std::ostringstream t1, t2;
  t1 << "exp(x1 + x" << std::min(n, p + 2) << ")";
  t2 << "1 + (x1*x" << std::min(n, p + 3) << ")^2";
  spec.twist1 = t1.str();
  spec.twist2 = t2.str();
  MaximalSpace space = build_maximal(spec);
  std::ostringstream nm;
  nm << "maximal-" << n << "-" << p;
  Manifest m = from_maximal(space, nm.str());
  m.finalize();
  return m;
}

std::vector<std::string> scenario_names() {
  return {"minkowski",        "rw-expanding",         "rw-rigid",
          "sphere-warp",      "maximal-7-3",          "maximal-6-3",
          "breakable-6-3",    "breakable-generic-6-3", "adapted-demo",
          "kerr-schild-flat", "partial-dilation",     "dilation-flat",
          "split-control-1",  "split-control-2"};
}

Manifest scenario(const std::string& name) {
  Manifest m;
  if (name == "minkowski") m = minkowski4();
  else if (name == "rw-expanding") m = rw_expanding();
  else if (name == "rw-rigid") m = rw_rigid();
  else if (name == "sphere-warp") m = sphere_warp();
  else if (name == "maximal-7-3") m = maximal_demo_manifest(7, 3);
  else if (name == "maximal-6-3") m = maximal_demo_manifest(6, 3);
  else if (name == "breakable-6-3") m = breakable_63();
  else if (name == "breakable-generic-6-3") m = breakable_generic_63();
  else if (name == "adapted-demo") m = adapted_demo();
  else if (name == "kerr-schild-flat") m = kerr_schild_flat();
  else if (name == "partial-dilation") m = partial_dilation();
  else if (name == "dilation-flat") m = dilation_flat_product();
  else if (name == "split-control-1") m = split_control_1();
  else if (name == "split-control-2") m = split_control_2();
  else throw ValidationError("unknown scenario \"" + name + "\"");
  m.finalize();
  m.validate();
  return m;
}

}  // namespace bicon

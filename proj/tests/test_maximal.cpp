#include "doctest.h"

#include <cmath>

#include "bicon/scenarios.hpp"
#include "bicon/symmetry.hpp"

using namespace bicon;

namespace {

MetricField flat_leaf_metric(const Chart& chart, int offset, int m,
                             std::span<const int> signs) {
  const int n = static_cast<int>(chart->size());
  std::vector<std::vector<std::string>> g(n, std::vector<std::string>(n, "0"));
  for (int i = 0; i < n; ++i) g[i][i] = "1";  // harmless filler off the leaf
  for (int i = 0; i < m; ++i) g[offset + i][offset + i] = signs[i] > 0 ? "1" : "-1";
  return MetricField::from_strings(chart, g);
}

}  // namespace

TEST_CASE("ckv basis: counts and the conformal self-check") {
  auto chart = make_chart({"x1", "x2", "x3"});
  std::vector<int> signs{1, 1, 1};
  CkvBasis basis = ckv_basis_on_leaf(chart, 0, 3, signs);
  CHECK(basis.entries.size() == 10);
  CHECK(basis.exhaustive);
  MetricField eta = flat_leaf_metric(chart, 0, 3, signs);
  std::vector<Point> pts{{0.2, -0.3, 0.4}, {0.5, 0.1, -0.2}};
  for (const auto& e : basis.entries) {
    for (const auto& x : pts) {
      MetricStructure ms = eta.at(x, 1);
      auto xij = e.field.eval_jets(x, 1);
      JTensor lg = lie_derivative(ms.g_tensor(), xij, 0);
      double sigma = e.sigma.value(x);
      DTensor resid = value_of(lg) - value_of(ms.g_tensor()) * sigma;
      CAPTURE(e.name);
      CHECK(resid.max_abs() <= 1e-10);
    }
  }
}

TEST_CASE("ckv basis: one-dimensional leaf gives the polynomial slice") {
  auto chart = make_chart({"u"});
  std::vector<int> signs{1};
  CkvBasis basis = ckv_basis_on_leaf(chart, 0, 1, signs);
  CHECK(basis.entries.size() == 3);
  CHECK_FALSE(basis.exhaustive);
  // d_u, u d_u, u^2 d_u up to scale
  Point x{0.7};
  CHECK(basis.entries[0].field.comp[0].value(x) == doctest::Approx(1.0));
  CHECK(basis.entries[1].field.comp[0].value(x) == doctest::Approx(0.7));
  CHECK(std::abs(basis.entries[2].field.comp[0].value(x)) == doctest::Approx(0.49));
}

TEST_CASE("ckv basis: Lorentzian four-leaf has 15 members, all conformal") {
  auto chart = make_chart({"t", "x", "y", "z"});
  std::vector<int> signs{1, -1, -1, -1};
  CkvBasis basis = ckv_basis_on_leaf(chart, 0, 4, signs);
  CHECK(basis.entries.size() == 15);
  MetricField eta = flat_leaf_metric(chart, 0, 4, signs);
  Point x{0.2, -0.1, 0.3, 0.15};
  MetricStructure ms = eta.at(x, 1);
  for (const auto& e : basis.entries) {
    auto xij = e.field.eval_jets(x, 1);
    JTensor lg = lie_derivative(ms.g_tensor(), xij, 0);
    DTensor resid = value_of(lg) - value_of(ms.g_tensor()) * e.sigma.value(x);
    CAPTURE(e.name);
    CHECK(resid.max_abs() <= 1e-10);
  }
}

TEST_CASE("build_maximal: every lift passes detection with its declared gauges") {
  Manifest m = scenario("maximal-6-3");
  CHECK(m.fields.size() == 20);
  auto pts = m.sample_points();
  pts.resize(5);
  for (const char* f : {"l1-sc3", "l2-rot12", "l1-tr1", "l2-dil"}) {
    DetectReport rep = detect_bcvf(m.metric_field(), *m.root_field(), m.field(f), pts, m.tol);
    CAPTURE(f);
    CHECK(rep.verdict == Verdict::Pass);
    GaugeFields gf = *m.gauge_fields(f);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      CHECK(std::abs(rep.points[i].gauge.alpha - gf.alpha.value(pts[i])) < 1e-9);
      CHECK(std::abs(rep.points[i].gauge.beta - gf.beta.value(pts[i])) < 1e-9);
    }
  }
}

TEST_CASE("unwarped product: lifts reproduce the pure leaf conformal factors") {
  Manifest m = scenario("dilation-flat");  // twists identically 1
  auto pts = m.sample_points();
  pts.resize(4);
  DetectReport rep =
      detect_bcvf(m.metric_field(), *m.root_field(), m.field("l1-dil"), pts, m.tol);
  CHECK(rep.verdict == Verdict::Pass);
  for (const auto& dp : rep.points) {
    // phi = sigma = 2, chi = 0  =>  alpha = 1, beta = 1
    CHECK(std::abs(dp.gauge.alpha - 1.0) < 1e-10);
    CHECK(std::abs(dp.gauge.beta - 1.0) < 1e-10);
  }
}

TEST_CASE("build_maximal input validation") {
  FlatLeafProductSpec spec;
  spec.p = 3;
  spec.q = 3;
  spec.sig1 = {1, 1, 1};
  spec.sig2 = {1, 1, 1};
  spec.twist1 = "-1";
  CHECK_THROWS_WITH_AS(build_maximal(spec), doctest::Contains("positive"), Error);
  spec.twist1 = "1";
  spec.sig2 = {1, 1};
  CHECK_THROWS_AS(build_maximal(spec), Error);
}

TEST_CASE("independence rank: proportional, independent and full bases") {
  auto chart = make_chart({"x", "y"});
  VectorField dx = VectorField::from_strings(chart, {"1", "0"});
  VectorField dx2 = VectorField::from_strings(chart, {"2", "0"});
  VectorField xdx = VectorField::from_strings(chart, {"x", "0"});
  std::vector<Point> pts{{0.2, 0.4}, {0.7, -0.3}, {0.1, 0.9}};
  CHECK(independence_rank({dx, dx2}, pts) == 1);
  CHECK(independence_rank({dx, xdx}, pts) == 2);

  Manifest m = scenario("maximal-7-3");
  std::vector<VectorField> lifts;
  for (const auto& [name, comps] : m.fields) lifts.push_back(m.field(name));
  auto mpts = m.sample_points();
  CHECK(independence_rank(lifts, mpts) == 25);
  CHECK_THROWS_AS(independence_rank({}, pts), Error);
}

TEST_CASE("adapted chart: extracted gauges match the declared derivatives") {
  Manifest m = scenario("adapted-demo");
  auto pts = m.sample_points();
  pts.resize(8);
  DetectReport rep = detect_bcvf(m.metric_field(), *m.root_field(), m.field("xi"), pts, m.tol);
  CHECK(rep.verdict == Verdict::Pass);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double phi = rep.points[i].gauge.phi();
    double chi = rep.points[i].gauge.chi();
    // A = x1 x2, B = sin(x1): phi = x2, chi = cos(x1)
    CHECK(std::abs(phi - pts[i][1]) < 1e-8);
    CHECK(std::abs(chi - std::cos(pts[i][0])) < 1e-8);
  }
}

TEST_CASE("adapted chart: direct builder cases") {
  auto chart = make_chart({"x1", "x2", "x3", "x4"});
  auto g0 = std::vector<std::vector<std::string>>{{"1", "0", "0", "0"},
                                                  {"0", "1", "0", "0"},
                                                  {"0", "0", "0", "0"},
                                                  {"0", "0", "0", "0"}};
  auto g1 = std::vector<std::vector<std::string>>{{"0", "0", "0", "0"},
                                                  {"0", "0", "0", "0"},
                                                  {"0", "0", "1", "0"},
                                                  {"0", "0", "0", "1"}};
  // A = 2 x1, B = 0: phi = 2, chi = 0
  AdaptedSpace a = adapted_chart_builder(chart, {0, 1}, g0, g1, "2*x1", "0");
  std::vector<Point> pts{{0.1, 0.1, 0.1, 0.1}, {0.4, -0.2, 0.3, 0.0}};
  DetectReport rep = detect_bcvf(a.metric, *a.root, a.xi, pts);
  CHECK(rep.verdict == Verdict::Pass);
  CHECK(std::abs(rep.points[0].gauge.phi() - 2.0) < 1e-10);
  CHECK(std::abs(rep.points[0].gauge.chi()) < 1e-10);
  // A = B = 0: Killing
  AdaptedSpace k = adapted_chart_builder(chart, {0, 1}, g0, g1, "0", "0");
  DetectReport repk = detect_bcvf(k.metric, *k.root, k.xi, pts);
  CHECK(repk.verdict == Verdict::Pass);
  CHECK(std::abs(repk.points[0].gauge.alpha) < 1e-12);
  CHECK(std::abs(repk.points[0].gauge.beta) < 1e-12);
  // invariance validation: G depending on x1 is rejected
  auto g0bad = g0;
  g0bad[0][0] = "1 + x1^2";
  CHECK_THROWS_WITH_AS(adapted_chart_builder(chart, {0, 1}, g0bad, g1, "0", "0"),
                       doctest::Contains("first coordinate"), Error);
  // overlap validation
  auto g1bad = g1;
  g1bad[0][0] = "1";
  CHECK_THROWS_WITH_AS(adapted_chart_builder(chart, {0, 1}, g0, g1bad, "0", "0"),
                       doctest::Contains("overlap"), Error);
}

TEST_CASE("breakable space: gauges, the conformal subcase and constants") {
  Manifest m = scenario("breakable-6-3");
  auto pts = m.sample_points();
  pts.resize(6);
  DetectReport rep = detect_bcvf(m.metric_field(), *m.root_field(), m.field("xi"), pts, m.tol);
  CHECK(rep.verdict == Verdict::Pass);
  for (const auto& dp : rep.points) {
    CHECK(std::abs(dp.gauge.phi() - 2.0) < 1e-10);  // d1 f/f + d6 f/f = 2
    CHECK(std::abs(dp.gauge.chi()) < 1e-10);
  }

  // f = h: conformal to a product; xi is conformal Killing for g/f
  auto chart = make_chart({"x1", "x2", "x3", "x4", "x5", "x6"});
  std::vector<std::vector<std::string>> eye3{{"1", "0", "0"}, {"0", "1", "0"}, {"0", "0", "1"}};
  BreakableSpace b =
      breakable_builder(chart, 3, "exp(x1 + x6)", "exp(x1 + x6)", eye3, eye3);
  DetectReport repc = detect_bcvf(b.metric, *b.root, b.xi, pts);
  CHECK(repc.verdict == Verdict::Pass);
  std::vector<std::vector<std::string>> quotient(6, std::vector<std::string>(6, "0"));
  for (int i = 0; i < 6; ++i) quotient[i][i] = "1";
  MetricField ghat = MetricField::from_strings(chart, quotient);
  CHECK(conformal_killing_residual(ghat, b.xi, pts) < 1e-10);

  // constant factors: an isometry with vanishing gauges
  BreakableSpace c = breakable_builder(chart, 3, "2", "3", eye3, eye3);
  DetectReport repi = detect_bcvf(c.metric, *c.root, c.xi, pts);
  CHECK(repi.verdict == Verdict::Pass);
  CHECK(std::abs(repi.points[0].gauge.alpha) < 1e-12);
  CHECK(std::abs(repi.points[0].gauge.beta) < 1e-12);

  // non-invariant blocks are rejected
  auto bad = eye3;
  bad[0][0] = "1 + x1^2";
  CHECK_THROWS_WITH_AS(breakable_builder(chart, 3, "1", "1", bad, eye3),
                       doctest::Contains("invariant"), Error);
}

#include "doctest.h"

#include <cmath>

#include "bicon/scenarios.hpp"
#include "bicon/structure.hpp"

using namespace bicon;

namespace {

std::vector<Point> pts_of(const Manifest& m, int count = 0) {
  auto pts = m.sample_points();
  if (count > 0 && count < static_cast<int>(pts.size())) pts.resize(count);
  return pts;
}

}  // namespace

TEST_CASE("structure tensors vanish for a constant root in flat space") {
  Manifest m = scenario("rw-rigid");
  MetricField g = m.metric_field();
  RootFieldPtr root = m.root_field();
  MetricStructure ms = g.at(m.base, 2);
  RootStructure rs = root->at(ms);
  StructureTensors st = compute_structure(ms, rs);
  CHECK(value_of(st.M_low).max_abs() <= 1e-12);
  CHECK(value_of(st.E).max_abs() <= 1e-12);
  CHECK(value_of(st.W).max_abs() <= 1e-12);
  CHECK(value_of(st.T).max_abs() <= 1e-12);
  CHECK(std::abs(st.R0.value()) <= 1e-12);
  CHECK(std::abs(st.W0.value()) <= 1e-12);
}

TEST_CASE("block metric: hand component formulas for M, E, W") {
  // two-block metric; on such charts the only nonvanishing components are
  //   M_{alpha A B} = d_alpha g_AB,  M_{A alpha beta} = -d_A g_{alpha beta},
  //   E_A = -d_A log|det g_block1|,  W_alpha = -d_alpha log|det g_block2|
  auto chart = make_chart({"u", "v", "s", "w"});
  MetricField g = MetricField::from_strings(
      chart, {{"1 + s^2", "0", "0", "0"},
              {"0", "2 + s^2*w^2", "0", "0"},
              {"0", "0", "1 + u^2", "0"},
              {"0", "0", "0", "3 + v^2 + u^2"}});
  BlockRootField root({0, 1}, 4);
  Point x{0.3, -0.2, 0.4, 0.25};
  MetricStructure ms = g.at(x, 2);
  RootStructure rs = root.at(ms);
  StructureTensors st = compute_structure(ms, rs);
  // oracle from derivative jets of the block entries
  auto d = [&](int i, int j, int c) { return g.comp(i, j).eval(x, 1).partial(c); };
  for (int al = 0; al < 2; ++al)
    for (int A = 2; A < 4; ++A)
      for (int B = 2; B < 4; ++B)
        CHECK(st.M_low.at({al, A, B}).value() == doctest::Approx(d(A, B, al)).epsilon(1e-10));
  for (int A = 2; A < 4; ++A)
    for (int al = 0; al < 2; ++al)
      for (int be = 0; be < 2; ++be)
        CHECK(st.M_low.at({A, al, be}).value() ==
              doctest::Approx(-d(al, be, A)).epsilon(1e-10));
  // trace components
  for (int A = 2; A < 4; ++A) {
    double want = 0.0;  // -d_A log det g1 for the diagonal block
    for (int al = 0; al < 2; ++al)
      want -= d(al, al, A) / g.comp(al, al).value(x);
    CHECK(st.E.a[A].value() == doctest::Approx(want).epsilon(1e-10));
  }
  for (int al = 0; al < 2; ++al) {
    double want = 0.0;
    for (int A = 2; A < 4; ++A)
      want -= d(A, A, al) / g.comp(A, A).value(x);
    CHECK(st.W.a[al].value() == doctest::Approx(want).epsilon(1e-10));
  }
  CHECK(st.invariant_residual <= 1e-10);
}

TEST_CASE("double-twisted metrics have T = 0; perturbed ones do not") {
  for (const char* name : {"maximal-7-3", "maximal-6-3", "rw-expanding"}) {
    Manifest m = scenario(name);
    SplitReport rep = split_test(m.metric_field(), *m.root_field(), pts_of(m, 8));
    CAPTURE(name);
    CHECK(rep.verdict == Verdict::Pass);
    CHECK(rep.max_residual < 1e-8);
  }
  for (const char* name : {"split-control-1", "split-control-2"}) {
    Manifest m = scenario(name);
    SplitReport rep = split_test(m.metric_field(), *m.root_field(), pts_of(m, 8));
    CAPTURE(name);
    CHECK(rep.verdict == Verdict::Fail);
    CHECK(rep.max_residual > 1e-3);
  }
}

TEST_CASE("constraints: flat Killing field gives exact zeros") {
  Manifest m = scenario("rw-rigid");
  ConstraintReport rep = constraint_residuals(m.metric_field(), *m.root_field(),
                                              m.field("xi"), m.gauge_fields("xi"),
                                              pts_of(m, 4), m.tol);
  CHECK(rep.max_residual <= 1e-12);
}

TEST_CASE("constraints on maximal lifts, manifest and trace-extracted gauges") {
  Manifest m = scenario("maximal-7-3");
  auto pts = pts_of(m, 4);
  for (const char* f : {"l1-sc1", "l2-dil", "l1-rot12"}) {
    ConstraintReport with_manifest = constraint_residuals(
        m.metric_field(), *m.root_field(), m.field(f), m.gauge_fields(f), pts, m.tol);
    CAPTURE(f);
    CHECK(with_manifest.max_residual < 1e-7);
    ConstraintReport with_traces = constraint_residuals(
        m.metric_field(), *m.root_field(), m.field(f), std::nullopt, pts, m.tol);
    CHECK(with_traces.max_residual < 1e-7);
  }
}

TEST_CASE("constraints fail for a corrupted antisymmetric derivative") {
  // inject the symmetric part of nab xi into Psi: the first constraint picks
  // up the metric transport term and must blow up
  Manifest m = scenario("breakable-generic-6-3");
  MetricField g = m.metric_field();
  RootFieldPtr root = m.root_field();
  VectorField xi = m.field("xi");
  Point x = m.base;
  MetricStructure ms = g.at(x, 2);
  RootStructure rs = root->at(ms);
  auto xij = xi.eval_jets(x, 2);
  const int n = 6;
  JTensor xiup(n, {+1}, ms.sp, 2);
  for (int a = 0; a < n; ++a) xiup.a[a] = xij[a];
  JTensor xilow = reslot_metric(xiup, 0, ms.g, -1);
  JTensor nab_xi = covariant_derivative(xilow, ms, 0);
  JTensor dS = covariant_derivative(rs.S, ms, 0);
  double honest = 0.0, corrupted = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      double lead = 0.0, anti = 0.0, full = 0.0;
      for (int c = 0; c < n; ++c) {
        lead += xij[c].value() * dS.at({c, a, b}).value();
        double psi_ac = 0.5 * (nab_xi.at({a, c}).value() - nab_xi.at({c, a}).value());
        double psi_bc = 0.5 * (nab_xi.at({b, c}).value() - nab_xi.at({c, b}).value());
        anti += psi_ac * rs.Smix.at({c, b}).value() + psi_bc * rs.Smix.at({c, a}).value();
        full += nab_xi.at({a, c}).value() * rs.Smix.at({c, b}).value() +
                nab_xi.at({b, c}).value() * rs.Smix.at({c, a}).value();
      }
      honest = std::max(honest, std::abs(lead + anti));
      corrupted = std::max(corrupted, std::abs(lead + full));
    }
  CHECK(honest <= 1e-12);
  CHECK(corrupted > 1e-3);
}

TEST_CASE("normal system passes on maximal-6-3 lifts") {
  Manifest m = scenario("maximal-6-3");
  auto pts = pts_of(m, 4);
  for (const char* f : {"l1-dil", "l2-sc2", "l1-tr2"}) {
    NormalSystemReport rep =
        normal_system_residuals(m.metric_field(), *m.root_field(), m.field(f),
                                *m.gauge_fields(f), pts, m.jet_order, m.tol);
    CAPTURE(f);
    CHECK(rep.max_residual < 1e-6);
  }
}

TEST_CASE("normal system is guarded for p in {1, 2}") {
  Manifest m = scenario("adapted-demo");  // p = 2 block
  CHECK_THROWS_WITH_AS(
      normal_system_residuals(m.metric_field(), *m.root_field(), m.field("xi"),
                              *m.gauge_fields("xi"), pts_of(m, 1), m.jet_order, m.tol),
      doctest::Contains("no closed system"), Error);
}

TEST_CASE("normal system demands manifest gauges") {
  Manifest m = scenario("maximal-6-3");
  GaugeFields empty;
  CHECK_THROWS_WITH_AS(
      normal_system_residuals(m.metric_field(), *m.root_field(), m.field("l1-dil"),
                              empty, pts_of(m, 1), m.jet_order, m.tol),
      doctest::Contains("gauge expressions"), Error);
}

TEST_CASE("integrability identities on the expanding congruence") {
  Manifest m = scenario("rw-expanding");
  IntegrabilityReport rep =
      integrability_residuals(m.metric_field(), *m.root_field(), m.field("xi"),
                              m.gauge_fields("xi"), pts_of(m, 8), m.tol);
  CHECK(rep.verdict == Verdict::Pass);
  CHECK(rep.residuals.at("lie-E") < 1e-8);
  CHECK(rep.residuals.at("lie-W") < 1e-8);
}

TEST_CASE("integrability identities on the breakable space (T nonzero)") {
  Manifest m = scenario("breakable-generic-6-3");
  IntegrabilityReport rep =
      integrability_residuals(m.metric_field(), *m.root_field(), m.field("xi"),
                              m.gauge_fields("xi"), pts_of(m, 6), m.tol);
  CHECK(rep.verdict == Verdict::Pass);
  CHECK(rep.residuals.at("lie-T") < 1e-7);
  CHECK(rep.residuals.at("lie-M-two-forms-identity") < 1e-9);
  // T is genuinely nonzero here, so the checks are not vacuous
  MetricStructure ms = m.metric_field().at(m.base, 2);
  RootStructure rs = m.root_field()->at(ms);
  StructureTensors st = compute_structure(ms, rs);
  CHECK(value_of(st.T).max_abs() > 1e-2);
}

TEST_CASE("dimension bound: formula, flags and symmetry") {
  auto b73 = dimension_bound(7, 3);
  CHECK_FALSE(b73.infinite_possible);
  CHECK(b73.bound == 25);
  auto b63 = dimension_bound(6, 3);
  CHECK(b63.bound == 20);
  for (int p = 1; p <= 4; ++p) CHECK(dimension_bound(5, p).infinite_possible);
  for (int n = 2; n <= 8; ++n)
    for (int p = 1; p <= n - 1; ++p) {
      auto a = dimension_bound(n, p);
      auto b = dimension_bound(n, n - p);
      CHECK(a.infinite_possible == b.infinite_possible);
      if (!a.infinite_possible) CHECK(a.bound == b.bound);
      bool expect_flag = (p == 1 || p == 2 || n - p == 1 || n - p == 2);
      CHECK(a.infinite_possible == expect_flag);
    }
  CHECK_THROWS_AS(dimension_bound(5, 0), Error);
  CHECK_THROWS_AS(dimension_bound(5, 5), Error);
}

TEST_CASE("constraint matrix rank is p(n-p), with and without the nabla S block") {
  Manifest m = scenario("maximal-7-3");
  MetricStructure ms = m.metric_field().at(m.base, 1);
  RootStructure rs = m.root_field()->at(ms);
  AppendixRank ar = appendix_rank(ms, rs);
  CHECK(ar.m_rank == 12);
  CHECK(ar.combined_rank == 12);

  Manifest m2 = scenario("adapted-demo");  // n = 4, p = 2
  MetricStructure ms2 = m2.metric_field().at(m2.base, 1);
  RootStructure rs2 = m2.root_field()->at(ms2);
  AppendixRank ar2 = appendix_rank(ms2, rs2);
  CHECK(ar2.m_rank == 4);
  CHECK(ar2.combined_rank == 4);

  // S = g: M vanishes identically, rank 0
  auto chart = make_chart({"t", "x"});
  MetricField flat = MetricField::from_strings(chart, {{"1", "0"}, {"0", "-1"}});
  DirectRootField sg = DirectRootField::from_strings(chart, {{"1", "0"}, {"0", "-1"}});
  MetricStructure msf = flat.at(Point{0.1, 0.2}, 1);
  RootStructure rsf = sg.at(msf);
  AppendixRank arf = appendix_rank(msf, rsf);
  CHECK(arf.m_rank == 0);
  CHECK(arf.combined_rank == 0);
}

TEST_CASE("normal system with asymmetric leaves (n=7, p=4)") {
  Manifest m = maximal_demo_manifest(7, 4);
  auto pts = m.sample_points();
  pts.resize(3);
  for (const char* f : {"l1-sc4", "l2-dil"}) {
    NormalSystemReport rep =
        normal_system_residuals(m.metric_field(), *m.root_field(), m.field(f),
                                *m.gauge_fields(f), pts, m.jet_order, m.tol);
    CAPTURE(f);
    CHECK(rep.max_residual < 1e-6);
  }
}

TEST_CASE("identity suite holds on the curved seven-dimensional product") {
  Manifest m = scenario("maximal-7-3");
  auto pts = m.sample_points();
  VectorField xi = m.field("l1-sc1");
  for (int i = 0; i < 2; ++i) {
    auto res = identity_suite(m.metric_field(), xi, pts[i]);
    for (const auto& [name, r] : res) {
      CAPTURE(name);
      CHECK(r < 1e-8);
    }
  }
}

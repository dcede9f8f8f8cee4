#include "doctest.h"

#include <cmath>
#include <random>
#include <sstream>

#include "bicon/linalg.hpp"
#include "bicon/square_root.hpp"

using namespace bicon;

namespace {

MetricField minkowski4() {
  auto chart = make_chart({"t", "x", "y", "z"});
  return MetricField::from_strings(chart, {{"1", "0", "0", "0"},
                                           {"0", "-1", "0", "0"},
                                           {"0", "0", "-1", "0"},
                                           {"0", "0", "0", "-1"}});
}

MetricField euclidean(int n) {
  std::vector<std::string> names;
  for (int i = 0; i < n; ++i) names.push_back("x" + std::to_string(i + 1));
  auto chart = make_chart(names);
  std::vector<std::vector<std::string>> m(n, std::vector<std::string>(n, "0"));
  for (int i = 0; i < n; ++i) m[i][i] = "1";
  return MetricField::from_strings(chart, m);
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

std::string coef(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// random factor 1-forms with mild coordinate dependence
SimpleFormSpec random_form(const Chart& chart, int p, std::mt19937_64& rng) {
  const int n = static_cast<int>(chart->size());
  std::vector<std::vector<std::string>> rows(p, std::vector<std::string>(n));
  for (int i = 0; i < p; ++i)
    for (int c = 0; c < n; ++c) {
      double a = uniform(rng, -1, 1);
      double b = uniform(rng, -0.3, 0.3);
      int dep = static_cast<int>(rng() % n);
      rows[i][c] = coef(a) + " + " + coef(b) + "*" + (*chart)[dep];
    }
  return SimpleFormSpec::from_strings(chart, rows);
}

}  // namespace

TEST_CASE("check_square_root: g itself, the Example-3 root, and a perturbed failure") {
  MetricField g = minkowski4();
  std::vector<Point> pts{{0.1, 0.1, 0.1, 0.1}, {0.3, -0.2, 0.4, 0.0}};

  auto gmat = std::vector<std::vector<std::string>>{{"1", "0", "0", "0"},
                                                    {"0", "-1", "0", "0"},
                                                    {"0", "0", "-1", "0"},
                                                    {"0", "0", "0", "-1"}};
  auto s_eq_g = DirectRootField::from_strings(g.chart(), gmat);
  auto rep = check_square_root(g, s_eq_g, pts);
  CHECK(rep.pass);
  CHECK(rep.max_residual == doctest::Approx(0.0));

  auto diag1 = DirectRootField::from_strings(g.chart(), {{"1", "0", "0", "0"},
                                                         {"0", "1", "0", "0"},
                                                         {"0", "0", "1", "0"},
                                                         {"0", "0", "0", "1"}});
  CHECK(check_square_root(g, diag1, pts).pass);

  auto bad = DirectRootField::from_strings(g.chart(), {{"1.1", "0", "0", "0"},
                                                       {"0", "-1", "0", "0"},
                                                       {"0", "0", "-1", "0"},
                                                       {"0", "0", "0", "-1"}});
  auto rbad = check_square_root(g, bad, pts);
  CHECK_FALSE(rbad.pass);
  CHECK(rbad.max_residual > 1e-2);
}

TEST_CASE("projectors of the timelike root in Minkowski") {
  MetricField g = minkowski4();
  auto s = DirectRootField::from_strings(g.chart(), {{"1", "0", "0", "0"},
                                                     {"0", "1", "0", "0"},
                                                     {"0", "0", "1", "0"},
                                                     {"0", "0", "0", "1"}});
  MetricStructure ms = g.at(Point{0.1, 0.2, 0.3, 0.4}, 0);
  RootStructure rs = s.at(ms);
  CHECK(rs.p == 1);
  CHECK(rs.P.at({0, 0}).value() == doctest::Approx(1.0));
  CHECK(rs.P.at({1, 1}).value() == doctest::Approx(0.0));
  CHECK(rs.Pi.at({1, 1}).value() == doctest::Approx(-1.0));
  auto ranks = projector_ranks(rs);
  CHECK(ranks.rank_P == 1);
  CHECK(ranks.rank_Pi == 3);

  // S = g and S = -g give the extreme traces
  auto sg = DirectRootField::from_strings(
      g.chart(), {{"1", "0", "0", "0"}, {"0", "-1", "0", "0"}, {"0", "0", "-1", "0"}, {"0", "0", "0", "-1"}});
  CHECK(sg.at(ms).p == 4);
  auto smg = DirectRootField::from_strings(
      g.chart(), {{"-1", "0", "0", "0"}, {"0", "1", "0", "0"}, {"0", "0", "1", "0"}, {"0", "0", "0", "1"}});
  CHECK(smg.at(ms).p == 0);
}

TEST_CASE("non-integral trace signals a non-root") {
  MetricField g = minkowski4();
  MetricStructure ms = g.at(Point{0.1, 0.2, 0.3, 0.4}, 0);
  JTensor S(4, {-1, -1}, ms.sp, 0);
  for (int i = 0; i < 4; ++i) S.at({i, i}) = Jet::constant(ms.sp, 0, i == 0 ? 0.9 : -1.0);
  CHECK_THROWS_WITH_AS(make_root_structure(ms, S, +1), doctest::Contains("not an integer"),
                       Error);
}

TEST_CASE("asymmetric candidates are rejected") {
  MetricField g = minkowski4();
  MetricStructure ms = g.at(Point{0.1, 0.2, 0.3, 0.4}, 0);
  JTensor S(4, {-1, -1}, ms.sp, 0);
  S.at({0, 1}) = Jet::constant(ms.sp, 0, 0.5);
  CHECK_THROWS_WITH_AS(make_root_structure(ms, S, +1), doctest::Contains("not symmetric"),
                       Error);
}

TEST_CASE("superenergy of sqrt(2) dt in Minkowski is the Example-3 root") {
  MetricField g = minkowski4();
  auto form = SimpleFormSpec::from_strings(g.chart(), {{"sqrt(2)", "0", "0", "0"}});
  MetricStructure ms = g.at(Point{0.2, 0.1, -0.3, 0.4}, 0);
  JTensor t = superenergy_tensor(form, ms);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      CHECK(t.at({i, j}).value() == doctest::Approx(i == j ? 1.0 : 0.0));
}

TEST_CASE("normalized superenergy squares to the metric") {
  MetricField g = minkowski4();
  std::mt19937_64 rng(5);
  MetricStructure ms = g.at(Point{0.1, 0.15, 0.2, 0.25}, 0);
  for (int p = 1; p <= 3; ++p) {
    for (int trial = 0; trial < 5; ++trial) {
      SimpleFormSpec form = random_form(g.chart(), p, rng);
      FormRootField root(form);
      RootStructure rs;
      try {
        rs = root.at(ms);
      } catch (const Error&) {
        continue;  // null or sign-degenerate draw
      }
      DTensor sv = value_of(rs.S);
      DTensor gv = value_of(ms.g_tensor());
      DTensor gi = value_of(ms.ginv_tensor());
      CHECK((inner_product_x(sv, sv, gi) - gv).frobenius() / gv.frobenius() < 1e-9);
    }
  }
}

TEST_CASE("duality invariance T{Omega} = +-T{*Omega}") {
  MetricField g = minkowski4();
  std::mt19937_64 rng(9);
  MetricStructure ms = g.at(Point{0.1, 0.15, 0.2, 0.25}, 0);
  const int n = 4;
  std::vector<double> gi(n * n), gv(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      gi[i * n + j] = ms.ginv_at(i, j).value();
      gv[i * n + j] = ms.g_at(i, j).value();
    }
  double det = ms.det.value();
  for (int p = 1; p < n; ++p) {
    SimpleFormSpec spec = random_form(g.chart(), p, rng);
    std::vector<std::vector<double>> factors;
    for (const auto& f : spec.factors) {
      std::vector<double> row;
      for (const auto& c : f) row.push_back(c.value(ms.x));
      factors.push_back(row);
    }
    PForm omega = wedge_of_factors(factors, n);
    PForm dual = hodge_dual(omega, gi, det);
    auto t1 = superenergy(omega, gv, gi);
    auto t2 = superenergy(dual, gv, gi);
    // T{*Omega} = (-1)^{n-1} sgn(det g) T{Omega}
    double sgn = ((n - 1) % 2 == 0 ? 1.0 : -1.0) * (det > 0 ? 1.0 : -1.0);
    double scale = 0.0, diff = 0.0;
    for (int i = 0; i < n * n; ++i) {
      scale = std::max(scale, std::abs(t1[i]));
      diff = std::max(diff, std::abs(t2[i] - sgn * t1[i]));
    }
    CHECK(diff <= 1e-9 * std::max(1.0, scale));
  }
}

TEST_CASE("root_from_form: scale invariance and the dx^dy plane") {
  MetricField g = minkowski4();
  MetricStructure ms = g.at(Point{0.1, 0.2, 0.3, 0.4}, 0);
  FormRootField a(SimpleFormSpec::from_strings(g.chart(), {{"5", "0", "0", "0"}}));
  FormRootField b(SimpleFormSpec::from_strings(g.chart(), {{"1", "0", "0", "0"}}));
  RootStructure ra = a.at(ms), rb = b.at(ms);
  CHECK((value_of(ra.S) - value_of(rb.S)).max_abs() <= 1e-12);
  CHECK(ra.p == 1);

  MetricField ge = euclidean(4);
  MetricStructure mse = ge.at(Point{0.1, 0.2, 0.3, 0.4}, 0);
  FormRootField plane(SimpleFormSpec::from_strings(
      ge.chart(), {{"0", "1", "0", "0"}, {"0", "0", "1", "0"}}));
  RootStructure rp = plane.at(mse);
  CHECK(rp.p == 2);
  // P projects onto span(d2, d3) of the chart (x2, x3 directions)
  CHECK(rp.Pmix.at({1, 1}).value() == doctest::Approx(1.0));
  CHECK(rp.Pmix.at({2, 2}).value() == doctest::Approx(1.0));
  CHECK(rp.Pmix.at({0, 0}).value() == doctest::Approx(0.0));
  CHECK(rp.Pmix.at({3, 3}).value() == doctest::Approx(0.0));
}

TEST_CASE("random factored forms produce verified roots in n = 5") {
  MetricField g = euclidean(5);
  std::mt19937_64 rng(13);
  std::vector<Point> pts{{0.1, 0.1, 0.1, 0.1, 0.1}, {0.2, -0.1, 0.3, 0.0, -0.2}};
  for (int trial = 0; trial < 5; ++trial) {
    FormRootField root(random_form(g.chart(), 2, rng));
    auto rep = check_square_root(g, root, pts, 1e-8);
    CHECK(rep.pass);
  }
}

TEST_CASE("form_from_root round trip") {
  MetricField g = minkowski4();
  MetricStructure ms = g.at(Point{0.1, 0.2, 0.3, 0.4}, 0);
  // S = diag(1,1,1,1): basis of V+ spans dt, round trip reproduces S
  auto s1 = DirectRootField::from_strings(g.chart(), {{"1", "0", "0", "0"},
                                                      {"0", "1", "0", "0"},
                                                      {"0", "0", "1", "0"},
                                                      {"0", "0", "0", "1"}});
  RootStructure rs = s1.at(ms);
  FormFromRoot ffr = form_from_root(ms, rs);
  CHECK(ffr.factors.size() == 1);
  CHECK(std::abs(ffr.factors[0][0]) > 1e-8);
  for (int c = 1; c < 4; ++c) CHECK(std::abs(ffr.factors[0][c]) <= 1e-12);
  CHECK(ffr.roundtrip_residual <= 1e-10);

  // S = g: p = n, the volume direction
  auto sg = DirectRootField::from_strings(
      g.chart(), {{"1", "0", "0", "0"}, {"0", "-1", "0", "0"}, {"0", "0", "-1", "0"}, {"0", "0", "0", "-1"}});
  RootStructure rg = sg.at(ms);
  FormFromRoot fg = form_from_root(ms, rg);
  CHECK(fg.factors.size() == 4);
  CHECK(fg.roundtrip_residual <= 1e-9);
}

TEST_CASE("round trip across dimensions and degrees on random roots") {
  std::mt19937_64 rng(17);
  for (int n = 4; n <= 6; ++n) {
    MetricField g = euclidean(n);
    MetricStructure ms = g.at(Point(n, 0.1), 0);
    for (int p = 1; p < n; ++p) {
      FormRootField root(random_form(g.chart(), p, rng));
      RootStructure rs;
      try {
        rs = root.at(ms);
      } catch (const Error&) {
        continue;
      }
      CHECK(rs.p == p);
      FormFromRoot ffr = form_from_root(ms, rs);
      CHECK(ffr.roundtrip_residual <= 1e-8);
      auto ranks = projector_ranks(rs);
      CHECK(ranks.rank_P + ranks.rank_Pi == n);
    }
  }
}

TEST_CASE("projector algebra: P x P = P, Pi x Pi = Pi, P x Pi = 0") {
  MetricField g = minkowski4();
  std::mt19937_64 rng(19);
  MetricStructure ms = g.at(Point{0.15, 0.1, -0.2, 0.3}, 0);
  DTensor gv = value_of(ms.g_tensor());
  DTensor gi = value_of(ms.ginv_tensor());
  for (int trial = 0; trial < 8; ++trial) {
    FormRootField root(random_form(g.chart(), 1 + static_cast<int>(rng() % 3), rng));
    RootStructure rs;
    try {
      rs = root.at(ms);
    } catch (const Error&) {
      continue;
    }
    DTensor P = value_of(rs.P), Pi = value_of(rs.Pi);
    CHECK((inner_product_x(P, P, gi) - P).max_abs() <= 1e-10);
    CHECK((inner_product_x(Pi, Pi, gi) - Pi).max_abs() <= 1e-10);
    CHECK(inner_product_x(P, Pi, gi).max_abs() <= 1e-10);
  }
}

TEST_CASE("null forms are rejected as unnormalizable") {
  MetricField g = minkowski4();
  MetricStructure ms = g.at(Point{0.1, 0.2, 0.3, 0.4}, 0);
  FormRootField null_form(SimpleFormSpec::from_strings(g.chart(), {{"1", "1", "0", "0"}}));
  CHECK_THROWS_WITH_AS(null_form.at(ms), doctest::Contains("null"), Error);
}

#include "bicon/maximal.hpp"

#include <cmath>
#include <sstream>

#include "bicon/linalg.hpp"

namespace bicon {

namespace {

ExprPtr zero_expr() { return e_num(0.0); }

// xi(f) = sum_a xi^a d_a f over the whole chart, symbolically
ExprPtr directional(const std::vector<ExprPtr>& xi, const ExprPtr& f, int n) {
  ExprPtr acc = zero_expr();
  for (int a = 0; a < n; ++a) acc = e_add(acc, e_mul(xi[a], derive(f, a)));
  return acc;
}

bool depends_on(const ExprPtr& e, int var) {
  ExprPtr d = derive(e, var);
  return !(d->kind == Expr::Num && d->num == 0.0);
}

}  // namespace

CkvBasis ckv_basis_on_leaf(const Chart& chart, int offset, int m,
                           std::span<const int> signs) {
  if (m < 1) throw Error("leaf dimension must be at least 1");
  const int n = static_cast<int>(chart->size());
  CkvBasis basis;
  basis.m = m;
  basis.exhaustive = (m > 2);
  auto field_of = [&](const std::vector<ExprPtr>& comps) {
    VectorField v;
    v.chart = chart;
    for (int a = 0; a < n; ++a) v.comp.emplace_back(chart, comps[a]);
    return v;
  };
  std::vector<ExprPtr> zero(n, zero_expr());
  // translations
  for (int i = 0; i < m; ++i) {
    auto comps = zero;
    comps[offset + i] = e_num(1.0);
    CkvEntry e;
    e.name = "tr" + std::to_string(i + 1);
    e.field = field_of(comps);
    e.sigma = ScalarField(chart, zero_expr());
    basis.entries.push_back(std::move(e));
  }
  // rotations / boosts: xi^i = -s_j x^j, xi^j = s_i x^i
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      auto comps = zero;
      comps[offset + i] = e_mul(e_num(-static_cast<double>(signs[j])), e_coord(offset + j));
      comps[offset + j] = e_mul(e_num(static_cast<double>(signs[i])), e_coord(offset + i));
      CkvEntry e;
      e.name = "rot" + std::to_string(i + 1) + std::to_string(j + 1);
      e.field = field_of(comps);
      e.sigma = ScalarField(chart, zero_expr());
      basis.entries.push_back(std::move(e));
    }
  // dilation
  {
    auto comps = zero;
    for (int i = 0; i < m; ++i) comps[offset + i] = e_coord(offset + i);
    CkvEntry e;
    e.name = "dil";
    e.field = field_of(comps);
    e.sigma = ScalarField(chart, e_num(2.0));
    basis.entries.push_back(std::move(e));
  }
  // special conformal along each direction k:
  //   xi^a = 2 (b.x) x^a - (x.x) delta^a_k,  b.x = s_k x^k
  for (int k = 0; k < m; ++k) {
    ExprPtr bx = e_mul(e_num(static_cast<double>(signs[k])), e_coord(offset + k));
    ExprPtr xx = zero_expr();
    for (int i = 0; i < m; ++i)
      xx = e_add(xx, e_mul(e_num(static_cast<double>(signs[i])),
                           e_mul(e_coord(offset + i), e_coord(offset + i))));
    auto comps = zero;
    for (int a = 0; a < m; ++a) {
      ExprPtr v = e_mul(e_num(2.0), e_mul(bx, e_coord(offset + a)));
      if (a == k) v = e_sub(v, xx);
      comps[offset + a] = v;
    }
    CkvEntry e;
    e.name = "sc" + std::to_string(k + 1);
    e.field = field_of(comps);
    e.sigma = ScalarField(chart, e_mul(e_num(4.0), bx));
    basis.entries.push_back(std::move(e));
  }
  return basis;
}

MaximalSpace build_maximal(const FlatLeafProductSpec& spec) {
  const int p = spec.p, q = spec.q;
  const int n = p + q;
  if (p < 1 || q < 1) throw Error("leaf dimensions must be positive");
  if (static_cast<int>(spec.sig1.size()) != p || static_cast<int>(spec.sig2.size()) != q)
    throw Error("leaf signature lengths must match leaf dimensions");
  std::vector<std::string> names = spec.coordinates;
  if (names.empty())
    for (int i = 1; i <= n; ++i) names.push_back("x" + std::to_string(i));
  Chart chart = make_chart(names);
  ExprPtr t1 = parse(spec.twist1, chart);
  ExprPtr t2 = parse(spec.twist2, chart);
  {
    Point base(n, 0.1);
    double v1 = ScalarField(chart, t1).value(base);
    double v2 = ScalarField(chart, t2).value(base);
    if (!(v1 > 0.0) || !(v2 > 0.0))
      throw Error("twist factors must be positive on the sample domain");
  }
  // metric: phi1^2 eta0 on the first block, phi2^2 eta1 on the second
  std::vector<std::vector<ScalarField>> m(n, std::vector<ScalarField>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m[i][j] = ScalarField(chart, zero_expr());
  for (int i = 0; i < p; ++i)
    m[i][i] = ScalarField(chart, e_mul(e_num(static_cast<double>(spec.sig1[i])), t1));
  for (int i = 0; i < q; ++i)
    m[p + i][p + i] = ScalarField(chart, e_mul(e_num(static_cast<double>(spec.sig2[i])), t2));
  MaximalSpace out;
  out.chart = chart;
  out.metric = MetricField::from_matrix(chart, m);
  std::vector<int> block1;
  for (int i = 0; i < p; ++i) block1.push_back(i);
  out.root = std::make_shared<BlockRootField>(block1, n);
  out.expected_count = (p + 1) * (p + 2) / 2 + (q + 1) * (q + 2) / 2;
  ExprPtr log1 = e_fn(Fn::Log, t1);
  ExprPtr log2 = e_fn(Fn::Log, t2);
  auto lift = [&](const CkvBasis& basis, bool first_leaf, const char* prefix) {
    for (const auto& e : basis.entries) {
      std::vector<ExprPtr> comps;
      for (const auto& c : e.field.comp) comps.push_back(c.ast());
      // phi = xi(log phi1^2) (+ sigma on the first leaf),
      // chi = xi(log phi2^2) (+ sigma on the second leaf)
      ExprPtr phi = directional(comps, log1, n);
      ExprPtr chi = directional(comps, log2, n);
      if (first_leaf)
        phi = e_add(phi, e.sigma.ast());
      else
        chi = e_add(chi, e.sigma.ast());
      CkvEntry lifted = e;
      lifted.name = std::string(prefix) + "-" + e.name;
      lifted.gauges.alpha =
          ScalarField(chart, e_mul(e_num(0.5), e_add(phi, chi)));
      lifted.gauges.beta = ScalarField(chart, e_mul(e_num(0.5), e_sub(phi, chi)));
      out.fields.push_back(std::move(lifted));
    }
  };
  lift(ckv_basis_on_leaf(chart, 0, p, spec.sig1), true, "l1");
  lift(ckv_basis_on_leaf(chart, p, q, spec.sig2), false, "l2");
  return out;
}

int independence_rank(const std::vector<VectorField>& fields, std::span<const Point> pts) {
  if (fields.empty()) throw Error("independence_rank needs at least one field");
  if (pts.empty()) throw Error("independence_rank needs at least one sample point");
  const int n = fields[0].dim();
  const int rows = static_cast<int>(fields.size());
  const int cols = static_cast<int>(pts.size()) * n;
  std::vector<double> mat(static_cast<std::size_t>(rows) * cols, 0.0);
  for (int r = 0; r < rows; ++r) {
    int c = 0;
    for (const auto& x : pts)
      for (int a = 0; a < n; ++a)
        mat[static_cast<std::size_t>(r) * cols + c++] = fields[r].comp[a].value(x);
  }
  return numerical_rank(mat, rows, cols);
}

AdaptedSpace adapted_chart_builder(const Chart& chart, const std::vector<int>& block1,
                                   const std::vector<std::vector<std::string>>& G0,
                                   const std::vector<std::vector<std::string>>& G1,
                                   const std::string& A, const std::string& B) {
  const int n = static_cast<int>(chart->size());
  std::vector<char> in1(n, 0);
  for (int i : block1) in1[i] = 1;
  ExprPtr ea = parse(A, chart);
  ExprPtr eb = parse(B, chart);
  std::vector<std::vector<ExprPtr>> g0(n, std::vector<ExprPtr>(n, zero_expr()));
  std::vector<std::vector<ExprPtr>> g1 = g0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      g0[i][j] = parse(G0[i][j], chart);
      g1[i][j] = parse(G1[i][j], chart);
      bool z0 = g0[i][j]->kind == Expr::Num && g0[i][j]->num == 0.0;
      bool z1 = g1[i][j]->kind == Expr::Num && g1[i][j]->num == 0.0;
      if (!z0 && !(in1[i] && in1[j]))
        throw Error("G0 has support outside its block (overlap)");
      if (!z1 && (in1[i] || in1[j]))
        throw Error("G1 has support outside its block (overlap)");
      if (!z0 && depends_on(g0[i][j], 0))
        throw Error("G0 must not depend on the first coordinate");
      if (!z1 && depends_on(g1[i][j], 0))
        throw Error("G1 must not depend on the first coordinate");
    }
  std::vector<std::vector<ScalarField>> m(n, std::vector<ScalarField>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      m[i][j] = ScalarField(
          chart, e_add(e_mul(e_fn(Fn::Exp, ea), g0[i][j]), e_mul(e_fn(Fn::Exp, eb), g1[i][j])));
  AdaptedSpace out;
  out.chart = chart;
  out.metric = MetricField::from_matrix(chart, m);
  out.root = std::make_shared<BlockRootField>(block1, n);
  std::vector<std::string> xi(n, "0");
  xi[0] = "1";
  out.xi = VectorField::from_strings(chart, xi);
  out.expected_phi = ScalarField(chart, derive(ea, 0));
  out.expected_chi = ScalarField(chart, derive(eb, 0));
  return out;
}

BreakableSpace breakable_builder(const Chart& chart, int p, const std::string& f,
                                 const std::string& h,
                                 const std::vector<std::vector<std::string>>& G0,
                                 const std::vector<std::vector<std::string>>& G1) {
  const int n = static_cast<int>(chart->size());
  ExprPtr ef = parse(f, chart);
  ExprPtr eh = parse(h, chart);
  std::vector<std::vector<ScalarField>> m(n, std::vector<ScalarField>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m[i][j] = ScalarField(chart, zero_expr());
  auto check_invariant = [&](const ExprPtr& e, const char* who) {
    if (depends_on(e, 0) || depends_on(e, n - 1)) {
      std::ostringstream os;
      os << who << " block must be invariant under d_1 and d_n";
      throw Error(os.str());
    }
  };
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) {
      ExprPtr e = parse(G0[i][j], chart);
      if (!(e->kind == Expr::Num && e->num == 0.0)) check_invariant(e, "G0");
      m[i][j] = ScalarField(chart, e_mul(ef, e));
    }
  for (int i = 0; i < n - p; ++i)
    for (int j = 0; j < n - p; ++j) {
      ExprPtr e = parse(G1[i][j], chart);
      if (!(e->kind == Expr::Num && e->num == 0.0)) check_invariant(e, "G1");
      m[p + i][p + j] = ScalarField(chart, e_mul(eh, e));
    }
  BreakableSpace out;
  out.chart = chart;
  out.metric = MetricField::from_matrix(chart, m);
  std::vector<int> block1;
  for (int i = 0; i < p; ++i) block1.push_back(i);
  out.root = std::make_shared<BlockRootField>(block1, n);
  std::vector<std::string> z(n, "0");
  auto mk = [&](int idx) {
    auto c = z;
    c[idx] = "1";
    return VectorField::from_strings(chart, c);
  };
  out.xi1 = mk(0);
  out.xi2 = mk(n - 1);
  VectorField sum;
  sum.chart = chart;
  for (int a = 0; a < n; ++a) {
    ExprPtr e = e_add(out.xi1.comp[a].ast(), out.xi2.comp[a].ast());
    sum.comp.emplace_back(chart, e);
  }
  out.xi = sum;
  // phi = xi(log f), chi = xi(log h); the fields d_1 and d_n have constant
  // components, so d_B xi^alpha = 0 holds by construction
  ExprPtr phi = e_div(e_add(derive(ef, 0), derive(ef, n - 1)), ef);
  ExprPtr chi = e_div(e_add(derive(eh, 0), derive(eh, n - 1)), eh);
  out.gauges.alpha = ScalarField(chart, e_mul(e_num(0.5), e_add(phi, chi)));
  out.gauges.beta = ScalarField(chart, e_mul(e_num(0.5), e_sub(phi, chi)));
  return out;
}

}  // namespace bicon

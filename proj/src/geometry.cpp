#include "bicon/geometry.hpp"

#include <cmath>
#include <sstream>

#include "bicon/linalg.hpp"

namespace bicon {

namespace {

std::string point_str(std::span<const double> x) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << ")";
  return os.str();
}

}  // namespace

JTensor MetricStructure::g_tensor() const {
  JTensor t(n, {-1, -1}, sp, order);
  t.a = g;
  return t;
}

JTensor MetricStructure::ginv_tensor() const {
  JTensor t(n, {+1, +1}, sp, order);
  t.a = ginv;
  return t;
}

JTensor MetricStructure::riemann_mixed() const {
  if (order < 2) throw Error("Riemann tensor needs metric jets of order >= 2");
  JTensor t(n, {+1, -1, -1, -1}, sp, order - 2);
  t.a = riem;
  return t;
}

JTensor MetricStructure::riemann_lowered() const {
  return reslot_metric(riemann_mixed(), 0, g, -1);
}

MetricField::MetricField(Chart chart, std::vector<ScalarField> upper)
    : chart_(std::move(chart)), n_(static_cast<int>(chart_->size())), upper_(std::move(upper)) {
  if (static_cast<int>(upper_.size()) != n_ * (n_ + 1) / 2)
    throw Error("metric upper triangle has wrong size");
}

MetricField MetricField::from_strings(const Chart& chart,
                                      const std::vector<std::vector<std::string>>& m) {
  const int n = static_cast<int>(chart->size());
  if (static_cast<int>(m.size()) != n) throw Error("metric matrix has wrong row count");
  std::vector<ScalarField> upper;
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(m[i].size()) != n) throw Error("metric matrix row has wrong length");
    for (int j = i; j < n; ++j) upper.push_back(ScalarField::parse(m[i][j], chart));
  }
  return MetricField(chart, std::move(upper));
}

MetricField MetricField::from_matrix(const Chart& chart,
                                     const std::vector<std::vector<ScalarField>>& m) {
  const int n = static_cast<int>(chart->size());
  std::vector<ScalarField> upper;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) upper.push_back(m[i][j]);
  return MetricField(chart, std::move(upper));
}

const ScalarField& MetricField::comp(int i, int j) const {
  if (i > j) std::swap(i, j);
  // offset of row i in the packed upper triangle
  int off = i * n_ - i * (i - 1) / 2 + (j - i);
  return upper_[off];
}

MetricStructure MetricField::at(std::span<const double> x, int order) const {
  MetricStructure ms;
  ms.n = n_;
  ms.order = order;
  ms.sp = JetSpace::get(n_, order);
  ms.x.assign(x.begin(), x.end());
  ms.g.assign(static_cast<std::size_t>(n_) * n_, ms.zero());
  for (int i = 0; i < n_; ++i)
    for (int j = i; j < n_; ++j) {
      Jet v = comp(i, j).eval(x, order);
      ms.g[static_cast<std::size_t>(i) * n_ + j] = v;
      ms.g[static_cast<std::size_t>(j) * n_ + i] = v;
    }
  try {
    ms.ginv = invert_jet_matrix(ms.g, n_, &ms.det, 1e-12);
  } catch (const Error& e) {
    throw Error(std::string(e.what()) + " for metric at point " + point_str(x));
  }
  {
    std::vector<double> gv(ms.g.size());
    for (std::size_t i = 0; i < gv.size(); ++i) gv[i] = ms.g[i].value();
    auto ev = symmetric_eigenvalues(gv, n_);
    ms.eig_signs.resize(n_);
    for (int i = 0; i < n_; ++i) {
      if (std::abs(ev[i]) <= 1e-10)
        throw Error("metric eigenvalue below threshold at point " + point_str(x));
      ms.eig_signs[i] = ev[i] > 0 ? 1 : -1;
    }
  }
  if (order >= 1) {
    ms.gamma.assign(static_cast<std::size_t>(n_) * n_ * n_, ms.zero());
    // dg[e][b] jets of d_b g_e? : compute partial derivative jets once
    std::vector<Jet> dg(static_cast<std::size_t>(n_) * n_ * n_, ms.zero());
    for (int e = 0; e < n_; ++e)
      for (int c = 0; c < n_; ++c)
        for (int b = 0; b < n_; ++b)
          dg[(static_cast<std::size_t>(b) * n_ + e) * n_ + c] =
              ms.g[static_cast<std::size_t>(e) * n_ + c].derivative(b);
    for (int a = 0; a < n_; ++a)
      for (int b = 0; b < n_; ++b)
        for (int c = b; c < n_; ++c) {
          Jet s = Jet::constant(ms.sp, order - 1, 0.0);
          for (int e = 0; e < n_; ++e) {
            Jet t = dg[(static_cast<std::size_t>(b) * n_ + e) * n_ + c] +
                    dg[(static_cast<std::size_t>(c) * n_ + e) * n_ + b] -
                    dg[(static_cast<std::size_t>(e) * n_ + b) * n_ + c];
            s += ms.ginv_at(a, e) * t;
          }
          s *= 0.5;
          ms.gamma[(static_cast<std::size_t>(a) * n_ + b) * n_ + c] = s;
          ms.gamma[(static_cast<std::size_t>(a) * n_ + c) * n_ + b] = s;
        }
  }
  if (order >= 2) {
    ms.riem.assign(static_cast<std::size_t>(n_) * n_ * n_ * n_, Jet::constant(ms.sp, order - 2, 0.0));
    // truncate gamma before products so multiplications run at order-2
    std::vector<Jet> glo(ms.gamma.size());
    for (std::size_t i = 0; i < glo.size(); ++i) glo[i] = ms.gamma[i].truncated(order - 2);
    auto gam = [&](int a, int b, int c) -> const Jet& {
      return ms.gamma[(static_cast<std::size_t>(a) * n_ + b) * n_ + c];
    };
    auto gamlo = [&](int a, int b, int c) -> const Jet& {
      return glo[(static_cast<std::size_t>(a) * n_ + b) * n_ + c];
    };
    for (int d = 0; d < n_; ++d)
      for (int c = 0; c < n_; ++c)
        for (int a = 0; a < n_; ++a)
          for (int b = 0; b <= a; ++b) {
            if (a == b) continue;
            Jet r = gam(d, b, c).derivative(a) - gam(d, a, c).derivative(b);
            for (int e = 0; e < n_; ++e)
              r += gamlo(d, a, e) * gamlo(e, b, c) - gamlo(d, b, e) * gamlo(e, a, c);
            ms.riem[((static_cast<std::size_t>(d) * n_ + c) * n_ + a) * n_ + b] = r;
            ms.riem[((static_cast<std::size_t>(d) * n_ + c) * n_ + b) * n_ + a] = -r;
          }
  }
  return ms;
}

std::vector<Jet> VectorField::eval_jets(std::span<const double> x, int order) const {
  std::vector<Jet> out;
  out.reserve(comp.size());
  for (const auto& c : comp) out.push_back(c.eval(x, order));
  return out;
}

VectorField VectorField::from_strings(const Chart& chart, const std::vector<std::string>& c) {
  if (c.size() != chart->size())
    throw Error("vector field component count does not match chart dimension");
  VectorField v;
  v.chart = chart;
  for (const auto& s : c) v.comp.push_back(ScalarField::parse(s, chart));
  return v;
}

Jet lie_scalar(const Jet& f, const std::vector<Jet>& xi) {
  const int n = static_cast<int>(xi.size());
  Jet r = Jet::constant(f.space(), std::max(0, f.order() - 1), 0.0);
  for (int c = 0; c < n; ++c) r += xi[c] * f.derivative(c);
  return r;
}

JTensor lie_derivative(const JTensor& t, const std::vector<Jet>& xi, int out_order) {
  const int n = t.n;
  const int r = t.rank();
  const int out_ord =
      std::min(out_order, std::max(0, std::min(t.a[0].order(), xi[0].order()) - 1));
  JTensor out(n, t.var, t.a[0].space(), out_ord);
  // precompute d_c xi^a
  std::vector<Jet> dxi(static_cast<std::size_t>(n) * n, Jet::constant(t.a[0].space(), out_ord, 0.0));
  for (int a = 0; a < n; ++a)
    for (int c = 0; c < n; ++c)
      dxi[static_cast<std::size_t>(a) * n + c] = xi[a].derivative(c);
  std::vector<int> idx(r, 0);
  std::vector<std::size_t> stride(r);
  // strides for swapping one slot index
  for (int s = 0; s < r; ++s) {
    std::size_t st = 1;
    for (int k = s + 1; k < r; ++k) st *= static_cast<std::size_t>(n);
    stride[s] = st;
  }
  if (r == 0) {
    out.a[0] = lie_scalar(t.a[0], xi).truncated(out_ord);
    return out;
  }
  do {
    std::size_t f = 0;
    for (int s = 0; s < r; ++s) f = f * n + idx[s];
    Jet acc = Jet::constant(t.a[0].space(), out_ord, 0.0);
    for (int c = 0; c < n; ++c) acc += mul_to(xi[c], t.a[f].derivative(c), out_ord);
    for (int s = 0; s < r; ++s) {
      std::size_t base = f - idx[s] * stride[s];
      if (t.var[s] > 0) {
        // -(d_e xi^{a_s}) T^{..e..}
        for (int e = 0; e < n; ++e)
          acc -= mul_to(dxi[static_cast<std::size_t>(idx[s]) * n + e],
                        t.a[base + e * stride[s]], out_ord);
      } else {
        // +(d_{b_s} xi^e) T_{..e..}
        for (int e = 0; e < n; ++e)
          acc += mul_to(dxi[static_cast<std::size_t>(e) * n + idx[s]],
                        t.a[base + e * stride[s]], out_ord);
      }
    }
    out.a[f] = acc;
  } while (next_index(idx, n));
  return out;
}

JTensor covariant_derivative(const JTensor& t, const MetricStructure& ms, int out_order) {
  const int n = t.n;
  const int r = t.rank();
  const int out_ord =
      std::min(out_order, std::max(0, std::min(t.a[0].order() - 1, ms.order - 1)));
  std::vector<std::int8_t> var_out;
  var_out.push_back(-1);
  var_out.insert(var_out.end(), t.var.begin(), t.var.end());
  JTensor out(n, var_out, t.a[0].space(), out_ord);
  std::vector<std::size_t> stride(r);
  for (int s = 0; s < r; ++s) {
    std::size_t st = 1;
    for (int k = s + 1; k < r; ++k) st *= static_cast<std::size_t>(n);
    stride[s] = st;
  }
  std::vector<int> idx(r, 0);
  do {
    std::size_t f = 0;
    for (int s = 0; s < r; ++s) f = f * n + idx[s];
    for (int c = 0; c < n; ++c) {
      Jet acc = t.a[f].derivative(c).truncated(out_ord);
      for (int s = 0; s < r; ++s) {
        std::size_t base = f - idx[s] * stride[s];
        if (t.var[s] > 0) {
          for (int e = 0; e < n; ++e)
            acc += mul_to(ms.gamma_at(idx[s], c, e), t.a[base + e * stride[s]], out_ord);
        } else {
          for (int e = 0; e < n; ++e)
            acc -= mul_to(ms.gamma_at(e, c, idx[s]), t.a[base + e * stride[s]], out_ord);
        }
      }
      out.a[static_cast<std::size_t>(c) * t.a.size() + f] = acc;
    }
    if (r == 0) break;
  } while (next_index(idx, n));
  return out;
}

JTensor lie_christoffel(const MetricStructure& ms, const std::vector<Jet>& xi,
                        int out_order) {
  const int n = ms.n;
  const int ord =
      std::min(out_order, std::max(0, std::min(ms.order - 1, xi[0].order() - 2)));
  JTensor out(n, {+1, -1, -1}, ms.sp, ord);
  std::vector<Jet> dxi(static_cast<std::size_t>(n) * n, ms.zero());
  for (int a = 0; a < n; ++a)
    for (int c = 0; c < n; ++c) dxi[static_cast<std::size_t>(a) * n + c] = xi[a].derivative(c);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = b; c < n; ++c) {
        Jet acc = dxi[static_cast<std::size_t>(a) * n + b].derivative(c).truncated(ord);
        for (int e = 0; e < n; ++e) {
          acc += mul_to(xi[e], ms.gamma_at(a, b, c).derivative(e), ord);
          acc -= mul_to(dxi[static_cast<std::size_t>(a) * n + e], ms.gamma_at(e, b, c), ord);
          acc += mul_to(dxi[static_cast<std::size_t>(e) * n + b], ms.gamma_at(a, e, c), ord);
          acc += mul_to(dxi[static_cast<std::size_t>(e) * n + c], ms.gamma_at(a, b, e), ord);
        }
        out.at({a, b, c}) = acc;
        out.at({a, c, b}) = acc;
      }
  return out;
}

ScalarField random_polynomial_field(const Chart& chart, unsigned& state) {
  auto rnd = [&state]() {
    // xorshift; deterministic across platforms
    state ^= state << 13;
    state ^= state >> 17;
    state ^= state << 5;
    return (static_cast<double>(state % 2000) / 1000.0) - 1.0;
  };
  const int n = static_cast<int>(chart->size());
  ExprPtr e = e_num(rnd());
  for (int i = 0; i < n; ++i) {
    e = e_add(e, e_mul(e_num(rnd()), e_coord(i)));
    for (int j = i; j < n; ++j)
      e = e_add(e, e_mul(e_num(0.5 * rnd()), e_mul(e_coord(i), e_coord(j))));
  }
  return ScalarField(chart, e);
}

VectorField random_vector_field(const Chart& chart, unsigned seed) {
  VectorField v;
  v.chart = chart;
  unsigned state = seed * 2654435761u + 1u;
  for (std::size_t i = 0; i < chart->size(); ++i)
    v.comp.push_back(random_polynomial_field(chart, state));
  return v;
}

double rel_residual(const DTensor& diff, const DTensor& scale) {
  return diff.max_abs() / (1.0 + scale.max_abs());
}

std::map<std::string, double> identity_suite(const MetricField& g, const VectorField& xi,
                                             std::span<const double> x, unsigned aux_seed) {
  const int K = 3;
  MetricStructure ms = g.at(x, K);
  const int n = ms.n;
  auto xij = xi.eval_jets(x, K);

  std::map<std::string, double> out;

  // Lie of the connection, two routes
  JTensor lg_direct = lie_christoffel(ms, xij);
  JTensor lie_g = lie_derivative(ms.g_tensor(), xij);
  JTensor dlg = covariant_derivative(lie_g, ms);  // [e,c,b'] = nabla_e (Lie g)_{cb}
  JTensor rhs1(n, {+1, -1, -1}, ms.sp, std::max(0, K - 2));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) {
        Jet acc = Jet::constant(ms.sp, K - 2, 0.0);
        for (int e = 0; e < n; ++e)
          acc += ms.ginv_at(a, e) *
                 (dlg.at({b, c, e}) + dlg.at({c, b, e}) - dlg.at({e, b, c}));
        rhs1.at({a, b, c}) = acc * 0.5;
      }
  out["lie-connection"] = rel_residual(value_of(lg_direct) - value_of(rhs1), value_of(rhs1));

  // Lie of the connection via second derivatives of xi and the curvature
  JTensor xiup(n, {+1}, ms.sp, K);
  for (int a = 0; a < n; ++a) xiup.a[a] = xij[a];
  JTensor dxi1 = covariant_derivative(xiup, ms);   // [b, a^]
  JTensor ddxi = covariant_derivative(dxi1, ms);   // [b, c, a^] = nab_b nab_c xi^a
  JTensor rm = ms.riemann_mixed();
  JTensor rhs2(n, {+1, -1, -1}, ms.sp, std::max(0, K - 2));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) {
        Jet acc = ddxi.at({b, c, a});
        for (int d = 0; d < n; ++d) acc += xij[d].truncated(K - 2) * rm.at({a, c, d, b});
        rhs2.at({a, b, c}) = acc;
      }
  out["lie-xi"] = rel_residual(value_of(lg_direct) - value_of(rhs2), value_of(rhs2));

  // commutation of nabla and Lie on an auxiliary (1,1) tensor field
  {
    unsigned state = aux_seed * 0x9e3779b9u + 17u;
    std::vector<ScalarField> aux;
    for (int i = 0; i < n * n; ++i) aux.push_back(random_polynomial_field(g.chart(), state));
    JTensor T(n, {+1, -1}, ms.sp, K);
    for (int i = 0; i < n * n; ++i) T.a[i] = aux[i].eval(x, K);
    JTensor lieT = lie_derivative(T, xij);
    JTensor lhs = covariant_derivative(lieT, ms);           // [c, a^, b]
    JTensor nabT = covariant_derivative(T, ms);             // [c, a^, b]
    JTensor rhs = lie_derivative(nabT, xij);
    JTensor lg = lg_direct;
    JTensor corr(n, {-1, +1, -1}, ms.sp, std::max(0, K - 2));
    for (int c = 0; c < n; ++c)
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
          Jet acc = Jet::constant(ms.sp, K - 2, 0.0);
          for (int r = 0; r < n; ++r) {
            acc -= lg.at({a, c, r}) * T.at({r, b});
            acc += lg.at({r, c, b}) * T.at({a, r});
          }
          corr.at({c, a, b}) = acc;
        }
    out["lie-commutation"] =
        rel_residual(value_of(lhs) - value_of(rhs) - value_of(corr), value_of(lhs));
  }

  // Lie of the curvature vs curl of the Lie of the connection
  {
    JTensor lieR = lie_derivative(ms.riemann_mixed(), xij);
    JTensor dlgam = covariant_derivative(lg_direct, ms);  // [e, d^, b, c]
    JTensor rhs(n, {+1, -1, -1, -1}, ms.sp, 0);
    for (int d = 0; d < n; ++d)
      for (int c = 0; c < n; ++c)
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b)
            rhs.at({d, c, a, b}) = dlgam.at({a, d, b, c}) - dlgam.at({b, d, a, c});
    out["lie-curvature"] = rel_residual(value_of(lieR) - value_of(rhs), value_of(rhs));
  }

  // Ricci identity on an auxiliary 1-form field
  {
    unsigned state = aux_seed * 0x85ebca6bu + 3u;
    JTensor u(n, {-1}, ms.sp, K);
    for (int i = 0; i < n; ++i)
      u.a[i] = random_polynomial_field(g.chart(), state).eval(x, K);
    JTensor du = covariant_derivative(u, ms);
    JTensor ddu = covariant_derivative(du, ms);  // [a, b, c]
    JTensor rm2 = ms.riemann_mixed();
    JTensor lhs(n, {-1, -1, -1}, ms.sp, 0);
    JTensor rhs(n, {-1, -1, -1}, ms.sp, 0);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c) {
          lhs.at({a, b, c}) = ddu.at({a, b, c}) - ddu.at({b, a, c});
          Jet acc = Jet::constant(ms.sp, 0, 0.0);
          for (int d = 0; d < n; ++d) acc += u.a[d].truncated(0) * rm2.at({d, c, b, a});
          rhs.at({a, b, c}) = acc;
        }
    out["ricci"] = rel_residual(value_of(lhs) - value_of(rhs), value_of(rhs));
  }

  return out;
}

}  // namespace bicon

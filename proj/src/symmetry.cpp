#include "bicon/symmetry.hpp"

#include <cmath>
#include <sstream>

#include "bicon/parallel.hpp"

namespace bicon {

Verdict classify(double residual, const Tolerances& tol) {
  if (residual < tol.pass) return Verdict::Pass;
  if (residual > tol.fail) return Verdict::Fail;
  return Verdict::Flagged;
}

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Flagged: return "flagged";
    case Verdict::Fail: return "fail";
  }
  return "?";
}

GaugeJets extract_gauges(const MetricStructure& ms, const RootStructure& rs,
                         const std::vector<Jet>& xi_jets) {
  const int n = ms.n;
  if (rs.p == 0 || rs.p == n)
    throw Error("degenerate projector (p in {0, n}); use a conformal-Killing check instead");
  JTensor lp = lie_derivative(rs.P, xi_jets);
  JTensor lpi = lie_derivative(rs.Pi, xi_jets);
  int ord = lp.a[0].order();
  Jet phi = Jet::constant(ms.sp, ord, 0.0);
  Jet chi = Jet::constant(ms.sp, ord, 0.0);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      phi += rs.Pup.at({a, b}) * lp.at({a, b});
      chi += rs.Piup.at({a, b}) * lpi.at({a, b});
    }
  phi = phi / static_cast<double>(rs.p);
  chi = chi / static_cast<double>(n - rs.p);
  return {phi, chi};
}

DetectReport detect_bcvf(const MetricField& g, const RootField& S, const VectorField& xi,
                         std::span<const Point> pts, const Tolerances& tol) {
  DetectReport rep;
  std::vector<DetectPoint> recs(pts.size());
  std::vector<int> ps(pts.size(), -1);
  for_each_index(pts.size(), [&](std::size_t idx) {
    const Point& x = pts[idx];
    MetricStructure ms = g.at(x, 1);
    RootStructure rs = S.at(ms);
    if (rs.p == 0 || rs.p == ms.n)
      throw Error("degenerate projector (p in {0, n}); use a conformal-Killing check instead");
    auto xij = xi.eval_jets(x, 1);
    JTensor lp = lie_derivative(rs.P, xij, 0);
    JTensor lpi = lie_derivative(rs.Pi, xij, 0);
    JTensor lpm = lie_derivative(rs.Pmix, xij, 0);
    JTensor lpim = lie_derivative(rs.Pimix, xij, 0);
    const int n = ms.n;
    double phi = 0.0, chi = 0.0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        phi += rs.Pup.at({a, b}).value() * lp.at({a, b}).value();
        chi += rs.Piup.at({a, b}).value() * lpi.at({a, b}).value();
      }
    phi /= rs.p;
    chi /= (n - rs.p);
    double gnorm = value_of(ms.g_tensor()).frobenius();
    DTensor r1 = value_of(lp) - value_of(rs.P) * phi;
    DTensor r2 = value_of(lpi) - value_of(rs.Pi) * chi;
    double residual = std::max(r1.frobenius() / gnorm, r2.frobenius() / gnorm);
    double mixed = std::max(value_of(lpm).frobenius(), value_of(lpim).frobenius()) /
                   std::sqrt(static_cast<double>(n));
    residual = std::max(residual, mixed);
    recs[idx].x = x;
    recs[idx].residual = residual;
    recs[idx].gauge.alpha = 0.5 * (phi + chi);
    recs[idx].gauge.beta = 0.5 * (phi - chi);
    ps[idx] = rs.p;
  });
  for (std::size_t i = 0; i < recs.size(); ++i) {
    if (recs[i].residual >= rep.max_residual) {
      rep.max_residual = recs[i].residual;
      rep.worst_point = recs[i].x;
    }
    rep.p = ps[i];
    rep.points.push_back(recs[i]);
  }
  rep.verdict = classify(rep.max_residual, tol);
  return rep;
}

WedgeReport gauge_free_test(const MetricField& g, const VectorField& xi,
                            std::span<const Point> pts, const Tolerances& tol) {
  WedgeReport rep;
  std::vector<std::pair<double, double>> recs(pts.size());
  for_each_index(pts.size(), [&](std::size_t idx) {
    const Point& x = pts[idx];
    MetricStructure ms = g.at(x, 2);
    auto xij = xi.eval_jets(x, 2);
    JTensor lg = lie_derivative(ms.g_tensor(), xij, 1);
    JTensor llg = lie_derivative(lg, xij, 0);
    DTensor gv = value_of(ms.g_tensor());
    DTensor gi = value_of(ms.ginv_tensor());
    DTensor lgv = value_of(lg);
    DTensor llgv = value_of(llg);
    DTensor x1 = inner_product_x(lgv, lgv, gi);
    double denom = gv.frobenius();
    denom = denom * denom * denom;
    recs[idx] = {triple_wedge_max(x1, lgv, gv) / denom,
                 triple_wedge_max(llgv, lgv, gv) / denom};
  });
  for (std::size_t i = 0; i < recs.size(); ++i) {
    rep.max_first = std::max(rep.max_first, recs[i].first);
    rep.max_second = std::max(rep.max_second, recs[i].second);
    double w = std::max(recs[i].first, recs[i].second);
    if (w >= rep.max_residual) {
      rep.max_residual = w;
      rep.worst_point = pts[i];
    }
  }
  rep.verdict = classify(rep.max_residual, tol);
  return rep;
}

KerrSchildReport detect_kerr_schild(const MetricField& g, const VectorField& xi,
                                    const std::vector<ScalarField>& k,
                                    std::span<const Point> pts, const Tolerances& tol) {
  KerrSchildReport rep;
  for (const auto& x : pts) {
    MetricStructure ms = g.at(x, 1);
    const int n = ms.n;
    JTensor kf(n, {-1}, ms.sp, 1);
    for (int a = 0; a < n; ++a) kf.a[a] = k[a].eval(x, 1);
    double k2 = 0.0, keuc = 0.0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        k2 += ms.ginv_at(a, b).value() * kf.a[a].value() * kf.a[b].value();
    for (int a = 0; a < n; ++a) keuc += kf.a[a].value() * kf.a[a].value();
    if (std::abs(k2) > 1e-10 * std::max(1.0, keuc))
      throw Error("k is not null (k_a k^a != 0) at the evaluation point");
    auto xij = xi.eval_jets(x, 1);
    JTensor lg = lie_derivative(ms.g_tensor(), xij, 0);
    JTensor lk = lie_derivative(kf, xij, 0);
    // gamma from least squares along k (Euclidean component dot)
    double num = 0.0;
    for (int a = 0; a < n; ++a) num += lk.a[a].value() * kf.a[a].value();
    double gamma = num / keuc;
    double rk = 0.0;
    for (int a = 0; a < n; ++a)
      rk = std::max(rk, std::abs(lk.a[a].value() - gamma * kf.a[a].value()));
    rk /= std::max(1.0, std::sqrt(keuc));
    // alpha from the g-trace; the k(x)k term is traceless against g
    double alpha = 0.0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) alpha += ms.ginv_at(a, b).value() * lg.at({a, b}).value();
    alpha /= n;
    // beta by projecting with the auxiliary covector w = k / |k|^2_euclid
    double beta = 0.0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        beta += (kf.a[a].value() / keuc) * (kf.a[b].value() / keuc) *
                (lg.at({a, b}).value() - alpha * ms.g_at(a, b).value());
    DTensor resid = value_of(lg);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        resid.at({a, b}) -= alpha * ms.g_at(a, b).value() +
                            beta * kf.a[a].value() * kf.a[b].value();
    double rg = resid.frobenius() / value_of(ms.g_tensor()).frobenius();
    KerrSchildPoint kp;
    kp.x = x;
    kp.alpha = alpha;
    kp.beta = beta;
    kp.gamma = gamma;
    kp.residual = std::max(rk, rg);
    if (kp.residual >= rep.max_residual) {
      rep.max_residual = kp.residual;
      rep.worst_point = x;
    }
    rep.points.push_back(kp);
  }
  rep.verdict = classify(rep.max_residual, tol);
  return rep;
}

PformReport pform_condition(const MetricField& g, const FormRootField& root,
                            const VectorField& xi, std::span<const Point> pts,
                            const Tolerances& tol) {
  PformReport rep;
  for (const auto& x : pts) {
    MetricStructure ms = g.at(x, 1);
    RootStructure rs = root.at(ms);
    auto xij = xi.eval_jets(x, 1);
    GaugeJets gj = extract_gauges(ms, rs, xij);
    JPForm omega = root.normalized_form(ms);
    const int p = omega.p;
    auto dense = form_to_dense(omega);
    JTensor of(ms.n, std::vector<std::int8_t>(p, -1), ms.sp, 1);
    of.a = std::move(dense);
    JTensor lo = lie_derivative(of, xij, 0);
    double factor = 0.5 * p * gj.phi.value();
    double scale = 0.0, diff = 0.0;
    for (std::size_t i = 0; i < lo.a.size(); ++i) {
      scale = std::max(scale, std::abs(of.a[i].value()));
      diff = std::max(diff, std::abs(lo.a[i].value() - factor * of.a[i].value()));
    }
    double residual = diff / std::max(1.0, scale);
    if (residual >= rep.max_residual) {
      rep.max_residual = residual;
      rep.worst_point = x;
    }
  }
  rep.verdict = classify(rep.max_residual, tol);
  return rep;
}

VectorField lie_bracket(const VectorField& a, const VectorField& b) {
  const int n = a.dim();
  VectorField out;
  out.chart = a.chart;
  for (int i = 0; i < n; ++i) {
    ExprPtr acc = e_num(0.0);
    for (int c = 0; c < n; ++c) {
      acc = e_add(acc, e_mul(a.comp[c].ast(), derive(b.comp[i].ast(), c)));
      acc = e_sub(acc, e_mul(b.comp[c].ast(), derive(a.comp[i].ast(), c)));
    }
    out.comp.emplace_back(a.chart, acc);
  }
  return out;
}

ScalarField bracket_gauge_field(const VectorField& xi1, const VectorField& xi2,
                                const ScalarField& a1, const ScalarField& a2) {
  const int n = xi1.dim();
  ExprPtr acc = e_num(0.0);
  for (int c = 0; c < n; ++c) {
    acc = e_add(acc, e_mul(xi1.comp[c].ast(), derive(a2.ast(), c)));
    acc = e_sub(acc, e_mul(xi2.comp[c].ast(), derive(a1.ast(), c)));
  }
  return ScalarField(xi1.chart, acc);
}

BracketReport bracket_gauges(const MetricField& g, const RootField& S,
                             const VectorField& xi1, const VectorField& xi2,
                             const GaugeFields& g1, const GaugeFields& g2,
                             std::span<const Point> pts, const Tolerances& tol) {
  if (!g1.valid() || !g2.valid())
    throw Error("bracket_gauges requires gauge expressions for both fields");
  VectorField br = lie_bracket(xi1, xi2);
  ScalarField ea = bracket_gauge_field(xi1, xi2, g1.alpha, g2.alpha);
  ScalarField eb = bracket_gauge_field(xi1, xi2, g1.beta, g2.beta);
  DetectReport det = detect_bcvf(g, S, br, pts, tol);
  BracketReport rep;
  rep.detect_residual = det.max_residual;
  double gauge_scale = 1.0;
  for (const auto& dp : det.points) {
    double wa = ea.value(dp.x), wb = eb.value(dp.x);
    gauge_scale = std::max({gauge_scale, std::abs(wa), std::abs(wb)});
    rep.gauge_residual =
        std::max(rep.gauge_residual,
                 std::max(std::abs(dp.gauge.alpha - wa), std::abs(dp.gauge.beta - wb)));
  }
  rep.gauge_residual /= gauge_scale;
  rep.max_residual = std::max(rep.detect_residual, rep.gauge_residual);
  rep.verdict = classify(rep.max_residual, tol);
  return rep;
}

double conformal_killing_residual(const MetricField& g, const VectorField& xi,
                                  std::span<const Point> pts) {
  double worst = 0.0;
  for (const auto& x : pts) {
    MetricStructure ms = g.at(x, 1);
    auto xij = xi.eval_jets(x, 1);
    JTensor lg = lie_derivative(ms.g_tensor(), xij);
    const int n = ms.n;
    double psi = 0.0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) psi += ms.ginv_at(a, b).value() * lg.at({a, b}).value();
    psi /= n;
    DTensor resid = value_of(lg) - value_of(ms.g_tensor()) * psi;
    worst = std::max(worst, resid.frobenius() / value_of(ms.g_tensor()).frobenius());
  }
  return worst;
}

FlowReport flow_pullback_check(const MetricField& g, const RootField& S,
                               const VectorField& xi,
                               const std::optional<GaugeFields>& gauges, const Point& x0,
                               double s, int steps_per_unit,
                               const std::optional<FlowDomain>& domain,
                               const Tolerances& tol) {
  const int n = g.dim();
  // gauge evaluation along the trajectory: declared expressions when given,
  // trace extraction otherwise
  auto gauge_eval = [&](const Point& y) -> std::pair<double, double> {
    if (gauges && gauges->valid())
      return {gauges->alpha.value(y), gauges->beta.value(y)};
    MetricStructure ms = g.at(y, 1);
    RootStructure rs = S.at(ms);
    auto xij = xi.eval_jets(y, 1);
    GaugeJets gj = extract_gauges(ms, rs, xij);
    return {0.5 * (gj.phi.value() + gj.chi.value()),
            0.5 * (gj.phi.value() - gj.chi.value())};
  };
  auto in_domain = [&](const Point& y) {
    if (!domain) return true;
    for (int i = 0; i < n; ++i)
      if (std::abs(y[i] - domain->center[i]) > domain->half_widths[i]) return false;
    return true;
  };
  // state: y (n), J (n*n) with J[c*n+a] = d y^c / d x0^a, then Ia, Ib
  const int m = n + n * n + 2;
  std::vector<double> state(m, 0.0);
  for (int i = 0; i < n; ++i) state[i] = x0[i];
  for (int i = 0; i < n; ++i) state[n + i * n + i] = 1.0;
  auto deriv = [&](const std::vector<double>& st, std::vector<double>& out) {
    Point y(st.begin(), st.begin() + n);
    if (!in_domain(y)) throw Error("flow exits the declared domain box");
    auto jets = xi.eval_jets(y, 1);
    out.assign(m, 0.0);
    for (int i = 0; i < n; ++i) out[i] = jets[i].value();
    for (int c = 0; c < n; ++c)
      for (int a = 0; a < n; ++a) {
        double acc = 0.0;
        for (int e = 0; e < n; ++e) acc += jets[c].partial(e) * st[n + e * n + a];
        out[n + c * n + a] = acc;
      }
    auto [al, be] = gauge_eval(y);
    out[n + n * n] = al;
    out[n + n * n + 1] = be;
  };
  int steps = std::max(1, static_cast<int>(std::ceil(std::abs(s) * steps_per_unit)));
  double h = s / steps;
  std::vector<double> k1, k2, k3, k4, tmp(m);
  for (int it = 0; it < steps; ++it) {
    deriv(state, k1);
    for (int i = 0; i < m; ++i) tmp[i] = state[i] + 0.5 * h * k1[i];
    deriv(tmp, k2);
    for (int i = 0; i < m; ++i) tmp[i] = state[i] + 0.5 * h * k2[i];
    deriv(tmp, k3);
    for (int i = 0; i < m; ++i) tmp[i] = state[i] + h * k3[i];
    deriv(tmp, k4);
    for (int i = 0; i < m; ++i)
      state[i] += h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
  }
  FlowReport rep;
  rep.endpoint = Point(state.begin(), state.begin() + n);
  rep.int_alpha = state[n + n * n];
  rep.int_beta = state[n + n * n + 1];
  MetricStructure ms0 = g.at(x0, 0);
  RootStructure rs0 = S.at(ms0);
  MetricStructure mss = g.at(rep.endpoint, 0);
  RootStructure rss = S.at(mss);
  auto pullback = [&](const JTensor& T) {
    DTensor out(n, 2);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        double acc = 0.0;
        for (int c = 0; c < n; ++c)
          for (int d = 0; d < n; ++d)
            acc += state[n + c * n + a] * state[n + d * n + b] * T.at({c, d}).value();
        out.at({a, b}) = acc;
      }
    return out;
  };
  JTensor plus_end = mss.g_tensor();
  plus_end += rss.S;
  JTensor minus_end = mss.g_tensor();
  minus_end -= rss.S;
  DTensor pull_plus = pullback(plus_end);
  DTensor pull_minus = pullback(minus_end);
  DTensor base_plus = value_of(ms0.g_tensor()) + value_of(rs0.S);
  DTensor base_minus = value_of(ms0.g_tensor()) - value_of(rs0.S);
  double fp = std::exp(rep.int_alpha + rep.int_beta);
  double fm = std::exp(rep.int_alpha - rep.int_beta);
  rep.residual_plus = (pull_plus - base_plus * fp).frobenius() /
                      std::max(1e-12, base_plus.frobenius() * fp);
  rep.residual_minus = (pull_minus - base_minus * fm).frobenius() /
                       std::max(1e-12, base_minus.frobenius() * fm);
  rep.max_residual = std::max(rep.residual_plus, rep.residual_minus);
  rep.verdict = classify(rep.max_residual, tol);
  return rep;
}

}  // namespace bicon

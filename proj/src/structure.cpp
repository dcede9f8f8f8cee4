#include "bicon/structure.hpp"

#include <cmath>

#include "bicon/linalg.hpp"
#include "bicon/parallel.hpp"

namespace bicon {

namespace {

// gradient jets of a scalar jet, as an n-vector
std::vector<Jet> gradient(const Jet& f, int n) {
  std::vector<Jet> out;
  out.reserve(n);
  for (int a = 0; a < n; ++a) out.push_back(f.derivative(a));
  return out;
}

// nab_b f_c = d_b d_c f - gamma^e_{bc} d_e f, symmetric rank-2 (values-safe)
JTensor hessian(const Jet& f, const MetricStructure& ms, int out_order = 1000) {
  const int n = ms.n;
  const int ord =
      std::min(out_order, std::max(0, std::min(f.order() - 2, ms.order - 1)));
  JTensor out(n, {-1, -1}, ms.sp, ord);
  auto grad = gradient(f, n);
  for (int c = 0; c < n; ++c)
    for (int b = 0; b < n; ++b) {
      Jet acc = grad[c].derivative(b).truncated(ord);
      for (int e = 0; e < n; ++e) acc -= mul_to(ms.gamma_at(e, b, c), grad[e], ord);
      out.at({c, b}) = acc;
    }
  return out;
}

// mixed . grad: out_a = X_a^p grad_p
JTensor mix_dot_grad(const JTensor& mix, const std::vector<Jet>& grad,
                     int out_order = 1000) {
  const int n = mix.n;
  const int ord = std::min({out_order, mix.a[0].order(), grad[0].order()});
  JTensor out(n, {-1}, mix.a[0].space(), ord);
  for (int a = 0; a < n; ++a) {
    Jet acc = Jet::constant(mix.a[0].space(), ord, 0.0);
    for (int p = 0; p < n; ++p) acc += mul_to(mix.at({a, p}), grad[p], ord);
    out.a[a] = acc;
  }
  return out;
}

struct GaugeData {
  Jet phi, chi;
};

GaugeData gauge_jets(const MetricStructure& ms, const RootStructure& rs,
                     const std::vector<Jet>& xij,
                     const std::optional<GaugeFields>& gauges) {
  if (gauges && gauges->valid()) {
    Jet a = gauges->alpha.eval(ms.x, ms.order);
    Jet b = gauges->beta.eval(ms.x, ms.order);
    return {a + b, a - b};
  }
  GaugeJets gj = extract_gauges(ms, rs, xij);
  return {gj.phi, gj.chi};
}

}  // namespace

StructureTensors compute_structure(const MetricStructure& ms, const RootStructure& rs,
                                   int out_order) {
  const int n = ms.n;
  StructureTensors st;
  st.n = n;
  st.p = rs.p;
  if (rs.p == 0 || rs.p == n)
    throw Error("degenerate projector (p in {0, n}): structure tensors undefined");
  if (ms.order < 1) throw Error("structure tensors need one metric derivative order");
  const int ord =
      std::max(0, std::min(out_order, std::min(ms.order - 1, rs.P.a[0].order() - 1)));
  JTensor dPmix = covariant_derivative(rs.Pmix, ms, ord);  // [c,a,b] = nab_c P^a_b
  JTensor dPcov = covariant_derivative(rs.P, ms, ord);     // [c,a,b] = nab_c P_ab
  st.M_mix = JTensor(n, {+1, -1, -1}, ms.sp, ord);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = b; c < n; ++c) {
        Jet acc = dPmix.at({b, a, c}) + dPmix.at({c, a, b});
        for (int e = 0; e < n; ++e) acc -= mul_to(ms.ginv_at(a, e), dPcov.at({e, c, b}), ord);
        st.M_mix.at({a, b, c}) = acc;
        st.M_mix.at({a, c, b}) = acc;
      }
  st.M_low = JTensor(n, {-1, -1, -1}, ms.sp, ord);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) {
        Jet acc = Jet::constant(ms.sp, ord, 0.0);
        for (int d = 0; d < n; ++d)
          acc += mul_to(ms.g_at(a, d), st.M_mix.at({d, b, c}), ord);
        st.M_low.at({a, b, c}) = acc;
      }
  st.E = JTensor(n, {-1}, ms.sp, ord);
  st.W = JTensor(n, {-1}, ms.sp, ord);
  for (int a = 0; a < n; ++a) {
    Jet e = Jet::constant(ms.sp, ord, 0.0);
    Jet w = Jet::constant(ms.sp, ord, 0.0);
    for (int c = 0; c < n; ++c)
      for (int b = 0; b < n; ++b) {
        e += mul_to(st.M_low.at({a, c, b}), rs.Pup.at({c, b}), ord);
        w -= mul_to(st.M_low.at({a, c, b}), rs.Piup.at({c, b}), ord);
      }
    st.E.a[a] = e;
    st.W.a[a] = w;
  }
  st.T = JTensor(n, {-1, -1, -1}, ms.sp, ord);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        st.T.at({a, b, c}) = st.M_low.at({a, b, c}) +
                             mul_to(st.W.a[a], rs.Pi.at({b, c}), ord) * (1.0 / (n - rs.p)) -
                             mul_to(st.E.a[a], rs.P.at({b, c}), ord) * (1.0 / rs.p);
  st.A = JTensor(n, {-1, -1, -1}, ms.sp, ord);
  st.B = JTensor(n, {-1, -1, -1}, ms.sp, ord);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) {
        Jet ac = Jet::constant(ms.sp, ord, 0.0);
        Jet bc = Jet::constant(ms.sp, ord, 0.0);
        for (int d = 0; d < n; ++d) {
          ac += mul_to(rs.Pmix.at({d, a}), st.T.at({d, b, c}), ord);
          bc += mul_to(rs.Pimix.at({d, a}), st.T.at({d, b, c}), ord);
        }
        st.A.at({a, b, c}) = ac;
        st.B.at({a, b, c}) = bc;
      }
  // scalars need curvature; only available with two metric orders
  if (ms.order >= 2) {
    JTensor rlow = ms.riemann_lowered();
    Jet r0 = Jet::constant(ms.sp, std::min(ord, rlow.a[0].order()), 0.0);
    for (int c = 0; c < n; ++c)
      for (int b = 0; b < n; ++b)
        for (int a = 0; a < n; ++a)
          for (int r = 0; r < n; ++r)
            r0 += mul_to(mul_to(rs.Pup.at({c, b}), rs.Pup.at({a, r}), ord),
                         rlow.at({r, c, a, b}), ord);
    st.R0 = r0;
    JTensor cM = covariant_derivative(st.M_low, ms, std::max(0, ord - 1));  // [e,r,b,c]
    Jet w0 = Jet::constant(ms.sp, cM.a[0].order(), 0.0);
    for (int a = 0; a < n; ++a)
      for (int r = 0; r < n; ++r)
        for (int b = 0; b < n; ++b)
          for (int c = 0; c < n; ++c)
            w0 += mul_to(mul_to(rs.Pup.at({a, r}), rs.Pup.at({c, b}), ord),
                         cM.at({a, r, b, c}) - cM.at({b, r, a, c}), ord);
    st.W0 = w0;
  } else {
    st.R0 = Jet::constant(ms.sp, 0, 0.0);
    st.W0 = Jet::constant(ms.sp, 0, 0.0);
  }
  // built-in invariants at the value level
  double resid = 0.0;
  for (int c = 0; c < n; ++c) {
    double tr = 0.0;
    for (int a = 0; a < n; ++a) tr += st.M_mix.at({a, a, c}).value();
    resid = std::max(resid, std::abs(tr));
  }
  for (int b = 0; b < n; ++b) {
    double s1 = 0.0, s2 = 0.0;
    for (int c = 0; c < n; ++c)
      for (int a = 0; a < n; ++a) {
        s1 += rs.Pup.at({c, a}).value() * st.M_low.at({a, c, b}).value();
        s2 += rs.Piup.at({a, c}).value() * st.M_low.at({a, c, b}).value();
      }
    resid = std::max(resid, std::max(std::abs(s1), std::abs(s2)));
  }
  // T is traceless against both projectors in both slots
  for (int c = 0; c < n; ++c) {
    double t1 = 0.0, t2 = 0.0, t3 = 0.0, t4 = 0.0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        t1 += rs.Pup.at({a, b}).value() * st.T.at({a, b, c}).value();
        t2 += rs.Piup.at({a, b}).value() * st.T.at({a, b, c}).value();
        t3 += rs.Pup.at({a, b}).value() * st.T.at({c, a, b}).value();
        t4 += rs.Piup.at({a, b}).value() * st.T.at({c, a, b}).value();
      }
    resid = std::max({resid, std::abs(t1), std::abs(t2), std::abs(t3), std::abs(t4)});
  }
  // E lives in the Pi eigenspace, W in the P eigenspace
  for (int a = 0; a < n; ++a) {
    double e = st.E.a[a].value(), w = st.W.a[a].value();
    double pe = 0.0, pw = 0.0;
    for (int c = 0; c < n; ++c) {
      pe += rs.Pimix.at({c, a}).value() * st.E.a[c].value();
      pw += rs.Pmix.at({c, a}).value() * st.W.a[c].value();
    }
    resid = std::max(resid, std::max(std::abs(pe - e), std::abs(pw - w)));
  }
  st.invariant_residual = resid;
  return st;
}

SplitReport split_test(const MetricField& g, const RootField& S,
                       std::span<const Point> pts, const Tolerances& tol) {
  SplitReport rep;
  std::vector<double> recs(pts.size(), 0.0);
  for_each_index(pts.size(), [&](std::size_t idx) {
    MetricStructure ms = g.at(pts[idx], 1);
    RootStructure rs = S.at(ms);
    StructureTensors st = compute_structure(ms, rs, 0);
    recs[idx] = value_of(st.T).max_abs();
  });
  for (std::size_t i = 0; i < recs.size(); ++i) {
    if (recs[i] >= rep.max_residual) {
      rep.max_residual = recs[i];
      rep.worst_point = pts[i];
    }
  }
  rep.verdict = classify(rep.max_residual, tol);
  return rep;
}

ConstraintReport constraint_residuals(const MetricField& g, const RootField& S,
                                      const VectorField& xi,
                                      const std::optional<GaugeFields>& gauges,
                                      std::span<const Point> pts, const Tolerances& tol) {
  ConstraintReport rep;
  struct Rec {
    double c1 = 0.0, c2 = 0.0, c3 = 0.0;
  };
  std::vector<Rec> recs(pts.size());
  for_each_index(pts.size(), [&](std::size_t idx) {
    const Point& x = pts[idx];
    MetricStructure ms = g.at(x, 2);
    RootStructure rs = S.at(ms);
    StructureTensors st = compute_structure(ms, rs, 1);
    auto xij = xi.eval_jets(x, 2);
    const int n = ms.n;
    GaugeData gd = gauge_jets(ms, rs, xij, gauges);
    auto phi_r = gradient(gd.phi, n);
    auto chi_r = gradient(gd.chi, n);
    // Psi = antisymmetric part of nab_a xi_b
    JTensor xiup(n, {+1}, ms.sp, 2);
    for (int a = 0; a < n; ++a) xiup.a[a] = xij[a];
    JTensor xilow = reslot_metric(xiup, 0, ms.g, -1);
    JTensor nab_xi = covariant_derivative(xilow, ms, 0);  // [a,b] = nab_a xi_b
    JTensor psi(n, {-1, -1}, ms.sp, nab_xi.a[0].order());
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        psi.at({a, b}) = (nab_xi.at({a, b}) - nab_xi.at({b, a})) * 0.5;
    // C1: xi^c nab_c S_ab + Psi_ac S^c_b + Psi_bc S^c_a = 0
    JTensor dS = covariant_derivative(rs.S, ms, 0);
    double c1 = 0.0, scale1 = 0.0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        double acc = 0.0, lead = 0.0;
        for (int c = 0; c < n; ++c) {
          lead += xij[c].value() * dS.at({c, a, b}).value();
          acc += psi.at({a, c}).value() * rs.Smix.at({c, b}).value() +
                 psi.at({b, c}).value() * rs.Smix.at({c, a}).value();
        }
        c1 = std::max(c1, std::abs(lead + acc));
        scale1 = std::max(scale1, std::abs(lead));
      }
    c1 /= (1.0 + scale1);
    // C2: xi^c nab_c E_a + Psi_ac E^c = -chi E_a / 2 - p Pi_a^p phi_p
    JTensor dE = covariant_derivative(st.E, ms, 0);
    JTensor dW = covariant_derivative(st.W, ms, 0);
    JTensor piphi = mix_dot_grad(rs.Pimix, phi_r, 0);
    JTensor pchi = mix_dot_grad(rs.Pmix, chi_r, 0);
    double c2 = 0.0, c3 = 0.0, scale2 = 0.0, scale3 = 0.0;
    for (int a = 0; a < n; ++a) {
      double lhs2 = 0.0, lhs3 = 0.0;
      for (int c = 0; c < n; ++c) {
        lhs2 += xij[c].value() * dE.at({c, a}).value();
        lhs3 += xij[c].value() * dW.at({c, a}).value();
        double eup = 0.0, wup = 0.0;
        for (int d = 0; d < n; ++d) {
          eup += ms.ginv_at(c, d).value() * st.E.a[d].value();
          wup += ms.ginv_at(c, d).value() * st.W.a[d].value();
        }
        lhs2 += psi.at({a, c}).value() * eup;
        lhs3 += psi.at({a, c}).value() * wup;
      }
      double rhs2 = -0.5 * gd.chi.value() * st.E.a[a].value() -
                    rs.p * piphi.a[a].value();
      double rhs3 = -0.5 * gd.phi.value() * st.W.a[a].value() -
                    (n - rs.p) * pchi.a[a].value();
      c2 = std::max(c2, std::abs(lhs2 - rhs2));
      c3 = std::max(c3, std::abs(lhs3 - rhs3));
      scale2 = std::max(scale2, std::abs(rhs2));
      scale3 = std::max(scale3, std::abs(rhs3));
    }
    c2 /= (1.0 + scale2);
    c3 /= (1.0 + scale3);
    recs[idx] = {c1, c2, c3};
  });
  for (std::size_t i = 0; i < recs.size(); ++i) {
    rep.c1 = std::max(rep.c1, recs[i].c1);
    rep.c2 = std::max(rep.c2, recs[i].c2);
    rep.c3 = std::max(rep.c3, recs[i].c3);
    double worst = std::max({recs[i].c1, recs[i].c2, recs[i].c3});
    if (worst >= rep.max_residual) {
      rep.max_residual = worst;
      rep.worst_point = pts[i];
    }
  }
  rep.verdict = classify(rep.max_residual, tol);
  return rep;
}

namespace {

// one side of the second-derivative gauge equation; the counterpart is this
// function under P<->Pi, M->-M, E<->W, p<->n-p, phi<->chi
double norm_equation_side(const MetricStructure& ms, const JTensor& rlow,
                          const std::vector<Jet>& xij, const JTensor& P,
                          const JTensor& Pi, const JTensor& Pmix, const JTensor& Pup,
                          const JTensor& M_low, const JTensor& E, const JTensor& W,
                          int p, const Jet& phi, const Jet& chi) {
  const int n = ms.n;
  const double q = static_cast<double>(ms.n - p);
  auto phi_r = gradient(phi, n);
  auto chi_r = gradient(chi, n);
  JTensor dE = covariant_derivative(E, ms, 1);        // [c,a]
  JTensor dW = covariant_derivative(W, ms, 1);        // [c,a]
  JTensor dPmix = covariant_derivative(Pmix, ms, 0);  // [c,a,b] = nab_c P^a_b
  JTensor dPcov = covariant_derivative(P, ms, 0);     // [c,a,b] = nab_c P_ab
  JTensor dPup = covariant_derivative(Pup, ms, 0);    // [e,a,d] = nab_e P^{ad}
  JTensor cM = covariant_derivative(M_low, ms, 0);    // [e,r,b,c] = nab_e M_rbc
  const int ord = 1;  // the composite only needs one order for its Lie term
  // R0 = P^{cb} P^{ar} R_rcab
  Jet R0 = Jet::constant(ms.sp, ord, 0.0);
  for (int c = 0; c < n; ++c)
    for (int b = 0; b < n; ++b)
      for (int a = 0; a < n; ++a)
        for (int r = 0; r < n; ++r)
          R0 += mul_to(mul_to(Pup.at({c, b}), Pup.at({a, r}), ord), rlow.at({r, c, a, b}),
                       ord);
  // W0 = P^{ar}(nab_a M_rbc - nab_b M_rac) P^{cb}, values only
  Jet W0 = Jet::constant(ms.sp, 0, 0.0);
  for (int a = 0; a < n; ++a)
    for (int r = 0; r < n; ++r)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c)
          W0 += mul_to(mul_to(Pup.at({a, r}), Pup.at({c, b}), 0),
                       cM.at({a, r, b, c}) - cM.at({b, r, a, c}), 0);
  // div W = g^{ca} nab_c W_a
  Jet divW = Jet::constant(ms.sp, ord, 0.0);
  for (int c = 0; c < n; ++c)
    for (int a = 0; a < n; ++a) divW += mul_to(ms.ginv_at(c, a), dW.at({c, a}), ord);
  // composite transported by Lie:
  //   X_cb = 2 P^{ad} R_dcab - (2/p) nab_(c E_b) + R0 P_bc/(1-p) - divW Pi_cb/(n-p)
  JTensor X(n, {-1, -1}, ms.sp, ord);
  for (int c = 0; c < n; ++c)
    for (int b = 0; b < n; ++b) {
      Jet acc = Jet::constant(ms.sp, ord, 0.0);
      for (int a = 0; a < n; ++a)
        for (int d = 0; d < n; ++d)
          acc += mul_to(Pup.at({a, d}), rlow.at({d, c, a, b}), ord) * 2.0;
      acc -= (dE.at({c, b}) + dE.at({b, c})) * (1.0 / p);
      acc += mul_to(R0, P.at({b, c}), ord) * (1.0 / (1.0 - p));
      acc -= mul_to(divW, Pi.at({c, b}), ord) * (1.0 / q);
      X.at({c, b}) = acc;
    }
  JTensor LX = lie_derivative(X, xij, 0);
  // scalar contractions
  auto updot = [&](const JTensor& v, const std::vector<Jet>& grad) {
    double acc = 0.0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        acc += v.a[a].value() * ms.ginv_at(a, b).value() * grad[b].value();
    return acc;
  };
  double Echi = updot(E, chi_r);
  double Wphi = updot(W, phi_r);
  double Wchi = updot(W, chi_r);
  double Ephi = updot(E, phi_r);
  // LHS: nab_c phi_b
  JTensor lhs = hessian(phi, ms, 0);
  double resid = 0.0, scale = 0.0;
  const double inv2p = 1.0 / (2.0 - p);
  for (int c = 0; c < n; ++c)
    for (int b = 0; b < n; ++b) {
      double rhs = LX.at({c, b}).value() * inv2p;
      rhs += (Echi / (2.0 * p) - Wphi / (2.0 * q) + Wchi * inv2p) * Pi.at({c, b}).value();
      rhs -= 0.5 / p * (chi_r[c].value() * E.a[b].value() + chi_r[b].value() * E.a[c].value());
      rhs -= 0.5 * inv2p *
             (phi_r[b].value() * E.a[c].value() + phi_r[c].value() * E.a[b].value());
      // (2/(2-p)) nab_(c P^r_b) phi_r + E^r phi_r P_cb / (p(2-p))
      for (int r = 0; r < n; ++r) {
        double sym = 0.5 * (dPmix.at({c, r, b}).value() + dPmix.at({b, r, c}).value());
        rhs += 2.0 * inv2p * sym * phi_r[r].value();
      }
      rhs += Ephi / (p * (2.0 - p)) * P.at({c, b}).value();
      // (phi_r - chi_r)(-2 P^{dr} nab_(b P_c)d + 2 P^{pr} nab_p P_bc)/(2-p)
      for (int r = 0; r < n; ++r) {
        double term = 0.0;
        for (int d = 0; d < n; ++d) {
          term -= Pup.at({d, r}).value() *
                  (dPcov.at({b, c, d}).value() + dPcov.at({c, b, d}).value());
          term += 2.0 * Pup.at({d, r}).value() * dPcov.at({d, b, c}).value();
        }
        rhs += inv2p * term * (phi_r[r].value() - chi_r[r].value());
      }
      // (chi - phi)/(2-p) (P^{ad} nab_a M_dbc + nab_b P^{ad} nab_c P_ad
      //                    + E_r M^r_cb / p + W0 P_bc / (2(1-p)) + divW Pi_cb/(n-p))
      double tail = 0.0;
      for (int a = 0; a < n; ++a)
        for (int d = 0; d < n; ++d) {
          tail += Pup.at({a, d}).value() * cM.at({a, d, b, c}).value();
          tail += dPup.at({b, a, d}).value() * dPcov.at({c, a, d}).value();
        }
      for (int r = 0; r < n; ++r) {
        double eup = 0.0;
        for (int s = 0; s < n; ++s) eup += ms.ginv_at(r, s).value() * E.a[s].value();
        tail += eup * M_low.at({r, c, b}).value() / p;
      }
      tail += W0.value() / (2.0 * (1.0 - p)) * P.at({b, c}).value();
      tail += divW.value() / q * Pi.at({c, b}).value();
      rhs += (chi.value() - phi.value()) * inv2p * tail;
      resid = std::max(resid, std::abs(lhs.at({c, b}).value() - rhs));
      scale = std::max(scale, std::abs(rhs));
    }
  return resid / (1.0 + scale);
}

}  // namespace

NormalSystemReport normal_system_residuals(const MetricField& g, const RootField& S,
                                           const VectorField& xi,
                                           const GaugeFields& gauges,
                                           std::span<const Point> pts, int jet_order,
                                           const Tolerances& tol) {
  if (!gauges.valid())
    throw Error(
        "normal-system checks require gauge expressions (alpha, beta) in the manifest: "
        "trace-extracted gauges are not accepted here");
  if (jet_order < 3) throw Error("normal-system checks need jet order >= 3");
  NormalSystemReport rep;
  std::vector<std::map<std::string, double>> recs(pts.size());
  for_each_index(pts.size(), [&](std::size_t idx) {
    const Point& x = pts[idx];
    auto& local = recs[idx];
    auto note = [&local](const std::string& key, double v, const Point&) {
      auto it = local.find(key);
      if (it == local.end() || v > it->second) local[key] = v;
    };
    MetricStructure ms = g.at(x, jet_order);
    RootStructure rs = S.at(ms);
    const int n = ms.n;
    const int p = rs.p;
    if (p != 0 && (p == 1 || p == 2))
      throw Error("normal system is not defined for p in {1, 2} (no closed system)");
    if (n - p == 1 || n - p == 2)
      throw Error("normal system is not defined for n-p in {1, 2} (no closed system)");
    if (p == 0 || p == n) throw Error("degenerate projector (p in {0, n})");
    auto xij = xi.eval_jets(x, jet_order);
    Jet a = gauges.alpha.eval(x, jet_order);
    Jet b = gauges.beta.eval(x, jet_order);
    Jet phi = a + b, chi = a - b;
    auto phi_r = gradient(phi, n);
    auto chi_r = gradient(chi, n);
    StructureTensors st = compute_structure(ms, rs, 2);
    JTensor rlow = ms.riemann_lowered();

    // first pair: the gradient variables are gradients (exact by jets)
    {
      double r = 0.0;
      for (int c = 0; c < n; ++c) {
        r = std::max(r, std::abs(phi.derivative(c).value() - phi_r[c].value()));
        r = std::max(r, std::abs(chi.derivative(c).value() - chi_r[c].value()));
      }
      note("gradient-vars", r, x);
    }

    JTensor xiup(n, {+1}, ms.sp, jet_order);
    for (int i = 0; i < n; ++i) xiup.a[i] = xij[i];
    JTensor xilow = reslot_metric(xiup, 0, ms.g, -1);
    JTensor nab_xi = covariant_derivative(xilow, ms, 1);  // [a,b]
    JTensor psi(n, {-1, -1}, ms.sp, nab_xi.a[0].order());
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        psi.at({i, j}) = (nab_xi.at({i, j}) - nab_xi.at({j, i})) * 0.5;

    // third equation: nab_a xi_b = Psi_ab + (phi P_ab + chi Pi_ab)/2
    {
      double r = 0.0, scale = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          double rhs = psi.at({i, j}).value() + 0.5 * (phi.value() * rs.P.at({i, j}).value() +
                                                       chi.value() * rs.Pi.at({i, j}).value());
          r = std::max(r, std::abs(nab_xi.at({i, j}).value() - rhs));
          scale = std::max(scale, std::abs(rhs));
        }
      note("xi-gradient", r / (1.0 + scale), x);
    }

    // fourth equation: nab_b Psi_ca = xi_d R^d_bca + phi_[c P_a]b
    //                  + chi_[c Pi_a]b + (phi-chi) nab_[c P_a]b
    {
      JTensor dpsi = covariant_derivative(psi, ms, 0);  // [b,c,a]
      JTensor rm = ms.riemann_mixed();
      JTensor dPcov = covariant_derivative(rs.P, ms, 0);
      double r = 0.0, scale = 0.0;
      for (int bb = 0; bb < n; ++bb)
        for (int c = 0; c < n; ++c)
          for (int aa = 0; aa < n; ++aa) {
            double rhs = 0.0;
            for (int d = 0; d < n; ++d)
              rhs += xilow.a[d].value() * rm.at({d, bb, c, aa}).value();
            rhs += 0.5 * (phi_r[c].value() * rs.P.at({aa, bb}).value() -
                          phi_r[aa].value() * rs.P.at({c, bb}).value());
            rhs += 0.5 * (chi_r[c].value() * rs.Pi.at({aa, bb}).value() -
                          chi_r[aa].value() * rs.Pi.at({c, bb}).value());
            rhs += (phi.value() - chi.value()) * 0.5 *
                   (dPcov.at({c, aa, bb}).value() - dPcov.at({aa, c, bb}).value());
            r = std::max(r, std::abs(dpsi.at({bb, c, aa}).value() - rhs));
            scale = std::max(scale, std::abs(rhs));
          }
      note("psi-gradient", r / (1.0 + scale), x);
    }

    // Lie of the connection in gauge variables (transcription anchor):
    // Lie gamma^a_bc = (phi_b P^a_c + phi_c P^a_b - phi^a P_bc
    //                   + chi_b Pi^a_c + chi_c Pi^a_b - chi^a Pi_cb
    //                   + (phi - chi) M^a_bc) / 2
    {
      JTensor lg = lie_christoffel(ms, xij, 0);
      double r = 0.0, scale = 0.0;
      for (int aa = 0; aa < n; ++aa)
        for (int bb = 0; bb < n; ++bb)
          for (int c = 0; c < n; ++c) {
            double phiu = 0.0, chiu = 0.0;
            for (int e = 0; e < n; ++e) {
              phiu += ms.ginv_at(aa, e).value() * phi_r[e].value();
              chiu += ms.ginv_at(aa, e).value() * chi_r[e].value();
            }
            double rhs = phi_r[bb].value() * rs.Pmix.at({aa, c}).value() +
                         phi_r[c].value() * rs.Pmix.at({aa, bb}).value() -
                         phiu * rs.P.at({bb, c}).value() +
                         chi_r[bb].value() * rs.Pimix.at({aa, c}).value() +
                         chi_r[c].value() * rs.Pimix.at({aa, bb}).value() -
                         chiu * rs.Pi.at({c, bb}).value() +
                         (phi.value() - chi.value()) * st.M_mix.at({aa, bb, c}).value();
            rhs *= 0.5;
            r = std::max(r, std::abs(lg.at({aa, bb, c}).value() - rhs));
            scale = std::max(scale, std::abs(rhs));
          }
      note("lie-connection-gauges", r / (1.0 + scale), x);
    }

    // second-derivative equation for the phi gradient and its counterpart
    note("norm",
         norm_equation_side(ms, rlow, xij, rs.P, rs.Pi, rs.Pmix, rs.Pup, st.M_low, st.E,
                            st.W, p, phi, chi),
         x);
    note("norm-counterpart",
         norm_equation_side(ms, rlow, xij, rs.Pi, rs.P, rs.Pimix, rs.Piup, -st.M_low,
                            st.W, st.E, n - p, chi, phi),
         x);
  });
  for (std::size_t i = 0; i < recs.size(); ++i)
    for (const auto& [key, v] : recs[i]) {
      auto it = rep.residuals.find(key);
      if (it == rep.residuals.end() || v > it->second) rep.residuals[key] = v;
      if (v >= rep.max_residual) {
        rep.max_residual = v;
        rep.worst_point = pts[i];
      }
    }
  rep.verdict = classify(rep.max_residual, tol);
  return rep;
}

IntegrabilityReport integrability_residuals(const MetricField& g, const RootField& S,
                                            const VectorField& xi,
                                            const std::optional<GaugeFields>& gauges,
                                            std::span<const Point> pts,
                                            const Tolerances& tol) {
  IntegrabilityReport rep;
  std::vector<std::map<std::string, double>> recs(pts.size());
  for_each_index(pts.size(), [&](std::size_t idx) {
    const Point& x = pts[idx];
    auto& local = recs[idx];
    auto note = [&local](const std::string& key, double v, const Point&) {
      auto it = local.find(key);
      if (it == local.end() || v > it->second) local[key] = v;
    };
    MetricStructure ms = g.at(x, 3);
    RootStructure rs = S.at(ms);
    const int n = ms.n;
    const int p = rs.p;
    if (p == 0 || p == n) throw Error("degenerate projector (p in {0, n})");
    auto xij = xi.eval_jets(x, 3);
    GaugeData gd = gauge_jets(ms, rs, xij, gauges);
    auto phi_r = gradient(gd.phi, n);
    auto chi_r = gradient(gd.chi, n);
    StructureTensors st = compute_structure(ms, rs, 1);
    JTensor piphi = mix_dot_grad(rs.Pimix, phi_r, 0);  // Pi_a^p phi_p
    JTensor pchi = mix_dot_grad(rs.Pmix, chi_r, 0);

    // transport of M: Lie M_abc = phi M_abc + (chi-phi) P_a^s M_sbc
    //                  - P_bc Pi_a^p phi_p + Pi_cb P_a^p chi_p
    // (and the equivalent Pi-weighted form)
    {
      JTensor lm = lie_derivative(st.M_low, xij, 0);
      double r1 = 0.0, r2 = 0.0, rid = 0.0, scale = 0.0;
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          for (int c = 0; c < n; ++c) {
            double pam = 0.0, piam = 0.0;
            for (int s = 0; s < n; ++s) {
              pam += rs.Pmix.at({s, a}).value() * st.M_low.at({s, b, c}).value();
              piam += rs.Pimix.at({s, a}).value() * st.M_low.at({s, b, c}).value();
            }
            double shared = -rs.P.at({b, c}).value() * piphi.a[a].value() +
                            rs.Pi.at({c, b}).value() * pchi.a[a].value();
            double f1 = gd.phi.value() * st.M_low.at({a, b, c}).value() +
                        (gd.chi.value() - gd.phi.value()) * pam + shared;
            double f2 = gd.chi.value() * st.M_low.at({a, b, c}).value() +
                        (gd.phi.value() - gd.chi.value()) * piam + shared;
            double lv = lm.at({a, b, c}).value();
            r1 = std::max(r1, std::abs(lv - f1));
            r2 = std::max(r2, std::abs(lv - f2));
            rid = std::max(rid, std::abs(f1 - f2));
            scale = std::max(scale, std::abs(lv));
          }
      note("lie-M-P-weighted", r1 / (1.0 + scale), x);
      note("lie-M-Pi-weighted", r2 / (1.0 + scale), x);
      note("lie-M-two-forms-identity", rid / (1.0 + scale), x);
    }

    // transport of the traces: Lie E_a = -p Pi_a^p phi_p,
    //                          Lie W_a = (p-n) P_a^p chi_p
    {
      JTensor le = lie_derivative(st.E, xij, 0);
      JTensor lw = lie_derivative(st.W, xij, 0);
      double re = 0.0, rw = 0.0, scale = 1.0;
      for (int a = 0; a < n; ++a) {
        re = std::max(re, std::abs(le.a[a].value() + p * piphi.a[a].value()));
        rw = std::max(rw, std::abs(lw.a[a].value() - (p - n) * pchi.a[a].value()));
        scale = std::max({scale, std::abs(le.a[a].value()), std::abs(lw.a[a].value())});
      }
      note("lie-E", re / scale, x);
      note("lie-W", rw / scale, x);
    }

    // traceless part of the M transport (first integrability of the
    // S-constraint): Lie(M_acb - E_a P_bc/p + W_a Pi_cb/(n-p))
    //   = phi (Pi_a^s M_scb - E_a P_bc/p) + chi (P_a^s M_sbc + Pi_cb W_a/(n-p))
    {
      JTensor base(n, {-1, -1, -1}, ms.sp, st.M_low.a[0].order());
      for (int a = 0; a < n; ++a)
        for (int c = 0; c < n; ++c)
          for (int b = 0; b < n; ++b)
            base.at({a, c, b}) = st.M_low.at({a, c, b}) -
                                 mul_to(st.E.a[a], rs.P.at({b, c}), 1) * (1.0 / p) +
                                 mul_to(st.W.a[a], rs.Pi.at({c, b}), 1) * (1.0 / (n - p));
      JTensor lbase = lie_derivative(base, xij, 0);
      double r = 0.0, scale = 0.0;
      for (int a = 0; a < n; ++a)
        for (int c = 0; c < n; ++c)
          for (int b = 0; b < n; ++b) {
            double pam = 0.0, piam = 0.0;
            for (int s = 0; s < n; ++s) {
              pam += rs.Pmix.at({s, a}).value() * st.M_low.at({s, b, c}).value();
              piam += rs.Pimix.at({s, a}).value() * st.M_low.at({s, c, b}).value();
            }
            double rhs = gd.phi.value() * (piam - st.E.a[a].value() * rs.P.at({b, c}).value() / p) +
                         gd.chi.value() * (pam + rs.Pi.at({c, b}).value() * st.W.a[a].value() / (n - p));
            r = std::max(r, std::abs(lbase.at({a, c, b}).value() - rhs));
            scale = std::max(scale, std::abs(rhs));
          }
      note("integral-constraint", r / (1.0 + scale), x);
    }

    // equivalent transport laws for T, A, B in all written forms
    {
      JTensor lt = lie_derivative(st.T, xij, 0);
      double r = 0.0, scale = 0.0;
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          for (int c = 0; c < n; ++c) {
            double rhs = 0.0;
            for (int s = 0; s < n; ++s)
              rhs += (gd.phi.value() * rs.Pimix.at({s, a}).value() +
                      gd.chi.value() * rs.Pmix.at({s, a}).value()) *
                     st.T.at({s, b, c}).value();
            r = std::max(r, std::abs(lt.at({a, b, c}).value() - rhs));
            scale = std::max(scale, std::abs(rhs));
          }
      note("lie-T", r / (1.0 + scale), x);

      JTensor la = lie_derivative(st.A, xij, 0);
      JTensor lb = lie_derivative(st.B, xij, 0);
      double ra = 0.0, rb = 0.0, sa = 0.0, sb = 0.0;
      for (std::size_t i = 0; i < la.a.size(); ++i) {
        ra = std::max(ra, std::abs(la.a[i].value() - gd.chi.value() * st.A.a[i].value()));
        rb = std::max(rb, std::abs(lb.a[i].value() - gd.phi.value() * st.B.a[i].value()));
        sa = std::max(sa, std::abs(st.A.a[i].value()));
        sb = std::max(sb, std::abs(st.B.a[i].value()));
      }
      note("lie-A", ra / (1.0 + sa), x);
      note("lie-B", rb / (1.0 + sb), x);

      JTensor amix = reslot_metric(st.A, 0, ms.ginv, +1);
      JTensor bmix = reslot_metric(st.B, 0, ms.ginv, +1);
      JTensor lam = lie_derivative(amix, xij, 0);
      JTensor lbm = lie_derivative(bmix, xij, 0);
      double ram = 0.0, rbm = 0.0;
      for (std::size_t i = 0; i < lam.a.size(); ++i) {
        ram = std::max(ram, std::abs(lam.a[i].value() -
                                     (gd.chi.value() - gd.phi.value()) * amix.a[i].value()));
        rbm = std::max(rbm, std::abs(lbm.a[i].value() -
                                     (gd.phi.value() - gd.chi.value()) * bmix.a[i].value()));
      }
      note("lie-A-mixed", ram / (1.0 + sa), x);
      note("lie-B-mixed", rbm / (1.0 + sb), x);

      // gauge-free invariants of the outer products; assembled from the
      // factor transports, which is what the jet product rule gives for the
      // rank-6 component array without materializing it
      auto product_invariant = [&](const JTensor& u, const JTensor& lu, const JTensor& v,
                                   const JTensor& lv) {
        double r = 0.0, s = 0.0;
        for (std::size_t i = 0; i < u.a.size(); ++i)
          for (std::size_t j = 0; j < v.a.size(); ++j) {
            double val = lu.a[i].value() * v.a[j].value() +
                         u.a[i].value() * lv.a[j].value();
            r = std::max(r, std::abs(val));
            s = std::max(s, std::abs(u.a[i].value() * v.a[j].value()));
          }
        return r / (1.0 + s);
      };
      JTensor lpiup = lie_derivative(rs.Piup, xij, 0);
      JTensor lpup = lie_derivative(rs.Pup, xij, 0);
      note("lie-AB-invariant", product_invariant(amix, lam, bmix, lbm), x);
      note("lie-APi-invariant", product_invariant(st.A, la, rs.Piup, lpiup), x);
      note("lie-BP-invariant", product_invariant(st.B, lb, rs.Pup, lpup), x);
    }
  });
  for (std::size_t i = 0; i < recs.size(); ++i)
    for (const auto& [key, v] : recs[i]) {
      auto it = rep.residuals.find(key);
      if (it == rep.residuals.end() || v > it->second) rep.residuals[key] = v;
      if (v >= rep.max_residual) {
        rep.max_residual = v;
        rep.worst_point = pts[i];
      }
    }
  rep.verdict = classify(rep.max_residual, tol);
  return rep;
}

DimensionBound dimension_bound(int n, int p) {
  if (p < 1 || p > n - 1) throw Error("dimension_bound requires 1 <= p <= n-1");
  DimensionBound out;
  int q = n - p;
  if (p == 1 || p == 2 || q == 1 || q == 2) {
    out.infinite_possible = true;
    return out;
  }
  out.bound = static_cast<long>((p + 1) * (p + 2) / 2 + (q + 1) * (q + 2) / 2);
  return out;
}

AppendixRank appendix_rank(const MetricStructure& ms, const RootStructure& rs) {
  const int n = ms.n;
  // orthonormal eigenbasis of S^a_b: signature-aware Gram-Schmidt inside the
  // P image and the Pi image separately
  std::vector<double> gv(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) gv[static_cast<std::size_t>(i) * n + j] = ms.g_at(i, j).value();
  auto gdot = [&](const std::vector<double>& u, const std::vector<double>& v) {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) s += u[i] * gv[static_cast<std::size_t>(i) * n + j] * v[j];
    return s;
  };
  std::vector<std::vector<double>> basis;
  std::vector<double> signs;
  auto build_from = [&](const JTensor& proj, int count) {
    std::vector<std::vector<double>> cands;
    for (int j = 0; j < n; ++j) {
      std::vector<double> col(n);
      for (int i = 0; i < n; ++i) col[i] = proj.at({i, j}).value();
      cands.push_back(col);
    }
    int added = 0;
    std::vector<std::vector<double>> mine;
    std::vector<double> msign;
    while (added < count) {
      double best_norm = 0.0;
      std::vector<double> best_v;
      for (const auto& cand : cands) {
        std::vector<double> v = cand;
        for (std::size_t k = 0; k < mine.size(); ++k) {
          double d = gdot(v, mine[k]) * msign[k];
          for (int i = 0; i < n; ++i) v[i] -= d * mine[k][i];
        }
        double nv = gdot(v, v);
        if (std::abs(nv) > best_norm) {
          best_norm = std::abs(nv);
          best_v = v;
        }
      }
      if (best_v.empty() || best_norm <= 1e-10)
        throw Error("eigenbasis construction failure (dependent projector image)");
      double nv = gdot(best_v, best_v);
      double s = nv > 0 ? 1.0 : -1.0;
      for (auto& c : best_v) c /= std::sqrt(std::abs(nv));
      mine.push_back(best_v);
      msign.push_back(s);
      ++added;
    }
    for (std::size_t k = 0; k < mine.size(); ++k) {
      basis.push_back(mine[k]);
      signs.push_back(msign[k]);
    }
  };
  build_from(rs.Pmix, rs.p);
  build_from(rs.Pimix, n - rs.p);
  // S^a_b in the new basis: S_B = B^{-1} Smix B
  std::vector<double> B(static_cast<std::size_t>(n) * n), Sm(B);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) B[static_cast<std::size_t>(i) * n + k] = basis[k][i];
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      Sm[static_cast<std::size_t>(i) * n + j] = rs.Smix.at({i, j}).value();
  auto Binv = invert_matrix(B, n);
  std::vector<double> SB(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
          acc += Binv[static_cast<std::size_t>(i) * n + k] *
                 Sm[static_cast<std::size_t>(k) * n + l] * B[static_cast<std::size_t>(l) * n + j];
      SB[static_cast<std::size_t>(i) * n + j] = acc;
    }
  // M_I^K = 2 delta^[q_(a S^c]_b):  I = symmetric pairs, K = antisymmetric
  std::vector<std::pair<int, int>> sym_pairs, asym_pairs;
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b) sym_pairs.emplace_back(a, b);
  for (int q = 0; q < n; ++q)
    for (int c = q + 1; c < n; ++c) asym_pairs.emplace_back(q, c);
  auto dlt = [](int i, int j) { return i == j ? 1.0 : 0.0; };
  std::vector<double> M(sym_pairs.size() * asym_pairs.size(), 0.0);
  for (std::size_t I = 0; I < sym_pairs.size(); ++I) {
    auto [a, b] = sym_pairs[I];
    for (std::size_t K = 0; K < asym_pairs.size(); ++K) {
      auto [q, c] = asym_pairs[K];
      double v = 0.5 * (dlt(q, a) * SB[static_cast<std::size_t>(c) * n + b] -
                        dlt(c, a) * SB[static_cast<std::size_t>(q) * n + b] +
                        dlt(q, b) * SB[static_cast<std::size_t>(c) * n + a] -
                        dlt(c, b) * SB[static_cast<std::size_t>(q) * n + a]);
      M[I * asym_pairs.size() + K] = v;
    }
  }
  AppendixRank out;
  out.m_rank = numerical_rank(M, static_cast<int>(sym_pairs.size()),
                              static_cast<int>(asym_pairs.size()));
  // combined system with the nabla S block: columns (xi_c | Psi_K)
  if (ms.order < 1) throw Error("appendix_rank needs one derivative order of S");
  JTensor dS = covariant_derivative(rs.S, ms, 0);  // [c,a,b]
  const int cols = n + static_cast<int>(asym_pairs.size());
  std::vector<double> full(sym_pairs.size() * cols, 0.0);
  for (std::size_t I = 0; I < sym_pairs.size(); ++I) {
    auto [a, b] = sym_pairs[I];
    for (int c = 0; c < n; ++c) {
      // (nabla S)_{ab}^c in the basis, index c raised by the basis signature
      double acc = 0.0;
      for (int cc = 0; cc < n; ++cc)
        for (int aa = 0; aa < n; ++aa)
          for (int bb = 0; bb < n; ++bb)
            acc += basis[c][cc] * basis[a][aa] * basis[b][bb] * dS.at({cc, aa, bb}).value();
      full[I * cols + c] = signs[c] * acc;
    }
    for (std::size_t K = 0; K < asym_pairs.size(); ++K)
      full[I * cols + n + K] = M[I * asym_pairs.size() + K];
  }
  out.combined_rank =
      numerical_rank(full, static_cast<int>(sym_pairs.size()), cols);
  return out;
}

}  // namespace bicon

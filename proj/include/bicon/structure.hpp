#ifndef BICON_STRUCTURE_HPP
#define BICON_STRUCTURE_HPP

#include <map>

#include "bicon/symmetry.hpp"

namespace bicon {

// First-derivative tensors of the projector pair (all jets):
//   M^a_bc = nab_b P^a_c + nab_c P^a_b - nab^a P_cb
//   E_a = M_acb P^{cb},  W_a = -M_acb Pi^{cb}
//   T_abc = M_abc + W_a Pi_bc/(n-p) - E_a P_bc/p,  A = P.T, B = Pi.T
//   R0 = P^{cb} P^{ar} R_rcab,
//   W0 = P^{ar}(nab_a M_rbc - nab_b M_rac) P^{cb}
struct StructureTensors {
  int n = 0, p = 0;
  JTensor M_mix, M_low;
  JTensor E, W;
  JTensor T, A, B;
  Jet R0, W0;
  double invariant_residual = 0.0;  // max over the built-in trace identities
};

// out_order caps the jet order carried by the outputs (cheaper products)
StructureTensors compute_structure(const MetricStructure& ms, const RootStructure& rs,
                                   int out_order = 1000);

struct SplitReport {
  Verdict verdict = Verdict::Fail;  // Pass = consistent with double-twisted
  double max_residual = 0.0;        // max |T_abc| over points
  Point worst_point;
};

// Thm: a double-twisted decomposition in the given projector pair forces
// T_abc = 0; the verdict bands are pass < 1e-8 < flagged < 1e-4 < fail.
SplitReport split_test(const MetricField& g, const RootField& S,
                       std::span<const Point> pts,
                       const Tolerances& tol = {1e-8, 1e-4, 1e-5});

struct ConstraintReport {
  Verdict verdict = Verdict::Fail;
  double c1 = 0.0, c2 = 0.0, c3 = 0.0;
  double max_residual = 0.0;
  Point worst_point;
};

// The three constraints of the normal system, from a verified field:
// Psi is the antisymmetric part of nab xi, gauges from the manifest or from
// jet-level trace extraction.
ConstraintReport constraint_residuals(const MetricField& g, const RootField& S,
                                      const VectorField& xi,
                                      const std::optional<GaugeFields>& gauges,
                                      std::span<const Point> pts,
                                      const Tolerances& tol = {});

struct NormalSystemReport {
  Verdict verdict = Verdict::Fail;
  std::map<std::string, double> residuals;  // per-equation max residuals
  double max_residual = 0.0;
  Point worst_point;
};

// Residuals of the four normal-system equations, the second-derivative
// equation for nab phi_r, and its phi<->chi / P<->Pi / p<->n-p counterpart
// (generated by the substitution map, which sends M -> -M and E <-> W).
// Gauge expressions are required: trace-extracted gauges are not accepted
// here so the check stays two-sided.
NormalSystemReport normal_system_residuals(const MetricField& g, const RootField& S,
                                           const VectorField& xi,
                                           const GaugeFields& gauges,
                                           std::span<const Point> pts, int jet_order = 4,
                                           const Tolerances& tol = {});

struct IntegrabilityReport {
  Verdict verdict = Verdict::Fail;
  std::map<std::string, double> residuals;
  double max_residual = 0.0;
  Point worst_point;
};

// Lie-transport identities of the structure tensors along a detected field
IntegrabilityReport integrability_residuals(const MetricField& g, const RootField& S,
                                            const VectorField& xi,
                                            const std::optional<GaugeFields>& gauges,
                                            std::span<const Point> pts,
                                            const Tolerances& tol = {});

struct DimensionBound {
  bool infinite_possible = false;
  long bound = 0;  // valid when finite
};

// N = (p+1)(p+2)/2 + (n-p+1)(n-p+2)/2 when p, n-p are not 1 or 2;
// otherwise the algebra may be infinite dimensional
DimensionBound dimension_bound(int n, int p);

struct AppendixRank {
  int m_rank = 0;         // rank of the M_I^K block
  int combined_rank = 0;  // with the (nabla S)_I^c block appended
};

// constraint matrix of the first constraint in an orthonormal eigenbasis of
// S^a_b; the M block has rank p(n-p) and appending nabla S does not raise it
AppendixRank appendix_rank(const MetricStructure& ms, const RootStructure& rs);

}  // namespace bicon

#endif

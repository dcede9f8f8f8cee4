#ifndef BICON_SYMMETRY_HPP
#define BICON_SYMMETRY_HPP

#include <functional>
#include <optional>

#include "bicon/square_root.hpp"

namespace bicon {

enum class Verdict { Pass, Flagged, Fail };

struct Tolerances {
  double pass = 1e-7;
  double fail = 1e-4;
  double fd_step = 1e-5;
};

Verdict classify(double residual, const Tolerances& tol);
const char* verdict_name(Verdict v);

// gauges alpha, beta (phi = alpha + beta, chi = alpha - beta)
struct GaugeSample {
  double alpha = 0.0, beta = 0.0;
  double phi() const { return alpha + beta; }
  double chi() const { return alpha - beta; }
};

struct GaugeFields {
  ScalarField alpha, beta;
  bool valid() const { return alpha.valid() && beta.valid(); }
};

// trace-extracted gauges as jets: phi = P^{ab}(Lie P)_{ab}/p, chi likewise
struct GaugeJets {
  Jet phi, chi;
};
GaugeJets extract_gauges(const MetricStructure& ms, const RootStructure& rs,
                         const std::vector<Jet>& xi_jets);

struct DetectPoint {
  Point x;
  double residual = 0.0;
  GaugeSample gauge;
};

struct DetectReport {
  Verdict verdict = Verdict::Fail;
  double max_residual = 0.0;
  int p = -1;
  Point worst_point;
  std::vector<DetectPoint> points;
};

// Lie_xi P = phi P, Lie_xi Pi = chi Pi, Lie_xi P^a_b = 0 at every point
DetectReport detect_bcvf(const MetricField& g, const RootField& S, const VectorField& xi,
                         std::span<const Point> pts, const Tolerances& tol = {});

struct WedgeReport {
  Verdict verdict = Verdict::Fail;
  double max_first = 0.0;   // (Lie g x Lie g) ^ Lie g ^ g
  double max_second = 0.0;  // (Lie Lie g) ^ Lie g ^ g
  double max_residual = 0.0;
  Point worst_point;
};

WedgeReport gauge_free_test(const MetricField& g, const VectorField& xi,
                            std::span<const Point> pts, const Tolerances& tol = {});

struct KerrSchildPoint {
  Point x;
  double residual = 0.0;
  double alpha = 0.0, beta = 0.0, gamma = 0.0;
};

struct KerrSchildReport {
  Verdict verdict = Verdict::Fail;
  double max_residual = 0.0;
  Point worst_point;
  std::vector<KerrSchildPoint> points;
};

// Lie_xi g = alpha g + beta k(x)k, Lie_xi k = gamma k for a null 1-form k
KerrSchildReport detect_kerr_schild(const MetricField& g, const VectorField& xi,
                                    const std::vector<ScalarField>& k,
                                    std::span<const Point> pts, const Tolerances& tol = {});

struct PformReport {
  Verdict verdict = Verdict::Fail;
  double max_residual = 0.0;
  Point worst_point;
};

// Lie_xi Omega = (p/2)(alpha+beta) Omega for the normalized generating form
PformReport pform_condition(const MetricField& g, const FormRootField& root,
                            const VectorField& xi, std::span<const Point> pts,
                            const Tolerances& tol = {});

// [xi1, xi2]^a = xi1^b d_b xi2^a - xi2^b d_b xi1^a, built symbolically
VectorField lie_bracket(const VectorField& a, const VectorField& b);

// composed gauge field of the bracket: xi1(a2) - xi2(a1)
ScalarField bracket_gauge_field(const VectorField& xi1, const VectorField& xi2,
                                const ScalarField& a1, const ScalarField& a2);

struct BracketReport {
  Verdict verdict = Verdict::Fail;
  double detect_residual = 0.0;  // bracket passes detect_bcvf
  double gauge_residual = 0.0;   // extracted vs composed gauges
  double max_residual = 0.0;
};

BracketReport bracket_gauges(const MetricField& g, const RootField& S,
                             const VectorField& xi1, const VectorField& xi2,
                             const GaugeFields& g1, const GaugeFields& g2,
                             std::span<const Point> pts, const Tolerances& tol = {});

// ||Lie_xi g - (tr/n) g|| / ||g||, the conformal-Killing residual
double conformal_killing_residual(const MetricField& g, const VectorField& xi,
                                  std::span<const Point> pts);

struct FlowReport {
  Verdict verdict = Verdict::Fail;
  double residual_plus = 0.0;   // pullback of g+S vs exp integral
  double residual_minus = 0.0;  // pullback of g-S
  double int_alpha = 0.0, int_beta = 0.0;
  Point endpoint;
  double max_residual = 0.0;
};

struct FlowDomain {
  Point center;
  std::vector<double> half_widths;
};

// RK4 flow with the Jacobian propagated through the variational equations
// and the gauge integrals as augmented state; fixed step, steps_per_unit
// subdivisions per unit flow time.
FlowReport flow_pullback_check(const MetricField& g, const RootField& S,
                               const VectorField& xi,
                               const std::optional<GaugeFields>& gauges, const Point& x0,
                               double s, int steps_per_unit = 200,
                               const std::optional<FlowDomain>& domain = std::nullopt,
                               const Tolerances& tol = {});

}  // namespace bicon

#endif

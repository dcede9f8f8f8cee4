#ifndef BICON_GEOMETRY_HPP
#define BICON_GEOMETRY_HPP

#include <map>
#include <string>
#include <vector>

#include "bicon/expression.hpp"
#include "bicon/tensor.hpp"

namespace bicon {

using Point = std::vector<double>;

// Everything the downstream modules need about the metric at one chart
// point, with derivatives: g and its inverse carry jets to `order`,
// Christoffel symbols to order-1, the Riemann tensor to order-2.
struct MetricStructure {
  const JetSpace* sp = nullptr;
  int n = 0;
  int order = 0;
  Point x;
  std::vector<Jet> g;     // g_ab, n^2
  std::vector<Jet> ginv;  // g^ab
  Jet det;
  std::vector<int> eig_signs;  // ascending eigenvalue signs of g|_x
  std::vector<Jet> gamma;      // gamma^a_{bc}, n^3 (order >= 1)
  std::vector<Jet> riem;       // R^d_{cab}, n^4 (order >= 2)

  const Jet& g_at(int a, int b) const { return g[static_cast<std::size_t>(a) * n + b]; }
  const Jet& ginv_at(int a, int b) const { return ginv[static_cast<std::size_t>(a) * n + b]; }
  const Jet& gamma_at(int a, int b, int c) const {
    return gamma[(static_cast<std::size_t>(a) * n + b) * n + c];
  }
  const Jet& riem_at(int d, int c, int a, int b) const {
    return riem[((static_cast<std::size_t>(d) * n + c) * n + a) * n + b];
  }
  Jet zero() const { return Jet::constant(sp, order, 0.0); }

  JTensor g_tensor() const;      // (0,2)
  JTensor ginv_tensor() const;   // (2,0)
  JTensor riemann_mixed() const;  // R^d_{cab} as (1,3), jets at order-2
  JTensor riemann_lowered() const;
};

class MetricField {
 public:
  MetricField() = default;
  MetricField(Chart chart, std::vector<ScalarField> upper);  // i<=j entries
  static MetricField from_strings(const Chart& chart,
                                  const std::vector<std::vector<std::string>>& m);
  static MetricField from_matrix(const Chart& chart,
                                 const std::vector<std::vector<ScalarField>>& m);

  int dim() const { return n_; }
  const Chart& chart() const { return chart_; }
  const ScalarField& comp(int i, int j) const;

  MetricStructure at(std::span<const double> x, int order) const;

 private:
  Chart chart_;
  int n_ = 0;
  std::vector<ScalarField> upper_;  // row-major upper triangle
};

struct VectorField {
  Chart chart;
  std::vector<ScalarField> comp;  // contravariant components

  int dim() const { return static_cast<int>(comp.size()); }
  std::vector<Jet> eval_jets(std::span<const double> x, int order) const;
  static VectorField from_strings(const Chart& chart, const std::vector<std::string>& c);
};

// Lie derivative along xi of a tensor with arbitrary valence; costs one
// derivative order.  xi holds the n component jets.  out_order caps the
// computed jet order of the result (products run cheaper at low orders).
JTensor lie_derivative(const JTensor& t, const std::vector<Jet>& xi,
                       int out_order = 1000);
Jet lie_scalar(const Jet& f, const std::vector<Jet>& xi);

// covariant derivative; the new covariant slot comes first
JTensor covariant_derivative(const JTensor& t, const MetricStructure& ms,
                             int out_order = 1000);

// Lie derivative of the connection coefficients (a tensor), by the
// component formula; needs xi jets to order 2 and gamma to order 1
JTensor lie_christoffel(const MetricStructure& ms, const std::vector<Jet>& xi,
                        int out_order = 1000);

// residuals of the standard identities relating Lie derivatives, the
// connection and the curvature, each evaluated two-sided
std::map<std::string, double> identity_suite(const MetricField& g, const VectorField& xi,
                                             std::span<const double> x,
                                             unsigned aux_seed = 20240901);

// deterministic auxiliary fields (quadratic polynomials with seeded
// coefficients) used by two-sided identity checks
ScalarField random_polynomial_field(const Chart& chart, unsigned& state);
VectorField random_vector_field(const Chart& chart, unsigned seed);

double rel_residual(const DTensor& diff, const DTensor& scale);

}  // namespace bicon

#endif

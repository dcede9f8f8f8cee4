#ifndef BICON_MAXIMAL_HPP
#define BICON_MAXIMAL_HPP

#include "bicon/structure.hpp"

namespace bicon {

struct CkvEntry {
  std::string name;
  VectorField field;   // on the full chart, zero-extended off the leaf
  ScalarField sigma;   // conformal factor on the flat leaf metric
  GaugeFields gauges;  // of the lift (empty unless built by build_maximal)
};

struct CkvBasis {
  int m = 0;
  bool exhaustive = true;  // false for m in {1, 2}: polynomial slice only
  std::vector<CkvEntry> entries;
};

// standard conformal Killing basis of a flat leaf occupying chart
// coordinates [offset, offset+m): translations, rotations/boosts, the
// dilation and the special conformal fields
CkvBasis ckv_basis_on_leaf(const Chart& chart, int offset, int m,
                           std::span<const int> signs);

struct FlatLeafProductSpec {
  int p = 0, q = 0;               // leaf dimensions, n = p + q
  std::vector<int> sig1, sig2;    // +-1 diagonal signs per leaf
  std::string twist1 = "1";       // phi_1^2 as an expression in all coordinates
  std::string twist2 = "1";       // phi_2^2
  std::vector<std::string> coordinates;  // optional, defaults to x1..xn
};

struct MaximalSpace {
  Chart chart;
  MetricField metric;
  RootFieldPtr root;
  std::vector<CkvEntry> fields;  // every leaf CKV lifted by zero extension
  long expected_count = 0;
};

// double-twisted product with flat leaves; every leaf conformal Killing
// vector lifts to a bi-conformal vector field of the product
MaximalSpace build_maximal(const FlatLeafProductSpec& spec);

// numerical rank of the component-evaluation matrix over the points
int independence_rank(const std::vector<VectorField>& fields, std::span<const Point> pts);

struct AdaptedSpace {
  Chart chart;
  MetricField metric;
  RootFieldPtr root;
  VectorField xi;           // d/dx1
  ScalarField expected_phi; // d1 A
  ScalarField expected_chi; // d1 B
};

// metric e^A G0 + e^B G1 in coordinates adapted to the symmetry; G0, G1
// must not depend on x1 and must occupy disjoint coordinate blocks
AdaptedSpace adapted_chart_builder(const Chart& chart, const std::vector<int>& block1,
                                   const std::vector<std::vector<std::string>>& G0,
                                   const std::vector<std::vector<std::string>>& G1,
                                   const std::string& A, const std::string& B);

struct BreakableSpace {
  Chart chart;
  MetricField metric;
  RootFieldPtr root;
  VectorField xi1, xi2, xi;  // d_1, d_n and their sum
  GaugeFields gauges;        // of the sum field
};

// block metric g = f G0 (+) h G1 with G0, G1 invariant under d_1 and d_n;
// the sum d_1 + d_n is then a bi-conformal vector field
BreakableSpace breakable_builder(const Chart& chart, int p, const std::string& f,
                                 const std::string& h,
                                 const std::vector<std::vector<std::string>>& G0,
                                 const std::vector<std::vector<std::string>>& G1);

}  // namespace bicon

#endif

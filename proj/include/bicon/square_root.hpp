#ifndef BICON_SQUARE_ROOT_HPP
#define BICON_SQUARE_ROOT_HPP

#include <memory>
#include <optional>

#include "bicon/forms.hpp"
#include "bicon/geometry.hpp"

namespace bicon {

// Square-root data at one point, everything as jets: S itself, the
// projector pair P = (g+S)/2, Pi = (g-S)/2 in all index positions, and the
// integer trace p of P^a_b.
struct RootStructure {
  int n = 0;
  int p = 0;
  int sign = +1;  // sign chosen when S was built from a form
  JTensor S, Smix;       // (0,2) and (1,1)
  JTensor P, Pi;         // (0,2)
  JTensor Pmix, Pimix;   // (1,1)
  JTensor Pup, Piup;     // (2,0)
};

// Wedge-of-1-forms specification: p factor 1-forms given componentwise.
struct SimpleFormSpec {
  Chart chart;
  std::vector<std::vector<ScalarField>> factors;  // p rows of n components

  int degree() const { return static_cast<int>(factors.size()); }
  int dim() const { return static_cast<int>(chart->size()); }
  static SimpleFormSpec from_strings(const Chart& chart,
                                     const std::vector<std::vector<std::string>>& rows);
  // wedge of the factors at x; checks factor independence (Euclidean Gram)
  JPForm eval(std::span<const double> x, int order) const;
};

// Field of square roots evaluated pointwise against a metric structure.
class RootField {
 public:
  virtual ~RootField() = default;
  // candidate S (no verification beyond construction preconditions)
  virtual JTensor candidate(const MetricStructure& ms, int* sign) const = 0;
  RootStructure at(const MetricStructure& ms) const;
};

using RootFieldPtr = std::shared_ptr<const RootField>;

// S given directly as a symmetric matrix of component expressions
class DirectRootField : public RootField {
 public:
  DirectRootField(Chart chart, std::vector<std::vector<ScalarField>> comp);
  static DirectRootField from_strings(const Chart& chart,
                                      const std::vector<std::vector<std::string>>& m);
  JTensor candidate(const MetricStructure& ms, int* sign) const override;

 private:
  Chart chart_;
  std::vector<std::vector<ScalarField>> comp_;
};

// S = +-T{Omega} for the normalized wedge of the factor 1-forms.  The sign
// is fixed so that the factor span is the +1 eigenspace; the result is
// verified to square to g and the choice recorded.
class FormRootField : public RootField {
 public:
  explicit FormRootField(SimpleFormSpec form) : form_(std::move(form)) {}
  JTensor candidate(const MetricStructure& ms, int* sign) const override;
  // the normalized form (|Omega.Omega| = 2 p!) as jets at ms.x
  JPForm normalized_form(const MetricStructure& ms) const;
  const SimpleFormSpec& form() const { return form_; }

 private:
  SimpleFormSpec form_;
};

// S = P - Pi from a coordinate block split (metric must be block diagonal)
class BlockRootField : public RootField {
 public:
  BlockRootField(std::vector<int> first_block, int n);
  JTensor candidate(const MetricStructure& ms, int* sign) const override;

 private:
  std::vector<char> in_first_;
};

// assembles the structure from S jets; verifies symmetry, S x S = g at the
// value level, and integral trace
RootStructure make_root_structure(const MetricStructure& ms, JTensor S, int sign,
                                  double tol = 1e-9);

struct RootCheckReport {
  bool pass = true;
  double max_residual = 0.0;
  Point worst_point;
};

// max residual of ||S x S - g||_F / ||g||_F over the points
RootCheckReport check_square_root(const MetricField& g, const RootField& S,
                                  std::span<const Point> pts, double tol = 1e-10);

// rank content of the projectors: rank(P^a_b) must be p, rank(Pi^a_b) n-p
struct ProjectorRanks {
  int p;
  int rank_P;
  int rank_Pi;
};
ProjectorRanks projector_ranks(const RootStructure& rs);

// superenergy tensor of the (not necessarily normalized) form at x
JTensor superenergy_tensor(const SimpleFormSpec& form, const MetricStructure& ms);

// pointwise basis of the +1 eigenspace, wedged and renormalized back into a
// superenergy tensor; reports the sign and the round-trip residual
struct FormFromRoot {
  std::vector<std::vector<double>> factors;  // p covariant 1-forms
  int sign = +1;
  double roundtrip_residual = 0.0;
};
FormFromRoot form_from_root(const MetricStructure& ms, const RootStructure& rs);

}  // namespace bicon

#endif

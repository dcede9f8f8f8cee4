#ifndef BICON_JET_HPP
#define BICON_JET_HPP

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bicon {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when evaluation leaves the domain of a function (log of a
// non-positive value, sqrt of a negative, division by zero, ...).
struct DomainError : Error {
  explicit DomainError(const std::string& msg) : Error(msg) {}
  bool annotated = false;
};

// Monomial bookkeeping for truncated multivariate Taylor series in `dim`
// variables up to total degree `order`.  Instances are interned: get()
// returns a pointer that stays valid for the lifetime of the process, so
// jets can share spaces by pointer identity.
class JetSpace {
 public:
  static const JetSpace* get(int dim, int order);

  int dim() const { return dim_; }
  int order() const { return order_; }
  int size() const { return static_cast<int>(mono_.size()); }

  int degree(int slot) const { return degree_[slot]; }
  const std::vector<std::uint8_t>& exponents(int slot) const { return mono_[slot]; }
  // slot of the monomial m + e_var, or -1 when that exceeds `order`
  int shift_up(int slot, int var) const { return shift_[slot * dim_ + var]; }
  int slot_of(std::span<const int> exponents) const;  // -1 if absent

  struct ConvTriple {
    std::int32_t target, left, right;
  };
  const std::vector<ConvTriple>& conv() const { return conv_; }

  // offset of the first slot of each total degree (degree d slots are
  // [deg_begin(d), deg_begin(d+1)) in graded order)
  int deg_begin(int d) const { return deg_begin_[d]; }

 private:
  JetSpace(int dim, int order);
  int dim_, order_;
  std::vector<std::vector<std::uint8_t>> mono_;
  std::vector<int> degree_;
  std::vector<int> deg_begin_;
  std::vector<std::int32_t> shift_;
  std::vector<ConvTriple> conv_;
};

// Truncated multivariate Taylor expansion of a scalar quantity at a point.
// Coefficients are stored as c_m = (d^m f) / m!.  `order()` tracks how many
// derivative orders are actually trustworthy: arithmetic on jets of unequal
// order truncates to the smaller one.
class Jet {
 public:
  Jet() : sp_(nullptr), ord_(0) {}
  // storage is sized to the tracked order: low-order jets stay small even
  // inside a high-order space
  Jet(const JetSpace* sp, int ord)
      : sp_(sp), ord_(ord), c_(sp->deg_begin(ord + 1), 0.0) {}

  static Jet constant(const JetSpace* sp, int ord, double v);
  static Jet variable(const JetSpace* sp, int ord, int var, double value);

  const JetSpace* space() const { return sp_; }
  int order() const { return ord_; }
  int dim() const { return sp_->dim(); }

  double value() const { return c_[0]; }
  double coeff(int slot) const {
    return slot < static_cast<int>(c_.size()) ? c_[slot] : 0.0;
  }
  double& coeff_ref(int slot) { return c_[slot]; }

  // d^m f for a multi-index given as per-variable exponent counts
  double partial(std::span<const int> multi) const;
  double partial(int i) const;
  double partial(int i, int j) const;

  // jet of d_var f, one order lower
  Jet derivative(int var) const;
  Jet truncated(int new_order) const;

  Jet operator-() const;
  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator+=(double v);
  Jet& operator-=(double v);
  Jet& operator*=(double v);

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator+(Jet a, double b) { return a += b; }
  friend Jet operator-(Jet a, double b) { return a -= b; }
  friend Jet operator+(double a, Jet b) { return b += a; }
  friend Jet operator-(double a, const Jet& b) { return -b + a; }
  friend Jet operator*(Jet a, double b) { return a *= b; }
  friend Jet operator*(double a, Jet b) { return b *= a; }
  friend Jet operator*(const Jet& a, const Jet& b);
  friend Jet operator/(const Jet& a, const Jet& b);
  friend Jet operator/(Jet a, double b) { return a *= (1.0 / b); }
  friend Jet operator/(double a, const Jet& b);

  // f applied to this jet, given derivatives f, f', f'', ... at value()
  Jet compose(std::span<const double> fderivs) const;

 private:
  const JetSpace* sp_;
  int ord_;
  std::vector<double> c_;
  friend Jet jet_mul(const Jet& a, const Jet& b, int ord);
  friend Jet mul_to(const Jet& a, const Jet& b, int ord);
};

// product truncated to `ord`; cheaper than multiplying at full order when
// the consumer only needs low derivative orders
Jet mul_to(const Jet& a, const Jet& b, int ord);

Jet exp(const Jet& u);
Jet log(const Jet& u);
Jet sin(const Jet& u);
Jet cos(const Jet& u);
Jet sinh(const Jet& u);
Jet cosh(const Jet& u);
Jet tanh(const Jet& u);
Jet sqrt(const Jet& u);
Jet abs_value(const Jet& u);  // sign(value) * u; value must be nonzero
Jet pow_int(const Jet& base, long long e);
Jet pow(const Jet& base, const Jet& expo);

}  // namespace bicon

#endif

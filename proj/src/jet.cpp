#include "bicon/jet.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>

namespace bicon {

namespace {

void enumerate_monomials(int dim, int order,
                         std::vector<std::vector<std::uint8_t>>& out) {
  // graded order: all monomials of degree d before degree d+1
  for (int d = 0; d <= order; ++d) {
    // lexicographic enumeration of compositions of d into dim parts
    std::vector<int> m(dim, 0);
    m[0] = d;
    while (true) {
      std::vector<std::uint8_t> e(dim);
      for (int i = 0; i < dim; ++i) e[i] = static_cast<std::uint8_t>(m[i]);
      out.push_back(e);
      // next composition
      int k = -1;
      for (int i = dim - 2; i >= 0; --i)
        if (m[i] > 0) { k = i; break; }
      if (k < 0) break;
      int rest = 0;
      for (int i = k + 1; i < dim; ++i) { rest += m[i]; m[i] = 0; }
      m[k] -= 1;
      m[k + 1] = rest + 1;
    }
  }
}

std::uint64_t pack_key(std::span<const std::uint8_t> e) {
  std::uint64_t k = 0;
  for (std::size_t i = 0; i < e.size(); ++i) k = k * 64 + e[i];
  return k;
}

double factorial_of_multi(std::span<const std::uint8_t> e) {
  double f = 1.0;
  for (auto x : e)
    for (int j = 2; j <= x; ++j) f *= j;
  return f;
}

}  // namespace

JetSpace::JetSpace(int dim, int order) : dim_(dim), order_(order) {
  if (dim < 1 || dim > 16) throw Error("jet dimension out of range");
  if (order < 0 || order > 10) throw Error("jet order out of range");
  enumerate_monomials(dim, order, mono_);
  const int m = static_cast<int>(mono_.size());
  degree_.resize(m);
  std::map<std::uint64_t, int> lut;
  for (int s = 0; s < m; ++s) {
    int d = 0;
    for (auto x : mono_[s]) d += x;
    degree_[s] = d;
    lut[pack_key(mono_[s])] = s;
  }
  deg_begin_.assign(order + 2, m);
  for (int s = m - 1; s >= 0; --s) deg_begin_[degree_[s]] = s;
  for (int d = order; d >= 0; --d)
    if (deg_begin_[d] == m) deg_begin_[d] = deg_begin_[d + 1];

  shift_.assign(static_cast<std::size_t>(m) * dim, -1);
  for (int s = 0; s < m; ++s) {
    for (int v = 0; v < dim; ++v) {
      if (degree_[s] + 1 > order) continue;
      auto e = mono_[s];
      e[v] += 1;
      auto it = lut.find(pack_key(e));
      if (it != lut.end()) shift_[static_cast<std::size_t>(s) * dim + v] = it->second;
    }
  }

  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      if (degree_[i] + degree_[j] > order) continue;
      std::vector<std::uint8_t> e(dim);
      for (int v = 0; v < dim; ++v)
        e[v] = static_cast<std::uint8_t>(mono_[i][v] + mono_[j][v]);
      conv_.push_back({lut.at(pack_key(e)), i, j});
    }
  }
  std::sort(conv_.begin(), conv_.end(),
            [](const ConvTriple& a, const ConvTriple& b) { return a.target < b.target; });
}

const JetSpace* JetSpace::get(int dim, int order) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::unique_ptr<JetSpace>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(dim, order);
  auto it = cache.find(key);
  if (it == cache.end())
    it = cache.emplace(key, std::unique_ptr<JetSpace>(new JetSpace(dim, order))).first;
  return it->second.get();
}

int JetSpace::slot_of(std::span<const int> exponents) const {
  if (static_cast<int>(exponents.size()) != dim_) return -1;
  for (int s = 0; s < size(); ++s) {
    bool ok = true;
    for (int v = 0; v < dim_; ++v)
      if (mono_[s][v] != exponents[v]) { ok = false; break; }
    if (ok) return s;
  }
  return -1;
}

Jet Jet::constant(const JetSpace* sp, int ord, double v) {
  Jet j(sp, ord);
  j.c_[0] = v;
  return j;
}

Jet Jet::variable(const JetSpace* sp, int ord, int var, double value) {
  Jet j(sp, ord);
  j.c_[0] = value;
  if (ord >= 1) {
    int s = sp->shift_up(0, var);
    if (s >= 0) j.c_[s] = 1.0;
  }
  return j;
}

double Jet::partial(std::span<const int> multi) const {
  int slot = sp_->slot_of(multi);
  if (slot < 0 || sp_->degree(slot) > ord_)
    throw Error("jet partial beyond available order");
  return c_[slot] * factorial_of_multi(sp_->exponents(slot));
}

double Jet::partial(int i) const {
  std::vector<int> m(sp_->dim(), 0);
  m[i] = 1;
  return partial(m);
}

double Jet::partial(int i, int j) const {
  std::vector<int> m(sp_->dim(), 0);
  m[i] += 1;
  m[j] += 1;
  return partial(m);
}

Jet Jet::derivative(int var) const {
  Jet r(sp_, std::max(0, ord_ - 1));
  const int stop = static_cast<int>(r.c_.size());
  for (int s = 0; s < stop; ++s) {
    int up = sp_->shift_up(s, var);
    if (up >= 0 && up < static_cast<int>(c_.size()))
      r.c_[s] = c_[up] * (sp_->exponents(s)[var] + 1);
  }
  return r;
}

Jet Jet::truncated(int new_order) const {
  if (new_order >= ord_) return *this;
  Jet r(sp_, new_order);
  std::copy(c_.begin(), c_.begin() + r.c_.size(), r.c_.begin());
  return r;
}

Jet Jet::operator-() const {
  Jet r = *this;
  for (auto& x : r.c_) x = -x;
  return r;
}

Jet& Jet::operator+=(const Jet& o) {
  ord_ = std::min(ord_, o.ord_);
  std::size_t stop = sp_->deg_begin(ord_ + 1);
  c_.resize(stop);
  for (std::size_t s = 0; s < stop; ++s) c_[s] += o.c_[s];
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  ord_ = std::min(ord_, o.ord_);
  std::size_t stop = sp_->deg_begin(ord_ + 1);
  c_.resize(stop);
  for (std::size_t s = 0; s < stop; ++s) c_[s] -= o.c_[s];
  return *this;
}

Jet& Jet::operator+=(double v) {
  c_[0] += v;
  return *this;
}

Jet& Jet::operator-=(double v) {
  c_[0] -= v;
  return *this;
}

Jet& Jet::operator*=(double v) {
  for (auto& x : c_) x *= v;
  return *this;
}

Jet jet_mul(const Jet& a, const Jet& b, int ord) {
  Jet r(a.sp_, ord);
  const int la = static_cast<int>(a.c_.size());
  const int lb = static_cast<int>(b.c_.size());
  for (const auto& t : a.sp_->conv()) {
    if (a.sp_->degree(t.target) > ord) break;
    if (t.left >= la || t.right >= lb) continue;
    r.c_[t.target] += a.c_[t.left] * b.c_[t.right];
  }
  return r;
}

Jet operator*(const Jet& a, const Jet& b) {
  return jet_mul(a, b, std::min(a.ord_, b.ord_));
}

Jet mul_to(const Jet& a, const Jet& b, int ord) {
  return jet_mul(a, b, std::min({ord, a.ord_, b.ord_}));
}

namespace {

// Horner evaluation of sum_j f^(j)(u0)/j! * (u - u0)^j
Jet compose_series(const Jet& u, const std::vector<double>& fderivs) {
  const int K = u.order();
  if (K == 0) return Jet::constant(u.space(), 0, fderivs[0]);
  Jet du = u;
  du.coeff_ref(0) = 0.0;
  std::vector<double> coef(K + 1);
  double jfact = 1.0;
  for (int j = 0; j <= K; ++j) {
    if (j > 0) jfact *= j;
    coef[j] = fderivs[j] / jfact;
  }
  Jet r = Jet::constant(u.space(), K, coef[K]);
  for (int j = K - 1; j >= 0; --j) {
    r = jet_mul(r, du, K);
    r.coeff_ref(0) += coef[j];
  }
  return r;
}

}  // namespace

Jet Jet::compose(std::span<const double> fderivs) const {
  return compose_series(*this, std::vector<double>(fderivs.begin(), fderivs.end()));
}

Jet exp(const Jet& u) {
  std::vector<double> d(u.order() + 1, std::exp(u.value()));
  return compose_series(u, d);
}

Jet log(const Jet& u) {
  if (!(u.value() > 0.0)) throw DomainError("log of non-positive value");
  std::vector<double> d(u.order() + 1);
  d[0] = std::log(u.value());
  double p = 1.0;  // (-1)^{j-1} (j-1)! / u0^j
  for (int j = 1; j <= u.order(); ++j) {
    p = (j == 1) ? 1.0 / u.value() : -p * (j - 1) / u.value();
    d[j] = p;
  }
  return compose_series(u, d);
}

Jet sin(const Jet& u) {
  std::vector<double> d(u.order() + 1);
  double s = std::sin(u.value()), c = std::cos(u.value());
  const double cyc[4] = {s, c, -s, -c};
  for (int j = 0; j <= u.order(); ++j) d[j] = cyc[j % 4];
  return compose_series(u, d);
}

Jet cos(const Jet& u) {
  std::vector<double> d(u.order() + 1);
  double s = std::sin(u.value()), c = std::cos(u.value());
  const double cyc[4] = {c, -s, -c, s};
  for (int j = 0; j <= u.order(); ++j) d[j] = cyc[j % 4];
  return compose_series(u, d);
}

Jet sinh(const Jet& u) {
  std::vector<double> d(u.order() + 1);
  double s = std::sinh(u.value()), c = std::cosh(u.value());
  for (int j = 0; j <= u.order(); ++j) d[j] = (j % 2 == 0) ? s : c;
  return compose_series(u, d);
}

Jet cosh(const Jet& u) {
  std::vector<double> d(u.order() + 1);
  double s = std::sinh(u.value()), c = std::cosh(u.value());
  for (int j = 0; j <= u.order(); ++j) d[j] = (j % 2 == 0) ? c : s;
  return compose_series(u, d);
}

Jet tanh(const Jet& u) { return sinh(u) / cosh(u); }

Jet sqrt(const Jet& u) {
  if (!(u.value() > 0.0)) {
    if (u.value() == 0.0) throw DomainError("sqrt at zero (derivative singular)");
    throw DomainError("sqrt of negative value");
  }
  // d[j] = (1/2)(1/2-1)...(1/2-j+1) u0^{1/2-j}
  std::vector<double> d(u.order() + 1);
  d[0] = std::sqrt(u.value());
  double run = 1.0;
  for (int j = 1; j <= u.order(); ++j) {
    run *= (0.5 - (j - 1));
    d[j] = run * std::pow(u.value(), 0.5 - j);
  }
  return compose_series(u, d);
}

Jet abs_value(const Jet& u) {
  if (u.value() == 0.0) throw DomainError("absolute value at zero");
  return u.value() > 0.0 ? u : -u;
}

Jet operator/(const Jet& a, const Jet& b) {
  if (b.value() == 0.0) throw DomainError("division by zero");
  std::vector<double> d(b.order() + 1);
  double p = 1.0 / b.value();
  d[0] = p;
  for (int j = 1; j <= b.order(); ++j) {
    p = -p * j / b.value();
    d[j] = p;  // (-1)^j j! / b0^{j+1}
  }
  return a * compose_series(b, d);
}

Jet operator/(double a, const Jet& b) {
  return Jet::constant(b.space(), b.order(), a) / b;
}

Jet pow_int(const Jet& base, long long e) {
  if (e == 0) return Jet::constant(base.space(), base.order(), 1.0);
  bool neg = e < 0;
  unsigned long long k = neg ? static_cast<unsigned long long>(-e) : static_cast<unsigned long long>(e);
  Jet acc = Jet::constant(base.space(), base.order(), 1.0);
  Jet b = base;
  while (k) {
    if (k & 1ull) acc = acc * b;
    b = b * b;
    k >>= 1;
  }
  if (neg) return 1.0 / acc;
  return acc;
}

Jet pow(const Jet& base, const Jet& expo) {
  // integer constant exponents keep negative bases legal
  bool expo_const = true;
  for (int s = 1; s < expo.space()->size(); ++s)
    if (expo.coeff(s) != 0.0) { expo_const = false; break; }
  if (expo_const) {
    double ev = expo.value();
    if (ev == std::floor(ev) && std::abs(ev) < 1e9)
      return pow_int(base, static_cast<long long>(ev));
  }
  if (!(base.value() > 0.0))
    throw DomainError("non-integer power of non-positive base");
  return exp(expo * log(base));
}

}  // namespace bicon

#include "bicon/tensor.hpp"

#include <cmath>

namespace bicon {

namespace {

std::size_t ipow(int n, int r) {
  std::size_t s = 1;
  for (int i = 0; i < r; ++i) s *= static_cast<std::size_t>(n);
  return s;
}

}  // namespace

DTensor::DTensor(int n_, int rank_) : n(n_), rank(rank_), a(ipow(n_, rank_), 0.0) {}

std::size_t DTensor::flat(int n, std::initializer_list<int> idx) {
  std::size_t f = 0;
  for (int i : idx) f = f * static_cast<std::size_t>(n) + static_cast<std::size_t>(i);
  return f;
}

double DTensor::frobenius() const {
  double s = 0.0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

double DTensor::max_abs() const {
  double s = 0.0;
  for (double v : a) s = std::max(s, std::abs(v));
  return s;
}

DTensor& DTensor::operator+=(const DTensor& o) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += o.a[i];
  return *this;
}

DTensor& DTensor::operator-=(const DTensor& o) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] -= o.a[i];
  return *this;
}

DTensor& DTensor::operator*=(double s) {
  for (auto& v : a) v *= s;
  return *this;
}

JTensor::JTensor(int n_, std::vector<std::int8_t> var_, const JetSpace* sp, int ord)
    : n(n_), var(std::move(var_)), a(ipow(n_, static_cast<int>(var.size())),
                                     Jet::constant(sp, ord, 0.0)) {}

JTensor& JTensor::operator+=(const JTensor& o) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += o.a[i];
  return *this;
}

JTensor& JTensor::operator-=(const JTensor& o) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] -= o.a[i];
  return *this;
}

JTensor JTensor::operator-() const {
  JTensor r = *this;
  for (auto& j : r.a) j = -j;
  return r;
}

JTensor JTensor::scaled(const Jet& s) const {
  JTensor r = *this;
  for (auto& j : r.a) j = j * s;
  return r;
}

JTensor JTensor::scaled(double s) const {
  JTensor r = *this;
  for (auto& j : r.a) j *= s;
  return r;
}

bool next_index(std::vector<int>& idx, int n) {
  for (int k = static_cast<int>(idx.size()) - 1; k >= 0; --k) {
    if (++idx[k] < n) return true;
    idx[k] = 0;
  }
  return false;
}

double symmetry_violation(const DTensor& t, int slot_i, int slot_j, int sign) {
  const int n = t.n;
  const int r = t.rank;
  std::vector<std::size_t> stride(r, 1);
  for (int s = r - 2; s >= 0; --s) stride[s] = stride[s + 1] * n;
  double worst = 0.0;
  std::vector<int> idx(r, 0);
  do {
    std::size_t f = 0, g = 0;
    for (int s = 0; s < r; ++s) {
      int v = idx[s];
      int w = s == slot_i ? idx[slot_j] : (s == slot_j ? idx[slot_i] : v);
      f += static_cast<std::size_t>(v) * stride[s];
      g += static_cast<std::size_t>(w) * stride[s];
    }
    worst = std::max(worst, std::abs(t.a[f] - sign * t.a[g]));
  } while (next_index(idx, n));
  return worst;
}

DTensor value_of(const JTensor& t) {
  DTensor r(t.n, t.rank());
  for (std::size_t i = 0; i < t.a.size(); ++i) r.a[i] = t.a[i].value();
  return r;
}

DTensor inner_product_x(const DTensor& t, const DTensor& m, const DTensor& g_inv) {
  if (t.n != m.n || t.n != g_inv.n || t.rank != 2 || m.rank != 2 || g_inv.rank != 2)
    throw Error("inner_product_x: rank-2 tensors of equal dimension required");
  const int n = t.n;
  DTensor r(n, 2);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      double s = 0.0;
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d)
          s += t.at({a, c}) * g_inv.at({c, d}) * m.at({d, b});
      r.at({a, b}) = s;
    }
  return r;
}

DTensor wedge2(const DTensor& t, const DTensor& m) {
  if (t.n != m.n || t.rank != 2 || m.rank != 2)
    throw Error("wedge2: rank-2 tensors of equal dimension required");
  const int n = t.n;
  DTensor r(n, 4);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d)
          r.at({a, b, c, d}) = t.at({a, b}) * m.at({c, d}) - t.at({c, d}) * m.at({a, b});
  return r;
}

double triple_wedge_max(const DTensor& x, const DTensor& y, const DTensor& z) {
  const std::size_t m = x.a.size();
  double best = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      const double dxy = x.a[i] * y.a[j] - x.a[j] * y.a[i];
      const double dxz = x.a[i] * z.a[j] - x.a[j] * z.a[i];
      const double dyz = y.a[i] * z.a[j] - y.a[j] * z.a[i];
      for (std::size_t k = j + 1; k < m; ++k) {
        double det = x.a[k] * dyz - y.a[k] * dxz + z.a[k] * dxy;
        det = std::abs(det);
        if (det > best) best = det;
      }
    }
  }
  return best;
}

JTensor reslot_metric(const JTensor& t, int slot, const std::vector<Jet>& g2,
                      std::int8_t new_var) {
  const int n = t.n;
  const int r = t.rank();
  JTensor out(n, t.var, t.a[0].space(), t.a[0].order());
  out.var[slot] = new_var;
  std::vector<int> idx(r, 0);
  do {
    std::size_t fo = 0;
    for (int s = 0; s < r; ++s) fo = fo * n + idx[s];
    Jet sum = Jet::constant(t.a[0].space(), t.a[0].order(), 0.0);
    const int i_new = idx[slot];
    std::vector<int> src = idx;
    for (int c = 0; c < n; ++c) {
      src[slot] = c;
      std::size_t fs = 0;
      for (int s = 0; s < r; ++s) fs = fs * n + src[s];
      sum += g2[static_cast<std::size_t>(i_new) * n + c] * t.a[fs];
    }
    out.a[fo] = sum;
  } while (next_index(idx, n));
  return out;
}

JTensor outer(const JTensor& x, const JTensor& y) {
  std::vector<std::int8_t> var = x.var;
  var.insert(var.end(), y.var.begin(), y.var.end());
  JTensor out(x.n, var, x.a[0].space(), std::min(x.a[0].order(), y.a[0].order()));
  for (std::size_t i = 0; i < x.a.size(); ++i)
    for (std::size_t j = 0; j < y.a.size(); ++j)
      out.a[i * y.a.size() + j] = x.a[i] * y.a[j];
  return out;
}

}  // namespace bicon

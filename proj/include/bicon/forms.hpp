#ifndef BICON_FORMS_HPP
#define BICON_FORMS_HPP

#include <algorithm>
#include <vector>

#include "bicon/jet.hpp"
#include "bicon/tensor.hpp"

namespace bicon {

// increasing p-tuples from {0..n-1} in lexicographic order
std::vector<std::vector<int>> combinations(int n, int p);
int combination_index(const std::vector<std::vector<int>>& combs,
                      std::span<const int> sorted);

// Antisymmetric covariant degree-p tensor stored on strictly increasing
// multi-indices.  T is double for point values and Jet for fields with
// derivatives.
template <class T>
struct PFormT {
  int n = 0;
  int p = 0;
  std::vector<T> comp;  // C(n,p) entries, combinations(n,p) order
};

using PForm = PFormT<double>;
using JPForm = PFormT<Jet>;

namespace detail {

inline double zero_like(double) { return 0.0; }
inline Jet zero_like(const Jet& j) { return Jet::constant(j.space(), j.order(), 0.0); }
inline double one_like(double) { return 1.0; }
inline Jet one_like(const Jet& j) { return Jet::constant(j.space(), j.order(), 1.0); }

// cofactor-expansion determinant of the minor rows x cols of m (k x k)
template <class T>
T minor_det(const std::vector<T>& m, int n, std::span<const int> rows,
            std::span<const int> cols) {
  const int k = static_cast<int>(rows.size());
  if (k == 0) {
    return one_like(m[0]);
  }
  if (k == 1) return m[static_cast<std::size_t>(rows[0]) * n + cols[0]];
  if (k == 2) {
    return m[static_cast<std::size_t>(rows[0]) * n + cols[0]] *
               m[static_cast<std::size_t>(rows[1]) * n + cols[1]] -
           m[static_cast<std::size_t>(rows[0]) * n + cols[1]] *
               m[static_cast<std::size_t>(rows[1]) * n + cols[0]];
  }
  T acc = zero_like(m[0]);
  std::vector<int> sub(rows.begin() + 1, rows.end());
  std::vector<int> rcols(cols.begin(), cols.end());
  for (int j = 0; j < k; ++j) {
    std::vector<int> c2;
    c2.reserve(k - 1);
    for (int t = 0; t < k; ++t)
      if (t != j) c2.push_back(rcols[t]);
    T d = minor_det(m, n, sub, c2);
    T term = m[static_cast<std::size_t>(rows[0]) * n + rcols[j]] * d;
    if (j % 2 == 0)
      acc += term;
    else
      acc -= term;
  }
  return acc;
}

}  // namespace detail

// sign of the permutation taking (seq) to sorted order; 0 if repeated
int permutation_sign(std::span<const int> seq);

inline double abs_of(double v) { return v < 0 ? -v : v; }
inline Jet abs_of(const Jet& j) { return abs_value(j); }
double sqrt_of(double v);
inline Jet sqrt_of(const Jet& j) { return sqrt(j); }

// wedge of p covariant 1-forms given by their n components each
template <class T>
PFormT<T> wedge_of_factors(const std::vector<std::vector<T>>& factors, int n) {
  const int p = static_cast<int>(factors.size());
  PFormT<T> f;
  f.n = n;
  f.p = p;
  // matrix rows = factors, cols = coordinate index
  std::vector<T> m;
  m.reserve(static_cast<std::size_t>(p) * n);
  for (const auto& row : factors)
    for (const auto& v : row) m.push_back(v);
  auto combs = combinations(n, p);
  std::vector<int> rows(p);
  for (int i = 0; i < p; ++i) rows[i] = i;
  for (const auto& c : combs)
    f.comp.push_back(detail::minor_det(m, n, rows, c));
  return f;
}

// full contraction A_{c1..cp} B^{c1..cp} (all indices raised with g_inv)
template <class T, class GT>
T form_dot(const PFormT<T>& a, const PFormT<T>& b, const std::vector<GT>& g_inv) {
  if (a.p != b.p || a.n != b.n) throw Error("form_dot: degree/dimension mismatch");
  auto combs = combinations(a.n, a.p);
  T acc = detail::zero_like(a.comp[0]);
  double pfact = 1.0;
  for (int j = 2; j <= a.p; ++j) pfact *= j;
  for (std::size_t i = 0; i < combs.size(); ++i)
    for (std::size_t j = 0; j < combs.size(); ++j) {
      auto d = detail::minor_det(g_inv, a.n, combs[i], combs[j]);
      acc += a.comp[i] * d * b.comp[j];
    }
  return acc * pfact;
}

// raised increasing components A^I = sum_J det(g_inv[I,J]) A_J
template <class T, class GT>
std::vector<T> raise_form(const PFormT<T>& a, const std::vector<GT>& g_inv) {
  auto combs = combinations(a.n, a.p);
  std::vector<T> out;
  out.reserve(combs.size());
  for (std::size_t i = 0; i < combs.size(); ++i) {
    T acc = detail::zero_like(a.comp[0]);
    for (std::size_t j = 0; j < combs.size(); ++j)
      acc += detail::minor_det(g_inv, a.n, combs[i], combs[j]) * a.comp[j];
    out.push_back(acc);
  }
  return out;
}

// Hodge dual in the chart orientation: (*A)_J = sqrt|det g| sgn(I_J J) A^{I_J}
template <class T, class GT, class DT>
PFormT<T> hodge_dual(const PFormT<T>& a, const std::vector<GT>& g_inv, const DT& det_g) {
  PFormT<T> out;
  out.n = a.n;
  out.p = a.n - a.p;
  auto up = raise_form(a, g_inv);
  auto combs_in = combinations(a.n, a.p);
  auto combs_out = combinations(a.n, out.p);
  auto root = sqrt_of(abs_of(det_g));
  for (const auto& J : combs_out) {
    // complement of J in increasing order
    std::vector<int> I;
    std::vector<char> used(a.n, 0);
    for (int j : J) used[j] = 1;
    for (int i = 0; i < a.n; ++i)
      if (!used[i]) I.push_back(i);
    std::vector<int> seq = I;
    seq.insert(seq.end(), J.begin(), J.end());
    int sgn = permutation_sign(seq);
    int idx = combination_index(combs_in, I);
    out.comp.push_back(up[idx] * root * static_cast<double>(sgn));
  }
  return out;
}

// Q_ab = A_{a c2..cp} A_b^{c2..cp}, the (p-1)-fold contraction entering the
// superenergy tensor; result is a rank-2 array over T.
template <class T, class GT>
std::vector<T> form_square(const PFormT<T>& a, const std::vector<GT>& g_inv) {
  const int n = a.n, p = a.p;
  auto combs = combinations(n, p);
  auto sub = combinations(n, p - 1);
  double fact = 1.0;
  for (int j = 2; j <= p - 1; ++j) fact *= j;
  std::vector<T> q(static_cast<std::size_t>(n) * n, detail::zero_like(a.comp[0]));
  // component of a with leading index i and increasing tail C
  auto comp_at = [&](int i, const std::vector<int>& c, bool& nonzero, int& sgn) -> const T& {
    nonzero = true;
    sgn = 1;
    int cnt = 0;
    for (int v : c) {
      if (v == i) { nonzero = false; return a.comp[0]; }
      if (v < i) ++cnt;
    }
    if (cnt % 2) sgn = -1;
    std::vector<int> sorted;
    sorted.reserve(c.size() + 1);
    sorted.push_back(i);
    sorted.insert(sorted.end(), c.begin(), c.end());
    std::sort(sorted.begin(), sorted.end());
    return a.comp[combination_index(combs, sorted)];
  };
  for (std::size_t ci = 0; ci < sub.size(); ++ci) {
    for (std::size_t cj = 0; cj < sub.size(); ++cj) {
      auto d = detail::minor_det(g_inv, n, sub[ci], sub[cj]);
      for (int i = 0; i < n; ++i) {
        bool nz1;
        int s1;
        const T& a1 = comp_at(i, sub[ci], nz1, s1);
        if (!nz1) continue;
        for (int j = 0; j < n; ++j) {
          bool nz2;
          int s2;
          const T& a2 = comp_at(j, sub[cj], nz2, s2);
          if (!nz2) continue;
          T term = a1 * d * a2;
          q[static_cast<std::size_t>(i) * n + j] += term * (fact * s1 * s2);
        }
      }
    }
  }
  return q;
}

// superenergy tensor of a p-form:
//   T_ab = (-1)^{p-1}/(p-1)! ( Q_ab - g_ab (A.A) / (2p) )
template <class T, class GT>
std::vector<T> superenergy(const PFormT<T>& a, const std::vector<GT>& g,
                           const std::vector<GT>& g_inv) {
  const int n = a.n, p = a.p;
  auto q = form_square(a, g_inv);
  T dot = form_dot(a, a, g_inv);
  double fact = 1.0;
  for (int j = 2; j <= p - 1; ++j) fact *= j;
  double c = ((p - 1) % 2 == 0 ? 1.0 : -1.0) / fact;
  std::vector<T> out;
  out.reserve(q.size());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      T v = q[static_cast<std::size_t>(i) * n + j] -
            g[static_cast<std::size_t>(i) * n + j] * dot * (1.0 / (2.0 * p));
      out.push_back(v * c);
    }
  return out;
}

// dense expansion (rank p array over all index tuples)
template <class T>
std::vector<T> form_to_dense(const PFormT<T>& a) {
  auto combs = combinations(a.n, a.p);
  std::size_t total = 1;
  for (int i = 0; i < a.p; ++i) total *= static_cast<std::size_t>(a.n);
  std::vector<T> out(total, detail::zero_like(a.comp[0]));
  std::vector<int> idx(a.p, 0);
  do {
    int sgn = permutation_sign(idx);
    if (sgn == 0) continue;
    std::vector<int> sorted = idx;
    std::sort(sorted.begin(), sorted.end());
    std::size_t f = 0;
    for (int v : idx) f = f * a.n + v;
    out[f] = a.comp[combination_index(combs, sorted)] * static_cast<double>(sgn);
  } while (next_index(idx, a.n));
  return out;
}

}  // namespace bicon

#endif

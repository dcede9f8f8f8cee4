#ifndef BICON_TENSOR_HPP
#define BICON_TENSOR_HPP

#include <cstdint>
#include <initializer_list>
#include <vector>

#include "bicon/jet.hpp"

namespace bicon {

// Dense tensor of doubles at a point.  Component array is row-major with
// every slot running over 0..n-1; covariant/contravariant bookkeeping is
// carried by the operations, not the container.
struct DTensor {
  int n = 0;
  int rank = 0;
  std::vector<double> a;

  DTensor() = default;
  DTensor(int n_, int rank_);

  static std::size_t flat(int n, std::initializer_list<int> idx);
  double& at(std::initializer_list<int> idx) { return a[flat(n, idx)]; }
  double at(std::initializer_list<int> idx) const { return a[flat(n, idx)]; }

  double frobenius() const;
  double max_abs() const;

  DTensor& operator+=(const DTensor& o);
  DTensor& operator-=(const DTensor& o);
  DTensor& operator*=(double s);
  friend DTensor operator+(DTensor x, const DTensor& y) { return x += y; }
  friend DTensor operator-(DTensor x, const DTensor& y) { return x -= y; }
  friend DTensor operator*(DTensor x, double s) { return x *= s; }
  friend DTensor operator*(double s, DTensor x) { return x *= s; }
};

// Dense tensor of jets with per-slot variance (+1 contravariant, -1 covariant).
struct JTensor {
  int n = 0;
  std::vector<std::int8_t> var;
  std::vector<Jet> a;

  JTensor() = default;
  JTensor(int n_, std::vector<std::int8_t> var_, const JetSpace* sp, int ord);

  int rank() const { return static_cast<int>(var.size()); }
  std::size_t flat(std::initializer_list<int> idx) const {
    return DTensor::flat(n, idx);
  }
  Jet& at(std::initializer_list<int> idx) { return a[flat(idx)]; }
  const Jet& at(std::initializer_list<int> idx) const { return a[flat(idx)]; }

  JTensor& operator+=(const JTensor& o);
  JTensor& operator-=(const JTensor& o);
  friend JTensor operator+(JTensor x, const JTensor& y) { return x += y; }
  friend JTensor operator-(JTensor x, const JTensor& y) { return x -= y; }
  JTensor operator-() const;
  JTensor scaled(const Jet& s) const;
  JTensor scaled(double s) const;
};

// odometer over `rank` slots each in 0..n-1; returns false when exhausted
bool next_index(std::vector<int>& idx, int n);

// largest violation of a declared (anti)symmetry between two slots:
// sign +1 checks T[..i..j..] = T[..j..i..], sign -1 the antisymmetric law
double symmetry_violation(const DTensor& t, int slot_i, int slot_j, int sign);

DTensor value_of(const JTensor& t);

// (T x M)_ab = T_ac g^{cd} M_db  for rank-2 covariant T, M
DTensor inner_product_x(const DTensor& t, const DTensor& m, const DTensor& g_inv);
// (T ^ M)_abcd = T_ab M_cd - T_cd M_ab
DTensor wedge2(const DTensor& t, const DTensor& m);
// Largest 3x3 minor of [vec X | vec Y | vec Z]: the triple wedge of three
// rank-2 tensors vanishes iff all of these do.
double triple_wedge_max(const DTensor& x, const DTensor& y, const DTensor& z);

// raise or lower one slot with g2 = g^{ab} (raising) or g_ab (lowering)
JTensor reslot_metric(const JTensor& t, int slot, const std::vector<Jet>& g2,
                      std::int8_t new_var);
JTensor outer(const JTensor& x, const JTensor& y);

}  // namespace bicon

#endif

#include "bicon/linalg.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace bicon {

namespace {

Eigen::MatrixXd to_eigen(const std::vector<double>& a, int rows, int cols) {
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = a[static_cast<std::size_t>(i) * cols + j];
  return m;
}

}  // namespace

std::vector<double> invert_matrix(const std::vector<double>& a, int n) {
  Eigen::MatrixXd m = to_eigen(a, n, n);
  Eigen::MatrixXd inv = m.inverse();
  std::vector<double> out(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out[static_cast<std::size_t>(i) * n + j] = inv(i, j);
  return out;
}

double determinant(const std::vector<double>& a, int n) {
  return to_eigen(a, n, n).determinant();
}

std::vector<double> symmetric_eigenvalues(const std::vector<double>& a, int n) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_eigen(a, n, n),
                                                    Eigen::EigenvaluesOnly);
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = es.eigenvalues()(i);
  return out;
}

std::vector<double> singular_values(const std::vector<double>& a, int rows, int cols) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(to_eigen(a, rows, cols));
  std::vector<double> out(svd.singularValues().size());
  for (int i = 0; i < svd.singularValues().size(); ++i) out[i] = svd.singularValues()(i);
  return out;
}

int numerical_rank(const std::vector<double>& a, int rows, int cols, double tol_factor) {
  auto sv = singular_values(a, rows, cols);
  if (sv.empty()) return 0;
  double smax = sv[0];
  if (smax == 0.0) return 0;
  int r = 0;
  for (double s : sv)
    if (s > tol_factor * smax) ++r;
  return r;
}

std::vector<Jet> invert_jet_matrix(const std::vector<Jet>& a, int n, Jet* det_out,
                                   double det_tol) {
  // Gauss-Jordan with partial pivoting by |value part|
  std::vector<Jet> m = a;
  const JetSpace* sp = a[0].space();
  int ord = a[0].order();
  std::vector<Jet> inv(static_cast<std::size_t>(n) * n, Jet::constant(sp, ord, 0.0));
  for (int i = 0; i < n; ++i) inv[static_cast<std::size_t>(i) * n + i] = Jet::constant(sp, ord, 1.0);
  Jet det = Jet::constant(sp, ord, 1.0);
  auto at = [n](std::vector<Jet>& v, int i, int j) -> Jet& {
    return v[static_cast<std::size_t>(i) * n + j];
  };
  for (int col = 0; col < n; ++col) {
    int piv = col;
    double best = std::abs(at(m, col, col).value());
    for (int r = col + 1; r < n; ++r) {
      double v = std::abs(at(m, r, col).value());
      if (v > best) { best = v; piv = r; }
    }
    if (piv != col) {
      for (int j = 0; j < n; ++j) {
        std::swap(at(m, col, j), at(m, piv, j));
        std::swap(at(inv, col, j), at(inv, piv, j));
      }
      det = -det;
    }
    Jet pivot = at(m, col, col);
    if (std::abs(pivot.value()) < 1e-300) throw Error("singular matrix in jet inverse");
    det = det * pivot;
    for (int j = 0; j < n; ++j) {
      at(m, col, j) = at(m, col, j) / pivot;
      at(inv, col, j) = at(inv, col, j) / pivot;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      Jet f = at(m, r, col);
      if (f.value() == 0.0) {
        bool zero = true;
        for (int s = 0; s < sp->size(); ++s)
          if (f.coeff(s) != 0.0) { zero = false; break; }
        if (zero) continue;
      }
      for (int j = 0; j < n; ++j) {
        at(m, r, j) -= f * at(m, col, j);
        at(inv, r, j) -= f * at(inv, col, j);
      }
    }
  }
  if (std::abs(det.value()) <= det_tol)
    throw Error("degenerate matrix: |det| = " + std::to_string(std::abs(det.value())));
  if (det_out) *det_out = det;
  return inv;
}

}  // namespace bicon

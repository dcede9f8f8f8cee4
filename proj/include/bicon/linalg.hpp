#ifndef BICON_LINALG_HPP
#define BICON_LINALG_HPP

#include <vector>

#include "bicon/jet.hpp"

namespace bicon {

// double-precision helpers (Eigen-backed)
std::vector<double> invert_matrix(const std::vector<double>& a, int n);
double determinant(const std::vector<double>& a, int n);
// eigenvalues of a symmetric matrix, ascending
std::vector<double> symmetric_eigenvalues(const std::vector<double>& a, int n);
std::vector<double> singular_values(const std::vector<double>& a, int rows, int cols);
// numerical rank with threshold tol_factor * sigma_max
int numerical_rank(const std::vector<double>& a, int rows, int cols,
                   double tol_factor = 1e-8);

// LU inverse over the jet ring with partial pivoting on value parts.
// Also reports det(g) as a jet.  Throws on |det| below `det_tol`.
std::vector<Jet> invert_jet_matrix(const std::vector<Jet>& a, int n, Jet* det_out,
                                   double det_tol = 1e-12);

}  // namespace bicon

#endif

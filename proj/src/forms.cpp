#include "bicon/forms.hpp"

#include <cmath>

namespace bicon {

double sqrt_of(double v) { return std::sqrt(v); }

std::vector<std::vector<int>> combinations(int n, int p) {
  std::vector<std::vector<int>> out;
  if (p < 0 || p > n) return out;
  std::vector<int> c(p);
  for (int i = 0; i < p; ++i) c[i] = i;
  while (true) {
    out.push_back(c);
    if (p == 0) break;
    int k = p - 1;
    while (k >= 0 && c[k] == n - p + k) --k;
    if (k < 0) break;
    ++c[k];
    for (int j = k + 1; j < p; ++j) c[j] = c[j - 1] + 1;
  }
  return out;
}

int combination_index(const std::vector<std::vector<int>>& combs,
                      std::span<const int> sorted) {
  for (std::size_t i = 0; i < combs.size(); ++i) {
    if (combs[i].size() != sorted.size()) continue;
    bool eq = true;
    for (std::size_t j = 0; j < sorted.size(); ++j)
      if (combs[i][j] != sorted[j]) { eq = false; break; }
    if (eq) return static_cast<int>(i);
  }
  throw Error("combination not found");
}

int permutation_sign(std::span<const int> seq) {
  int sgn = 1;
  for (std::size_t i = 0; i < seq.size(); ++i)
    for (std::size_t j = i + 1; j < seq.size(); ++j) {
      if (seq[i] == seq[j]) return 0;
      if (seq[i] > seq[j]) sgn = -sgn;
    }
  return sgn;
}

}  // namespace bicon

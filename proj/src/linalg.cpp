#include "paramshap/linalg.hpp"

#include "paramshap/errors.hpp"

namespace paramshap {

std::vector<Rational> solve_linear_system(std::vector<std::vector<Rational>> a,
                                          std::vector<Rational> b) {
  const size_t n = a.size();
  if (b.size() != n) throw InternalError("solve_linear_system: shape mismatch");
  for (const auto& row : a) {
    if (row.size() != n) throw InternalError("solve_linear_system: matrix is not square");
  }
  for (size_t col = 0; col < n; ++col) {
    size_t pivot = col;
    while (pivot < n && a[pivot][col].is_zero()) ++pivot;
    if (pivot == n) throw InternalError("solve_linear_system: singular matrix");
    std::swap(a[pivot], a[col]);
    std::swap(b[pivot], b[col]);
    const Rational inv = a[col][col].reciprocal();
    for (size_t j = col; j < n; ++j) a[col][j] *= inv;
    b[col] *= inv;
    for (size_t row = 0; row < n; ++row) {
      if (row == col || a[row][col].is_zero()) continue;
      const Rational factor = a[row][col];
      for (size_t j = col; j < n; ++j) a[row][j] -= factor * a[col][j];
      b[row] -= factor * b[col];
    }
  }
  return b;
}

}  // namespace paramshap

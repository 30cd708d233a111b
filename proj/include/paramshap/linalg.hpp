#pragma once

#include <vector>

#include "paramshap/rational.hpp"

namespace paramshap {

/// Solves the square system A·x = b exactly by Gaussian elimination with
/// partial (first-nonzero) pivoting. Throws InternalError when A is singular.
std::vector<Rational> solve_linear_system(std::vector<std::vector<Rational>> a,
                                          std::vector<Rational> b);

}  // namespace paramshap

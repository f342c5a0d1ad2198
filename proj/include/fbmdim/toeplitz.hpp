#pragma once

#include <span>
#include <vector>

namespace fbmdim {

/// Solves T x = b for the symmetric positive definite Toeplitz matrix with
/// first column `column` (column[0] > 0) by Levinson recursion, O(n^2).
std::vector<double> solve_toeplitz(std::span<const double> column, std::span<const double> rhs);

} // namespace fbmdim

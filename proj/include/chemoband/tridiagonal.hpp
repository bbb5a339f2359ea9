#pragma once

#include <array>
#include <span>
#include <vector>

namespace chemoband {

/// Solves lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i] by the
/// Thomas algorithm. lower[0] and upper[n-1] are ignored. Throws
/// Error(LinearSolveFailure) on a zero or non-finite pivot.
std::vector<double> solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                                      std::span<const double> upper, std::span<const double> rhs);

/// Row-major 2x2 block.
using Block2 = std::array<double, 4>;
using Vec2 = std::array<double, 2>;

/// Block version of solve_tridiagonal for systems with two unknowns per
/// node. Throws Error(LinearSolveFailure) on a singular pivot block.
std::vector<Vec2> solve_block_tridiagonal(std::span<const Block2> lower, std::span<const Block2> diag,
                                          std::span<const Block2> upper, std::span<const Vec2> rhs);

} // namespace chemoband

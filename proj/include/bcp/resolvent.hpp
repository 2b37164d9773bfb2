#ifndef BCP_RESOLVENT_HPP
#define BCP_RESOLVENT_HPP

#include <vector>

#include "bcp/core.hpp"
#include "bcp/problem.hpp"

namespace bcp {

/// Uniform grid 0 = x_0 < ... < x_{n-1} = length.
std::vector<double> uniform_grid(double length, int points);

struct ResolventOptions {
  double singular_threshold = 1e-10;
};

/// u = (A_C - lambda)^{-1} f with f sampled on uniform per-edge grids:
/// rhs[e] has one row per grid point and r columns; u has the same shape.
struct ResolventSolution {
  Complex lambda;
  std::vector<std::vector<double>> grids;
  std::vector<CMatrix> values;
  double sigma_min = 0.0;
  /// |C u| relative to the size of the boundary data it cancels.
  double coupling_residual = 0.0;
  /// max |(A - lambda) u - f| at interior grid points relative to
  /// max(|f|, |lambda u|), with the top derivative by finite differences.
  double interior_residual = 0.0;
};

ResolventSolution solve_resolvent(const BoundaryContactProblem& problem, Complex lambda,
                                  const std::vector<CMatrix>& rhs, const ResolventOptions& options = {});

/// phi_0..phi_{count-1} at z, phi_k(z) = sum_n z^n / (n + k)!.
std::vector<Complex> phi_functions(Complex z, int count);

}  // namespace bcp

#endif  // BCP_RESOLVENT_HPP

#ifndef BCP_FUNDAMENTAL_HPP
#define BCP_FUNDAMENTAL_HPP

#include <vector>

#include "bcp/core.hpp"
#include "bcp/problem.hpp"

namespace bcp {

enum class BasisKind {
  Auto,         // constant coefficients: identity unless some exponent grows past e^3, then exponential; numeric otherwise
  Exponential,  // x^p e^{mu x} solutions (constant coefficients only)
  Identity,     // identity jets at x = 0, closed form when possible
  Numeric,      // identity jets at x = 0, always by Runge-Kutta integration
};

struct FundamentalOptions {
  BasisKind kind = BasisKind::Auto;
  /// Interior points (edge coordinate) at which raw jets are recorded.
  std::vector<double> samples;
  double rtol = 1e-10;
  /// Step bound c / (1 + |lambda|^{1/m}).
  double step_factor = 0.5;
};

/// m*r solutions of (A - lambda) u = 0 on one edge. Column i holds the jets of
/// solution i (row k*r + c = k-th derivative of component c); true jets are
/// the stored ones times exp(scale(i)).
struct FundamentalSystem {
  std::size_t edge = 0;
  Complex lambda;
  BasisKind kind = BasisKind::Identity;
  double length = 0.0;
  CMatrix left;   // inward jets at x = 0
  CMatrix right;  // inward jets at x = length, (-1)^k applied
  RVector scale;
  /// log det of the true (unscaled) left jet matrix.
  Complex left_logdet{0.0, 0.0};
  std::vector<double> sample_x;
  std::vector<CMatrix> sample_jets;  // raw jets at sample_x, same scaling

  Eigen::Index size() const { return left.cols(); }
  CMatrix true_left() const;
  CMatrix true_right() const;
};

/// Jet companion matrix of a(x) - lambda: y' = C(x) y for y = (u, u', ...).
CMatrix edge_companion(const EdgeOperator& op, double x, Complex lambda);

FundamentalSystem fundamental_system(const BoundaryContactProblem& problem, std::size_t edge, Complex lambda,
                                     const FundamentalOptions& options = {});

/// Raw jets at the right end as a linear map of raw jets at the left end.
CMatrix transfer_matrix(const BoundaryContactProblem& problem, std::size_t edge, Complex lambda);

}  // namespace bcp

#endif  // BCP_FUNDAMENTAL_HPP

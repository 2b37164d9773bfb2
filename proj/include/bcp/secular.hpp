#ifndef BCP_SECULAR_HPP
#define BCP_SECULAR_HPP

#include <vector>

#include "bcp/core.hpp"
#include "bcp/fundamental.hpp"
#include "bcp/problem.hpp"

namespace bcp {

/// Coupling rows applied to the fundamental systems of all edges. Rows are
/// grouped by vertex, columns by edge (m*r per edge). True entries are the
/// stored ones times exp(column_scale).
struct SecularMatrix {
  Complex lambda;
  CMatrix matrix;
  RVector column_scale;
  std::vector<FundamentalSystem> systems;
  bool square = false;
  int order = 2;
  int rank = 1;
  /// log of det G_true / prod_e det L_e (entire in lambda, basis independent);
  /// only meaningful when square.
  Complex log_char{0.0, 0.0};

  double log_abs_det() const { return log_char.real(); }
  Complex phase() const { return std::polar(1.0, log_char.imag()); }
  Eigen::Index edge_offset(std::size_t edge) const;
};

SecularMatrix secular_matrix(const BoundaryContactProblem& problem, Complex lambda,
                             const FundamentalOptions& options = {});
/// Same, from precomputed per-edge systems (all at the same lambda).
SecularMatrix assemble_secular(const BoundaryContactProblem& problem, std::vector<FundamentalSystem> systems);

/// Column-normalized (by solution jets) then row-equilibrated copy:
/// equilibrated = diag(row_factor) * matrix * diag(column_factor).
struct Equilibrated {
  CMatrix matrix;
  RVector row_factor;
  RVector column_factor;
};
Equilibrated equilibrate(const SecularMatrix& g);

/// Singular values of the equilibrated matrix divided by the largest one,
/// in decreasing order.
RVector normalized_singular_values(const SecularMatrix& g);

/// Number of normalized singular values below threshold.
int nullity(const SecularMatrix& g, double threshold = 1e-6);

/// SVD nullity of G(lambda) with the identity-data basis.
int multiplicity(const BoundaryContactProblem& problem, double lambda, double threshold = 1e-6);

}  // namespace bcp

#endif  // BCP_SECULAR_HPP

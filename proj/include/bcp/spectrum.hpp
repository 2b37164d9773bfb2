#ifndef BCP_SPECTRUM_HPP
#define BCP_SPECTRUM_HPP

#include <optional>
#include <string>
#include <vector>

#include "bcp/core.hpp"
#include "bcp/problem.hpp"
#include "bcp/secular.hpp"

namespace bcp {

struct SweepOptions {
  /// Upper end of the window; ignored when max_count is set.
  double lambda_hi = 0.0;
  std::optional<double> lambda_lo;
  /// Compute (at least) this many eigenvalues counted with multiplicity,
  /// truncated to whole clusters.
  std::optional<int> max_count;
  /// Grid step as a fraction of the local mean eigenvalue spacing.
  double grid_factor = 0.125;
  int max_refinements = 3;
  /// Use Runge-Kutta fundamental systems even for constant coefficients.
  bool force_numeric = false;
  double refine_tol = 1e-12;
  double multiplicity_threshold = 1e-6;
  /// Approximate number of clusters per certified contour.
  int clusters_per_contour = 16;
};

struct CertificateInterval {
  double a = 0.0;
  double b = 0.0;
  int contour_count = 0;
  int found = 0;  // sum of multiplicities of eigenvalues in (a, b)
};

struct Spectrum {
  std::string digest;
  std::vector<double> eigenvalues;  // sorted, distinct
  std::vector<int> multiplicities;
  double lambda_lo = 0.0;
  /// Completeness holds on [lambda_lo, lambda_hi]; every eigenvalue <= lambda_hi.
  double lambda_hi = 0.0;
  std::vector<CertificateInterval> certificate;
  SweepOptions options;
  /// Weyl data: N(lambda) ~ (weyl_length / pi) lambda^{1/order}.
  int order = 2;
  double weyl_length = 0.0;
  std::vector<double> edge_weyl_lengths;
  Sector sector;

  int total_count() const;
  /// Eigenvalues repeated by multiplicity.
  std::vector<double> expanded() const;
  /// N(lambda): eigenvalues <= lambda counted with multiplicity.
  int counting(double lambda) const;
  bool certified() const;
};

/// Real spectrum of a symmetric, parameter-elliptic problem with completeness
/// certificates from argument-principle counts of the characteristic function.
Spectrum eigenvalues(const BoundaryContactProblem& problem, const SweepOptions& options);

/// Number of zeros of the characteristic function inside the rectangle
/// [a, b] x [-h, h] (winding number of its phase along the boundary).
int contour_count(const BoundaryContactProblem& problem, double a, double b, double h,
                  BasisKind kind = BasisKind::Auto);

/// Smallest normalized singular value of G(lambda).
double sigma_min(const BoundaryContactProblem& problem, Complex lambda, BasisKind kind = BasisKind::Auto);

/// 1 / dist(lambda, computed eigenvalues and [lambda_hi, inf)).
double resolvent_norm(const Spectrum& spectrum, Complex lambda);

/// L2-orthonormal basis of the eigenspace at lambda sampled on the given
/// per-edge grids: values[e] is (grid size * r) x multiplicity.
struct Eigenbasis {
  double lambda = 0.0;
  int multiplicity = 0;
  std::vector<CMatrix> values;
};
Eigenbasis eigenfunctions(const BoundaryContactProblem& problem, double lambda,
                          const std::vector<std::vector<double>>& grids, double threshold = 1e-6);

/// Sum over an orthonormal eigenbasis of the squared L2 norm on each edge.
std::vector<double> eigenfunction_edge_masses(const BoundaryContactProblem& problem, double lambda,
                                              double threshold = 1e-6);

}  // namespace bcp

#endif  // BCP_SPECTRUM_HPP

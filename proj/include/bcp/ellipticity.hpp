#ifndef BCP_ELLIPTICITY_HPP
#define BCP_ELLIPTICITY_HPP

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bcp/core.hpp"
#include "bcp/problem.hpp"

namespace bcp {

struct InteriorWitness {
  std::size_t edge = 0;
  double x = 0.0;
  int xi = 1;
  Complex eigenvalue;
};

struct InteriorReport {
  bool ok = true;
  std::optional<InteriorWitness> witness;
};

/// Principal symbol eigenvalues i^m a_m(x) xi^m, xi = +-1, must avoid the
/// sector on a grid of n_x_samples interior points plus both endpoints.
InteriorReport interior_check(const BoundaryContactProblem& problem, int n_x_samples = 16);

struct ExponentCluster {
  Complex value;
  int multiplicity = 1;
};

/// Roots mu of det(P(mu) - lambda) split by the sign of Re mu.
struct ExponentSplit {
  std::vector<ExponentCluster> stable;    // Re mu < 0
  std::vector<ExponentCluster> unstable;  // Re mu > 0
  int stable_count = 0;                   // total multiplicity of stable roots
  int total = 0;
};

/// General point check: principal symbol polynomial P(mu) = sum_k P_k mu^k
/// (r x r blocks already evaluated at a numeric tangential covariable).
ExponentSplit characteristic_exponents(std::span<const CMatrix> principal, Complex lambda);
/// Graph channel: P(mu) = leading mu^order.
ExponentSplit characteristic_exponents(const CMatrix& leading, int order, Complex lambda);

struct LopatinskyMatrix {
  CMatrix matrix;                  // R_v x (sum of stable dimensions)
  std::vector<int> stable_counts;  // per channel
  bool square = false;
};

/// Coupling rows applied to a basis of decaying solutions of the frozen
/// principal ODE at each channel of the vertex.
LopatinskyMatrix lopatinsky_matrix(const BoundaryContactProblem& problem, std::size_t vertex, Complex lambda);

struct VertexReport {
  std::string id;
  double min_sigma = 0.0;  // min over the arc of sigma_min / sigma_max
  Complex argmin_lambda;
  std::vector<int> stable_counts;
  bool structural_failure = false;
  std::string witness;
};

VertexReport vertex_check(const BoundaryContactProblem& problem, std::size_t vertex, int n_samples = 64);

struct CheckOptions {
  int sector_samples = 64;
  double sigma_threshold = 1e-8;
  int x_samples = 16;
};

struct EllipticityVerdict {
  InteriorReport interior;
  std::vector<VertexReport> vertices;
  bool elliptic = false;
  int samples = 64;
  double threshold = 1e-8;
};

EllipticityVerdict check(const BoundaryContactProblem& problem, const CheckOptions& options = {});

/// Arc of unit spectral parameters sampled uniformly in argument, endpoints included.
std::vector<Complex> sector_arc(const Sector& sector, int n_samples);

}  // namespace bcp

#endif  // BCP_ELLIPTICITY_HPP

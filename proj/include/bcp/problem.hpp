#ifndef BCP_PROBLEM_HPP
#define BCP_PROBLEM_HPP

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bcp/core.hpp"

namespace bcp {

enum class Side { Left, Right };

/// One edge end as it appears in a vertex fiber, with its fiber weight.
struct Endpoint {
  std::size_t edge = 0;
  Side side = Side::Left;
  double weight = 1.0;
};

struct Edge {
  std::string id;
  double length = 1.0;
};

struct Vertex {
  std::string id;
  std::vector<Endpoint> endpoints;
  std::size_t degree() const { return endpoints.size(); }
};

/// Metric graph together with the covering of the edge ends by vertices.
struct MetricGraph {
  std::vector<Edge> edges;
  std::vector<Vertex> vertices;

  double total_length() const;
  double min_length() const;
  std::optional<std::size_t> edge_index(const std::string& id) const;
  /// L2 weight of each edge: the fiber weight of its left end (validate warns
  /// when the two ends disagree).
  std::vector<double> edge_weights() const;
};

/// A u = sum_k a_k(x) (d/dx)^k u on one edge, in the edge's own coordinate.
/// coefficients[k][p] is the r x r matrix multiplying x^p in a_k.
struct EdgeOperator {
  int order = 2;
  int rank = 1;
  std::vector<std::vector<CMatrix>> coefficients;

  CMatrix coefficient(int k, double x) const;
  bool is_constant() const;
  /// -d^2/dx^2 + potential (scalar, constant).
  static EdgeOperator laplacian(double potential = 0.0);
  /// Scalar constant-coefficient operator from a_0..a_m.
  static EdgeOperator constant(std::span<const Complex> a);
};

/// Rows sum_k M_k J_k(v) = 0 at one vertex, J_k the inward k-th derivatives
/// of the fiber ordered as in the vertex endpoint list.
struct CouplingCondition {
  std::vector<CMatrix> blocks;  // M_0 .. M_{m-1}, each R_v x (d_v r)
  Eigen::Index rows() const { return blocks.empty() ? 0 : blocks.front().rows(); }
  CMatrix stacked() const;  // [M_0 | ... | M_{m-1}]
};

/// Closed sector { r e^{i phi} : r >= 0, |phi - center| <= half_angle } (radians).
struct Sector {
  double center = kPi;
  double half_angle = kPi / 2;
  // file representation, kept so that files round-trip bit for bit
  double center_deg = 180.0;
  double half_angle_deg = 90.0;

  bool contains(Complex z) const;
  static Sector from_degrees(double center_deg, double half_angle_deg);
};

/// The pair (A, C): graph, per-edge operator, per-vertex coupling rows, sector.
struct BoundaryContactProblem {
  MetricGraph graph;
  std::vector<EdgeOperator> operators;      // one per edge
  std::vector<CouplingCondition> coupling;  // one per vertex
  Sector sector;

  int order() const { return operators.empty() ? 0 : operators.front().order; }
  int rank() const { return operators.empty() ? 0 : operators.front().rank; }
  /// Effective length in the Weyl asymptotics N(lambda) ~ (L/pi) lambda^{1/m}.
  double weyl_length() const;
  double edge_weyl_length(std::size_t edge) const;
};

struct ValidationReport {
  std::vector<std::string> errors;
  std::vector<std::string> warnings;
  bool ok() const { return errors.empty(); }
};

ValidationReport validate(const BoundaryContactProblem& problem);
/// Throws InputError listing the errors when validation fails.
void require_valid(const BoundaryContactProblem& problem);

/// Assembles raw per-endpoint jets (row k = k-th derivative in the edge
/// coordinate, column = fiber component) into the m x (d_v r) inward fiber
/// jet matrix of the vertex.
CMatrix push_forward(const BoundaryContactProblem& problem, std::size_t vertex,
                     std::span<const std::optional<CMatrix>> endpoint_jets);
/// Inverse of push_forward.
std::vector<CMatrix> pull_back(const BoundaryContactProblem& problem, std::size_t vertex, const CMatrix& fiber_jets);
/// Weighted fiber norm squared sum_p w_p |u_p|^2 of a fiber vector (d_v r entries).
double fiber_norm2(const BoundaryContactProblem& problem, std::size_t vertex, const CVector& fiber);

/// Residual sum_k M_{v,k} J_k for fiber jets shaped m x (d_v r).
CVector apply_coupling(const BoundaryContactProblem& problem, std::size_t vertex, const CMatrix& fiber_jets);

struct SelfAdjointnessReport {
  bool symmetric = false;
  bool positive_hint = false;
  std::string method;
  /// Largest relative Green-identity defect (green-identity method only).
  double defect = 0.0;
  /// Lower bound of the quadratic form when it could be derived.
  std::optional<double> lower_bound;
};

SelfAdjointnessReport self_adjointness_report(const BoundaryContactProblem& problem);

struct GreenDefect {
  double max_defect = 0.0;        // |<Au,v> - <u,Av>| / (||u|| ||v||)
  double max_scaled_defect = 0.0;  // same over ||Au|| ||v|| + ||u|| ||Av||
  double min_rayleigh = 0.0;       // min Re <Au,u> / ||u||^2
  int admissible_dimension = 0;
};

/// Green-identity defect over `pairs` pseudo-random trigonometric-polynomial
/// pairs satisfying the coupling rows (deterministic for a given seed).
GreenDefect green_identity_defect(const BoundaryContactProblem& problem, int pairs = 50, unsigned seed = 20240611u);

/// SHA-256 of the canonical serialization (hex).
std::string canonical_hash(const BoundaryContactProblem& problem);

}  // namespace bcp

#endif  // BCP_PROBLEM_HPP

#include "bcp/problem.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "bcp/polynomial.hpp"
#include "bcp/quadrature.hpp"

namespace bcp {

double MetricGraph::total_length() const {
  double total = 0.0;
  for (const auto& e : edges) total += e.length;
  return total;
}

double MetricGraph::min_length() const {
  double lo = std::numeric_limits<double>::infinity();
  for (const auto& e : edges) lo = std::min(lo, e.length);
  return lo;
}

std::vector<double> MetricGraph::edge_weights() const {
  std::vector<double> w(edges.size(), 1.0);
  for (const auto& v : vertices)
    for (const auto& ep : v.endpoints)
      if (ep.side == Side::Left && ep.edge < w.size()) w[ep.edge] = ep.weight;
  return w;
}

std::optional<std::size_t> MetricGraph::edge_index(const std::string& id) const {
  for (std::size_t i = 0; i < edges.size(); ++i)
    if (edges[i].id == id) return i;
  return std::nullopt;
}

CMatrix EdgeOperator::coefficient(int k, double x) const {
  const auto& poly = coefficients.at(static_cast<std::size_t>(k));
  if (poly.empty()) return CMatrix::Zero(rank, rank);
  return evaluate_matrix_polynomial<Complex>(std::span<const CMatrix>(poly), x);
}

bool EdgeOperator::is_constant() const {
  for (const auto& poly : coefficients)
    for (std::size_t p = 1; p < poly.size(); ++p)
      if (!poly[p].isZero(0.0)) return false;
  return true;
}

EdgeOperator EdgeOperator::laplacian(double potential) {
  const Complex a[] = {Complex(potential), Complex(0.0), Complex(-1.0)};
  return constant(a);
}

EdgeOperator EdgeOperator::constant(std::span<const Complex> a) {
  EdgeOperator op;
  op.order = static_cast<int>(a.size()) - 1;
  op.rank = 1;
  for (const auto& c : a) op.coefficients.push_back({CMatrix::Constant(1, 1, c)});
  return op;
}

CMatrix CouplingCondition::stacked() const {
  if (blocks.empty()) return CMatrix();
  const Eigen::Index cols = blocks.front().cols();
  CMatrix out(rows(), cols * static_cast<Eigen::Index>(blocks.size()));
  for (std::size_t k = 0; k < blocks.size(); ++k) out.middleCols(static_cast<Eigen::Index>(k) * cols, cols) = blocks[k];
  return out;
}

bool Sector::contains(Complex z) const {
  if (z == Complex(0.0)) return true;
  const double d = std::remainder(std::arg(z) - center, 2.0 * kPi);
  return std::abs(d) <= half_angle;
}

Sector Sector::from_degrees(double center_deg, double half_angle_deg) {
  return Sector{center_deg * kPi / 180.0, half_angle_deg * kPi / 180.0, center_deg, half_angle_deg};
}

namespace {

// Eigenvalues of the principal symbol factor i^m a_m(x).
Eigen::VectorXcd symbol_factors(const EdgeOperator& op, double x) {
  const Complex im_pow = ipow(Complex(0.0, 1.0), op.order);
  CMatrix s = im_pow * op.coefficient(op.order, x);
  return Eigen::ComplexEigenSolver<CMatrix>(s, false).eigenvalues();
}

}  // namespace

double BoundaryContactProblem::edge_weyl_length(std::size_t e) const {
  const auto rule = gauss_legendre(16);
  const double len = graph.edges[e].length;
  const auto& op = operators[e];
  double total = 0.0;
  for (int i = 0; i < 16; ++i) {
    const double x = 0.5 * len * (rule.nodes[i] + 1.0);
    const auto nu = symbol_factors(op, x);
    for (Eigen::Index j = 0; j < nu.size(); ++j)
      total += 0.5 * len * rule.weights[i] * std::pow(std::abs(nu[j]), -1.0 / op.order);
  }
  return total;
}

double BoundaryContactProblem::weyl_length() const {
  double total = 0.0;
  for (std::size_t e = 0; e < graph.edges.size(); ++e) total += edge_weyl_length(e);
  return total;
}

ValidationReport validate(const BoundaryContactProblem& problem) {
  ValidationReport report;
  auto error = [&](const std::string& msg) { report.errors.push_back(msg); };
  const auto& g = problem.graph;

  if (g.edges.empty()) error("graph has no edges");
  std::set<std::string> ids;
  for (const auto& e : g.edges) {
    if (!ids.insert(e.id).second) error("duplicate edge id \"" + e.id + "\"");
    if (!(std::isfinite(e.length) && e.length > 0.0)) error("edge " + e.id + ": length must be positive and finite");
  }
  ids.clear();
  std::map<std::pair<std::size_t, int>, int> cover;
  for (const auto& v : g.vertices) {
    if (!ids.insert(v.id).second) error("duplicate vertex id \"" + v.id + "\"");
    if (v.endpoints.empty()) error("vertex " + v.id + ": degree must be at least 1");
    for (const auto& p : v.endpoints) {
      if (p.edge >= g.edges.size()) {
        error("vertex " + v.id + ": endpoint refers to a missing edge");
        continue;
      }
      if (!(std::isfinite(p.weight) && p.weight > 0.0))
        error("vertex " + v.id + ": endpoint weight must be positive and finite");
      ++cover[{p.edge, p.side == Side::Left ? 0 : 1}];
    }
  }
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    for (int side = 0; side < 2; ++side) {
      const int n = cover.count({e, side}) ? cover[{e, side}] : 0;
      const std::string name = g.edges[e].id + (side == 0 ? ".left" : ".right");
      if (n == 0) error("endpoint " + name + " not covered by any vertex");
      if (n > 1) error("endpoint multiply covered: " + name);
    }
  }
  if (report.ok()) {
    std::map<std::pair<std::size_t, int>, double> weight;
    for (const auto& v : g.vertices)
      for (const auto& p : v.endpoints) weight[{p.edge, p.side == Side::Left ? 0 : 1}] = p.weight;
    for (std::size_t e = 0; e < g.edges.size(); ++e)
      if (weight[{e, 0}] != weight[{e, 1}])
        report.warnings.push_back("edge " + g.edges[e].id + ": end weights differ; its L2 weight is the left one");
  }

  if (problem.operators.size() != g.edges.size()) {
    error("expected one operator per edge");
    return report;
  }
  const int m = problem.order();
  const int r = problem.rank();
  if (m <= 0 || m % 2 != 0) error("order must be an even positive integer");
  if (r < 1) error("fiber rank must be at least 1");
  if (!report.ok()) return report;

  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    const auto& op = problem.operators[e];
    const std::string name = "edge " + g.edges[e].id;
    if (op.order != m || op.rank != r) {
      error(name + ": operator order/rank differ from the problem's");
      continue;
    }
    if (op.coefficients.size() != static_cast<std::size_t>(m + 1)) {
      error(name + ": expected " + std::to_string(m + 1) + " coefficients a_0..a_m");
      continue;
    }
    bool shapes_ok = true;
    for (const auto& poly : op.coefficients)
      for (const auto& c : poly) {
        if (c.rows() != r || c.cols() != r) shapes_ok = false;
        else if (!c.allFinite()) error(name + ": non-finite coefficient");
      }
    if (!shapes_ok) {
      error(name + ": coefficient matrices must be " + std::to_string(r) + "x" + std::to_string(r));
      continue;
    }
    if (op.coefficients[m].empty()) {
      error(name + ": degenerate leading coefficient");
      continue;
    }
    const int samples = 16;
    for (int i = 0; i <= samples + 1; ++i) {
      const double x = g.edges[e].length * i / (samples + 1);
      Eigen::JacobiSVD<CMatrix> svd(op.coefficient(m, x));
      const auto s = svd.singularValues();
      if (!(s.minCoeff() > 1e-12 * std::max(1.0, s.maxCoeff()))) {
        std::ostringstream os;
        os << name << ": degenerate leading coefficient at x = " << x;
        error(os.str());
        break;
      }
    }
  }

  if (problem.coupling.size() != g.vertices.size()) {
    error("expected one coupling condition per vertex");
    return report;
  }
  for (std::size_t v = 0; v < g.vertices.size(); ++v) {
    const auto& vx = g.vertices[v];
    const auto& cc = problem.coupling[v];
    const std::string name = "vertex " + vx.id;
    const Eigen::Index cols = static_cast<Eigen::Index>(vx.degree()) * r;
    if (cc.blocks.size() != static_cast<std::size_t>(m)) {
      error(name + ": expected " + std::to_string(m) + " blocks M_0..M_{m-1}");
      continue;
    }
    bool shapes_ok = true;
    for (const auto& b : cc.blocks)
      if (b.rows() != cc.rows() || b.cols() != cols) shapes_ok = false;
    if (!shapes_ok) {
      error(name + ": block shapes inconsistent with degree " + std::to_string(vx.degree()) + " and rank " +
            std::to_string(r));
      continue;
    }
    const CMatrix stacked = cc.stacked();
    if (!stacked.allFinite()) {
      error(name + ": non-finite coupling entry");
      continue;
    }
    if (cc.rows() > 0) {
      Eigen::JacobiSVD<CMatrix> svd(stacked);
      const auto s = svd.singularValues();
      const Eigen::Index rank = (s.array() > 1e-12 * std::max(1.0, s(0))).count();
      if (rank < cc.rows()) error(name + ": coupling rows are not of full row rank");
    }
    const Eigen::Index expected = (m / 2) * cols;
    if (cc.rows() != expected) {
      std::ostringstream os;
      os << name << ": non-square: expected " << expected << " rows, got " << cc.rows();
      report.warnings.push_back(os.str());
    }
  }

  if (!(problem.sector.half_angle > 0.0 && problem.sector.half_angle <= kPi) ||
      !std::isfinite(problem.sector.center))
    error("sector half-angle must lie in (0, 180] degrees");
  return report;
}

void require_valid(const BoundaryContactProblem& problem) {
  const auto report = validate(problem);
  if (report.ok()) return;
  std::string msg = "invalid problem:";
  for (const auto& e : report.errors) msg += "\n  " + e;
  throw InputError(msg);
}

CMatrix push_forward(const BoundaryContactProblem& problem, std::size_t vertex,
                     std::span<const std::optional<CMatrix>> endpoint_jets) {
  const auto& vx = problem.graph.vertices.at(vertex);
  const int m = problem.order();
  const int r = problem.rank();
  if (endpoint_jets.size() != vx.degree()) throw InputError("incomplete fiber data");
  CMatrix fiber(m, static_cast<Eigen::Index>(vx.degree()) * r);
  for (std::size_t p = 0; p < vx.degree(); ++p) {
    if (!endpoint_jets[p]) throw InputError("incomplete fiber data");
    const CMatrix& jet = *endpoint_jets[p];
    if (jet.rows() != m || jet.cols() != r) throw InputError("endpoint jet shape mismatch");
    for (int k = 0; k < m; ++k) {
      const double sign = (vx.endpoints[p].side == Side::Right && k % 2 == 1) ? -1.0 : 1.0;
      fiber.block(k, static_cast<Eigen::Index>(p) * r, 1, r) = sign * jet.row(k);
    }
  }
  return fiber;
}

std::vector<CMatrix> pull_back(const BoundaryContactProblem& problem, std::size_t vertex, const CMatrix& fiber_jets) {
  const auto& vx = problem.graph.vertices.at(vertex);
  const int m = problem.order();
  const int r = problem.rank();
  if (fiber_jets.rows() != m || fiber_jets.cols() != static_cast<Eigen::Index>(vx.degree()) * r)
    throw InputError("fiber jet shape mismatch");
  std::vector<CMatrix> out;
  for (std::size_t p = 0; p < vx.degree(); ++p) {
    CMatrix jet(m, r);
    for (int k = 0; k < m; ++k) {
      const double sign = (vx.endpoints[p].side == Side::Right && k % 2 == 1) ? -1.0 : 1.0;
      jet.row(k) = sign * fiber_jets.block(k, static_cast<Eigen::Index>(p) * r, 1, r);
    }
    out.push_back(std::move(jet));
  }
  return out;
}

double fiber_norm2(const BoundaryContactProblem& problem, std::size_t vertex, const CVector& fiber) {
  const auto& vx = problem.graph.vertices.at(vertex);
  const int r = problem.rank();
  if (fiber.size() != static_cast<Eigen::Index>(vx.degree()) * r) throw InputError("fiber vector shape mismatch");
  double acc = 0.0;
  for (std::size_t p = 0; p < vx.degree(); ++p)
    acc += vx.endpoints[p].weight * fiber.segment(static_cast<Eigen::Index>(p) * r, r).squaredNorm();
  return acc;
}

CVector apply_coupling(const BoundaryContactProblem& problem, std::size_t vertex, const CMatrix& fiber_jets) {
  const auto& cc = problem.coupling.at(vertex);
  const int m = problem.order();
  const Eigen::Index cols = static_cast<Eigen::Index>(problem.graph.vertices.at(vertex).degree()) * problem.rank();
  if (fiber_jets.rows() != m || fiber_jets.cols() != cols) throw InputError("fiber jet shape mismatch");
  CVector residual = CVector::Zero(cc.rows());
  for (int k = 0; k < m; ++k) residual += cc.blocks[k] * fiber_jets.row(k).transpose();
  return residual;
}

}  // namespace bcp

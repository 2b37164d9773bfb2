#include "bcp/ellipticity.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bcp/polynomial.hpp"

namespace bcp {

namespace {

constexpr double kClusterTol = 1e-7;

CMatrix channel_leading(const BoundaryContactProblem& problem, const Endpoint& ep) {
  const auto& op = problem.operators[ep.edge];
  const double x = ep.side == Side::Left ? 0.0 : problem.graph.edges[ep.edge].length;
  // Inward coordinate at a right end flips d/dx; (-1)^m = 1 for even m.
  return op.coefficient(op.order, x);
}

std::vector<CMatrix> shifted_blocks(std::span<const CMatrix> principal, Complex lambda) {
  std::vector<CMatrix> blocks(principal.begin(), principal.end());
  const Eigen::Index r = blocks.back().rows();
  if (blocks.front().size() == 0) blocks.front() = CMatrix::Zero(r, r);
  blocks.front() -= lambda * CMatrix::Identity(r, r);
  return blocks;
}

// Jets at x = 0 (rows k*r + c) spanning the decaying solutions.
CMatrix stable_jet_basis(std::span<const CMatrix> principal, Complex lambda, const ExponentSplit& split) {
  const int m = static_cast<int>(principal.size()) - 1;
  const Eigen::Index r = principal.back().rows();
  CMatrix basis(m * r, split.stable_count);
  Eigen::Index col = 0;
  if (r == 1) {
    for (const auto& c : split.stable)
      for (int p = 0; p < c.multiplicity; ++p, ++col)
        for (int k = 0; k < m; ++k) basis(k, col) = jordan_jet_at_origin(c.value, p, k);
    return basis;
  }
  const auto blocks = shifted_blocks(principal, lambda);
  const CMatrix comp = block_companion<Complex>(std::span<const CMatrix>(blocks));
  const CMatrix id = CMatrix::Identity(comp.rows(), comp.cols());
  for (const auto& c : split.stable) {
    CMatrix power = id;
    for (int i = 0; i < c.multiplicity; ++i) power = (power * (comp - c.value * id)).eval();
    Eigen::JacobiSVD<CMatrix> svd(power, Eigen::ComputeFullV);
    basis.middleCols(col, c.multiplicity) = svd.matrixV().rightCols(c.multiplicity);
    col += c.multiplicity;
  }
  return basis;
}

}  // namespace

std::vector<Complex> sector_arc(const Sector& sector, int n_samples) {
  std::vector<Complex> out;
  n_samples = std::max(n_samples, 2);
  for (int j = 0; j < n_samples; ++j) {
    const double phi = sector.center - sector.half_angle + 2.0 * sector.half_angle * j / (n_samples - 1);
    out.push_back(std::polar(1.0, phi));
  }
  return out;
}

InteriorReport interior_check(const BoundaryContactProblem& problem, int n_x_samples) {
  require_valid(problem);
  InteriorReport report;
  const int m = problem.order();
  const Complex im_pow = ipow(Complex(0.0, 1.0), m);
  for (std::size_t e = 0; e < problem.graph.edges.size(); ++e) {
    const double len = problem.graph.edges[e].length;
    for (int i = 0; i <= n_x_samples + 1; ++i) {
      const double x = len * i / (n_x_samples + 1);
      const CMatrix lead = problem.operators[e].coefficient(m, x);
      Eigen::JacobiSVD<CMatrix> svd(lead);
      if (!(svd.singularValues().minCoeff() > 1e-12 * std::max(1.0, svd.singularValues().maxCoeff())))
        throw DomainError("degenerate leading coefficient");
      const Eigen::VectorXcd nu = Eigen::ComplexEigenSolver<CMatrix>(CMatrix(im_pow * lead), false).eigenvalues();
      for (int xi : {1, -1}) {
        for (Eigen::Index j = 0; j < nu.size(); ++j) {
          const Complex value = nu[j] * ipow(static_cast<double>(xi), m);
          if (problem.sector.contains(value)) {
            report.ok = false;
            report.witness = InteriorWitness{e, x, xi, value};
            return report;
          }
        }
      }
    }
  }
  return report;
}

ExponentSplit characteristic_exponents(std::span<const CMatrix> principal, Complex lambda) {
  if (principal.size() < 2) throw InputError("principal symbol needs order >= 1");
  const auto blocks = shifted_blocks(principal, lambda);
  {
    Eigen::JacobiSVD<CMatrix> svd(blocks.back());
    if (!(svd.singularValues().minCoeff() > 1e-12 * std::max(1.0, svd.singularValues().maxCoeff())))
      throw DomainError("degenerate leading coefficient");
  }
  const CMatrix comp = block_companion<Complex>(std::span<const CMatrix>(blocks));
  const Eigen::VectorXcd roots = Eigen::ComplexEigenSolver<CMatrix>(comp, false).eigenvalues();
  std::vector<Complex> list(roots.data(), roots.data() + roots.size());
  const auto clusters = cluster_roots<Complex>(std::span<const Complex>(list), kClusterTol);
  double scale = 0.0;
  for (const auto& z : list) scale = std::max(scale, std::abs(z));
  if (scale == 0.0) scale = 1.0;

  ExponentSplit split;
  split.total = static_cast<int>(list.size());
  for (const auto& c : clusters) {
    if (std::abs(c.value.real()) <= kClusterTol * scale) {
      std::ostringstream os;
      os << "neutral exponent: not parameter-elliptic at lambda = " << lambda;
      throw DomainError(os.str());
    }
    if (c.value.real() < 0.0) {
      split.stable.push_back({c.value, c.multiplicity});
      split.stable_count += c.multiplicity;
    } else {
      split.unstable.push_back({c.value, c.multiplicity});
    }
  }
  return split;
}

ExponentSplit characteristic_exponents(const CMatrix& leading, int order, Complex lambda) {
  std::vector<CMatrix> principal(order + 1, CMatrix::Zero(leading.rows(), leading.cols()));
  principal.back() = leading;
  return characteristic_exponents(std::span<const CMatrix>(principal), lambda);
}

LopatinskyMatrix lopatinsky_matrix(const BoundaryContactProblem& problem, std::size_t vertex, Complex lambda) {
  const auto& vx = problem.graph.vertices.at(vertex);
  const auto& cc = problem.coupling.at(vertex);
  const int m = problem.order();
  const int r = problem.rank();

  std::vector<CMatrix> columns;
  LopatinskyMatrix out;
  Eigen::Index total = 0;
  for (const auto& ep : vx.endpoints) {
    std::vector<CMatrix> principal(m + 1, CMatrix::Zero(r, r));
    principal.back() = channel_leading(problem, ep);
    const auto split = characteristic_exponents(std::span<const CMatrix>(principal), lambda);
    out.stable_counts.push_back(split.stable_count);
    columns.push_back(stable_jet_basis(std::span<const CMatrix>(principal), lambda, split));
    total += split.stable_count;
  }
  out.matrix = CMatrix::Zero(cc.rows(), total);
  Eigen::Index col = 0;
  for (std::size_t p = 0; p < vx.degree(); ++p) {
    const CMatrix& jets = columns[p];
    for (Eigen::Index j = 0; j < jets.cols(); ++j, ++col)
      for (int k = 0; k < m; ++k)
        out.matrix.col(col) +=
            cc.blocks[k].middleCols(static_cast<Eigen::Index>(p) * r, r) * jets.block(k * r, j, r, 1);
  }
  out.square = out.matrix.rows() == out.matrix.cols();
  return out;
}

VertexReport vertex_check(const BoundaryContactProblem& problem, std::size_t vertex, int n_samples) {
  VertexReport report;
  report.id = problem.graph.vertices.at(vertex).id;
  report.min_sigma = 1.0;
  bool first = true;
  for (const Complex lambda : sector_arc(problem.sector, n_samples)) {
    LopatinskyMatrix lop;
    try {
      lop = lopatinsky_matrix(problem, vertex, lambda);
    } catch (const DomainError& e) {
      report.structural_failure = true;
      report.min_sigma = 0.0;
      report.argmin_lambda = lambda;
      report.witness = e.what();
      return report;
    }
    if (first) {
      report.stable_counts = lop.stable_counts;
      first = false;
    } else if (lop.stable_counts != report.stable_counts) {
      report.structural_failure = true;
      report.min_sigma = 0.0;
      report.argmin_lambda = lambda;
      report.witness = "stable exponent count changes along the arc";
      return report;
    }
    if (!lop.square) {
      std::ostringstream os;
      os << "structural: " << lop.matrix.rows() << " coupling rows against " << lop.matrix.cols()
         << " decaying solutions";
      report.structural_failure = true;
      report.min_sigma = 0.0;
      report.argmin_lambda = lambda;
      report.witness = os.str();
      return report;
    }
    Eigen::JacobiSVD<CMatrix> svd(lop.matrix);
    const auto s = svd.singularValues();
    const double ratio = s.size() == 0 || s(0) == 0.0 ? 0.0 : s(s.size() - 1) / s(0);
    if (ratio < report.min_sigma || (ratio == report.min_sigma && report.argmin_lambda == Complex(0.0))) {
      report.min_sigma = ratio;
      report.argmin_lambda = lambda;
    }
  }
  return report;
}

EllipticityVerdict check(const BoundaryContactProblem& problem, const CheckOptions& options) {
  require_valid(problem);
  EllipticityVerdict verdict;
  verdict.samples = options.sector_samples;
  verdict.threshold = options.sigma_threshold;
  try {
    verdict.interior = interior_check(problem, options.x_samples);
  } catch (const DomainError& e) {
    verdict.interior.ok = false;
  }
  verdict.elliptic = verdict.interior.ok;
  for (std::size_t v = 0; v < problem.graph.vertices.size(); ++v) {
    auto report = vertex_check(problem, v, options.sector_samples);
    if (report.structural_failure || !(report.min_sigma > options.sigma_threshold)) verdict.elliptic = false;
    verdict.vertices.push_back(std::move(report));
  }
  return verdict;
}

}  // namespace bcp

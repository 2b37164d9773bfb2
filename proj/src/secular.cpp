#include "bcp/secular.hpp"

#include <algorithm>
#include <cmath>

namespace bcp {

Eigen::Index SecularMatrix::edge_offset(std::size_t edge) const {
  Eigen::Index off = 0;
  for (std::size_t e = 0; e < edge; ++e) off += systems[e].size();
  return off;
}

SecularMatrix secular_matrix(const BoundaryContactProblem& problem, Complex lambda, const FundamentalOptions& options) {
  std::vector<FundamentalSystem> systems;
  systems.reserve(problem.graph.edges.size());
  for (std::size_t e = 0; e < problem.graph.edges.size(); ++e)
    systems.push_back(fundamental_system(problem, e, lambda, options));
  return assemble_secular(problem, std::move(systems));
}

SecularMatrix assemble_secular(const BoundaryContactProblem& problem, std::vector<FundamentalSystem> systems) {
  const int m = problem.order();
  const int r = problem.rank();
  const std::size_t ne = problem.graph.edges.size();
  SecularMatrix g;
  g.order = m;
  g.rank = r;
  g.lambda = systems.empty() ? Complex(0.0) : systems.front().lambda;
  g.systems = std::move(systems);
  Eigen::Index cols = 0;
  for (const auto& fs : g.systems) cols += fs.size();
  Eigen::Index rows = 0;
  for (const auto& cc : problem.coupling) rows += cc.rows();

  g.matrix = CMatrix::Zero(rows, cols);
  g.column_scale.resize(cols);
  std::vector<Eigen::Index> offset(ne + 1, 0);
  for (std::size_t e = 0; e < ne; ++e) {
    offset[e + 1] = offset[e] + g.systems[e].size();
    g.column_scale.segment(offset[e], g.systems[e].size()) = g.systems[e].scale;
  }
  Eigen::Index row0 = 0;
  for (std::size_t v = 0; v < problem.graph.vertices.size(); ++v) {
    const auto& vx = problem.graph.vertices[v];
    const auto& cc = problem.coupling[v];
    for (std::size_t p = 0; p < vx.degree(); ++p) {
      const auto& ep = vx.endpoints[p];
      const auto& fs = g.systems[ep.edge];
      const CMatrix& jets = ep.side == Side::Left ? fs.left : fs.right;
      for (int k = 0; k < m; ++k)
        g.matrix.block(row0, offset[ep.edge], cc.rows(), fs.size()) +=
            cc.blocks[k].middleCols(static_cast<Eigen::Index>(p) * r, r) * jets.middleRows(k * r, r);
    }
    row0 += cc.rows();
  }

  g.square = rows == cols;
  if (g.square && rows > 0) {
    Eigen::PartialPivLU<CMatrix> lu(g.matrix);
    const CMatrix& u = lu.matrixLU();
    Complex acc(0.0, 0.0);
    for (Eigen::Index i = 0; i < rows; ++i) acc += std::log(u(i, i));
    if (lu.permutationP().determinant() < 0) acc += Complex(0.0, kPi);
    acc += g.column_scale.sum();
    for (const auto& fs : g.systems) acc -= fs.left_logdet;
    g.log_char = acc;
  }
  return g;
}

Equilibrated equilibrate(const SecularMatrix& g) {
  Equilibrated out;
  out.matrix = g.matrix;
  out.row_factor = RVector::Ones(g.matrix.rows());
  out.column_factor = RVector::Ones(g.matrix.cols());
  // Columns are normalized by the jets of the solutions they stand for, not by
  // the coupled entries, which may cancel exactly at an eigenvalue.
  for (std::size_t e = 0; e < g.systems.size(); ++e) {
    const auto& fs = g.systems[e];
    const Eigen::Index off = g.edge_offset(e);
    const Eigen::Index n = fs.size();
    const double kappa = std::max(1.0, std::pow(std::abs(fs.lambda), 1.0 / g.order));
    for (Eigen::Index j = 0; j < n; ++j) {
      double big = 0.0;
      for (Eigen::Index i = 0; i < fs.left.rows(); ++i) {
        const double w = std::pow(kappa, -static_cast<double>(i / g.rank));
        big = std::max({big, w * std::abs(fs.left(i, j)), w * std::abs(fs.right(i, j))});
      }
      if (big > 0.0) {
        out.column_factor(off + j) = 1.0 / big;
        out.matrix.col(off + j) /= big;
      }
    }
  }
  for (Eigen::Index i = 0; i < out.matrix.rows(); ++i) {
    const double big = out.matrix.row(i).cwiseAbs().maxCoeff();
    if (big > 0.0) {
      out.row_factor(i) = 1.0 / big;
      out.matrix.row(i) /= big;
    }
  }
  return out;
}

RVector normalized_singular_values(const SecularMatrix& g) {
  const auto eq = equilibrate(g);
  Eigen::JacobiSVD<CMatrix> svd(eq.matrix);
  RVector s = svd.singularValues();
  if (s.size() == 0) return s;
  // Fewer rows than columns leaves structural null directions.
  const Eigen::Index full = g.matrix.cols();
  RVector out = RVector::Zero(full);
  if (s(0) > 0.0) out.head(s.size()) = s / s(0);
  return out;
}

int nullity(const SecularMatrix& g, double threshold) {
  const RVector s = normalized_singular_values(g);
  return static_cast<int>((s.array() < threshold).count());
}

int multiplicity(const BoundaryContactProblem& problem, double lambda, double threshold) {
  FundamentalOptions options;
  options.kind = BasisKind::Identity;
  return nullity(secular_matrix(problem, lambda, options), threshold);
}

}  // namespace bcp

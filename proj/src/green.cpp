#include <algorithm>
#include <cmath>
#include <random>

#include "bcp/problem.hpp"
#include "bcp/quadrature.hpp"

namespace bcp {

namespace {

bool is_plain_second_order(const BoundaryContactProblem& problem) {
  if (problem.order() != 2) return false;
  const int r = problem.rank();
  const CMatrix minus_id = -CMatrix::Identity(r, r);
  for (const auto& op : problem.operators) {
    const auto& a2 = op.coefficients[2];
    if ((a2.front() - minus_id).norm() > 1e-14) return false;
    for (std::size_t p = 1; p < a2.size(); ++p)
      if (!a2[p].isZero(0.0)) return false;
    for (const auto& c : op.coefficients[1])
      if (!c.isZero(0.0)) return false;
    for (const auto& c : op.coefficients[0])
      if ((c - c.adjoint()).norm() > 1e-14 * std::max(1.0, c.norm())) return false;
  }
  return true;
}

double min_potential(const BoundaryContactProblem& problem) {
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t e = 0; e < problem.graph.edges.size(); ++e) {
    const auto& op = problem.operators[e];
    const int samples = op.is_constant() ? 1 : 65;
    for (int i = 0; i < samples; ++i) {
      const double x = samples == 1 ? 0.0 : problem.graph.edges[e].length * i / (samples - 1);
      const CMatrix a0 = op.coefficient(0, x);
      const CMatrix herm = 0.5 * (a0 + a0.adjoint());
      lo = std::min(lo, Eigen::SelfAdjointEigenSolver<CMatrix>(herm).eigenvalues().minCoeff());
    }
  }
  return lo;
}

// Algebraic criterion for -u'' + a_0 u: rows (P, Q) acting on (J_0, J_1).
SelfAdjointnessReport lagrangian_report(const BoundaryContactProblem& problem) {
  SelfAdjointnessReport report;
  report.method = "m2-lagrangian";
  report.symmetric = true;
  const int r = problem.rank();
  double kappa = 0.0;
  for (std::size_t v = 0; v < problem.graph.vertices.size(); ++v) {
    const auto& vx = problem.graph.vertices[v];
    const auto& cc = problem.coupling[v];
    const Eigen::Index d = static_cast<Eigen::Index>(vx.degree()) * r;
    const CMatrix& p = cc.blocks[0];
    const CMatrix& q = cc.blocks[1];
    const CMatrix pq = cc.stacked();
    Eigen::JacobiSVD<CMatrix> svd(pq, Eigen::ComputeFullV);
    const auto s = svd.singularValues();
    const Eigen::Index rank = (s.array() > 1e-12 * std::max(1.0, s.size() ? s(0) : 0.0)).count();
    if (cc.rows() != d || rank != d) {
      report.symmetric = false;
      continue;
    }
    RVector w(d);
    for (std::size_t i = 0; i < vx.degree(); ++i)
      w.segment(static_cast<Eigen::Index>(i) * r, r).setConstant(vx.endpoints[i].weight);
    // Green form sum_p w_p (J1 K0^* - J0 K1^*) is standard in (J0, W J1)
    const RVector winv = w.cwiseInverse();
    const CMatrix lhs = p * winv.asDiagonal() * q.adjoint();
    const CMatrix rhs = q * winv.asDiagonal() * p.adjoint();
    const double scale = std::max(1.0, p.norm() * q.norm() * winv.maxCoeff());
    if ((lhs - rhs).norm() > 1e-10 * scale) {
      report.symmetric = false;
      continue;
    }
    // Boundary form J_0^* J_1 on the admissible subspace ker[P|Q].
    const CMatrix kernel = svd.matrixV().rightCols(d);
    const CMatrix top = kernel.topRows(d);
    const CMatrix bottom = kernel.bottomRows(d);
    const CMatrix h = 0.5 * (top.adjoint() * w.asDiagonal() * bottom + bottom.adjoint() * w.asDiagonal() * top);
    Eigen::JacobiSVD<CMatrix> tsvd(top, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto ts = tsvd.singularValues();
    const Eigen::Index keep = (ts.array() > 1e-10).count();
    if (keep == 0) continue;
    const CMatrix vr = tsvd.matrixV().leftCols(keep);
    const RVector inv = ts.head(keep).cwiseInverse();
    const CMatrix reduced = inv.asDiagonal() * (vr.adjoint() * h * vr) * inv.asDiagonal();
    const CMatrix herm = 0.5 * (reduced + reduced.adjoint());
    const double lo = Eigen::SelfAdjointEigenSolver<CMatrix>(herm).eigenvalues().minCoeff();
    kappa = std::max(kappa, -lo);
  }
  if (!report.symmetric) return report;
  if (kappa < 1e-12) kappa = 0.0;
  const double a0 = min_potential(problem);
  report.positive_hint = kappa == 0.0 && a0 >= 0.0;
  report.lower_bound = a0 - kappa * (kappa + 2.0 / problem.graph.min_length());
  return report;
}

// k-th raw derivative of basis function b (component stripped) at x.
double trig_derivative(int b, int k, double omega_unit, double x) {
  // b = 0: constant; b = 2n-1: cos(n w x); b = 2n: sin(n w x)
  if (b == 0) return k == 0 ? 1.0 : 0.0;
  const int n = (b + 1) / 2;
  const double omega = n * omega_unit;
  const double phase = omega * x + k * kPi / 2.0;
  const double amp = std::pow(omega, k);
  return (b % 2 == 1) ? amp * std::cos(phase) : amp * std::sin(phase);
}

}  // namespace

GreenDefect green_identity_defect(const BoundaryContactProblem& problem, int pairs, unsigned seed) {
  require_valid(problem);
  const int m = problem.order();
  const int r = problem.rank();
  const int nfreq = std::max(6, m + 4);
  const int scalar_count = 2 * nfreq + 1;
  const int per_edge = scalar_count * r;
  const std::size_t ne = problem.graph.edges.size();
  const Eigen::Index total = static_cast<Eigen::Index>(ne) * per_edge;

  // Coupling constraints on the coefficient vector.
  Eigen::Index nrows = 0;
  for (const auto& cc : problem.coupling) nrows += cc.rows();
  CMatrix constraints = CMatrix::Zero(nrows, total);
  Eigen::Index row0 = 0;
  for (std::size_t v = 0; v < problem.graph.vertices.size(); ++v) {
    const auto& vx = problem.graph.vertices[v];
    const auto& cc = problem.coupling[v];
    for (std::size_t p = 0; p < vx.degree(); ++p) {
      const auto& ep = vx.endpoints[p];
      const double len = problem.graph.edges[ep.edge].length;
      const double x = ep.side == Side::Left ? 0.0 : len;
      for (int b = 0; b < scalar_count; ++b)
        for (int c = 0; c < r; ++c) {
          const Eigen::Index col = static_cast<Eigen::Index>(ep.edge) * per_edge + b * r + c;
          for (int k = 0; k < m; ++k) {
            const double sign = (ep.side == Side::Right && k % 2 == 1) ? -1.0 : 1.0;
            const double jet = sign * trig_derivative(b, k, kPi / len, x);
            constraints.block(row0, col, cc.rows(), 1) +=
                jet * cc.blocks[k].col(static_cast<Eigen::Index>(p) * r + c);
          }
        }
    }
    row0 += cc.rows();
  }
  Eigen::JacobiSVD<CMatrix> svd(constraints, Eigen::ComputeFullV);
  const auto s = svd.singularValues();
  const double smax = s.size() ? s(0) : 1.0;
  const Eigen::Index rank = (s.array() > 1e-10 * std::max(1.0, smax)).count();
  const CMatrix null = svd.matrixV().rightCols(total - rank);

  // Quadrature matrices: S = <A basis, basis>, G = <basis, basis>, H = <A basis, A basis>.
  CMatrix S = CMatrix::Zero(total, total), G = S, H = S;
  const auto edge_w = problem.graph.edge_weights();
  for (std::size_t e = 0; e < ne; ++e) {
    const double len = problem.graph.edges[e].length;
    const auto& op = problem.operators[e];
    const auto rule = composite_gauss_legendre(0.0, len, std::max(4, nfreq), 16);
    const Eigen::Index n = static_cast<Eigen::Index>(rule.nodes.size());
    CMatrix val = CMatrix::Zero(n * r, per_edge), aval = val;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double x = rule.nodes[i];
      std::vector<CMatrix> a(m + 1);
      for (int k = 0; k <= m; ++k) a[k] = op.coefficient(k, x);
      for (int b = 0; b < scalar_count; ++b) {
        for (int c = 0; c < r; ++c) {
          const Eigen::Index col = b * r + c;
          val(i * r + c, col) = trig_derivative(b, 0, kPi / len, x);
          for (int k = 0; k <= m; ++k)
            aval.block(i * r, col, r, 1) += trig_derivative(b, k, kPi / len, x) * a[k].col(c);
        }
      }
    }
    RVector w(n * r);
    for (Eigen::Index i = 0; i < n; ++i) w.segment(i * r, r).setConstant(edge_w[e] * rule.weights[i]);
    const Eigen::Index off = static_cast<Eigen::Index>(e) * per_edge;
    S.block(off, off, per_edge, per_edge) = val.adjoint() * w.asDiagonal() * aval;
    G.block(off, off, per_edge, per_edge) = val.adjoint() * w.asDiagonal() * val;
    H.block(off, off, per_edge, per_edge) = aval.adjoint() * w.asDiagonal() * aval;
  }

  GreenDefect out;
  out.admissible_dimension = static_cast<int>(null.cols());
  out.min_rayleigh = std::numeric_limits<double>::infinity();
  if (null.cols() == 0) {
    out.min_rayleigh = 0.0;
    return out;
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  auto draw = [&] {
    CVector c(null.cols());
    for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = Complex(normal(rng), normal(rng));
    return CVector(null * c);
  };
  for (int t = 0; t < pairs; ++t) {
    const CVector a = draw();
    const CVector b = draw();
    const Complex au_v = (b.adjoint() * S * a)(0);
    const Complex u_av = (b.adjoint() * S.adjoint() * a)(0);
    const double nu = std::sqrt(std::real((a.adjoint() * G * a)(0)));
    const double nv = std::sqrt(std::real((b.adjoint() * G * b)(0)));
    const double nau = std::sqrt(std::real((a.adjoint() * H * a)(0)));
    const double nav = std::sqrt(std::real((b.adjoint() * H * b)(0)));
    const double defect = std::abs(au_v - u_av);
    out.max_defect = std::max(out.max_defect, defect / (nu * nv));
    out.max_scaled_defect = std::max(out.max_scaled_defect, defect / (nau * nv + nu * nav));
    out.min_rayleigh = std::min(out.min_rayleigh, std::real((a.adjoint() * S * a)(0)) / (nu * nu));
  }
  return out;
}

SelfAdjointnessReport self_adjointness_report(const BoundaryContactProblem& problem) {
  require_valid(problem);
  if (is_plain_second_order(problem)) return lagrangian_report(problem);
  SelfAdjointnessReport report;
  report.method = "green-identity";
  const auto defect = green_identity_defect(problem);
  report.defect = defect.max_scaled_defect;
  report.symmetric = defect.admissible_dimension > 0 && defect.max_scaled_defect <= 1e-8;
  report.positive_hint = report.symmetric && defect.min_rayleigh >= 0.0;
  return report;
}

}  // namespace bcp

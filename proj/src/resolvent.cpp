#include "bcp/resolvent.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "bcp/fundamental.hpp"
#include "bcp/secular.hpp"

namespace bcp {

namespace {

using Cubic = std::array<Complex, 4>;

// Monomial coefficients in tau of the cubic through (offsets[i], values[i]).
Cubic fit_cubic(const std::array<double, 4>& offsets, const std::array<Complex, 4>& values) {
  Eigen::Matrix4d v;
  for (int i = 0; i < 4; ++i)
    for (int p = 0; p < 4; ++p) v(i, p) = std::pow(offsets[i], p);
  const Eigen::Matrix4d inv = v.inverse();
  Cubic c{};
  for (int p = 0; p < 4; ++p)
    for (int i = 0; i < 4; ++i) c[p] += inv(p, i) * values[i];
  return c;
}

// Four stencil points around cell [j, j+1] on a grid of n points.
std::array<int, 4> stencil(int j, int n) {
  int first = std::clamp(j - 1, 0, std::max(0, n - 4));
  return {first, first + 1, first + 2, first + 3};
}

CMatrix forcing_block(const CMatrix& am_inv, const CVector& f, int m, int r) {
  CMatrix out = CMatrix::Zero(static_cast<Eigen::Index>(m) * r, 1);
  out.bottomRows(r) = am_inv * f;
  return out;
}

// Particular solution jets (rows = points, cols = m*r) on one edge.
CMatrix particular_constant(const EdgeOperator& op, const std::vector<double>& x, const CMatrix& f,
                            const CMatrix& vecs, const CVector& mus) {
  const int m = op.order, r = op.rank;
  const Eigen::Index n = static_cast<Eigen::Index>(m) * r;
  const int np = static_cast<int>(x.size());
  const CMatrix am_inv = op.coefficient(m, 0.0).inverse();
  const CMatrix w = vecs.partialPivLu().inverse();
  // modal forcing g = W F at each grid point
  CMatrix g(np, n);
  for (int j = 0; j < np; ++j) g.row(j) = (w * forcing_block(am_inv, f.row(j).transpose(), m, r)).transpose();
  CMatrix z = CMatrix::Zero(np, n);
  const double h = np > 1 ? x[1] - x[0] : 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Complex mu = mus(i);
    if (np < 2) break;
    if (np < 4) throw InputError("at least 4 grid points per edge required");
    if (mu.real() <= 0.0) {
      const auto ph = phi_functions(mu * h, 5);
      for (int j = 0; j + 1 < np; ++j) {
        const auto st = stencil(j, np);
        std::array<double, 4> off{};
        std::array<Complex, 4> val{};
        for (int q = 0; q < 4; ++q) {
          off[q] = st[q] - j;
          val[q] = g(st[q], i);
        }
        const Cubic c = fit_cubic(off, val);
        Complex inc = 0.0;
        double fact = 1.0;
        for (int p = 0; p < 4; ++p) {
          if (p > 0) fact *= p;
          inc += c[p] * fact * ph[p + 1];
        }
        z(j + 1, i) = ph[0] * z(j, i) + h * inc;
      }
    } else {
      const auto ph = phi_functions(-mu * h, 5);
      for (int j = np - 1; j > 0; --j) {
        const auto st = stencil(j - 1, np);
        std::array<double, 4> off{};
        std::array<Complex, 4> val{};
        for (int q = 0; q < 4; ++q) {
          off[q] = j - st[q];
          val[q] = g(st[q], i);
        }
        const Cubic c = fit_cubic(off, val);
        Complex inc = 0.0;
        double fact = 1.0;
        for (int p = 0; p < 4; ++p) {
          if (p > 0) fact *= p;
          inc += c[p] * fact * ph[p + 1];
        }
        z(j - 1, i) = ph[0] * z(j, i) - h * inc;
      }
    }
  }
  return z * vecs.transpose();
}

// Classical RK4 with substeps and cubic-interpolated forcing.
CMatrix particular_numeric(const EdgeOperator& op, Complex lambda, const std::vector<double>& x, const CMatrix& f) {
  const int m = op.order, r = op.rank;
  const Eigen::Index n = static_cast<Eigen::Index>(m) * r;
  const int np = static_cast<int>(x.size());
  if (np < 4) throw InputError("at least 4 grid points per edge required");
  const double h = x[1] - x[0];
  const double h_max = 0.25 / (1.0 + std::pow(std::abs(lambda), 1.0 / m));
  const int sub = std::max(1, static_cast<int>(std::ceil(h / h_max)));
  const double dt = h / sub;
  CMatrix out = CMatrix::Zero(np, n);
  CVector y = CVector::Zero(n);
  for (int j = 0; j + 1 < np; ++j) {
    const auto st = stencil(j, np);
    std::vector<Cubic> comps(r);
    for (int c = 0; c < r; ++c) {
      std::array<double, 4> off{};
      std::array<Complex, 4> val{};
      for (int q = 0; q < 4; ++q) {
        off[q] = st[q] - j;
        val[q] = f(st[q], c);
      }
      comps[c] = fit_cubic(off, val);
    }
    auto rhs = [&](double xx, const CVector& yy) {
      const double tau = (xx - x[j]) / h;
      CVector fv(r);
      for (int c = 0; c < r; ++c)
        fv(c) = comps[c][0] + tau * (comps[c][1] + tau * (comps[c][2] + tau * comps[c][3]));
      CVector out_v = edge_companion(op, xx, lambda) * yy;
      out_v.tail(r) += op.coefficient(m, xx).partialPivLu().solve(fv);
      return out_v;
    };
    double xx = x[j];
    for (int s = 0; s < sub; ++s) {
      const CVector k1 = rhs(xx, y);
      const CVector k2 = rhs(xx + 0.5 * dt, y + 0.5 * dt * k1);
      const CVector k3 = rhs(xx + 0.5 * dt, y + 0.5 * dt * k2);
      const CVector k4 = rhs(xx + dt, y + dt * k3);
      y += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      xx += dt;
    }
    out.row(j + 1) = y.transpose();
  }
  return out;
}

}  // namespace

std::vector<double> uniform_grid(double length, int points) {
  std::vector<double> x(points);
  for (int i = 0; i < points; ++i) x[i] = points == 1 ? 0.0 : length * i / (points - 1);
  return x;
}

std::vector<Complex> phi_functions(Complex z, int count) {
  std::vector<Complex> out(count);
  if (std::abs(z) < 2.0) {
    for (int k = 0; k < count; ++k) {
      // sum_n z^n / (n+k)!
      Complex term = 1.0;
      for (int i = 1; i <= k; ++i) term /= static_cast<double>(i);
      Complex acc = term;
      for (int n = 1; n < 60; ++n) {
        term *= z / static_cast<double>(n + k);
        acc += term;
        if (std::abs(term) < 1e-18 * std::abs(acc)) break;
      }
      out[k] = acc;
    }
    return out;
  }
  out[0] = std::exp(z);
  double fact = 1.0;
  for (int k = 0; k + 1 < count; ++k) {
    if (k > 0) fact *= k;
    out[k + 1] = (out[k] - 1.0 / fact) / z;
  }
  return out;
}

ResolventSolution solve_resolvent(const BoundaryContactProblem& problem, Complex lambda, const std::vector<CMatrix>& rhs,
                                  const ResolventOptions& options) {
  require_valid(problem);
  const int m = problem.order(), r = problem.rank();
  const Eigen::Index n = static_cast<Eigen::Index>(m) * r;
  const std::size_t ne = problem.graph.edges.size();
  if (rhs.size() != ne) throw InputError("right-hand side needs one sample array per edge");

  ResolventSolution sol;
  sol.lambda = lambda;
  std::vector<CMatrix> yp(ne);
  std::vector<FundamentalSystem> systems;
  for (std::size_t e = 0; e < ne; ++e) {
    if (rhs[e].cols() != r || rhs[e].rows() < 4) throw InputError("right-hand side shape mismatch on an edge");
    const auto& op = problem.operators[e];
    sol.grids.push_back(uniform_grid(problem.graph.edges[e].length, static_cast<int>(rhs[e].rows())));
    const auto& x = sol.grids.back();
    bool done = false;
    if (op.is_constant()) {
      const CMatrix comp = edge_companion(op, 0.0, lambda);
      const CVector raw = Eigen::ComplexEigenSolver<CMatrix>(comp, false).eigenvalues();
      double kappa = 1.0;
      for (Eigen::Index i = 0; i < raw.size(); ++i) kappa = std::max(kappa, std::abs(raw(i)));
      RVector d(n);
      for (int k = 0; k < m; ++k) d.segment(k * r, r).setConstant(std::pow(kappa, k));
      Eigen::ComplexEigenSolver<CMatrix> es(d.cwiseInverse().asDiagonal() * comp * d.asDiagonal(), true);
      CMatrix v = es.eigenvectors();
      for (Eigen::Index j = 0; j < n; ++j) v.col(j).normalize();
      Eigen::JacobiSVD<CMatrix> svd(v);
      const auto s = svd.singularValues();
      if (s(n - 1) > 1e-8 * s(0)) {
        yp[e] = particular_constant(op, x, rhs[e], d.asDiagonal() * v, es.eigenvalues());
        done = true;
      }
    }
    if (!done) yp[e] = particular_numeric(op, lambda, x, rhs[e]);
    FundamentalOptions fo;
    fo.samples = x;
    systems.push_back(fundamental_system(problem, e, lambda, fo));
  }
  SecularMatrix g = assemble_secular(problem, std::move(systems));
  {
    const RVector s = normalized_singular_values(g);
    sol.sigma_min = s.size() ? s.minCoeff() : 0.0;
  }
  if (!g.square) throw DomainError("coupling rows do not determine a square secular matrix");
  if (!(sol.sigma_min >= options.singular_threshold)) throw DomainError("near-singular resolvent");

  // boundary data of the particular solution
  auto inward = [&](std::size_t e, Side side) {
    CVector j = side == Side::Left ? CVector(yp[e].row(0).transpose()) : CVector(yp[e].row(yp[e].rows() - 1).transpose());
    if (side == Side::Right)
      for (int k = 1; k < m; k += 2) j.segment(k * r, r) *= -1.0;
    return j;
  };
  CVector b = CVector::Zero(g.matrix.rows());
  Eigen::Index row0 = 0;
  for (std::size_t v = 0; v < problem.graph.vertices.size(); ++v) {
    const auto& vx = problem.graph.vertices[v];
    const auto& cc = problem.coupling[v];
    for (std::size_t p = 0; p < vx.degree(); ++p) {
      const auto& ep = vx.endpoints[p];
      const CVector jets = inward(ep.edge, ep.side);
      for (int k = 0; k < m; ++k)
        b.segment(row0, cc.rows()) += cc.blocks[k].middleCols(static_cast<Eigen::Index>(p) * r, r) * jets.segment(k * r, r);
    }
    row0 += cc.rows();
  }
  const auto eq = equilibrate(g);
  const CVector y = eq.matrix.fullPivLu().solve(CVector(-(eq.row_factor.asDiagonal() * b)));
  const CVector c = eq.column_factor.asDiagonal() * y;
  {
    const double scale = std::max({b.norm(), (g.matrix.cwiseAbs() * c.cwiseAbs()).norm(), 1e-300});
    sol.coupling_residual = b.norm() == 0.0 && c.norm() == 0.0 ? 0.0 : (g.matrix * c + b).norm() / scale;
  }

  double fmax = 0.0, umax = 0.0, res = 0.0;
  for (std::size_t e = 0; e < ne; ++e) {
    const auto& fs = g.systems[e];
    const Eigen::Index off = g.edge_offset(e);
    const auto& x = sol.grids[e];
    const int np = static_cast<int>(x.size());
    CMatrix jets = yp[e];
    for (int j = 0; j < np; ++j) jets.row(j) += (fs.sample_jets[j] * c.segment(off, fs.size())).transpose();
    sol.values.push_back(jets.leftCols(r));
    const double h = x[1] - x[0];
    const auto& op = problem.operators[e];
    for (int j = 0; j < np; ++j) {
      fmax = std::max(fmax, rhs[e].row(j).cwiseAbs().maxCoeff());
      umax = std::max(umax, std::abs(lambda) * jets.row(j).head(r).cwiseAbs().maxCoeff());
    }
    for (int j = 2; j + 2 < np; ++j) {
      const CVector top = (-jets.row(j + 2) + 8.0 * jets.row(j + 1) - 8.0 * jets.row(j - 1) + jets.row(j - 2))
                              .tail(r)
                              .transpose() /
                          (12.0 * h);
      CVector lhs = op.coefficient(m, x[j]) * top - lambda * jets.row(j).head(r).transpose();
      for (int k = 0; k < m; ++k) lhs += op.coefficient(k, x[j]) * jets.row(j).segment(k * r, r).transpose();
      res = std::max(res, (lhs - rhs[e].row(j).transpose()).cwiseAbs().maxCoeff());
    }
  }
  const double denom = std::max(fmax, umax);
  sol.interior_residual = denom > 0.0 ? res / denom : res;
  return sol;
}

}  // namespace bcp

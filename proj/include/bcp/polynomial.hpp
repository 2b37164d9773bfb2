#ifndef BCP_POLYNOMIAL_HPP
#define BCP_POLYNOMIAL_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace bcp {

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Horner evaluation of a matrix-valued polynomial sum_p C_p x^p.
template <typename Scalar, typename Real>
DenseMatrix<Scalar> evaluate_matrix_polynomial(std::span<const DenseMatrix<Scalar>> coefficients, Real x) {
  if (coefficients.empty()) return DenseMatrix<Scalar>();
  DenseMatrix<Scalar> acc = coefficients.back();
  for (std::size_t p = coefficients.size() - 1; p-- > 0;) {
    acc = (acc * Scalar(x)).eval();
    acc += coefficients[p];
  }
  return acc;
}

/// Block companion linearization of P(mu) = sum_{k=0}^{m} P_k mu^k with
/// invertible leading block P_m. The state vector is (v, mu v, ..., mu^{m-1} v),
/// which is also the jet vector (u, u', ..., u^{(m-1)}) of the ODE P(d/dx) u = 0.
template <typename Scalar>
DenseMatrix<Scalar> block_companion(std::span<const DenseMatrix<Scalar>> blocks) {
  const Eigen::Index m = static_cast<Eigen::Index>(blocks.size()) - 1;
  const Eigen::Index r = blocks.back().rows();
  DenseMatrix<Scalar> c = DenseMatrix<Scalar>::Zero(m * r, m * r);
  for (Eigen::Index k = 0; k + 1 < m; ++k) c.block(k * r, (k + 1) * r, r, r).setIdentity();
  Eigen::PartialPivLU<DenseMatrix<Scalar>> lead(blocks.back());
  for (Eigen::Index k = 0; k < m; ++k) c.block((m - 1) * r, k * r, r, r) = -lead.solve(blocks[k]);
  return c;
}

/// Integer power by repeated squaring; ipow(0, 0) == 1.
template <typename Scalar>
Scalar ipow(Scalar base, int n) {
  Scalar result(1);
  while (n > 0) {
    if (n & 1) result *= base;
    base *= base;
    n >>= 1;
  }
  return result;
}

template <typename Scalar>
struct RootCluster {
  Scalar value;
  int multiplicity = 1;
};

/// Groups roots closer than rel_tol * max(|root|) (single linkage), returns
/// clusters ordered by (real, imag) of their mean.
template <typename Scalar>
std::vector<RootCluster<Scalar>> cluster_roots(std::span<const Scalar> roots, double rel_tol) {
  const std::size_t n = roots.size();
  double scale = 0.0;
  for (const auto& z : roots) scale = std::max(scale, std::abs(z));
  const double tol = rel_tol * (scale > 0.0 ? scale : 1.0);
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(roots[i] - roots[j]) <= tol) parent[find(i)] = find(j);

  std::vector<RootCluster<Scalar>> out;
  std::vector<std::size_t> label(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t root = find(i);
    if (label[root] == n) {
      label[root] = out.size();
      out.push_back({roots[i], 1});
    } else {
      auto& c = out[label[root]];
      c.value = (c.value * Scalar(c.multiplicity) + roots[i]) / Scalar(c.multiplicity + 1);
      ++c.multiplicity;
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (std::real(a.value) != std::real(b.value)) return std::real(a.value) < std::real(b.value);
    return std::imag(a.value) < std::imag(b.value);
  });
  return out;
}

/// k-th derivative at x = 0 of x^p e^{mu x}: k!/(k-p)! mu^{k-p} for k >= p.
template <typename Scalar>
Scalar jordan_jet_at_origin(Scalar mu, int p, int k) {
  if (k < p) return Scalar(0);
  double falling = 1.0;
  for (int i = 0; i < p; ++i) falling *= static_cast<double>(k - i);
  return Scalar(falling) * ipow(mu, k - p);
}

/// k-th derivative of x^p e^{mu x} at x, without the factor e^{mu x}.
template <typename Scalar, typename Real>
Scalar jordan_jet_polynomial(Scalar mu, int p, int k, Real x) {
  // d^k (x^p e^{mu x}) = sum_j C(k,j) (p!/(p-j)!) x^{p-j} mu^{k-j} e^{mu x}
  Scalar acc(0);
  double binom = 1.0;
  for (int j = 0; j <= std::min(k, p); ++j) {
    if (j > 0) binom = binom * static_cast<double>(k - j + 1) / static_cast<double>(j);
    double falling = 1.0;
    for (int i = 0; i < j; ++i) falling *= static_cast<double>(p - i);
    acc += Scalar(binom * falling) * ipow(Scalar(x), p - j) * ipow(mu, k - j);
  }
  return acc;
}

}  // namespace bcp

#endif  // BCP_POLYNOMIAL_HPP

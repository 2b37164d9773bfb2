#ifndef BCP_QUADRATURE_HPP
#define BCP_QUADRATURE_HPP

#include <cmath>
#include <vector>

namespace bcp {

template <typename Real>
struct QuadratureRule {
  std::vector<Real> nodes;
  std::vector<Real> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1] (Newton iteration on P_n).
template <typename Real = double>
QuadratureRule<Real> gauss_legendre(int n) {
  QuadratureRule<Real> rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const Real pi = Real(3.14159265358979323846264338327950288L);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    Real x = std::cos(pi * (Real(i) + Real(0.75)) / (Real(n) + Real(0.5)));
    Real dp = 0;
    for (int it = 0; it < 100; ++it) {
      Real p0 = 1, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const Real p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1;
      dp = n * (x * p1 - p0) / (x * x - 1);
      const Real dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < Real(1e-16)) break;
    }
    {
      Real p0 = 1, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const Real p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1;
      dp = n * (x * p1 - p0) / (x * x - 1);
    }
    const Real w = 2 / ((1 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

/// Composite Gauss-Legendre rule on [a, b] with `panels` equal panels.
template <typename Real = double>
QuadratureRule<Real> composite_gauss_legendre(Real a, Real b, int panels, int order = 16) {
  const auto base = gauss_legendre<Real>(order);
  QuadratureRule<Real> rule;
  rule.nodes.reserve(panels * order);
  rule.weights.reserve(panels * order);
  const Real h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const Real mid = a + (p + Real(0.5)) * h;
    for (int i = 0; i < order; ++i) {
      rule.nodes.push_back(mid + Real(0.5) * h * base.nodes[i]);
      rule.weights.push_back(Real(0.5) * h * base.weights[i]);
    }
  }
  return rule;
}

}  // namespace bcp

#endif  // BCP_QUADRATURE_HPP

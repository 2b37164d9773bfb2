#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

using namespace bcp;
using namespace bcp::testing;

namespace {

Spectrum first_n(const BoundaryContactProblem& p, int n, bool numeric = false) {
  SweepOptions o;
  o.max_count = n;
  o.force_numeric = numeric;
  return eigenvalues(p, o);
}

Spectrum up_to(const BoundaryContactProblem& p, double hi) {
  SweepOptions o;
  o.lambda_hi = hi;
  return eigenvalues(p, o);
}

// Taylor series of u'' = x u at x = 1: returns (u(1), u'(1)) for u(0) = c0, u'(0) = c1
std::pair<double, double> airy_series(double c0, double c1) {
  std::vector<double> c(80, 0.0);
  c[0] = c0;
  c[1] = c1;
  for (int n = 1; n + 2 < 80; ++n) c[n + 2] = c[n - 1] / ((n + 2.0) * (n + 1.0));
  double u = 0.0, du = 0.0;
  for (int n = 0; n < 80; ++n) {
    u += c[n];
    if (n > 0) du += n * c[n];
  }
  return {u, du};
}

std::vector<CMatrix> sample_rhs(const BoundaryContactProblem& p, int points, const std::function<double(int, double)>& f) {
  std::vector<CMatrix> rhs;
  for (std::size_t e = 0; e < p.graph.edges.size(); ++e) {
    const auto x = uniform_grid(p.graph.edges[e].length, points);
    CMatrix m(x.size(), 1);
    for (std::size_t i = 0; i < x.size(); ++i) m(i, 0) = f(static_cast<int>(e), x[i]);
    rhs.push_back(m);
  }
  return rhs;
}

}  // namespace

TEST(FundamentalSystem, CosineSineAtLambdaOne) {
  const auto p = builtin("interval-dirichlet");
  FundamentalOptions o;
  o.kind = BasisKind::Identity;
  const auto fs = fundamental_system(p, 0, 1.0, o);
  EXPECT_LT((fs.true_left() - CMatrix::Identity(2, 2)).norm(), 1e-15);
  const CMatrix r = fs.true_right();
  // cos: (cos pi, -(-sin pi)) = (-1, 0); sin: (sin pi, -cos pi) = (0, 1)
  EXPECT_LT((r - mat({{-1, 0}, {0, 1}})).norm(), 1e-14);
}

TEST(FundamentalSystem, PolynomialsAtLambdaZero) {
  const auto p = builtin("interval-dirichlet");
  FundamentalOptions o;
  o.kind = BasisKind::Identity;
  const CMatrix r = fundamental_system(p, 0, 0.0, o).true_right();
  EXPECT_LT((r - mat({{1, kPi}, {0, -1}})).norm(), 1e-14);
}

TEST(FundamentalSystem, NumericPathMatchesClosedForm) {
  const auto p = builtin("interval-dirichlet");
  FundamentalOptions exact, numeric;
  exact.kind = BasisKind::Identity;
  numeric.kind = BasisKind::Numeric;
  for (const Complex lambda : {Complex(1.0), Complex(30.0, 2.0), Complex(-40.0)}) {
    const CMatrix a = fundamental_system(p, 0, lambda, exact).true_right();
    const CMatrix b = fundamental_system(p, 0, lambda, numeric).true_right();
    EXPECT_LT((a - b).norm(), 1e-8 * a.norm()) << lambda;
  }
}

TEST(FundamentalSystem, AiryEdgeMatchesTaylorSeries) {
  const auto p = airy_edge();
  FundamentalOptions o;
  o.kind = BasisKind::Numeric;
  const auto fs = fundamental_system(p, 0, 0.0, o);
  EXPECT_LT((fs.true_left() - CMatrix::Identity(2, 2)).norm(), 1e-15);
  const CMatrix r = fs.true_right();
  const auto [u0, du0] = airy_series(1.0, 0.0);
  const auto [u1, du1] = airy_series(0.0, 1.0);
  EXPECT_NEAR(std::abs(r(0, 0) - u0), 0.0, 1e-8);
  EXPECT_NEAR(std::abs(r(1, 0) + du0), 0.0, 1e-8);
  EXPECT_NEAR(std::abs(r(0, 1) - u1), 0.0, 1e-8);
  EXPECT_NEAR(std::abs(r(1, 1) + du1), 0.0, 1e-8);
}

TEST(FundamentalSystem, StoredJetsStayBounded) {
  const auto p = builtin("beam-clamped");
  for (const auto kind : {BasisKind::Exponential, BasisKind::Numeric, BasisKind::Auto}) {
    FundamentalOptions o;
    o.kind = kind;
    const auto fs = fundamental_system(p, 0, Complex(-1e6, 1e5), o);
    EXPECT_TRUE(fs.left.allFinite());
    EXPECT_TRUE(fs.right.allFinite());
    EXPECT_LE(fs.right.cwiseAbs().maxCoeff(), std::exp(1.0) * (1 + 1e-12));
  }
}

TEST(SecularMatrix, DirichletAtLambdaOneIsSingular) {
  const auto p = builtin("interval-dirichlet");
  FundamentalOptions o;
  o.kind = BasisKind::Identity;
  const auto g = secular_matrix(p, 1.0, o);
  // rows u(0), u(pi) against {cos, sin}
  EXPECT_LT((g.matrix * g.column_scale.array().exp().matrix().asDiagonal() - mat({{1, 0}, {-1, 0}})).norm(), 1e-14);
  EXPECT_LT(normalized_singular_values(g)(1), 1e-14);
}

TEST(SecularMatrix, DirichletOffSpectrumIsRegular) {
  const auto g = secular_matrix(builtin("interval-dirichlet"), 2.5);
  EXPECT_GT(normalized_singular_values(g)(1), 0.1);
}

TEST(SecularMatrix, NeumannZeroMode) {
  const auto g = secular_matrix(builtin("interval-neumann"), 0.0);
  EXPECT_EQ(nullity(g), 1);
}

TEST(SecularMatrix, ScalingsReproduceTrueEntries) {
  // beam at large lambda: stored entries times exp(column scale) equal rows applied to true jets
  const auto p = builtin("beam-clamped");
  FundamentalOptions o;
  o.kind = BasisKind::Exponential;
  const Complex lambda(-200.0, 50.0);
  const auto g = secular_matrix(p, lambda, o);
  const auto& fs = g.systems[0];
  const CMatrix truth_left = fs.true_left(), truth_right = fs.true_right();
  const CMatrix full = g.matrix * g.column_scale.array().exp().matrix().asDiagonal();
  CMatrix expect(4, 4);
  for (int k = 0; k < 2; ++k) {
    expect.row(k) = truth_left.row(k);
    expect.row(2 + k) = truth_right.row(k);
  }
  EXPECT_LT((full - expect).norm(), 1e-10 * expect.norm());
}

TEST(Multiplicity, Examples) {
  EXPECT_EQ(multiplicity(builtin("star3-kirchhoff"), kPi * kPi), 2);
  EXPECT_EQ(multiplicity(builtin("interval-dirichlet"), 4.0), 1);
  EXPECT_EQ(multiplicity(builtin("interval-dirichlet"), 2.5), 0);
  EXPECT_EQ(multiplicity(builtin("circle-glued"), 4 * kPi * kPi), 2);
}

TEST(Eigenvalues, DirichletFirstTwenty) {
  const auto s = first_n(builtin("interval-dirichlet"), 20);
  ASSERT_EQ(s.eigenvalues.size(), 20u);
  for (int k = 1; k <= 20; ++k) {
    EXPECT_NEAR(s.eigenvalues[k - 1], double(k * k), 1e-8);
    EXPECT_EQ(s.multiplicities[k - 1], 1);
  }
  EXPECT_TRUE(s.certified());
}

TEST(Eigenvalues, DirichletNumericPath) {
  const auto s = first_n(builtin("interval-dirichlet"), 6, true);
  ASSERT_EQ(s.eigenvalues.size(), 6u);
  for (int k = 1; k <= 6; ++k) EXPECT_NEAR(s.eigenvalues[k - 1], double(k * k), 1e-6);
}

TEST(Eigenvalues, MatchBuiltinOracles) {
  for (const auto& name : {"star3-kirchhoff", "star3-delta", "circle-glued", "interval-neumann", "beam-clamped"}) {
    const auto ex = builtin_example(name, 12);
    const auto s = first_n(ex.problem, 12);
    ASSERT_GE(s.eigenvalues.size(), 6u) << name;
    for (std::size_t i = 0; i < s.eigenvalues.size() && i < ex.oracle.spectrum.size(); ++i) {
      const auto& o = ex.oracle.spectrum[i];
      EXPECT_NEAR(s.eigenvalues[i], o.lambda, 1e-8 * std::max(1.0, o.lambda)) << name << " #" << i;
      EXPECT_EQ(s.multiplicities[i], o.multiplicity) << name << " #" << i;
    }
    EXPECT_TRUE(s.certified()) << name;
  }
}

TEST(Eigenvalues, StarPattern) {
  const auto s = first_n(builtin("star3-kirchhoff"), 6);
  ASSERT_GE(s.eigenvalues.size(), 4u);
  const double expect[] = {0.25 * kPi * kPi, kPi * kPi, 2.25 * kPi * kPi, 4 * kPi * kPi};
  const int mult[] = {1, 2, 1, 2};
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(s.eigenvalues[i], expect[i], 1e-8 * expect[i]);
    EXPECT_EQ(s.multiplicities[i], mult[i]);
  }
}

TEST(Eigenvalues, CircleZeroModeAndDoubles) {
  const auto s = first_n(builtin("circle-glued"), 9);
  ASSERT_GE(s.eigenvalues.size(), 5u);
  EXPECT_NEAR(s.eigenvalues[0], 0.0, 1e-8);
  EXPECT_EQ(s.multiplicities[0], 1);
  for (int n = 1; n <= 4; ++n) {
    EXPECT_NEAR(s.eigenvalues[n], std::pow(n * kPi, 2), 1e-8 * std::pow(n * kPi, 2));
    EXPECT_EQ(s.multiplicities[n], 2);
  }
}

TEST(Eigenvalues, WindowModeAndBounds) {
  const auto s = up_to(builtin("interval-dirichlet"), 450.0);
  EXPECT_EQ(s.eigenvalues.size(), 21u);
  EXPECT_EQ(s.lambda_hi, 450.0);
  for (double l : s.eigenvalues) EXPECT_LE(l, 450.0);
  EXPECT_LT(s.lambda_lo, 1.0);
}

TEST(Eigenvalues, RejectsNonSymmetricProblems) {
  auto p = builtin("transmission-bad");
  SweepOptions o;
  o.lambda_hi = 50;
  EXPECT_THROW(eigenvalues(p, o), DomainError);
}

TEST(SpectrumProperties, ContourCertificatesAreExact) {
  for (const auto& name : {"interval-dirichlet", "star3-kirchhoff", "circle-glued", "beam-clamped"}) {
    const auto s = first_n(builtin(name), 40);
    ASSERT_FALSE(s.certificate.empty());
    int covered = 0;
    for (const auto& c : s.certificate) {
      EXPECT_EQ(c.contour_count, c.found) << name << " [" << c.a << ", " << c.b << "]";
      covered += c.found;
    }
    EXPECT_EQ(covered, s.total_count()) << name;
  }
}

TEST(SpectrumProperties, IndependentContourCount) {
  // rectangle around (pi/2)^2 and pi^2 on the star: 1 + 2 zeros
  const auto p = builtin("star3-kirchhoff");
  EXPECT_EQ(contour_count(p, 1.0, 12.0, 1.0), 3);
  EXPECT_EQ(contour_count(p, 3.0, 12.0, 1.0), 2);
  EXPECT_EQ(contour_count(p, 3.0, 9.0, 1.0), 0);
  EXPECT_EQ(contour_count(p, 10.5, 20.0, 1.0), 0);
}

TEST(SpectrumProperties, GaugeInvariance) {
  std::mt19937 rng(17);
  const auto p = builtin("star3-kirchhoff");
  auto q = p;
  for (auto& cc : q.coupling) {
    const CMatrix s = well_conditioned(cc.rows(), rng);
    for (auto& b : cc.blocks) b = (s * b).eval();
  }
  const auto a = first_n(p, 16), b = first_n(q, 16);
  ASSERT_EQ(a.eigenvalues.size(), b.eigenvalues.size());
  for (std::size_t i = 0; i < a.eigenvalues.size(); ++i) {
    EXPECT_NEAR(a.eigenvalues[i], b.eigenvalues[i], 1e-9 * std::max(1.0, a.eigenvalues[i]));
    EXPECT_EQ(a.multiplicities[i], b.multiplicities[i]);
  }
}

TEST(SpectrumProperties, CountingFunctionStaysNearWeyl) {
  for (const auto& name : {"interval-dirichlet", "interval-neumann", "star3-kirchhoff", "star3-delta", "circle-glued"}) {
    const auto p = builtin(name);
    const auto s = up_to(p, 3000.0);
    const double L = p.graph.total_length();
    double worst = 0.0;
    for (std::size_t i = 0; i < s.eigenvalues.size(); ++i)
      for (double lam : {s.eigenvalues[i] - 1e-9, s.eigenvalues[i]}) {
        if (lam < 0) continue;
        worst = std::max(worst, std::abs(s.counting(lam) - L / kPi * std::sqrt(lam)));
      }
    EXPECT_LE(worst, 10.0) << name;
  }
}

TEST(SpectrumProperties, LengthScaling) {
  auto p = builtin("interval-dirichlet");
  const auto a = first_n(p, 10);
  p.graph.edges[0].length *= 2.0;
  const auto b = first_n(p, 10);
  ASSERT_EQ(a.eigenvalues.size(), b.eigenvalues.size());
  for (std::size_t i = 0; i < a.eigenvalues.size(); ++i)
    EXPECT_NEAR(b.eigenvalues[i], a.eigenvalues[i] / 4.0, 1e-10 * a.eigenvalues[i]);
}

TEST(ResolventNorm, Examples) {
  const auto s = up_to(builtin("interval-dirichlet"), 100.0);
  EXPECT_NEAR(resolvent_norm(s, -1.0), 0.5, 1e-12);
  EXPECT_NEAR(resolvent_norm(s, 2.5), 1.0 / 1.5, 1e-9);
}

TEST(ResolventNorm, FarAlongObtuseRayTendsToOne) {
  // on arg = 3 pi / 4 the nearest spectral point is lambda_1 = 1, so |lambda| norm -> 1
  const auto s = up_to(builtin("interval-dirichlet"), 100.0);
  for (double r : {1e2, 1e4, 1e6}) {
    const Complex lambda = std::polar(r, 0.75 * kPi);
    EXPECT_NEAR(r * resolvent_norm(s, lambda), r / std::abs(lambda - 1.0), 1e-12);
  }
  EXPECT_NEAR(1e6 * resolvent_norm(s, std::polar(1e6, 0.75 * kPi)), 1.0, 1e-5);
}

TEST(ResolventNorm, AcuteRayGivesInverseSine) {
  // arg = pi / 4: distance to the positive axis is |lambda| sin(pi / 4)
  const auto s = up_to(builtin("interval-dirichlet"), 20000.0);
  const Complex lambda = std::polar(1e4, 0.25 * kPi);
  EXPECT_NEAR(1e4 * resolvent_norm(s, lambda), std::sqrt(2.0), 1e-3);
  EXPECT_THROW(resolvent_norm(up_to(builtin("interval-dirichlet"), 100.0), lambda), DomainError);
}

TEST(EdgeMasses, DirichletSingleEdge) {
  for (double l : {1.0, 4.0, 49.0}) {
    const auto m = eigenfunction_edge_masses(builtin("interval-dirichlet"), l);
    ASSERT_EQ(m.size(), 1u);
    EXPECT_NEAR(m[0], 1.0, 1e-6);
  }
}

TEST(EdgeMasses, StarSymmetricMode) {
  const auto m = eigenfunction_edge_masses(builtin("star3-kirchhoff"), 0.25 * kPi * kPi);
  ASSERT_EQ(m.size(), 3u);
  for (double x : m) EXPECT_NEAR(x, 1.0 / 3.0, 1e-6);
}

TEST(EdgeMasses, CircleDoubleEigenvalue) {
  const auto m = eigenfunction_edge_masses(builtin("circle-glued"), kPi * kPi);
  ASSERT_EQ(m.size(), 2u);
  EXPECT_NEAR(m[0] + m[1], 2.0, 1e-6);
  EXPECT_NEAR(m[0], 1.0, 1e-6);
}

TEST(EdgeMasses, HalfSplitIntervalSplitsEvenly) {
  for (int k = 1; k <= 5; ++k) {
    const auto m = eigenfunction_edge_masses(half_split(), double(k * k));
    EXPECT_NEAR(m[0], 0.5, 1e-8);
    EXPECT_NEAR(m[1], 0.5, 1e-8);
  }
}

TEST(SolveResolvent, SineRightHandSide) {
  const auto p = builtin("interval-dirichlet");
  const auto rhs = sample_rhs(p, 201, [](int, double x) { return std::sin(x); });
  const auto sol = solve_resolvent(p, -1.0, rhs);
  double err = 0.0;
  for (std::size_t i = 0; i < sol.grids[0].size(); ++i)
    err = std::max(err, std::abs(sol.values[0](i, 0) - 0.5 * std::sin(sol.grids[0][i])));
  EXPECT_LE(err, 1e-8);
  EXPECT_LE(sol.coupling_residual, 1e-8);
  EXPECT_LE(sol.interior_residual, 1e-8);
}

TEST(SolveResolvent, ZeroRightHandSideGivesZero) {
  const auto p = builtin("star3-delta");
  const auto rhs = sample_rhs(p, 51, [](int, double) { return 0.0; });
  const auto sol = solve_resolvent(p, Complex(-3.0, 1.0), rhs);
  for (const auto& v : sol.values) EXPECT_TRUE(v.isZero(0.0));
}

TEST(SolveResolvent, EigenvalueIsNearSingular) {
  const auto p = builtin("interval-dirichlet");
  const auto rhs = sample_rhs(p, 51, [](int, double x) { return std::sin(x); });
  try {
    solve_resolvent(p, 1.0, rhs);
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("near-singular resolvent"), std::string::npos);
  }
}

TEST(SolveResolvent, ResidualsSmallOnBuiltins) {
  for (const auto& name : {"star3-kirchhoff", "circle-glued", "beam-clamped", "interval-neumann"}) {
    const auto p = builtin(name);
    const auto rhs = sample_rhs(p, 201, [](int e, double x) { return 1.0 + 0.5 * e + std::cos(3 * x); });
    const auto sol = solve_resolvent(p, Complex(-2.0, 0.5), rhs);
    EXPECT_LE(sol.coupling_residual, 1e-8) << name;
    EXPECT_LE(sol.interior_residual, 1e-6) << name;
  }
}

TEST(SolveResolvent, ResolventIdentityOnEigenpairs) {
  // <u, psi_k> = <f, psi_k> / (lambda_k - lambda) for the first eigenspaces of the star
  const auto p = builtin("star3-kirchhoff");
  const int n = 401;
  const auto rhs = sample_rhs(p, n, [](int e, double x) { return 1.0 + e * x + std::exp(-x); });
  const Complex lambda(-2.0, 0.0);
  const auto sol = solve_resolvent(p, lambda, rhs);
  const auto s = first_n(p, 5);
  std::vector<std::vector<double>> grids;
  for (const auto& e : p.graph.edges) grids.push_back(uniform_grid(e.length, n));
  int checked = 0;
  for (std::size_t k = 0; k < s.eigenvalues.size() && checked < 5; ++k) {
    const auto basis = eigenfunctions(p, s.eigenvalues[k], grids);
    ASSERT_EQ(basis.multiplicity, s.multiplicities[k]);
    for (int j = 0; j < basis.multiplicity && checked < 5; ++j, ++checked) {
      Complex uf(0.0), ff(0.0);
      for (std::size_t e = 0; e < grids.size(); ++e) {
        std::vector<Complex> a(n), b(n);
        for (int i = 0; i < n; ++i) {
          const Complex psi = std::conj(basis.values[e](i, j));
          a[i] = sol.values[e](i, 0) * psi;
          b[i] = rhs[e](i, 0) * psi;
        }
        Complex ia, ib;
        simpson(grids[e], a, &ia);
        simpson(grids[e], b, &ib);
        uf += ia;
        ff += ib;
      }
      const Complex expect = ff / (s.eigenvalues[k] - lambda);
      EXPECT_LE(std::abs(uf - expect), 1e-6 * std::max(std::abs(expect), 1e-3)) << "lambda_k = " << s.eigenvalues[k];
    }
  }
  EXPECT_EQ(checked, 5);
}

TEST(Eigenfunctions, OrthonormalOnTheGraph) {
  const auto p = builtin("circle-glued");
  std::vector<std::vector<double>> grids;
  for (const auto& e : p.graph.edges) grids.push_back(uniform_grid(e.length, 401));
  const auto b = eigenfunctions(p, 4 * kPi * kPi, grids);
  ASSERT_EQ(b.multiplicity, 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      Complex acc(0.0);
      for (std::size_t e = 0; e < grids.size(); ++e) {
        std::vector<Complex> f(grids[e].size());
        for (std::size_t q = 0; q < f.size(); ++q) f[q] = std::conj(b.values[e](q, i)) * b.values[e](q, j);
        Complex part;
        simpson(grids[e], f, &part);
        acc += part;
      }
      EXPECT_NEAR(std::abs(acc - (i == j ? 1.0 : 0.0)), 0.0, 1e-8);
    }
}

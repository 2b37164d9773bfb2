#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

using namespace bcp;
using namespace bcp::testing;

namespace {

ExponentSplit scalar_exponents(Complex a_m, int order, Complex lambda) {
  return characteristic_exponents(CMatrix::Constant(1, 1, a_m), order, lambda);
}

bool has_root(const std::vector<ExponentCluster>& roots, Complex z, double tol) {
  for (const auto& c : roots)
    if (std::abs(c.value - z) < tol) return true;
  return false;
}

std::vector<Complex> all_roots(const ExponentSplit& s) {
  std::vector<Complex> out;
  for (const auto* v : {&s.stable, &s.unstable})
    for (const auto& c : *v)
      for (int i = 0; i < c.multiplicity; ++i) out.push_back(c.value);
  return out;
}

}  // namespace

TEST(InteriorCheck, LaplacianAvoidsLeftHalfPlane) {
  const auto r = interior_check(builtin("interval-dirichlet"), 16);
  EXPECT_TRUE(r.ok);
  EXPECT_FALSE(r.witness.has_value());
}

TEST(InteriorCheck, SectorAroundPositiveAxisFailsWithWitness) {
  auto p = builtin("interval-dirichlet");
  p.sector = Sector::from_degrees(0.0, 0.1 * 180.0 / kPi);
  const auto r = interior_check(p, 16);
  ASSERT_FALSE(r.ok);
  ASSERT_TRUE(r.witness.has_value());
  EXPECT_NEAR(std::abs(r.witness->eigenvalue - Complex(1.0)), 0.0, 1e-14);
}

TEST(InteriorCheck, RankTwoRotatedLeadingBlock) {
  // symbol eigenvalues xi^2 and e^{i pi/4} xi^2 both avoid |arg - pi| <= pi/4
  EXPECT_TRUE(interior_check(rank_two(Sector::from_degrees(180.0, 45.0)), 16).ok);
  // e^{i pi/4} lies in |arg - pi/4| <= 0.1
  EXPECT_FALSE(interior_check(rank_two(Sector::from_degrees(45.0, 5.0)), 16).ok);
}

TEST(InteriorCheck, VariableLeadingCoefficientSampledAtEndpoints) {
  // a_2 = -(1 - 2x) on [0, 1]
  auto p = builtin("interval-dirichlet");
  p.graph.edges[0].length = 1.0;
  p.operators[0].coefficients[2] = {mat({{-1}}), mat({{2}})};
  // grid 0, 0.2, ..., 1: the first sample with a_2 > 0 is x = 0.6, symbol -0.2 xi^2
  const auto r = interior_check(p, 4);
  ASSERT_FALSE(r.ok);
  EXPECT_NEAR(r.witness->x, 0.6, 1e-15);
  EXPECT_NEAR(std::abs(r.witness->eigenvalue + 0.2), 0.0, 1e-14);
  // with x = 1/2 on the grid the leading coefficient is singular there
  EXPECT_THROW(interior_check(p, 3), DomainError);
}

TEST(Exponents, SecondOrderAtMinusOne) {
  const auto s = scalar_exponents(-1.0, 2, -1.0);
  EXPECT_EQ(s.stable_count, 1);
  EXPECT_EQ(s.total, 2);
  ASSERT_EQ(s.stable.size(), 1u);
  EXPECT_NEAR(std::abs(s.stable[0].value - Complex(-1.0)), 0.0, 1e-14);
  EXPECT_TRUE(has_root(s.unstable, 1.0, 1e-14));
}

TEST(Exponents, SecondOrderAtI) {
  const auto s = scalar_exponents(-1.0, 2, Complex(0.0, 1.0));
  ASSERT_EQ(s.stable_count, 1);
  const Complex expected = -std::polar(1.0, -kPi / 4);
  EXPECT_NEAR(std::abs(s.stable[0].value - expected), 0.0, 1e-14);
  EXPECT_NEAR(s.stable[0].value.real(), -std::sqrt(0.5), 1e-14);
}

TEST(Exponents, FourthOrderAtMinusOne) {
  const auto s = scalar_exponents(1.0, 4, -1.0);
  EXPECT_EQ(s.stable_count, 2);
  EXPECT_TRUE(has_root(s.stable, std::polar(1.0, 3 * kPi / 4), 1e-13));
  EXPECT_TRUE(has_root(s.stable, std::polar(1.0, 5 * kPi / 4), 1e-13));
  EXPECT_TRUE(has_root(s.unstable, std::polar(1.0, kPi / 4), 1e-13));
  EXPECT_TRUE(has_root(s.unstable, std::polar(1.0, 7 * kPi / 4), 1e-13));
}

TEST(Exponents, NeutralExponentInsideSectorThrows) {
  // mu^2 = -lambda has an imaginary root for lambda > 0
  EXPECT_THROW(scalar_exponents(-1.0, 2, 1.0), DomainError);
}

TEST(Exponents, BlockLinearizationMatchesScalarChannels) {
  const CMatrix lead = mat({{-1, 0}, {0, -std::polar(1.0, kPi / 4)}});
  const Complex lambda = std::polar(1.0, 0.8 * kPi);
  const auto block = characteristic_exponents(lead, 2, lambda);
  const auto a = scalar_exponents(lead(0, 0), 2, lambda);
  const auto b = scalar_exponents(lead(1, 1), 2, lambda);
  EXPECT_EQ(block.total, 4);
  EXPECT_EQ(block.stable_count, a.stable_count + b.stable_count);
  for (const auto& c : a.stable) EXPECT_TRUE(has_root(block.stable, c.value, 1e-12));
  for (const auto& c : b.stable) EXPECT_TRUE(has_root(block.stable, c.value, 1e-12));
}

TEST(Exponents, RepeatedRootsAreClustered) {
  // (mu^2 - 1)^2 as a 2x2 block: diag(1, 1) mu^2 with lambda: both channels identical
  const auto s = characteristic_exponents(CMatrix::Identity(2, 2) * Complex(-1.0), 2, -4.0);
  ASSERT_EQ(s.stable.size(), 1u);
  EXPECT_EQ(s.stable[0].multiplicity, 2);
  EXPECT_NEAR(std::abs(s.stable[0].value + 2.0), 0.0, 1e-12);
}

TEST(ExponentProperties, AnisotropicHomogeneity) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  struct Case {
    CMatrix lead;
    int order;
    Sector sector;
  };
  const std::vector<Case> cases{{CMatrix::Constant(1, 1, -1.0), 2, Sector::from_degrees(180, 90)},
                                {CMatrix::Constant(1, 1, 1.0), 4, Sector::from_degrees(180, 90)},
                                {mat({{-1, 0.3}, {0, -std::polar(1.0, kPi / 4)}}), 2, Sector::from_degrees(180, 45)}};
  for (const auto& c : cases) {
    for (int trial = 0; trial < 10; ++trial) {
      const double phi = c.sector.center + (2.0 * u(rng) - 1.0) * c.sector.half_angle * 0.999;
      const Complex lambda = std::polar(1.0, phi);
      const auto base = all_roots(characteristic_exponents(c.lead, c.order, lambda));
      for (double rho : {2.0, 10.0}) {
        const auto scaled =
            all_roots(characteristic_exponents(c.lead, c.order, std::pow(rho, c.order) * lambda));
        ASSERT_EQ(base.size(), scaled.size());
        // match each scaled root to the nearest rho * base root
        for (const auto& z : scaled) {
          double best = 1e300;
          for (const auto& w : base) best = std::min(best, std::abs(z - rho * w));
          EXPECT_LE(best, 1e-10 * std::abs(z));
        }
      }
    }
  }
}

TEST(Lopatinsky, KirchhoffStarAtMinusOne) {
  const auto p = builtin("star3-kirchhoff");
  const auto l = lopatinsky_matrix(p, 0, -1.0);
  ASSERT_TRUE(l.square);
  const CMatrix expected = mat({{1, -1, 0}, {0, 1, -1}, {-1, -1, -1}});
  EXPECT_LT((l.matrix - expected).norm(), 1e-13);
  EXPECT_NEAR(std::abs(l.matrix.determinant()), 3.0, 1e-12);
}

TEST(Lopatinsky, KirchhoffDeterminantOnTheArc) {
  // |det| = d |mu| = 3 for every unit lambda in the sector
  const auto p = builtin("star3-kirchhoff");
  for (const Complex lambda : sector_arc(p.sector, 64)) {
    const auto l = lopatinsky_matrix(p, 0, lambda);
    EXPECT_NEAR(std::abs(l.matrix.determinant()), 3.0, 1e-10) << lambda;
  }
}

TEST(Lopatinsky, DirichletIsIdentity) {
  const auto p = builtin("interval-dirichlet");
  for (std::size_t v = 0; v < 2; ++v) {
    const auto l = lopatinsky_matrix(p, v, Complex(-0.3, 0.9));
    ASSERT_EQ(l.matrix.rows(), 1);
    EXPECT_NEAR(std::abs(l.matrix(0, 0) - 1.0), 0.0, 1e-15);
  }
}

TEST(Lopatinsky, TransmissionRowsAreRankOne) {
  const auto p = builtin("transmission-bad");
  for (const Complex lambda : {Complex(-1.0), Complex(-2.0, 3.0), Complex(-5.0, -0.1)}) {
    const auto l = lopatinsky_matrix(p, 0, lambda);
    ASSERT_TRUE(l.square);
    const Complex mu = l.matrix(1, 0);
    const CMatrix expected = mat({{1, -1}, {mu, -mu}});
    EXPECT_LT((l.matrix - expected).norm(), 1e-14);
    EXPECT_LT(std::abs(l.matrix.determinant()), 1e-14);
  }
}

TEST(Lopatinsky, BeamClampHasTwoStableExponents) {
  const auto p = builtin("beam-clamped");
  const auto l = lopatinsky_matrix(p, 0, -1.0);
  ASSERT_EQ(l.stable_counts, std::vector<int>{2});
  EXPECT_EQ(l.matrix.rows(), 2);
  EXPECT_TRUE(l.square);
}

TEST(VertexCheck, KirchhoffAboveOracleSigma) {
  const auto p = builtin("star3-kirchhoff");
  const auto r = vertex_check(p, 0, 64);
  // oracle: normalized singular values of the closed-form matrix with |mu| = 1
  double oracle = 1.0;
  for (const Complex lambda : sector_arc(p.sector, 64)) {
    const Complex mu = -std::sqrt(-lambda);
    const CMatrix m = mat({{1, -1, 0}, {0, 1, -1}, {mu, mu, mu}});
    const auto s = Eigen::JacobiSVD<CMatrix>(m).singularValues();
    oracle = std::min(oracle, s(2) / s(0));
  }
  EXPECT_GT(r.min_sigma, 0.3);
  EXPECT_NEAR(r.min_sigma, oracle, 1e-12);
  EXPECT_FALSE(r.structural_failure);
}

TEST(VertexCheck, DirichletSigmaIsOne) {
  const auto p = builtin("interval-dirichlet");
  for (std::size_t v = 0; v < 2; ++v) EXPECT_NEAR(vertex_check(p, v, 64).min_sigma, 1.0, 1e-15);
}

TEST(VertexCheck, TransmissionSingularAtEverySample) {
  const auto p = builtin("transmission-bad");
  for (const Complex lambda : sector_arc(p.sector, 64)) {
    const auto l = lopatinsky_matrix(p, 0, lambda);
    const auto s = Eigen::JacobiSVD<CMatrix>(l.matrix).singularValues();
    EXPECT_LT(s(1) / s(0), 1e-12);
  }
  EXPECT_LT(vertex_check(p, 0, 64).min_sigma, 1e-12);
}

TEST(VertexCheck, ArcIncludesEndpoints) {
  const auto arc = sector_arc(Sector::from_degrees(180, 90), 64);
  ASSERT_EQ(arc.size(), 64u);
  EXPECT_NEAR(std::arg(arc.front()), kPi / 2, 1e-15);
  EXPECT_NEAR(std::abs(std::arg(arc.back())), kPi / 2, 1e-15);
  for (const auto& z : arc) EXPECT_NEAR(std::abs(z), 1.0, 1e-15);
}

TEST(Check, BuiltinVerdicts) {
  for (const auto& name : builtin_names()) {
    const auto ex = builtin_example(name);
    const auto v = check(ex.problem);
    EXPECT_EQ(v.elliptic, ex.oracle.elliptic) << name;
    if (ex.oracle.elliptic)
      for (const auto& vr : v.vertices) EXPECT_GT(vr.min_sigma, 1e-2) << name << " " << vr.id;
  }
}

TEST(Check, DeltaCouplingMatchesKirchhoffVerdict) {
  const auto k = check(builtin("star3-kirchhoff"));
  const auto d = check(builtin("star3-delta"));
  EXPECT_TRUE(k.elliptic);
  EXPECT_EQ(k.elliptic, d.elliptic);
}

TEST(Check, NonSquareStarIsStructurallyNonElliptic) {
  auto p = builtin("star3-kirchhoff");
  for (auto& b : p.coupling[0].blocks) b = b.topRows(2).eval();
  const auto v = check(p);
  EXPECT_FALSE(v.elliptic);
  EXPECT_TRUE(v.vertices[0].structural_failure);
  EXPECT_FALSE(v.vertices[0].witness.empty());
}

TEST(Check, InteriorFailureMakesVerdictNonElliptic) {
  auto p = builtin("interval-dirichlet");
  p.sector = Sector::from_degrees(0.0, 5.0);
  const auto v = check(p);
  EXPECT_FALSE(v.interior.ok);
  EXPECT_FALSE(v.elliptic);
}

TEST(Check, RankTwoDirichletIsElliptic) {
  const auto v = check(rank_two(Sector::from_degrees(180.0, 45.0)));
  EXPECT_TRUE(v.interior.ok);
  EXPECT_TRUE(v.elliptic);
  EXPECT_EQ(v.vertices[0].stable_counts, std::vector<int>{2});
}

TEST(CheckProperties, RowRecombinationLeavesVerdictUnchanged) {
  std::mt19937 rng(5);
  for (const auto& name : {"star3-kirchhoff", "circle-glued", "transmission-bad", "beam-clamped"}) {
    const auto p = builtin(name);
    auto q = p;
    std::vector<CMatrix> s;
    for (auto& cc : q.coupling) {
      s.push_back(well_conditioned(cc.rows(), rng));
      for (auto& b : cc.blocks) b = (s.back() * b).eval();
    }
    EXPECT_EQ(check(p).elliptic, check(q).elliptic) << name;
    const Complex lambda = std::polar(1.0, 0.7 * kPi);
    for (std::size_t v = 0; v < p.graph.vertices.size(); ++v) {
      const Complex d0 = lopatinsky_matrix(p, v, lambda).matrix.determinant();
      const Complex d1 = lopatinsky_matrix(q, v, lambda).matrix.determinant();
      EXPECT_NEAR(std::abs(d1 - s[v].determinant() * d0), 0.0, 1e-12 * (1.0 + std::abs(d1))) << name;
    }
  }
}

TEST(CheckProperties, LowerOrderCoefficientsDoNotTouchExponentData) {
  for (const auto& name : {"star3-kirchhoff", "beam-clamped"}) {
    const auto p = builtin(name);
    auto q = p;
    for (auto& op : q.operators)
      for (int k = 0; k < op.order; ++k) op.coefficients[k] = {mat({{Complex(0.7 * (k + 1), -0.2)}}), mat({{0.5}})};
    for (const Complex lambda : sector_arc(p.sector, 16))
      for (std::size_t v = 0; v < p.graph.vertices.size(); ++v) {
        const auto a = lopatinsky_matrix(p, v, lambda);
        const auto b = lopatinsky_matrix(q, v, lambda);
        EXPECT_EQ(a.stable_counts, b.stable_counts);
        EXPECT_TRUE(a.matrix == b.matrix) << name;
      }
    const auto vp = check(p), vq = check(q);
    EXPECT_EQ(vp.elliptic, vq.elliptic);
    for (std::size_t v = 0; v < vp.vertices.size(); ++v) EXPECT_EQ(vp.vertices[v].min_sigma, vq.vertices[v].min_sigma);
  }
}

TEST(CheckProperties, StableCountConstantOverTheArc) {
  for (const auto& name : builtin_names()) {
    const auto ex = builtin_example(name);
    if (!ex.oracle.elliptic) continue;
    for (std::size_t v = 0; v < ex.problem.graph.vertices.size(); ++v) {
      const auto arc = sector_arc(ex.problem.sector, 64);
      const auto first = lopatinsky_matrix(ex.problem, v, arc.front()).stable_counts;
      for (const auto& lambda : arc) EXPECT_EQ(lopatinsky_matrix(ex.problem, v, lambda).stable_counts, first) << name;
    }
  }
}

TEST(CheckProperties, VerdictIsDeterministic) {
  const auto p = builtin("star3-delta");
  const auto a = check(p), b = check(p);
  for (std::size_t v = 0; v < a.vertices.size(); ++v) {
    EXPECT_EQ(a.vertices[v].min_sigma, b.vertices[v].min_sigma);
    EXPECT_EQ(a.vertices[v].argmin_lambda, b.vertices[v].argmin_lambda);
  }
}

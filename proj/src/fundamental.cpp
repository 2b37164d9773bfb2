#include "bcp/fundamental.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "bcp/polynomial.hpp"

namespace bcp {

namespace {

constexpr double kCondLimit = 1e6;
constexpr double kAutoGrowth = 3.0;

Complex log_det(const CMatrix& a) {
  Eigen::PartialPivLU<CMatrix> lu(a);
  const CMatrix& u = lu.matrixLU();
  Complex acc(0.0, 0.0);
  for (Eigen::Index i = 0; i < u.rows(); ++i) acc += std::log(u(i, i));
  if (lu.permutationP().determinant() < 0) acc += Complex(0.0, kPi);
  return acc;
}

void to_inward(CMatrix& jets, int m, int r) {
  for (int k = 1; k < m; k += 2) jets.middleRows(k * r, r) *= -1.0;
}

// Eigen-decomposition of the companion matrix after the jet rescaling
// y_k -> y_k / kappa^k, which keeps the eigenvector matrix well conditioned.
struct ScaledEigen {
  RVector jet_scale;  // kappa^k per row
  CMatrix vectors;    // unscaled: columns are true jets of e^{mu x} solutions
  CVector values;
  double cond = std::numeric_limits<double>::infinity();
};

ScaledEigen scaled_eigen(const CMatrix& comp, int m, int r) {
  ScaledEigen out;
  // Fujiwara-type root bound from the last block row; eigenvalues of the
  // unbalanced companion itself are unreliable when |lambda| is large
  const Eigen::Index n = comp.rows();
  double kappa = 1.0;
  for (int k = 0; k < m; ++k) {
    const double c = comp.block((m - 1) * r, k * r, r, r).cwiseAbs().rowwise().sum().maxCoeff();
    if (c > 0.0) kappa = std::max(kappa, std::pow(c, 1.0 / (m - k)));
  }
  out.jet_scale.resize(n);
  for (int k = 0; k < m; ++k) out.jet_scale.segment(k * r, r).setConstant(std::pow(kappa, k));
  const CMatrix scaled = out.jet_scale.cwiseInverse().asDiagonal() * comp * out.jet_scale.asDiagonal();
  Eigen::ComplexEigenSolver<CMatrix> es(scaled, true);
  CMatrix v = es.eigenvectors();
  for (Eigen::Index j = 0; j < n; ++j) v.col(j).normalize();
  Eigen::JacobiSVD<CMatrix> svd(v);
  const auto s = svd.singularValues();
  out.cond = s(n - 1) > 0.0 ? s(0) / s(n - 1) : std::numeric_limits<double>::infinity();
  out.values = es.eigenvalues();
  out.vectors = out.jet_scale.asDiagonal() * v;
  return out;
}

void check_finite(const CMatrix& a, const char* what) {
  if (!a.allFinite()) throw DomainError(std::string("fundamental system overflow (") + what + ")");
}

// Identity-data system Phi(x) = V e^{Lambda x} V^{-1} with column scaling s.
void identity_from_eigen(const ScaledEigen& se, FundamentalSystem& fs, int m, int r,
                         std::span<const double> samples) {
  const Eigen::Index n = se.values.size();
  const CMatrix w = se.vectors.partialPivLu().inverse();
  const double len = fs.length;
  auto propagate = [&](double x, double shift) {
    CVector e(n);
    for (Eigen::Index i = 0; i < n; ++i) e(i) = std::exp(se.values(i) * x - shift);
    return CMatrix(se.vectors * e.asDiagonal() * w);
  };
  double grow = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) grow = std::max(grow, se.values(i).real() * len);
  const CMatrix right = propagate(len, grow);
  fs.scale.resize(n);
  fs.right.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double norm = right.col(j).norm();
    const double s = std::max(0.0, grow + std::log(norm));
    fs.scale(j) = s;
    fs.right.col(j) = right.col(j) * std::exp(grow - s);
  }
  fs.left = CMatrix::Identity(n, n) * fs.scale.array().exp().inverse().matrix().asDiagonal();
  for (double x : samples) {
    double g = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) g = std::max(g, se.values(i).real() * x);
    CMatrix jets = propagate(x, g);
    for (Eigen::Index j = 0; j < n; ++j) jets.col(j) *= std::exp(g - fs.scale(j));
    fs.sample_x.push_back(x);
    fs.sample_jets.push_back(std::move(jets));
  }
  to_inward(fs.right, m, r);
  fs.left_logdet = Complex(0.0, 0.0);
  fs.kind = BasisKind::Identity;
}

void identity_from_expm(const CMatrix& comp, FundamentalSystem& fs, int m, int r, std::span<const double> samples) {
  const Eigen::Index n = comp.rows();
  const CMatrix right = CMatrix(comp * fs.length).exp();
  check_finite(right, "matrix exponential");
  fs.scale.resize(n);
  fs.right.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double s = std::log(std::max(1.0, right.col(j).norm()));
    fs.scale(j) = s;
    fs.right.col(j) = right.col(j) * std::exp(-s);
  }
  const RVector inv = fs.scale.array().exp().inverse().matrix();
  fs.left = CMatrix::Identity(n, n) * inv.asDiagonal();
  for (double x : samples) {
    fs.sample_x.push_back(x);
    fs.sample_jets.push_back(CMatrix(comp * x).exp() * inv.asDiagonal());
  }
  to_inward(fs.right, m, r);
  fs.left_logdet = Complex(0.0, 0.0);
  fs.kind = BasisKind::Identity;
}

void exponential_from_eigen(const ScaledEigen& se, FundamentalSystem& fs, int m, int r,
                            std::span<const double> samples) {
  const Eigen::Index n = se.values.size();
  const double len = fs.length;
  fs.scale.resize(n);
  fs.left.resize(n, n);
  fs.right.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Complex mu = se.values(i);
    const double s = std::max(0.0, std::log(se.vectors.col(i).norm()) + std::max(0.0, mu.real() * len));
    fs.scale(i) = s;
    fs.left.col(i) = se.vectors.col(i) * std::exp(-s);
    fs.right.col(i) = se.vectors.col(i) * std::exp(mu * len - s);
  }
  for (double x : samples) {
    CMatrix jets(n, n);
    for (Eigen::Index i = 0; i < n; ++i) jets.col(i) = se.vectors.col(i) * std::exp(se.values(i) * x - fs.scale(i));
    fs.sample_x.push_back(x);
    fs.sample_jets.push_back(std::move(jets));
  }
  to_inward(fs.right, m, r);
  fs.left_logdet = log_det(se.vectors);
  fs.kind = BasisKind::Exponential;
}

// Scalar case with coalescing roots: x^p e^{mu x} per cluster.
void exponential_jordan(const CMatrix& comp, FundamentalSystem& fs, int m, std::span<const double> samples) {
  const CVector roots = Eigen::ComplexEigenSolver<CMatrix>(comp, false).eigenvalues();
  std::vector<Complex> list(roots.data(), roots.data() + roots.size());
  const auto clusters = cluster_roots<Complex>(std::span<const Complex>(list), 1e-7);
  const double len = fs.length;
  fs.scale.resize(m);
  fs.left.resize(m, m);
  fs.right.resize(m, m);
  CMatrix true_left(m, m);
  std::vector<std::pair<Complex, int>> columns;
  for (const auto& c : clusters)
    for (int p = 0; p < c.multiplicity; ++p) columns.emplace_back(c.value, p);
  for (int i = 0; i < m; ++i) {
    const auto [mu, p] = columns[i];
    CVector left(m), poly(m);
    for (int k = 0; k < m; ++k) {
      left(k) = jordan_jet_at_origin(mu, p, k);
      poly(k) = jordan_jet_polynomial(mu, p, k, len);
    }
    const double s = std::max({0.0, std::log(left.norm()), std::log(poly.norm()) + mu.real() * len});
    fs.scale(i) = s;
    true_left.col(i) = left;
    fs.left.col(i) = left * std::exp(-s);
    fs.right.col(i) = poly * std::exp(mu * len - s);
  }
  for (double x : samples) {
    CMatrix jets(m, m);
    for (int i = 0; i < m; ++i) {
      const auto [mu, p] = columns[i];
      for (int k = 0; k < m; ++k) jets(k, i) = jordan_jet_polynomial(mu, p, k, x) * std::exp(mu * x - fs.scale(i));
    }
    fs.sample_x.push_back(x);
    fs.sample_jets.push_back(std::move(jets));
  }
  to_inward(fs.right, m, 1);
  fs.left_logdet = log_det(true_left);
  fs.kind = BasisKind::Exponential;
}

// Dormand-Prince 5(4) on Y' = C(x) Y, Y(0) = I, with per-column rescaling.
void identity_numeric(const BoundaryContactProblem& problem, std::size_t edge, FundamentalSystem& fs,
                      const FundamentalOptions& options, std::span<const double> samples) {
  const auto& op = problem.operators[edge];
  const int m = op.order;
  const int r = op.rank;
  const Eigen::Index n = static_cast<Eigen::Index>(m) * r;
  const double len = fs.length;
  const double h_max = options.step_factor / (1.0 + std::pow(std::abs(fs.lambda), 1.0 / m));
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;

  auto rhs = [&](double x, const CMatrix& y) { return CMatrix(edge_companion(op, x, fs.lambda) * y); };

  CMatrix y = CMatrix::Identity(n, n);
  RVector s = RVector::Zero(n);
  std::vector<double> targets(samples.begin(), samples.end());
  std::vector<std::pair<CMatrix, RVector>> recorded;
  std::size_t next = 0;
  double x = 0.0;
  double h = std::min(h_max, len);
  CMatrix k1 = rhs(x, y);
  while (next < targets.size() && targets[next] <= 0.0) {
    recorded.emplace_back(y, s);
    ++next;
  }
  while (x < len) {
    const double stop = next < targets.size() ? std::min(targets[next], len) : len;
    h = std::min({h, h_max, stop - x});
    if (h < 1e-13 * std::max(1.0, len)) {
      std::ostringstream os;
      os << "stiff edge integration failed at x = " << x;
      throw DomainError(os.str());
    }
    const CMatrix k2 = rhs(x + c2 * h, y + h * a21 * k1);
    const CMatrix k3 = rhs(x + c3 * h, y + h * (a31 * k1 + a32 * k2));
    const CMatrix k4 = rhs(x + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const CMatrix k5 = rhs(x + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const CMatrix k6 = rhs(x + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const CMatrix y_new = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const CMatrix k7 = rhs(x + h, y_new);
    const CMatrix err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    double ratio = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double ref = std::max(y.col(j).cwiseAbs().maxCoeff(), y_new.col(j).cwiseAbs().maxCoeff());
      ratio = std::max(ratio, err.col(j).cwiseAbs().maxCoeff() / (options.rtol * ref + 1e-300));
    }
    if (!std::isfinite(ratio)) ratio = 1e10;
    if (ratio <= 1.0) {
      const bool hit = (x + h >= stop - 1e-15 * std::max(1.0, len));
      x = hit ? stop : x + h;
      y = y_new;
      k1 = k7;
      for (Eigen::Index j = 0; j < n; ++j) {
        const double norm = y.col(j).norm();
        if (norm > std::exp(1.0)) {
          y.col(j) /= norm;
          k1.col(j) /= norm;
          s(j) += std::log(norm);
        }
      }
      while (next < targets.size() && targets[next] <= x + 1e-15 * std::max(1.0, len)) {
        recorded.emplace_back(y, s);
        ++next;
      }
    }
    const double factor = ratio == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(ratio, -0.2), 0.2, 5.0);
    h *= factor;
  }
  fs.scale = s;
  fs.right = y;
  fs.left = CMatrix::Identity(n, n) * s.array().exp().inverse().matrix().asDiagonal();
  for (std::size_t i = 0; i < recorded.size(); ++i) {
    CMatrix jets = recorded[i].first;
    for (Eigen::Index j = 0; j < n; ++j) jets.col(j) *= std::exp(recorded[i].second(j) - s(j));
    fs.sample_x.push_back(targets[i]);
    fs.sample_jets.push_back(std::move(jets));
  }
  for (std::size_t i = recorded.size(); i < targets.size(); ++i) {
    fs.sample_x.push_back(targets[i]);
    fs.sample_jets.push_back(fs.right);
  }
  to_inward(fs.right, m, r);
  fs.left_logdet = Complex(0.0, 0.0);
  fs.kind = BasisKind::Numeric;
}

}  // namespace

CMatrix FundamentalSystem::true_left() const { return left * scale.array().exp().matrix().asDiagonal(); }

CMatrix FundamentalSystem::true_right() const { return right * scale.array().exp().matrix().asDiagonal(); }

CMatrix edge_companion(const EdgeOperator& op, double x, Complex lambda) {
  std::vector<CMatrix> blocks(op.order + 1);
  for (int k = 0; k <= op.order; ++k) blocks[k] = op.coefficient(k, x);
  blocks[0] -= lambda * CMatrix::Identity(op.rank, op.rank);
  return block_companion<Complex>(std::span<const CMatrix>(blocks));
}

FundamentalSystem fundamental_system(const BoundaryContactProblem& problem, std::size_t edge, Complex lambda,
                                     const FundamentalOptions& options) {
  const auto& op = problem.operators.at(edge);
  const int m = op.order;
  const int r = op.rank;
  FundamentalSystem fs;
  fs.edge = edge;
  fs.lambda = lambda;
  fs.length = problem.graph.edges.at(edge).length;
  std::vector<double> samples = options.samples;
  std::sort(samples.begin(), samples.end());

  BasisKind kind = options.kind;
  const bool constant = op.is_constant();
  if (kind == BasisKind::Auto && !constant) kind = BasisKind::Numeric;
  if (!constant && kind != BasisKind::Numeric) {
    if (kind == BasisKind::Exponential) throw InputError("exponential basis needs constant coefficients");
    kind = BasisKind::Numeric;
  }
  if (kind == BasisKind::Numeric) {
    identity_numeric(problem, edge, fs, options, samples);
    return fs;
  }
  const CMatrix comp = edge_companion(op, 0.0, lambda);
  const ScaledEigen se = scaled_eigen(comp, m, r);
  if (kind == BasisKind::Auto) {
    // identity data while nothing can overflow or cancel; separated exponentials beyond
    double grow = 0.0;
    for (Eigen::Index i = 0; i < se.values.size(); ++i) grow = std::max(grow, std::abs(se.values(i).real()) * fs.length);
    kind = grow <= kAutoGrowth ? BasisKind::Identity : BasisKind::Exponential;
  }
  if (kind == BasisKind::Exponential) {
    if (se.cond < kCondLimit)
      exponential_from_eigen(se, fs, m, r, samples);
    else if (r == 1)
      exponential_jordan(comp, fs, m, samples);
    else
      identity_from_expm(comp, fs, m, r, samples);
  } else if (se.cond < kCondLimit) {
    identity_from_eigen(se, fs, m, r, samples);
  } else {
    identity_from_expm(comp, fs, m, r, samples);
  }
  check_finite(fs.right, "right jets");
  return fs;
}

CMatrix transfer_matrix(const BoundaryContactProblem& problem, std::size_t edge, Complex lambda) {
  FundamentalOptions options;
  options.kind = BasisKind::Identity;
  const auto fs = fundamental_system(problem, edge, lambda, options);
  CMatrix right = fs.true_right();
  to_inward(right, problem.order(), problem.rank());
  return right * fs.true_left().inverse();
}

}  // namespace bcp

#include "bcp/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

#include "bcp/ellipticity.hpp"
#include "bcp/quadrature.hpp"

namespace bcp {

namespace {

struct Candidate {
  double lambda;
  int multiplicity;
};

struct Sweeper {
  const BoundaryContactProblem& problem;
  const SweepOptions& options;
  BasisKind kind;
  double weyl_length;
  int order;

  double spacing(double lambda) const {
    const double lp = std::max(lambda, 0.0);
    return order * kPi * std::pow(lp, 1.0 - 1.0 / order) / weyl_length + std::pow(kPi / weyl_length, order);
  }

  double sigma(double lambda) const { return sigma_min(problem, lambda, kind); }

  int nullity_at(double lambda) const {
    FundamentalOptions fo;
    fo.kind = kind;
    return nullity(secular_matrix(problem, lambda, fo), options.multiplicity_threshold);
  }

  double golden(double a, double b) const {
    constexpr double g = 0.6180339887498949;
    double c = b - g * (b - a);
    double d = a + g * (b - a);
    double fc = sigma(c), fd = sigma(d);
    for (int it = 0; it < 200; ++it) {
      const double tol = options.refine_tol * std::max(1.0, std::abs(0.5 * (a + b)));
      if (b - a <= tol) break;
      if (fc <= fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - g * (b - a);
        fc = sigma(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + g * (b - a);
        fd = sigma(d);
      }
    }
    return fc <= fd ? c : d;
  }

  std::vector<Candidate> sweep(double a, double b, double factor) const {
    std::vector<double> xs{a};
    while (xs.back() < b) xs.push_back(std::min(b, xs.back() + factor * spacing(xs.back())));
    std::vector<double> fs(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) fs[i] = sigma(xs[i]);
    std::vector<Candidate> out;
    for (std::size_t i = 1; i + 1 < xs.size(); ++i) {
      if (!(fs[i] <= fs[i - 1] && fs[i] <= fs[i + 1])) continue;
      if (fs[i] == fs[i - 1] && i > 1 && fs[i - 1] <= fs[i - 2]) continue;
      const double lam = golden(xs[i - 1], xs[i + 1]);
      const int mult = nullity_at(lam);
      if (mult >= 1) out.push_back({lam, mult});
    }
    return out;
  }
};

void merge_candidates(std::vector<Candidate>& list) {
  std::sort(list.begin(), list.end(), [](const auto& x, const auto& y) { return x.lambda < y.lambda; });
  std::vector<Candidate> out;
  for (const auto& c : list) {
    if (!out.empty() && std::abs(c.lambda - out.back().lambda) <= 1e-9 * std::max(1.0, std::abs(c.lambda))) {
      out.back().multiplicity = std::max(out.back().multiplicity, c.multiplicity);
      continue;
    }
    out.push_back(c);
  }
  list = std::move(out);
}

double wrap(double a) { return std::remainder(a, 2.0 * kPi); }

struct PhaseWalker {
  const BoundaryContactProblem& problem;
  FundamentalOptions options;

  double log_phase(Complex z) const { return secular_matrix(problem, z, options).log_char.imag(); }

  double segment(Complex z1, Complex z2, double p1, double p2, int depth) const {
    const double d = wrap(p2 - p1);
    if (std::abs(d) <= kPi / 4 || depth > 40) return d;
    const Complex zm = 0.5 * (z1 + z2);
    const double pm = log_phase(zm);
    return segment(z1, zm, p1, pm, depth + 1) + segment(zm, z2, pm, p2, depth + 1);
  }
};

}  // namespace

int Spectrum::total_count() const {
  int n = 0;
  for (int m : multiplicities) n += m;
  return n;
}

std::vector<double> Spectrum::expanded() const {
  std::vector<double> out;
  for (std::size_t i = 0; i < eigenvalues.size(); ++i) out.insert(out.end(), multiplicities[i], eigenvalues[i]);
  return out;
}

int Spectrum::counting(double lambda) const {
  int n = 0;
  for (std::size_t i = 0; i < eigenvalues.size() && eigenvalues[i] <= lambda; ++i) n += multiplicities[i];
  return n;
}

bool Spectrum::certified() const {
  return std::all_of(certificate.begin(), certificate.end(),
                     [](const auto& c) { return c.contour_count == c.found; });
}

double sigma_min(const BoundaryContactProblem& problem, Complex lambda, BasisKind kind) {
  FundamentalOptions fo;
  fo.kind = kind;
  const RVector s = normalized_singular_values(secular_matrix(problem, lambda, fo));
  return s.size() ? s.minCoeff() : 0.0;
}

int contour_count(const BoundaryContactProblem& problem, double a, double b, double h, BasisKind kind) {
  PhaseWalker walker{problem, {}};
  walker.options.kind = kind;
  // The phase of the characteristic function turns at a rate of about
  // L |d lambda^{1/m}|; sample each side so that this stays below pi/8.
  const int m = problem.order();
  const double w = std::max(problem.weyl_length(), 1e-12);
  const double r_floor = std::pow(1.0 / w, m);
  std::vector<Complex> path;
  std::function<void(Complex, Complex)> side = [&](Complex z1, Complex z2) {
    const Complex d = z2 - z1;
    const double t = std::clamp(-std::real(z1 * std::conj(d)) / std::norm(d), 0.0, 1.0);
    const double r_min = std::max(std::abs(z1 + t * d), r_floor);
    if (std::max(std::abs(z1), std::abs(z2)) > 4.0 * r_min) {
      side(z1, z1 + 0.5 * d);
      side(z1 + 0.5 * d, z2);
      return;
    }
    const double turn = w * std::abs(d) / m * std::pow(r_min, 1.0 / m - 1.0);
    const int n = std::max(2, static_cast<int>(std::ceil(turn / (kPi / 8.0))));
    for (int j = 0; j < n; ++j) path.push_back(z1 + d * (static_cast<double>(j) / n));
  };
  const Complex c0(a, -h), c1(b, -h), c2(b, h), c3(a, h);
  side(c0, c1);
  side(c1, c2);
  side(c2, c3);
  side(c3, c0);
  std::vector<double> phase(path.size());
  for (std::size_t i = 0; i < path.size(); ++i) phase[i] = walker.log_phase(path[i]);
  double total = 0.0;
  for (std::size_t i = 0; i < path.size(); ++i) {
    const std::size_t j = (i + 1) % path.size();
    total += walker.segment(path[i], path[j], phase[i], phase[j], 0);
  }
  const double winding = total / (2.0 * kPi);
  const double rounded = std::round(winding);
  if (std::abs(winding - rounded) >= 0.05) {
    std::ostringstream os;
    os << "non-integer contour count " << winding << " on [" << a << ", " << b << "]";
    throw DomainError(os.str());
  }
  return static_cast<int>(rounded);
}

Spectrum eigenvalues(const BoundaryContactProblem& problem, const SweepOptions& options) {
  require_valid(problem);
  const auto sa = self_adjointness_report(problem);
  if (!sa.symmetric) throw DomainError("problem is not symmetric; spectral sweep rejected");
  if (!check(problem).elliptic) throw DomainError("problem is not parameter-elliptic");
  if (!options.max_count && !(std::isfinite(options.lambda_hi)))
    throw InputError("lambda_hi must be finite");

  Sweeper sw{problem, options, options.force_numeric ? BasisKind::Numeric : BasisKind::Auto,
             problem.weyl_length(), problem.order()};
  Spectrum spec;
  spec.digest = canonical_hash(problem);
  spec.options = options;
  spec.order = problem.order();
  spec.weyl_length = problem.weyl_length();
  spec.sector = problem.sector;
  for (std::size_t e = 0; e < problem.graph.edges.size(); ++e)
    spec.edge_weyl_lengths.push_back(problem.edge_weyl_length(e));
  spec.lambda_lo = options.lambda_lo ? *options.lambda_lo : (sa.lower_bound ? *sa.lower_bound - 1.0 : -1.0);

  double target = options.lambda_hi;
  if (options.max_count) {
    if (*options.max_count < 1) throw InputError("max_count must be positive");
    target = std::pow(kPi * (*options.max_count + 1) / sw.weyl_length, sw.order);
  }
  if (target <= spec.lambda_lo) throw InputError("lambda_hi must exceed lambda_lo");

  std::vector<Candidate> found;
  double swept = spec.lambda_lo;
  auto extend = [&](double to) {
    if (to <= swept) return;
    const double from = std::max(spec.lambda_lo, swept - 2.0 * options.grid_factor * sw.spacing(swept));
    auto more = sw.sweep(from, to, options.grid_factor);
    found.insert(found.end(), more.begin(), more.end());
    merge_candidates(found);
    swept = to;
  };
  auto count_upto = [&](double x) {
    int n = 0;
    for (const auto& c : found)
      if (c.lambda <= x) n += c.multiplicity;
    return n;
  };

  for (int guard = 0;; ++guard) {
    extend(target + 2.0 * sw.spacing(target));
    // need an eigenvalue above the window top to place the certificate edge
    int extra = 0;
    while (std::none_of(found.begin(), found.end(), [&](const auto& c) { return c.lambda > target; }) && extra < 20) {
      extend(swept + 4.0 * sw.spacing(swept));
      ++extra;
    }
    if (!options.max_count || count_upto(target) >= *options.max_count || guard > 30) break;
    target *= 2.0;
  }
  if (options.max_count) {
    int acc = 0;
    double last = spec.lambda_lo;
    for (const auto& c : found) {
      if (acc >= *options.max_count) break;
      acc += c.multiplicity;
      last = c.lambda;
    }
    target = last;
  }

  auto top_edge = [&]() {
    double below = spec.lambda_lo, above = std::numeric_limits<double>::infinity();
    for (const auto& c : found) {
      if (c.lambda <= target)
        below = std::max(below, c.lambda);
      else
        above = std::min(above, c.lambda);
    }
    if (!std::isfinite(above)) above = swept;
    return 0.5 * (below + above);
  };

  // Certification blocks with edges at gap midpoints.
  auto certify = [&](double a, double b, int& count, int& inside) {
    inside = 0;
    for (const auto& c : found)
      if (c.lambda > a && c.lambda < b) inside += c.multiplicity;
    const double h = std::max(0.5 * sw.spacing(0.5 * (a + b)), 1e-3 * (b - a));
    count = contour_count(problem, a, b, std::min(h, 0.5 * (b - a)), sw.kind);
  };

  const double b_star = top_edge();
  std::vector<double> edges{spec.lambda_lo};
  {
    std::vector<double> inside;
    for (const auto& c : found)
      if (c.lambda < b_star) inside.push_back(c.lambda);
    for (std::size_t i = options.clusters_per_contour; i < inside.size(); i += options.clusters_per_contour)
      edges.push_back(0.5 * (inside[i - 1] + inside[i]));
    edges.push_back(b_star);
  }
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const double a = edges[i], b = edges[i + 1];
    int count = 0, inside = 0;
    certify(a, b, count, inside);
    double factor = options.grid_factor;
    for (int ref = 0; count != inside && ref < options.max_refinements; ++ref) {
      factor /= 4.0;
      found.erase(std::remove_if(found.begin(), found.end(), [&](const auto& c) { return c.lambda > a && c.lambda < b; }),
                  found.end());
      auto more = sw.sweep(a, b, factor);
      for (const auto& c : more)
        if (c.lambda > a && c.lambda < b) found.push_back(c);
      merge_candidates(found);
      certify(a, b, count, inside);
    }
    if (count != inside) {
      std::ostringstream os;
      os.precision(10);
      os << "possible missed eigenvalue in [" << a << ", " << b << "]";
      throw DomainError(os.str());
    }
    spec.certificate.push_back({a, b, count, inside});
  }

  for (const auto& c : found) {
    if (c.lambda > target) break;
    spec.eigenvalues.push_back(c.lambda);
    spec.multiplicities.push_back(c.multiplicity);
  }
  spec.lambda_hi = options.max_count ? b_star : options.lambda_hi;
  return spec;
}

double resolvent_norm(const Spectrum& spectrum, Complex lambda) {
  double near = std::numeric_limits<double>::infinity();
  for (double ev : spectrum.eigenvalues) near = std::min(near, std::abs(lambda - ev));
  const double hi = spectrum.lambda_hi;
  const double tail = lambda.real() >= hi ? std::abs(lambda.imag()) : std::abs(lambda - hi);
  if (tail < near) throw DomainError("window too small for resolvent norm at this lambda");
  if (near == 0.0) throw DomainError("lambda in spectrum");
  return 1.0 / near;
}

namespace {

struct NullData {
  SecularMatrix g;
  CMatrix coefficients;  // columns: null vectors on stored columns
};

NullData null_space(const BoundaryContactProblem& problem, double lambda,
                    const std::vector<std::vector<double>>& samples, double threshold) {
  std::vector<FundamentalSystem> systems;
  for (std::size_t e = 0; e < problem.graph.edges.size(); ++e) {
    FundamentalOptions fo;
    fo.kind = BasisKind::Identity;
    fo.samples = samples[e];
    systems.push_back(fundamental_system(problem, e, lambda, fo));
  }
  NullData out{assemble_secular(problem, std::move(systems)), {}};
  const auto eq = equilibrate(out.g);
  Eigen::JacobiSVD<CMatrix> svd(eq.matrix, Eigen::ComputeFullV);
  const RVector s = svd.singularValues();
  const Eigen::Index n = eq.matrix.cols();
  int mult = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double sv = i < s.size() ? s(i) / s(0) : 0.0;
    if (sv < threshold) ++mult;
  }
  out.coefficients = eq.column_factor.asDiagonal() * svd.matrixV().rightCols(mult);
  return out;
}

// Values (rows: point*r + c) of the null-space functions on one edge.
CMatrix edge_values(const NullData& nd, std::size_t edge, int r, std::size_t first, std::size_t count) {
  const auto& fs = nd.g.systems[edge];
  const Eigen::Index off = nd.g.edge_offset(edge);
  CMatrix out(static_cast<Eigen::Index>(count) * r, nd.coefficients.cols());
  for (std::size_t i = 0; i < count; ++i)
    out.middleRows(static_cast<Eigen::Index>(i) * r, r) =
        fs.sample_jets[first + i].topRows(r) * nd.coefficients.middleRows(off, fs.size());
  return out;
}

QuadratureRule<double> edge_rule(double length, double lambda, int m) {
  const double k = std::pow(std::abs(lambda), 1.0 / m);
  const int panels = 2 + static_cast<int>(std::ceil(length * k / 4.0));
  return composite_gauss_legendre(0.0, length, panels, 16);
}

}  // namespace

Eigenbasis eigenfunctions(const BoundaryContactProblem& problem, double lambda,
                          const std::vector<std::vector<double>>& grids, double threshold) {
  const int r = problem.rank();
  const std::size_t ne = problem.graph.edges.size();
  if (grids.size() != ne) throw InputError("one grid per edge expected");
  std::vector<QuadratureRule<double>> rules;
  std::vector<std::vector<double>> samples(ne);
  for (std::size_t e = 0; e < ne; ++e) {
    rules.push_back(edge_rule(problem.graph.edges[e].length, lambda, problem.order()));
    samples[e] = rules[e].nodes;
    samples[e].insert(samples[e].end(), grids[e].begin(), grids[e].end());
  }
  // fundamental_system sorts samples; keep track through a sorted copy
  std::vector<std::vector<std::size_t>> order(ne);
  for (std::size_t e = 0; e < ne; ++e) {
    order[e].resize(samples[e].size());
    std::iota(order[e].begin(), order[e].end(), 0);
    std::stable_sort(order[e].begin(), order[e].end(),
                     [&](std::size_t i, std::size_t j) { return samples[e][i] < samples[e][j]; });
  }
  const NullData nd = null_space(problem, lambda, samples, threshold);
  const Eigen::Index mult = nd.coefficients.cols();

  Eigenbasis basis;
  basis.lambda = lambda;
  basis.multiplicity = static_cast<int>(mult);
  if (mult == 0) {
    for (std::size_t e = 0; e < ne; ++e) basis.values.push_back(CMatrix::Zero(grids[e].size() * r, 0));
    return basis;
  }
  CMatrix gram = CMatrix::Zero(mult, mult);
  const auto edge_w = problem.graph.edge_weights();
  std::vector<CMatrix> grid_values;
  for (std::size_t e = 0; e < ne; ++e) {
    const CMatrix all = edge_values(nd, e, r, 0, samples[e].size());
    // undo the sort
    CMatrix unsorted(all.rows(), all.cols());
    for (std::size_t i = 0; i < order[e].size(); ++i)
      unsorted.middleRows(static_cast<Eigen::Index>(order[e][i]) * r, r) = all.middleRows(static_cast<Eigen::Index>(i) * r, r);
    const std::size_t nq = rules[e].nodes.size();
    for (std::size_t q = 0; q < nq; ++q) {
      const CMatrix v = unsorted.middleRows(static_cast<Eigen::Index>(q) * r, r);
      gram += edge_w[e] * rules[e].weights[q] * v.adjoint() * v;
    }
    grid_values.push_back(unsorted.bottomRows(static_cast<Eigen::Index>(grids[e].size()) * r));
  }
  // gram = L L^*, orthonormal basis = values * L^{-*}
  const Eigen::LLT<CMatrix> llt(0.5 * (gram + gram.adjoint()));
  const CMatrix t = llt.matrixU().solve(CMatrix::Identity(mult, mult));
  for (auto& v : grid_values) basis.values.push_back(v * t);
  return basis;
}

std::vector<double> eigenfunction_edge_masses(const BoundaryContactProblem& problem, double lambda, double threshold) {
  const int r = problem.rank();
  const std::size_t ne = problem.graph.edges.size();
  std::vector<QuadratureRule<double>> rules;
  std::vector<std::vector<double>> samples(ne);
  for (std::size_t e = 0; e < ne; ++e) {
    rules.push_back(edge_rule(problem.graph.edges[e].length, lambda, problem.order()));
    samples[e] = rules[e].nodes;
  }
  const NullData nd = null_space(problem, lambda, samples, threshold);
  const Eigen::Index mult = nd.coefficients.cols();
  std::vector<double> masses(ne, 0.0);
  if (mult == 0) return masses;
  std::vector<CMatrix> per_edge;
  const auto edge_w = problem.graph.edge_weights();
  CMatrix gram = CMatrix::Zero(mult, mult);
  for (std::size_t e = 0; e < ne; ++e) {
    const CMatrix vals = edge_values(nd, e, r, 0, samples[e].size());
    CMatrix ge = CMatrix::Zero(mult, mult);
    for (std::size_t q = 0; q < rules[e].nodes.size(); ++q) {
      const CMatrix v = vals.middleRows(static_cast<Eigen::Index>(q) * r, r);
      ge += edge_w[e] * rules[e].weights[q] * v.adjoint() * v;
    }
    gram += ge;
    per_edge.push_back(std::move(ge));
  }
  const CMatrix ginv = (0.5 * (gram + gram.adjoint())).ldlt().solve(CMatrix::Identity(mult, mult));
  for (std::size_t e = 0; e < ne; ++e) masses[e] = std::max(0.0, (ginv * per_edge[e]).trace().real());
  return masses;
}

}  // namespace bcp

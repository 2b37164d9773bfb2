#include "bcp/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/special_functions/gamma.hpp>

#include "bcp/quadrature.hpp"

namespace bcp {

namespace {

struct WeightedCount {
  std::vector<double> lambda;
  std::vector<double> prefix;  // prefix[i] = sum of weights of clusters < i

  WeightedCount(const Spectrum& s, const TraceWeights& w) : lambda(s.eigenvalues), prefix(s.eigenvalues.size() + 1, 0.0) {
    for (std::size_t i = 0; i < lambda.size(); ++i) prefix[i + 1] = prefix[i] + w.cluster[i];
  }
  double at(double x) const {  // right-continuous
    return prefix[std::upper_bound(lambda.begin(), lambda.end(), x) - lambda.begin()];
  }
  double before(double x) const {
    return prefix[std::lower_bound(lambda.begin(), lambda.end(), x) - lambda.begin()];
  }
};

const TraceWeights& resolve(const Spectrum& spectrum, const TraceWeights* weights, TraceWeights& storage) {
  if (weights) {
    if (weights->cluster.size() != spectrum.eigenvalues.size()) throw InputError("trace weights do not match spectrum");
    return *weights;
  }
  storage = unit_weights(spectrum);
  return storage;
}

struct RawTrace {
  double value = 0.0;
  double tail = 0.0;
  double bound = 0.0;
};

RawTrace heat_raw(const Spectrum& spectrum, const TraceWeights& w, const TailModel& tm, double t) {
  RawTrace out;
  for (std::size_t i = 0; i < spectrum.eigenvalues.size(); ++i) {
    const double arg = t * spectrum.eigenvalues[i];
    if (arg > 745.0) break;
    out.value += w.cluster[i] * std::exp(-arg);
  }
  const double m = tm.order;
  const double lc = std::max(tm.lambda_c, 0.0);
  const double gamma_tail = boost::math::tgamma(1.0 / m, t * lc);
  const double edge = std::exp(-t * lc);
  out.tail = tm.average * tm.weyl_length / kPi / m * std::pow(t, -1.0 / m) * gamma_tail + tm.jump() * edge;
  out.bound = tm.bound(edge);
  out.value += out.tail;
  return out;
}

struct LeastSquares {
  Eigen::VectorXcd beta;
  double residual = 0.0;
  double condition = 0.0;
};

LeastSquares weighted_fit(const Eigen::MatrixXd& design, const Eigen::VectorXcd& values) {
  const Eigen::Index n = design.rows(), p = design.cols();
  Eigen::MatrixXd a(n, p);
  Eigen::VectorXcd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double w = 1.0 / std::abs(values(i));
    a.row(i) = w * design.row(i);
    b(i) = w * values(i);
  }
  RVector norms(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    norms(j) = a.col(j).norm();
    a.col(j) /= norms(j);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto s = svd.singularValues();
  LeastSquares out;
  out.condition = s(p - 1) > 0.0 ? s(0) / s(p - 1) : std::numeric_limits<double>::infinity();
  if (!(out.condition <= 1e10)) throw DomainError("ill-conditioned design: reduce J or extend window");
  const Eigen::VectorXd re = svd.solve(Eigen::VectorXd(b.real()));
  const Eigen::VectorXd im = svd.solve(Eigen::VectorXd(b.imag()));
  out.beta.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) out.beta(j) = Complex(re(j), im(j)) / norms(j);
  Eigen::VectorXcd r = b;
  for (Eigen::Index j = 0; j < p; ++j) r -= a.col(j).cast<Complex>() * (out.beta(j) * norms(j));
  out.residual = r.norm() / std::sqrt(static_cast<double>(n));
  return out;
}

}  // namespace

TraceWeights unit_weights(const Spectrum& spectrum) {
  TraceWeights w;
  w.cluster.assign(spectrum.multiplicities.begin(), spectrum.multiplicities.end());
  w.average = 1.0;
  return w;
}

TraceWeights localization_weights(const BoundaryContactProblem& problem, const Spectrum& spectrum,
                                  const std::vector<double>& phi) {
  const std::size_t ne = problem.graph.edges.size();
  if (phi.size() != ne) throw InputError("phi needs one value per edge");
  TraceWeights w;
  double total = 0.0, weighted = 0.0;
  for (std::size_t e = 0; e < ne; ++e) {
    const double le = problem.edge_weyl_length(e);
    total += le;
    weighted += phi[e] * le;
  }
  w.average = weighted / total;
  if (std::all_of(phi.begin(), phi.end(), [&](double x) { return x == phi.front(); })) {
    // masses sum to the multiplicity
    w.average = phi.front();
    for (int mult : spectrum.multiplicities) w.cluster.push_back(phi.front() * mult);
    return w;
  }
  for (double lambda : spectrum.eigenvalues) {
    const auto masses = eigenfunction_edge_masses(problem, lambda, spectrum.options.multiplicity_threshold);
    double acc = 0.0;
    for (std::size_t e = 0; e < ne; ++e) acc += phi[e] * masses[e];
    w.cluster.push_back(acc);
  }
  return w;
}

double TailModel::weyl(double lambda) const {
  return average * weyl_length / kPi * std::pow(std::max(lambda, 0.0), 1.0 / order);
}

double TailModel::jump() const { return weyl(lambda_c) + offset - count_at_c; }

double TailModel::bound(double sup_g) const { return 2.0 * std::max(oscillation, 0.5) * sup_g; }

TailModel tail_model(const Spectrum& spectrum, const TraceWeights& weights) {
  TailModel tm;
  tm.lambda_c = spectrum.lambda_hi;
  tm.weyl_length = spectrum.weyl_length;
  tm.order = spectrum.order;
  tm.average = weights.average;
  const WeightedCount n(spectrum, weights);
  tm.count_at_c = n.at(tm.lambda_c);
  const double kc = std::pow(std::max(tm.lambda_c, 0.0), 1.0 / tm.order);
  constexpr int samples = 4001;
  std::vector<double> diffs;
  diffs.reserve(samples);
  for (int i = 0; i < samples; ++i) {
    const double k = kc * (0.5 + 0.5 * i / (samples - 1));
    const double lambda = std::pow(k, tm.order);
    diffs.push_back(n.at(std::min(lambda, tm.lambda_c)) - tm.weyl(lambda));
  }
  tm.offset = std::accumulate(diffs.begin(), diffs.end(), 0.0) / samples;
  double osc = 0.0;
  for (double d : diffs) osc = std::max(osc, std::abs(d - tm.offset));
  const double lo = std::pow(0.5 * kc, tm.order);
  for (double ev : spectrum.eigenvalues) {
    if (ev < lo || ev > tm.lambda_c) continue;
    osc = std::max(osc, std::abs(n.at(ev) - tm.weyl(ev) - tm.offset));
    osc = std::max(osc, std::abs(n.before(ev) - tm.weyl(ev) - tm.offset));
  }
  tm.oscillation = osc;
  return tm;
}

TraceValue heat_trace(const Spectrum& spectrum, double t, const TraceWeights* weights) {
  if (!(t > 0.0)) throw InputError("t must be positive");
  TraceWeights storage;
  const auto& w = resolve(spectrum, weights, storage);
  const TailModel tm = tail_model(spectrum, w);
  const RawTrace raw = heat_raw(spectrum, w, tm, t);
  TraceValue out;
  out.value = raw.value;
  out.tail_bound = raw.bound;
  out.zero_mode = !spectrum.eigenvalues.empty() && std::abs(spectrum.eigenvalues.front()) <= 1e-8;
  out.negative_eigenvalue = !spectrum.eigenvalues.empty() && spectrum.eigenvalues.front() < -1e-8;
  if (std::abs(raw.tail) + raw.bound > 0.01 * std::abs(raw.value)) throw DomainError("window insufficient for t");
  return out;
}

std::vector<double> log_grid(double lo, double hi, int n) {
  if (!(lo > 0.0 && hi > lo) || n < 2) throw InputError("log grid needs 0 < lo < hi and n >= 2");
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
  return out;
}

HeatTraceSeries heat_series(const Spectrum& spectrum, const std::vector<double>& t, const TraceWeights* weights) {
  TraceWeights storage;
  const auto& w = resolve(spectrum, weights, storage);
  const TailModel tm = tail_model(spectrum, w);
  HeatTraceSeries series;
  series.localized = weights != nullptr;
  for (double ti : t) {
    if (!(ti > 0.0)) throw InputError("t must be positive");
    const RawTrace raw = heat_raw(spectrum, w, tm, ti);
    if (std::abs(raw.tail) + raw.bound > 0.01 * std::abs(raw.value)) throw DomainError("window insufficient for t");
    series.t.push_back(ti);
    series.values.push_back(raw.value);
    series.tail_bounds.push_back(raw.bound);
  }
  return series;
}

std::vector<double> default_heat_window(const Spectrum& spectrum, double min_length, int n) {
  const double lo = 36.0 / spectrum.lambda_hi;
  const double hi = std::pow(min_length / 5.0, spectrum.order);
  if (!(spectrum.lambda_hi > 0.0) || !(hi > lo)) throw DomainError("window insufficient for the heat fit");
  return log_grid(lo, hi, n);
}

AsymptoticFit fit_heat_invariants(const HeatTraceSeries& series, int terms, int order) {
  const Eigen::Index n = static_cast<Eigen::Index>(series.t.size());
  if (terms < 1 || n < terms) throw InputError("need at least as many samples as terms");
  for (Eigen::Index i = 0; i < n; ++i)
    if (series.tail_bounds[i] > 1e-3 * std::abs(series.values[i]))
      throw DomainError("tail bound exceeds 0.1% of the trace in the fit window");
  AsymptoticFit fit;
  fit.kind = "heat";
  fit.order = order;
  for (int j = 0; j < terms; ++j) fit.exponents.push_back((j - 1.0) / order);
  Eigen::MatrixXd design(n, terms);
  Eigen::VectorXcd values(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int j = 0; j < terms; ++j) design(i, j) = std::pow(series.t[i], fit.exponents[j]);
    values(i) = series.values[i];
  }
  const auto ls = weighted_fit(design, values);
  for (int j = 0; j < terms; ++j) fit.coefficients.push_back(ls.beta(j));
  fit.residual = ls.residual;
  fit.condition = ls.condition;
  fit.window_lo = series.t.front();
  fit.window_hi = series.t.back();
  fit.samples = static_cast<int>(n);
  return fit;
}

TraceValue resolvent_trace(const Spectrum& spectrum, Complex lambda, int power, const TraceWeights* weights) {
  if (power < 1 || !(power > 1.0 / spectrum.order)) throw InputError("N must exceed the trace-class threshold");
  TraceWeights storage;
  const auto& w = resolve(spectrum, weights, storage);
  const TailModel tm = tail_model(spectrum, w);
  double near = std::numeric_limits<double>::infinity();
  for (double ev : spectrum.eigenvalues) near = std::min(near, std::abs(ev - lambda));
  if (near <= 1e-12 * std::max(1.0, std::abs(lambda))) throw DomainError("lambda in spectrum");
  const double lc = tm.lambda_c;
  const double tail_dist = lambda.real() >= lc ? std::abs(lambda.imag()) : std::abs(lambda - lc);
  if (tail_dist <= 1e-12 * std::max(1.0, std::abs(lambda))) throw DomainError("lambda beyond the certified window");

  TraceValue out;
  Complex sum(0.0, 0.0);
  for (std::size_t i = 0; i < spectrum.eigenvalues.size(); ++i)
    sum += w.cluster[i] * std::pow(Complex(spectrum.eigenvalues[i]) - lambda, -power);
  // tail: average (L/pi) k_c int_0^1 v^{mN-2} (k_c^m - lambda v^m)^{-N} dv
  const int m = tm.order;
  const double kc = std::pow(std::max(lc, 0.0), 1.0 / m);
  const auto rule = composite_gauss_legendre(0.0, 1.0, 8, 32);
  Complex integral(0.0, 0.0);
  for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
    const double v = rule.nodes[q];
    integral += rule.weights[q] * std::pow(v, m * power - 2) * std::pow(Complex(std::pow(kc, m)) - lambda * std::pow(v, m), -power);
  }
  const Complex edge = std::pow(Complex(lc) - lambda, -power);
  sum += tm.average * tm.weyl_length / kPi * kc * integral + tm.jump() * edge;
  out.value = sum;
  out.tail_bound = tm.bound(std::pow(tail_dist, -power));
  out.zero_mode = !spectrum.eigenvalues.empty() && std::abs(spectrum.eigenvalues.front()) <= 1e-8;
  out.negative_eigenvalue = !spectrum.eigenvalues.empty() && spectrum.eigenvalues.front() < -1e-8;
  return out;
}

AsymptoticFit fit_resolvent_coeffs(const Spectrum& spectrum, double min_length, const ResolventFitOptions& options,
                                   const TraceWeights* weights) {
  const int m = spectrum.order;
  if (!spectrum.sector.contains(std::polar(1.0, options.ray))) throw DomainError("ray outside the sector");
  if (options.terms < 1 || options.samples < options.terms) throw InputError("need at least as many samples as terms");
  const double lo = options.rho_lo ? *options.rho_lo : std::pow(15.0 / min_length, m);
  const auto rho = log_grid(lo, lo * std::pow(10.0, options.decades), options.samples);
  AsymptoticFit fit;
  fit.kind = "resolvent";
  fit.order = m;
  fit.ray = options.ray;
  fit.power = options.power;
  for (int j = 0; j < options.terms; ++j) fit.exponents.push_back((1.0 - j) / m - options.power);
  const Eigen::Index n = static_cast<Eigen::Index>(rho.size());
  Eigen::MatrixXd design(n, options.terms);
  Eigen::VectorXcd values(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto tv = resolvent_trace(spectrum, std::polar(rho[i], options.ray), options.power, weights);
    if (tv.tail_bound > 1e-3 * std::abs(tv.value))
      throw DomainError("window insufficient: tail bound exceeds 0.1% of the resolvent trace");
    values(i) = tv.value;
    for (int j = 0; j < options.terms; ++j) design(i, j) = std::pow(rho[i], fit.exponents[j]);
  }
  const auto ls = weighted_fit(design, values);
  for (int j = 0; j < options.terms; ++j) fit.coefficients.push_back(ls.beta(j));
  fit.residual = ls.residual;
  fit.condition = ls.condition;
  fit.window_lo = rho.front();
  fit.window_hi = rho.back();
  fit.samples = static_cast<int>(n);
  return fit;
}

ZetaReport zeta(const Spectrum& spectrum, const AsymptoticFit& heat_fit, const std::vector<double>& s_list,
                const ZetaOptions& options) {
  if (spectrum.eigenvalues.empty() || spectrum.eigenvalues.front() <= 1e-8)
    throw DomainError("A_C not positive; zeta undefined");
  if (heat_fit.kind != "heat") throw InputError("zeta needs a heat-trace fit");
  const int m = spectrum.order;
  const TraceWeights w = unit_weights(spectrum);
  const TailModel tm = tail_model(spectrum, w);
  const std::size_t terms = heat_fit.coefficients.size();
  std::vector<double> alpha(terms);
  for (std::size_t j = 0; j < terms; ++j) alpha[j] = heat_fit.coefficients[j].real();

  ZetaReport report;
  for (std::size_t j = 0; j < terms; ++j) {
    ZetaPole pole;
    pole.location = (1.0 - static_cast<double>(j)) / m;
    const double nearest = std::round(pole.location);
    if (pole.location <= 0.0 && std::abs(pole.location - nearest) < 1e-14) {
      pole.regular = true;
    } else {
      pole.residue = alpha[j] / boost::math::tgamma(pole.location);
    }
    report.poles.push_back(pole);
  }

  const double lambda1 = spectrum.eigenvalues.front();
  const double t_lo = options.t_lo > 0.0 ? options.t_lo : heat_fit.window_lo;
  // Regularized small-t integral in u = log t, and the large-t integral.
  const double u_lo = std::log(t_lo);
  const auto small_rule = composite_gauss_legendre(u_lo, 0.0, std::max(4, static_cast<int>(std::ceil(-u_lo)) * 2), 16);
  std::vector<double> small_t, small_r, small_b;
  for (double u : small_rule.nodes) {
    const double t = std::exp(u);
    double model = 0.0;
    for (std::size_t j = 0; j < terms; ++j) model += alpha[j] * std::pow(t, (static_cast<double>(j) - 1.0) / m);
    const auto h = heat_raw(spectrum, w, tm, t);
    small_t.push_back(t);
    small_r.push_back(h.value - model);
    small_b.push_back(h.bound);
  }
  const double t_big = 1.0 + 40.0 / lambda1;
  const auto big_rule =
      composite_gauss_legendre(1.0, t_big, std::max(4, static_cast<int>(std::ceil(lambda1 * (t_big - 1.0) / 2.0))), 16);
  std::vector<double> big_theta, big_b;
  for (double t : big_rule.nodes) {
    const auto h = heat_raw(spectrum, w, tm, t);
    big_theta.push_back(h.value);
    big_b.push_back(h.bound);
  }

  for (double s : s_list) {
    report.s.push_back(s);
    const bool direct = !options.force_mellin && s >= 1.0 && m * s > 1.0;
    if (direct) {
      double sum = 0.0;
      for (std::size_t i = 0; i < spectrum.eigenvalues.size(); ++i)
        sum += w.cluster[i] * std::pow(spectrum.eigenvalues[i], -s);
      const double kc = std::pow(tm.lambda_c, 1.0 / m);
      sum += tm.average * tm.weyl_length / kPi * std::pow(kc, 1.0 - m * s) / (m * s - 1.0) +
             tm.jump() * std::pow(tm.lambda_c, -s);
      report.values.push_back(sum);
      report.tail_bounds.push_back(tm.bound(std::pow(tm.lambda_c, -s)));
      report.method.push_back("direct");
      continue;
    }
    const double nearest = std::round(s);
    if (s <= 0.0 && s == nearest) {
      const int n = static_cast<int>(-nearest);
      const std::size_t j = static_cast<std::size_t>(m * n + 1);
      double value = 0.0;
      if (j < terms) value = (n % 2 == 0 ? 1.0 : -1.0) * std::tgamma(n + 1.0) * alpha[j];
      report.values.push_back(value);
      report.tail_bounds.push_back(0.0);
      report.method.push_back("mellin");
      continue;
    }
    bool at_pole = false;
    double poles = 0.0;
    for (std::size_t j = 0; j < terms; ++j) {
      const double d = s + (static_cast<double>(j) - 1.0) / m;
      if (d == 0.0) at_pole = true;
      else poles += alpha[j] / d;
    }
    if (at_pole) {
      report.values.push_back(std::numeric_limits<double>::quiet_NaN());
      report.tail_bounds.push_back(std::numeric_limits<double>::quiet_NaN());
      report.method.push_back("pole");
      continue;
    }
    double small = 0.0, bound = 0.0;
    for (std::size_t q = 0; q < small_t.size(); ++q) {
      small += small_rule.weights[q] * std::pow(small_t[q], s) * small_r[q];
      bound += small_rule.weights[q] * std::pow(small_t[q], s) * small_b[q];
    }
    double big = 0.0;
    for (std::size_t q = 0; q < big_theta.size(); ++q) {
      big += big_rule.weights[q] * std::pow(big_rule.nodes[q], s - 1.0) * big_theta[q];
      bound += big_rule.weights[q] * std::pow(big_rule.nodes[q], s - 1.0) * big_b[q];
    }
    const double gamma = boost::math::tgamma(s);
    report.values.push_back((small + poles + big) / gamma);
    report.tail_bounds.push_back(bound / std::abs(gamma));
    report.method.push_back("mellin");
  }
  return report;
}

WeylFit weyl_fit(const Spectrum& spectrum, int minimum) {
  const auto ev = spectrum.expanded();
  const int n = static_cast<int>(ev.size());
  if (n < minimum) throw InputError("too few eigenvalues for a Weyl fit");
  WeylFit fit;
  fit.first_index = n / 2 + 1;
  fit.last_index = n;
  std::vector<double> xs, ys;
  for (int k = fit.first_index; k <= n; ++k) {
    if (ev[k - 1] <= 0.0) continue;
    xs.push_back(std::log(static_cast<double>(k)));
    ys.push_back(std::log(ev[k - 1]));
  }
  const double cnt = static_cast<double>(xs.size());
  if (cnt < 3) throw InputError("too few positive eigenvalues for a Weyl fit");
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / cnt;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / cnt;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - intercept - slope * xs[i];
    rss += r * r;
  }
  const double sigma2 = rss / (cnt - 2.0);
  fit.exponent = slope;
  fit.exponent_error = std::sqrt(sigma2 / sxx);
  fit.constant = std::exp(intercept);
  fit.constant_error = fit.constant * std::sqrt(sigma2 * (1.0 / cnt + mx * mx / sxx));
  return fit;
}

}  // namespace bcp

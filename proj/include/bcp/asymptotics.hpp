#ifndef BCP_ASYMPTOTICS_HPP
#define BCP_ASYMPTOTICS_HPP

#include <optional>
#include <string>
#include <vector>

#include "bcp/core.hpp"
#include "bcp/problem.hpp"
#include "bcp/spectrum.hpp"

namespace bcp {

/// Per-cluster trace weights: sum over an orthonormal eigenbasis of
/// <phi psi, psi>, so unit weights equal the multiplicities.
struct TraceWeights {
  std::vector<double> cluster;
  /// Weyl-length average of phi, used beyond the window.
  double average = 1.0;
};

TraceWeights unit_weights(const Spectrum& spectrum);
/// phi constant on each edge (one value per edge).
TraceWeights localization_weights(const BoundaryContactProblem& problem, const Spectrum& spectrum,
                                  const std::vector<double>& phi);

/// Counting-function model beyond the window:
/// N(lambda) ~ average * (L/pi) lambda^{1/m} + offset, with
/// |N - model| <= oscillation observed over the top half of the window.
struct TailModel {
  double lambda_c = 0.0;
  double weyl_length = 0.0;
  int order = 2;
  double average = 1.0;
  double offset = 0.0;
  double oscillation = 0.0;
  double count_at_c = 0.0;  // weighted N(lambda_c)

  double weyl(double lambda) const;
  /// Jump of the model at lambda_c relative to the computed count.
  double jump() const;
  /// Error bound for a tail sum of a function bounded by sup_g beyond lambda_c.
  double bound(double sup_g) const;
};

TailModel tail_model(const Spectrum& spectrum, const TraceWeights& weights);

struct TraceValue {
  Complex value;
  double tail_bound = 0.0;
  bool zero_mode = false;
  bool negative_eigenvalue = false;
};

/// Tr(phi e^{-tA}) from the spectrum plus the tail model.
TraceValue heat_trace(const Spectrum& spectrum, double t, const TraceWeights* weights = nullptr);

struct HeatTraceSeries {
  std::vector<double> t;
  std::vector<double> values;
  std::vector<double> tail_bounds;
  bool localized = false;
};

/// Log-spaced grid of n points on [lo, hi].
std::vector<double> log_grid(double lo, double hi, int n);

HeatTraceSeries heat_series(const Spectrum& spectrum, const std::vector<double>& t,
                            const TraceWeights* weights = nullptr);

/// Fit window [36/lambda_c, (min_length/5)^m] with 40 points.
std::vector<double> default_heat_window(const Spectrum& spectrum, double min_length, int n = 40);

struct AsymptoticFit {
  std::string kind;  // "heat" or "resolvent"
  std::vector<double> exponents;
  std::vector<Complex> coefficients;
  double residual = 0.0;
  double condition = 0.0;
  double window_lo = 0.0;
  double window_hi = 0.0;
  int samples = 0;
  int order = 2;
  std::optional<double> ray;  // radians, resolvent fits only
  int power = 0;              // N, resolvent fits only
};

/// Weighted least squares of values against t^{(j-1)/m}, j < terms.
AsymptoticFit fit_heat_invariants(const HeatTraceSeries& series, int terms, int order);

/// Tr(phi (A - lambda)^{-N}).
TraceValue resolvent_trace(const Spectrum& spectrum, Complex lambda, int power, const TraceWeights* weights = nullptr);

struct ResolventFitOptions {
  double ray = kPi;  // radians
  int power = 1;
  int terms = 4;
  double decades = 3.0;
  int samples = 40;
  /// First |lambda| of the window; default (15/min_length)^m.
  std::optional<double> rho_lo;
};

AsymptoticFit fit_resolvent_coeffs(const Spectrum& spectrum, double min_length, const ResolventFitOptions& options,
                                   const TraceWeights* weights = nullptr);

struct ZetaPole {
  double location = 0.0;
  double residue = 0.0;
  bool regular = false;  // cancelled by a pole of Gamma
};

struct ZetaReport {
  std::vector<double> s;
  std::vector<double> values;
  /// spectral truncation only; 0 where the value is a fitted coefficient
  std::vector<double> tail_bounds;
  std::vector<std::string> method;  // "direct", "mellin" or "pole"
  std::vector<ZetaPole> poles;
};

struct ZetaOptions {
  bool force_mellin = false;
  double t_lo = 0.0;  // default: the heat fit window start
};

ZetaReport zeta(const Spectrum& spectrum, const AsymptoticFit& heat_fit, const std::vector<double>& s,
                const ZetaOptions& options = {});

struct WeylFit {
  double exponent = 0.0;
  double exponent_error = 0.0;
  double constant = 0.0;
  double constant_error = 0.0;
  int first_index = 0;
  int last_index = 0;
};

/// log lambda_k = log C + p log k over the top half of the ordered spectrum.
WeylFit weyl_fit(const Spectrum& spectrum, int minimum = 200);

}  // namespace bcp

#endif  // BCP_ASYMPTOTICS_HPP

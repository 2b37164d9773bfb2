#include <filesystem>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "bcp/bcp.hpp"

using namespace bcp;
using nlohmann::json;

namespace {

struct Settings {
  std::string problem;
  std::string out;
  std::string format;
  std::string cache_dir;
  // check
  int sector_samples = 64;
  double sigma_threshold = 1e-8;
  // spectrum
  std::optional<double> lambda_max;
  std::optional<double> lambda_min;
  std::optional<int> max_eig;
  bool numeric = false;
  // traces and fits
  std::string t_grid;
  std::string phi;
  int terms = 4;
  double ray_deg = 180.0;
  double decades = 3.0;
  int power = 1;
  int points = 201;
  int scan_points = 40;
  std::string s_list;
  // solve
  std::string lambda;
  std::string rhs;
  // examples
  std::string example;
};

std::vector<double> parse_list(const std::string& text, const std::string& flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, text.find(':') != std::string::npos ? ':' : ',')) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(item, &pos));
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InputError(flag + ": malformed number \"" + item + "\"");
    }
  }
  return out;
}

BoundaryContactProblem load(const std::string& arg) {
  const auto names = builtin_names();
  if (!std::filesystem::exists(arg) && std::find(names.begin(), names.end(), arg) != names.end())
    return builtin_example(arg, 1).problem;
  return load_problem(arg);
}

void emit(const Settings& s, const std::string& bytes) {
  if (s.out.empty())
    std::cout << bytes;
  else
    write_file_atomic(s.out, bytes);
}

SweepOptions sweep_options(const Settings& s) {
  SweepOptions o;
  o.lambda_lo = s.lambda_min;
  o.force_numeric = s.numeric;
  if (s.lambda_max) {
    if (s.max_eig) throw InputError("--lambda-max and --max-eig are mutually exclusive");
    o.lambda_hi = *s.lambda_max;
  } else {
    o.max_count = s.max_eig.value_or(2000);
  }
  return o;
}

Spectrum spectrum_of(const Settings& s, const BoundaryContactProblem& p) {
  return cached_eigenvalues(p, sweep_options(s), s.cache_dir, &std::cerr);
}

std::optional<TraceWeights> weights_of(const Settings& s, const BoundaryContactProblem& p, const Spectrum& spec) {
  if (s.phi.empty()) return std::nullopt;
  const auto phi = parse_list(s.phi, "--phi");
  if (phi.size() != p.graph.edges.size())
    throw InputError("--phi needs one weight per edge (" + std::to_string(p.graph.edges.size()) + ")");
  return localization_weights(p, spec, phi);
}

std::vector<double> t_grid(const Settings& s, const BoundaryContactProblem& p, const Spectrum& spec) {
  if (s.t_grid.empty()) return default_heat_window(spec, p.graph.min_length());
  const auto v = parse_list(s.t_grid, "--t-grid");
  if (v.size() != 3 || !(v[0] > 0.0 && v[1] > v[0]) || v[2] < 2 || v[2] != std::floor(v[2]))
    throw InputError("--t-grid expects lo:hi:n with 0 < lo < hi and integer n >= 2");
  return log_grid(v[0], v[1], static_cast<int>(v[2]));
}

AsymptoticFit heat_fit_of(const Settings& s, const BoundaryContactProblem& p, const Spectrum& spec,
                          const TraceWeights* w) {
  return fit_heat_invariants(heat_series(spec, t_grid(s, p, spec), w), s.terms, p.order());
}

std::string json_text(const json& j) { return j.dump(2) + "\n"; }

bool wants_json(const Settings& s) { return s.format == "json"; }

int run_check(const Settings& s) {
  const auto p = load(s.problem);
  CheckOptions o;
  o.sector_samples = s.sector_samples;
  o.sigma_threshold = s.sigma_threshold;
  const auto verdict = check(p, o);
  emit(s, json_text(verdict_to_json(verdict)));
  if (!verdict.elliptic) {
    std::cerr << "error: problem is not parameter-elliptic in its sector\n";
    return 1;
  }
  return 0;
}

int run_spectrum(const Settings& s) {
  const auto p = load(s.problem);
  const auto spec = spectrum_of(s, p);
  if (wants_json(s)) {
    json j = spectrum_metadata(spec);
    j["eigenvalues"] = spec.eigenvalues;
    j["multiplicities"] = spec.multiplicities;
    emit(s, json_text(j));
  } else {
    emit(s, spectrum_csv(spec));
  }
  return 0;
}

int run_heat(const Settings& s) {
  const auto p = load(s.problem);
  const auto spec = spectrum_of(s, p);
  const auto w = weights_of(s, p, spec);
  const auto series = heat_series(spec, t_grid(s, p, spec), w ? &*w : nullptr);
  if (wants_json(s))
    emit(s, json_text({{"schema_version", kSchemaVersion},
                       {"localized", series.localized},
                       {"t", series.t},
                       {"values", series.values},
                       {"tail_bounds", series.tail_bounds}}));
  else
    emit(s, heat_csv(series));
  return 0;
}

int run_heat_fit(const Settings& s) {
  const auto p = load(s.problem);
  const auto spec = spectrum_of(s, p);
  const auto w = weights_of(s, p, spec);
  emit(s, json_text(fit_to_json(heat_fit_of(s, p, spec, w ? &*w : nullptr))));
  return 0;
}

int run_zeta(const Settings& s) {
  const auto p = load(s.problem);
  const auto spec = spectrum_of(s, p);
  if (s.s_list.empty()) throw InputError("zeta needs --s");
  const auto points = parse_list(s.s_list, "--s");
  const auto fit = heat_fit_of(s, p, spec, nullptr);
  const auto report = zeta(spec, fit, points);
  emit(s, wants_json(s) ? json_text(zeta_to_json(report)) : zeta_csv(report));
  return 0;
}

int run_weyl(const Settings& s) {
  const auto p = load(s.problem);
  const auto spec = spectrum_of(s, p);
  emit(s, json_text(weyl_to_json(weyl_fit(spec))));
  return 0;
}

ResolventFitOptions resolvent_options(const Settings& s) {
  ResolventFitOptions o;
  o.ray = s.ray_deg * kPi / 180.0;
  o.power = s.power;
  o.terms = s.terms;
  o.decades = s.decades;
  return o;
}

int run_resolvent_scan(const Settings& s) {
  const auto p = load(s.problem);
  const auto spec = spectrum_of(s, p);
  const auto w = weights_of(s, p, spec);
  const auto o = resolvent_options(s);
  if (!p.sector.contains(std::polar(1.0, o.ray))) throw DomainError("ray lies outside the problem's sector");
  const double rho_lo = std::pow(15.0 / p.graph.min_length(), p.order());
  const auto rho = log_grid(rho_lo, rho_lo * std::pow(10.0, o.decades), s.scan_points);
  std::string out = "rho,trace_re,trace_im,tail_bound,resolvent_norm\n";
  json rows = json::array();
  for (double r : rho) {
    const Complex z = std::polar(r, o.ray);
    const auto tr = resolvent_trace(spec, z, o.power, w ? &*w : nullptr);
    const double norm = resolvent_norm(spec, z);
    out += format_number(r) + "," + format_number(tr.value.real()) + "," + format_number(tr.value.imag()) + "," +
           format_number(tr.tail_bound) + "," + format_number(norm) + "\n";
    rows.push_back({{"rho", r}, {"trace", complex_to_json(tr.value)}, {"tail_bound", tr.tail_bound}, {"resolvent_norm", norm}});
  }
  if (wants_json(s))
    emit(s, json_text({{"schema_version", kSchemaVersion}, {"ray_deg", s.ray_deg}, {"N", o.power}, {"samples", rows}}));
  else
    emit(s, out);
  return 0;
}

int run_resolvent_fit(const Settings& s) {
  const auto p = load(s.problem);
  const auto spec = spectrum_of(s, p);
  const auto w = weights_of(s, p, spec);
  emit(s, json_text(fit_to_json(fit_resolvent_coeffs(spec, p.graph.min_length(), resolvent_options(s), w ? &*w : nullptr))));
  return 0;
}

int run_solve(const Settings& s) {
  const auto p = load(s.problem);
  if (s.lambda.empty()) throw InputError("solve needs --lambda re[,im]");
  const auto l = parse_list(s.lambda, "--lambda");
  if (l.empty() || l.size() > 2) throw InputError("--lambda expects re or re,im");
  const Complex lambda(l[0], l.size() > 1 ? l[1] : 0.0);
  std::vector<CMatrix> rhs;
  if (!s.rhs.empty()) {
    rhs = parse_rhs_csv(p, read_file(s.rhs));
  } else {
    if (s.points < 4) throw InputError("--points must be at least 4");
    for (std::size_t e = 0; e < p.graph.edges.size(); ++e) rhs.push_back(CMatrix::Ones(s.points, p.rank()));
  }
  const auto sol = solve_resolvent(p, lambda, rhs);
  if (wants_json(s)) {
    json values = json::array();
    for (std::size_t e = 0; e < sol.values.size(); ++e) {
      json edge = json::array();
      for (Eigen::Index i = 0; i < sol.values[e].rows(); ++i)
        for (Eigen::Index c = 0; c < sol.values[e].cols(); ++c)
          edge.push_back({{"x", sol.grids[e][i]}, {"component", c}, {"u", complex_to_json(sol.values[e](i, c))}});
      values.push_back({{"edge", p.graph.edges[e].id}, {"samples", edge}});
    }
    emit(s, json_text({{"schema_version", kSchemaVersion},
                       {"lambda", complex_to_json(lambda)},
                       {"sigma_min", sol.sigma_min},
                       {"coupling_residual", sol.coupling_residual},
                       {"interior_residual", sol.interior_residual},
                       {"edges", values}}));
  } else {
    emit(s, solution_csv(p, sol));
    std::cerr << "coupling residual " << format_number(sol.coupling_residual) << ", interior residual "
              << format_number(sol.interior_residual) << "\n";
  }
  return 0;
}

int run_examples_list(const Settings& s) {
  std::string out;
  for (const auto& name : builtin_names()) out += name + "\t" + builtin_example(name, 1).summary + "\n";
  emit(s, out);
  return 0;
}

int run_examples_emit(const Settings& s) {
  const auto ex = builtin_example(s.example);
  if (s.out.empty()) {
    std::cout << emit_problem(ex.problem);
    return 0;
  }
  const std::filesystem::path dir(s.out);
  write_file_atomic((dir / (ex.name + ".json")).string(), emit_problem(ex.problem));
  write_file_atomic((dir / (ex.name + ".oracle.json")).string(), json_text(oracle_to_json(ex)));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral analysis of boundary contact problems on metric graphs", "bcp"};
  app.require_subcommand(1);
  Settings s;
  std::function<int(const Settings&)> action;

  auto add_problem = [&](CLI::App* cmd) {
    cmd->add_option("problem", s.problem, "problem file or builtin name")->required();
    cmd->add_option("--out", s.out, "output file (default: stdout)");
  };
  auto add_format = [&](CLI::App* cmd) {
    cmd->add_option("--format", s.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  };
  auto add_spectrum = [&](CLI::App* cmd) {
    cmd->add_option("--lambda-max", s.lambda_max, "top of the eigenvalue window");
    cmd->add_option("--lambda-min", s.lambda_min, "bottom of the eigenvalue window");
    cmd->add_option("--max-eig", s.max_eig, "number of eigenvalues (default 2000)");
    cmd->add_flag("--numeric", s.numeric, "integrate edges numerically even for constant coefficients");
    cmd->add_option("--cache-dir", s.cache_dir, "spectrum cache directory");
  };
  auto add_phi = [&](CLI::App* cmd) { cmd->add_option("--phi", s.phi, "per-edge localization weights w1,w2,..."); };
  auto add_t = [&](CLI::App* cmd) { cmd->add_option("--t-grid", s.t_grid, "lo:hi:n, log spaced"); };
  auto add_resolvent = [&](CLI::App* cmd) {
    cmd->add_option("--ray-deg", s.ray_deg, "ray argument in degrees");
    cmd->add_option("--decades", s.decades, "decades of |lambda| in the window");
    cmd->add_option("--N", s.power, "resolvent power")->check(CLI::PositiveNumber);
  };
  auto bind = [&](CLI::App* cmd, int (*fn)(const Settings&)) { cmd->callback([&action, fn] { action = fn; }); };

  auto* c_check = app.add_subcommand("check", "parameter-ellipticity verdict");
  add_problem(c_check);
  c_check->add_option("--sector-samples", s.sector_samples, "arc samples")->check(CLI::PositiveNumber);
  c_check->add_option("--sigma-threshold", s.sigma_threshold, "minimal normalized singular value");
  bind(c_check, run_check);

  auto* c_spec = app.add_subcommand("spectrum", "certified eigenvalues");
  add_problem(c_spec);
  add_format(c_spec);
  add_spectrum(c_spec);
  bind(c_spec, run_spectrum);

  auto* c_heat = app.add_subcommand("heat", "heat trace Tr(phi e^{-tA})");
  add_problem(c_heat);
  add_format(c_heat);
  add_spectrum(c_heat);
  add_phi(c_heat);
  add_t(c_heat);
  bind(c_heat, run_heat);

  auto* c_hfit = app.add_subcommand("heat-fit", "small-t heat invariants");
  add_problem(c_hfit);
  add_spectrum(c_hfit);
  add_phi(c_hfit);
  add_t(c_hfit);
  c_hfit->add_option("--terms", s.terms, "number of fitted terms")->check(CLI::PositiveNumber);
  bind(c_hfit, run_heat_fit);

  auto* c_zeta = app.add_subcommand("zeta", "spectral zeta function");
  add_problem(c_zeta);
  add_format(c_zeta);
  add_spectrum(c_zeta);
  add_t(c_zeta);
  c_zeta->add_option("--s", s.s_list, "points s1,s2,...")->required();
  c_zeta->add_option("--terms", s.terms, "heat terms used for the continuation")->check(CLI::PositiveNumber);
  bind(c_zeta, run_zeta);

  auto* c_weyl = app.add_subcommand("weyl", "Weyl-law fit");
  add_problem(c_weyl);
  add_spectrum(c_weyl);
  bind(c_weyl, run_weyl);

  auto* c_scan = app.add_subcommand("resolvent-scan", "resolvent trace along a ray");
  add_problem(c_scan);
  add_format(c_scan);
  add_spectrum(c_scan);
  add_phi(c_scan);
  add_resolvent(c_scan);
  c_scan->add_option("--points", s.scan_points, "samples along the ray")->check(CLI::Range(2, 10000));
  bind(c_scan, run_resolvent_scan);

  auto* c_rfit = app.add_subcommand("resolvent-fit", "large-|lambda| resolvent trace coefficients");
  add_problem(c_rfit);
  add_spectrum(c_rfit);
  add_phi(c_rfit);
  add_resolvent(c_rfit);
  c_rfit->add_option("--terms", s.terms, "number of fitted terms")->check(CLI::PositiveNumber);
  bind(c_rfit, run_resolvent_fit);

  auto* c_solve = app.add_subcommand("solve", "solve (A_C - lambda) u = f");
  add_problem(c_solve);
  add_format(c_solve);
  c_solve->add_option("--lambda", s.lambda, "re or re,im")->required();
  c_solve->add_option("--rhs", s.rhs, "CSV edge,x,component,re,im (default f = 1)");
  c_solve->add_option("--points", s.points, "grid points per edge when --rhs is absent");
  bind(c_solve, run_solve);

  auto* c_ex = app.add_subcommand("examples", "builtin problems");
  c_ex->require_subcommand(1);
  auto* c_list = c_ex->add_subcommand("list", "list builtins");
  c_list->add_option("--out", s.out, "output file");
  bind(c_list, run_examples_list);
  auto* c_emit = c_ex->add_subcommand("emit", "emit a builtin problem (and its oracle with --out DIR)");
  c_emit->add_option("name", s.example, "builtin name")->required();
  c_emit->add_option("--out", s.out, "output directory");
  bind(c_emit, run_examples_emit);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  try {
    return action(s);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

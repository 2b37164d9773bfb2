#include "bcp/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <openssl/evp.h>

namespace bcp {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw InputError(path + ": " + msg);
}

void allow_keys(const json& obj, const std::string& path, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) fail(path, "object expected");
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [key, value] : obj.items())
    if (!allowed.count(key)) fail(path, "unknown key \"" + key + "\"");
}

const json& member(const json& obj, const std::string& path, const char* key) {
  if (!obj.contains(key)) fail(path, std::string("missing key \"") + key + "\"");
  return obj.at(key);
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "number expected");
  const double x = j.get<double>();
  if (!std::isfinite(x)) fail(path, "finite number expected");
  return x;
}

int integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "integer expected");
  return j.get<int>();
}

std::string text(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "string expected");
  return j.get<std::string>();
}

const json& array(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "array expected");
  return j;
}

Complex complex_value(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) fail(path, "complex pair expected");
  return Complex(number(j[0], path + "[0]"), number(j[1], path + "[1]"));
}

CMatrix complex_matrix(const json& j, const std::string& path, Eigen::Index rows, Eigen::Index cols) {
  array(j, path);
  if (static_cast<Eigen::Index>(j.size()) != rows) fail(path, "expected " + std::to_string(rows) + " rows");
  CMatrix out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const std::string rp = path + "[" + std::to_string(i) + "]";
    const json& row = array(j[i], rp);
    if (static_cast<Eigen::Index>(row.size()) != cols) fail(rp, "expected " + std::to_string(cols) + " columns");
    for (Eigen::Index c = 0; c < cols; ++c) out(i, c) = complex_value(row[c], rp + "[" + std::to_string(c) + "]");
  }
  return out;
}

json matrix_to_json(const CMatrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(complex_to_json(m(i, c)));
    rows.push_back(row);
  }
  return rows;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  return out;
}

std::string trim(std::string s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  return s.substr(i);
}

double parse_double(const std::string& s, const std::string& where) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return x;
  } catch (const std::exception&) {
    throw InputError(where + ": malformed number \"" + s + "\"");
  }
}

}  // namespace

json complex_to_json(Complex z) { return json::array({z.real(), z.imag()}); }

BoundaryContactProblem parse_problem(const std::string& input) {
  json root;
  try {
    root = json::parse(input);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("malformed JSON: ") + e.what());
  }
  allow_keys(root, "problem", {"schema_version", "order", "fiber_rank", "edges", "vertices", "sector"});
  const int version = integer(member(root, "problem", "schema_version"), "schema_version");
  if (version != kSchemaVersion) fail("schema_version", "unsupported version " + std::to_string(version));
  const int m = integer(member(root, "problem", "order"), "order");
  const int r = integer(member(root, "problem", "fiber_rank"), "fiber_rank");
  if (m < 2 || m % 2 != 0) fail("order", "even order >= 2 expected");
  if (r < 1) fail("fiber_rank", "positive integer expected");

  BoundaryContactProblem p;
  const json& edges = array(member(root, "problem", "edges"), "edges");
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const std::string ep = "edges[" + std::to_string(e) + "]";
    allow_keys(edges[e], ep, {"id", "length", "coefficients"});
    Edge edge;
    edge.id = text(member(edges[e], ep, "id"), ep + ".id");
    edge.length = number(member(edges[e], ep, "length"), ep + ".length");
    p.graph.edges.push_back(edge);
    EdgeOperator op;
    op.order = m;
    op.rank = r;
    const std::string cp = ep + ".coefficients";
    const json& coeffs = array(member(edges[e], ep, "coefficients"), cp);
    if (static_cast<int>(coeffs.size()) != m + 1) fail(cp, "expected " + std::to_string(m + 1) + " coefficient polynomials");
    for (int k = 0; k <= m; ++k) {
      const std::string kp = cp + "[" + std::to_string(k) + "]";
      const json& poly = array(coeffs[k], kp);
      std::vector<CMatrix> terms;
      for (std::size_t q = 0; q < poly.size(); ++q)
        terms.push_back(complex_matrix(poly[q], kp + "[" + std::to_string(q) + "]", r, r));
      op.coefficients.push_back(std::move(terms));
    }
    p.operators.push_back(std::move(op));
  }

  const json& vertices = array(member(root, "problem", "vertices"), "vertices");
  for (std::size_t v = 0; v < vertices.size(); ++v) {
    const std::string vp = "vertices[" + std::to_string(v) + "]";
    allow_keys(vertices[v], vp, {"id", "endpoints", "conditions"});
    Vertex vx;
    vx.id = text(member(vertices[v], vp, "id"), vp + ".id");
    const json& eps = array(member(vertices[v], vp, "endpoints"), vp + ".endpoints");
    for (std::size_t i = 0; i < eps.size(); ++i) {
      const std::string pp = vp + ".endpoints[" + std::to_string(i) + "]";
      allow_keys(eps[i], pp, {"edge", "end", "weight"});
      Endpoint ept;
      const std::string id = text(member(eps[i], pp, "edge"), pp + ".edge");
      const auto idx = p.graph.edge_index(id);
      if (!idx) fail(pp + ".edge", "unknown edge \"" + id + "\"");
      ept.edge = *idx;
      const std::string end = text(member(eps[i], pp, "end"), pp + ".end");
      if (end == "left")
        ept.side = Side::Left;
      else if (end == "right")
        ept.side = Side::Right;
      else
        fail(pp + ".end", "expected \"left\" or \"right\", got \"" + end + "\"");
      if (eps[i].contains("weight")) ept.weight = number(eps[i].at("weight"), pp + ".weight");
      vx.endpoints.push_back(ept);
    }
    const std::string cp = vp + ".conditions";
    const json& cond = member(vertices[v], vp, "conditions");
    allow_keys(cond, cp, {"rows", "blocks"});
    const int rows = integer(member(cond, cp, "rows"), cp + ".rows");
    if (rows < 0) fail(cp + ".rows", "nonnegative integer expected");
    const json& blocks = array(member(cond, cp, "blocks"), cp + ".blocks");
    if (static_cast<int>(blocks.size()) != m) fail(cp + ".blocks", "expected " + std::to_string(m) + " blocks M_0..M_{m-1}");
    CouplingCondition cc;
    const Eigen::Index cols = static_cast<Eigen::Index>(vx.endpoints.size()) * r;
    for (int k = 0; k < m; ++k) {
      const std::string bp = cp + ".blocks[" + std::to_string(k) + "]";
      if (rows == 0) {
        array(blocks[k], bp);
        if (!blocks[k].empty()) fail(bp, "expected 0 rows");
        cc.blocks.push_back(CMatrix::Zero(0, cols));
      } else {
        cc.blocks.push_back(complex_matrix(blocks[k], bp, rows, cols));
      }
    }
    p.graph.vertices.push_back(std::move(vx));
    p.coupling.push_back(std::move(cc));
  }

  const json& sector = member(root, "problem", "sector");
  allow_keys(sector, "sector", {"center_arg_deg", "half_angle_deg"});
  p.sector = Sector::from_degrees(number(member(sector, "sector", "center_arg_deg"), "sector.center_arg_deg"),
                                  number(member(sector, "sector", "half_angle_deg"), "sector.half_angle_deg"));
  if (!(p.sector.half_angle > 0.0 && p.sector.half_angle <= kPi)) fail("sector.half_angle_deg", "expected (0, 180]");
  require_valid(p);
  return p;
}

BoundaryContactProblem load_problem(const std::string& path) { return parse_problem(read_file(path)); }

json problem_to_json(const BoundaryContactProblem& p) {
  json root;
  root["schema_version"] = kSchemaVersion;
  root["order"] = p.order();
  root["fiber_rank"] = p.rank();
  json edges = json::array();
  for (std::size_t e = 0; e < p.graph.edges.size(); ++e) {
    json coeffs = json::array();
    for (const auto& poly : p.operators[e].coefficients) {
      json terms = json::array();
      for (const auto& c : poly) terms.push_back(matrix_to_json(c));
      coeffs.push_back(terms);
    }
    edges.push_back({{"id", p.graph.edges[e].id}, {"length", p.graph.edges[e].length}, {"coefficients", coeffs}});
  }
  root["edges"] = edges;
  json vertices = json::array();
  for (std::size_t v = 0; v < p.graph.vertices.size(); ++v) {
    const auto& vx = p.graph.vertices[v];
    json eps = json::array();
    for (const auto& ep : vx.endpoints)
      eps.push_back({{"edge", p.graph.edges[ep.edge].id},
                     {"end", ep.side == Side::Left ? "left" : "right"},
                     {"weight", ep.weight}});
    json blocks = json::array();
    for (const auto& b : p.coupling[v].blocks) blocks.push_back(matrix_to_json(b));
    vertices.push_back({{"id", vx.id},
                        {"endpoints", eps},
                        {"conditions", {{"rows", static_cast<int>(p.coupling[v].rows())}, {"blocks", blocks}}}});
  }
  root["vertices"] = vertices;
  root["sector"] = {{"center_arg_deg", p.sector.center_deg}, {"half_angle_deg", p.sector.half_angle_deg}};
  return root;
}

std::string emit_problem(const BoundaryContactProblem& problem) { return problem_to_json(problem).dump(2) + "\n"; }

std::string canonical_form(const BoundaryContactProblem& problem) { return problem_to_json(problem).dump(); }

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 computation failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 15]);
  }
  return out;
}

std::string canonical_hash(const BoundaryContactProblem& problem) { return sha256_hex(canonical_form(problem)); }

std::string format_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

json verdict_to_json(const EllipticityVerdict& verdict) {
  json interior{{"ok", verdict.interior.ok}};
  if (verdict.interior.witness) {
    const auto& w = *verdict.interior.witness;
    interior["witness"] = {{"edge", w.edge}, {"x", w.x}, {"xi", w.xi}, {"eigenvalue", complex_to_json(w.eigenvalue)}};
  }
  json vertices = json::array();
  for (const auto& v : verdict.vertices) {
    json item{{"id", v.id},
              {"min_sigma", v.min_sigma},
              {"argmin_lambda", complex_to_json(v.argmin_lambda)},
              {"stable_counts", v.stable_counts}};
    if (v.structural_failure) item["structural_failure"] = true;
    if (!v.witness.empty()) item["witness"] = v.witness;
    vertices.push_back(item);
  }
  return {{"schema_version", kSchemaVersion},
          {"interior", interior},
          {"vertices", vertices},
          {"elliptic", verdict.elliptic},
          {"sampling", {{"n", verdict.samples}, {"threshold", verdict.threshold}}}};
}

json fit_to_json(const AsymptoticFit& fit) {
  json coeffs = json::array();
  for (const auto& c : fit.coefficients) coeffs.push_back(complex_to_json(c));
  json out{{"schema_version", kSchemaVersion},
           {"kind", fit.kind},
           {"order", fit.order},
           {"exponents", fit.exponents},
           {"coefficients", coeffs},
           {"residual", fit.residual},
           {"condition", fit.condition},
           {"window", {{"lo", fit.window_lo}, {"hi", fit.window_hi}, {"samples", fit.samples}}}};
  if (fit.ray) {
    out["ray_deg"] = *fit.ray * 180.0 / kPi;
    out["N"] = fit.power;
  }
  return out;
}

json weyl_to_json(const WeylFit& fit) {
  return {{"schema_version", kSchemaVersion},
          {"exponent", fit.exponent},
          {"exponent_error", fit.exponent_error},
          {"constant", fit.constant},
          {"constant_error", fit.constant_error},
          {"first_index", fit.first_index},
          {"last_index", fit.last_index}};
}

json zeta_to_json(const ZetaReport& report) {
  json values = json::array();
  for (std::size_t i = 0; i < report.s.size(); ++i) {
    json v{{"s", report.s[i]}, {"method", report.method[i]}};
    v["value"] = std::isfinite(report.values[i]) ? json(report.values[i]) : json(nullptr);
    v["tail_bound"] = std::isfinite(report.tail_bounds[i]) ? json(report.tail_bounds[i]) : json(nullptr);
    values.push_back(v);
  }
  json poles = json::array();
  for (const auto& p : report.poles)
    poles.push_back({{"location", p.location}, {"residue", p.residue}, {"regular", p.regular}});
  return {{"schema_version", kSchemaVersion}, {"values", values}, {"poles", poles}};
}

std::string spectrum_csv(const Spectrum& spectrum) {
  std::string out = "k,lambda,multiplicity\n";
  for (std::size_t i = 0; i < spectrum.eigenvalues.size(); ++i)
    out += std::to_string(i + 1) + "," + format_number(spectrum.eigenvalues[i]) + "," +
           std::to_string(spectrum.multiplicities[i]) + "\n";
  return out;
}

json spectrum_metadata(const Spectrum& s) {
  json cert = json::array();
  for (const auto& c : s.certificate)
    cert.push_back({{"a", c.a}, {"b", c.b}, {"contour_count", c.contour_count}, {"found", c.found}});
  json solver{{"grid_factor", s.options.grid_factor},
              {"max_refinements", s.options.max_refinements},
              {"force_numeric", s.options.force_numeric},
              {"refine_tol", s.options.refine_tol},
              {"multiplicity_threshold", s.options.multiplicity_threshold},
              {"clusters_per_contour", s.options.clusters_per_contour}};
  if (s.options.max_count) solver["max_count"] = *s.options.max_count;
  if (s.options.lambda_lo) solver["lambda_lo"] = *s.options.lambda_lo;
  return {{"schema_version", kSchemaVersion},
          {"digest", s.digest},
          {"lambda_lo", s.lambda_lo},
          {"lambda_hi", s.lambda_hi},
          {"clusters", s.eigenvalues.size()},
          {"count", s.total_count()},
          {"certified", s.certified()},
          {"certificate", cert},
          {"solver", solver},
          {"order", s.order},
          {"weyl_length", s.weyl_length},
          {"edge_weyl_lengths", s.edge_weyl_lengths},
          {"sector", {{"center_arg_deg", s.sector.center_deg}, {"half_angle_deg", s.sector.half_angle_deg}}}};
}

Spectrum spectrum_from(const std::string& csv, const json& meta) {
  Spectrum s;
  try {
    s.digest = meta.at("digest").get<std::string>();
    s.lambda_lo = meta.at("lambda_lo").get<double>();
    s.lambda_hi = meta.at("lambda_hi").get<double>();
    s.order = meta.at("order").get<int>();
    s.weyl_length = meta.at("weyl_length").get<double>();
    s.edge_weyl_lengths = meta.at("edge_weyl_lengths").get<std::vector<double>>();
    s.sector = Sector::from_degrees(meta.at("sector").at("center_arg_deg").get<double>(),
                                    meta.at("sector").at("half_angle_deg").get<double>());
    for (const auto& c : meta.at("certificate"))
      s.certificate.push_back(
          {c.at("a").get<double>(), c.at("b").get<double>(), c.at("contour_count").get<int>(), c.at("found").get<int>()});
    const auto& solver = meta.at("solver");
    s.options.grid_factor = solver.at("grid_factor").get<double>();
    s.options.max_refinements = solver.at("max_refinements").get<int>();
    s.options.force_numeric = solver.at("force_numeric").get<bool>();
    s.options.refine_tol = solver.at("refine_tol").get<double>();
    s.options.multiplicity_threshold = solver.at("multiplicity_threshold").get<double>();
    s.options.clusters_per_contour = solver.at("clusters_per_contour").get<int>();
    if (solver.contains("max_count")) s.options.max_count = solver.at("max_count").get<int>();
    if (solver.contains("lambda_lo")) s.options.lambda_lo = solver.at("lambda_lo").get<double>();
    s.options.lambda_hi = s.lambda_hi;
  } catch (const json::exception& e) {
    throw InputError(std::string("spectrum metadata: ") + e.what());
  }
  const auto lines = split(csv, '\n');
  if (lines.empty() || trim(lines[0]) != "k,lambda,multiplicity") throw InputError("spectrum CSV: bad header");
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::string line = trim(lines[i]);
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 3) throw InputError("spectrum CSV: line " + std::to_string(i + 1) + ": 3 fields expected");
    s.eigenvalues.push_back(parse_double(f[1], "spectrum CSV line " + std::to_string(i + 1)));
    s.multiplicities.push_back(static_cast<int>(parse_double(f[2], "spectrum CSV line " + std::to_string(i + 1))));
  }
  if (static_cast<std::size_t>(meta.value("clusters", -1)) != s.eigenvalues.size())
    throw InputError("spectrum CSV does not match its metadata");
  return s;
}

std::string heat_csv(const HeatTraceSeries& series) {
  std::string out = "t,value,tail_bound\n";
  for (std::size_t i = 0; i < series.t.size(); ++i)
    out += format_number(series.t[i]) + "," + format_number(series.values[i]) + "," +
           format_number(series.tail_bounds[i]) + "\n";
  return out;
}

std::string zeta_csv(const ZetaReport& report) {
  auto num = [](double x) { return std::isfinite(x) ? format_number(x) : std::string("nan"); };
  std::string out = "s,value,tail_bound,method\n";
  for (std::size_t i = 0; i < report.s.size(); ++i)
    out += format_number(report.s[i]) + "," + num(report.values[i]) + "," + num(report.tail_bounds[i]) + "," +
           report.method[i] + "\n";
  return out;
}

std::string solution_csv(const BoundaryContactProblem& problem, const ResolventSolution& sol) {
  std::string out = "edge,x,component,re,im\n";
  for (std::size_t e = 0; e < sol.values.size(); ++e)
    for (Eigen::Index i = 0; i < sol.values[e].rows(); ++i)
      for (Eigen::Index c = 0; c < sol.values[e].cols(); ++c)
        out += problem.graph.edges[e].id + "," + format_number(sol.grids[e][i]) + "," + std::to_string(c) + "," +
               format_number(sol.values[e](i, c).real()) + "," + format_number(sol.values[e](i, c).imag()) + "\n";
  return out;
}

std::vector<CMatrix> parse_rhs_csv(const BoundaryContactProblem& problem, const std::string& input) {
  const int r = problem.rank();
  const auto lines = split(input, '\n');
  if (lines.empty()) throw InputError("rhs CSV: empty");
  const auto header = split(trim(lines[0]), ',');
  const bool with_component = header.size() == 5;
  if (!(with_component && trim(lines[0]) == "edge,x,component,re,im") && trim(lines[0]) != "edge,x,re,im")
    throw InputError("rhs CSV: header must be edge,x,component,re,im or edge,x,re,im");
  if (!with_component && r != 1) throw InputError("rhs CSV: component column required for fiber rank > 1");
  std::map<std::size_t, std::map<double, CVector>> data;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::string line = trim(lines[i]);
    if (line.empty()) continue;
    const std::string where = "rhs CSV line " + std::to_string(i + 1);
    const auto f = split(line, ',');
    if (f.size() != header.size()) throw InputError(where + ": wrong field count");
    const auto idx = problem.graph.edge_index(trim(f[0]));
    if (!idx) throw InputError(where + ": unknown edge \"" + f[0] + "\"");
    const double x = parse_double(trim(f[1]), where);
    const int comp = with_component ? static_cast<int>(parse_double(trim(f[2]), where)) : 0;
    if (comp < 0 || comp >= r) throw InputError(where + ": component out of range");
    const double re = parse_double(trim(f[with_component ? 3 : 2]), where);
    const double im = parse_double(trim(f[with_component ? 4 : 3]), where);
    auto& slot = data[*idx][x];
    if (slot.size() == 0) slot = CVector::Zero(r);
    slot(comp) = Complex(re, im);
  }
  std::vector<CMatrix> out;
  for (std::size_t e = 0; e < problem.graph.edges.size(); ++e) {
    const auto it = data.find(e);
    if (it == data.end()) throw InputError("rhs CSV: no samples for edge " + problem.graph.edges[e].id);
    const auto& pts = it->second;
    const int n = static_cast<int>(pts.size());
    const auto grid = uniform_grid(problem.graph.edges[e].length, n);
    CMatrix f(n, r);
    int i = 0;
    for (const auto& [x, v] : pts) {
      if (std::abs(x - grid[i]) > 1e-9 * std::max(1.0, problem.graph.edges[e].length))
        throw InputError("rhs CSV: edge " + problem.graph.edges[e].id + " is not sampled on a uniform grid");
      f.row(i++) = v.transpose();
    }
    out.push_back(std::move(f));
  }
  return out;
}

void write_file_atomic(const std::string& path, const std::string& bytes) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + tmp.string());
    out << bytes;
    if (!out) throw InputError("cannot write " + tmp.string());
  }
  fs::rename(tmp, target);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace bcp

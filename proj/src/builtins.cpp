#include "bcp/builtins.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

#include <boost/math/tools/roots.hpp>

#include "bcp/io.hpp"

namespace bcp {

namespace {

CMatrix rows(std::initializer_list<std::initializer_list<double>> values) {
  const auto n = static_cast<Eigen::Index>(values.size());
  const auto c = n ? static_cast<Eigen::Index>(values.begin()->size()) : 0;
  CMatrix m(n, c);
  Eigen::Index i = 0;
  for (const auto& row : values) {
    Eigen::Index j = 0;
    for (double x : row) m(i, j++) = x;
    ++i;
  }
  return m;
}

struct Builder {
  BoundaryContactProblem p;

  std::size_t edge(const std::string& id, double length, const EdgeOperator& op) {
    p.graph.edges.push_back({id, length});
    p.operators.push_back(op);
    return p.graph.edges.size() - 1;
  }
  void vertex(const std::string& id, std::vector<Endpoint> ends, std::vector<CMatrix> blocks) {
    p.graph.vertices.push_back({id, std::move(ends)});
    p.coupling.push_back({std::move(blocks)});
  }
};

// u = 0 or u' = 0 at one end of a second-order edge
void dirichlet(Builder& b, const std::string& id, std::size_t e, Side s) {
  b.vertex(id, {{e, s, 1.0}}, {rows({{1}}), rows({{0}})});
}
void neumann(Builder& b, const std::string& id, std::size_t e, Side s) {
  b.vertex(id, {{e, s, 1.0}}, {rows({{0}}), rows({{1}})});
}

double bisect(const std::function<double(double)>& f, double lo, double hi) {
  boost::math::tools::eps_tolerance<double> tol(52);
  std::uintmax_t iters = 200;
  const auto r = boost::math::tools::toms748_solve(f, lo, hi, tol, iters);
  return 0.5 * (r.first + r.second);
}

std::vector<OracleCluster> merged(std::vector<OracleCluster> v, int count) {
  std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.lambda < b.lambda; });
  if (static_cast<int>(v.size()) > count) v.resize(count);
  return v;
}

Sector negative_half_plane() { return Sector::from_degrees(180.0, 90.0); }

BuiltinExample interval(bool neumann_ends, int n) {
  BuiltinExample ex;
  Builder b;
  const auto e = b.edge("e0", kPi, EdgeOperator::laplacian());
  if (neumann_ends) {
    neumann(b, "left", e, Side::Left);
    neumann(b, "right", e, Side::Right);
  } else {
    dirichlet(b, "left", e, Side::Left);
    dirichlet(b, "right", e, Side::Right);
  }
  b.p.sector = negative_half_plane();
  ex.problem = b.p;
  ex.name = neumann_ends ? "interval-neumann" : "interval-dirichlet";
  ex.summary = neumann_ends ? "-u'' on [0, pi], u'(0) = u'(pi) = 0" : "-u'' on [0, pi], u(0) = u(pi) = 0";
  ex.oracle.spectrum_rule = neumann_ends ? "k^2, k >= 0" : "k^2, k >= 1";
  for (int k = neumann_ends ? 0 : 1; static_cast<int>(ex.oracle.spectrum.size()) < n; ++k)
    ex.oracle.spectrum.push_back({double(k) * k, 1});
  ex.oracle.weyl_constant = 1.0;
  ex.oracle.alpha0 = kPi / std::sqrt(4.0 * kPi);
  ex.oracle.alpha1 = neumann_ends ? 0.5 : -0.5;
  return ex;
}

// three unit edges, centre at the left ends, Dirichlet leaves
BuiltinExample star(double delta, int n) {
  BuiltinExample ex;
  Builder b;
  std::vector<Endpoint> centre;
  for (int i = 0; i < 3; ++i) {
    const auto e = b.edge("e" + std::to_string(i), 1.0, EdgeOperator::laplacian());
    centre.push_back({e, Side::Left, 1.0});
  }
  b.vertex("centre", centre,
           {rows({{1, -1, 0}, {0, 1, -1}, {-delta, 0, 0}}), rows({{0, 0, 0}, {0, 0, 0}, {1, 1, 1}})});
  for (int i = 0; i < 3; ++i) dirichlet(b, "leaf" + std::to_string(i), i, Side::Right);
  b.p.sector = negative_half_plane();
  ex.problem = b.p;
  std::vector<OracleCluster> all;
  for (int k = 1; k <= n; ++k) all.push_back({std::pow(k * kPi, 2), 2});
  if (delta == 0.0) {
    ex.name = "star3-kirchhoff";
    ex.summary = "three unit edges, Kirchhoff centre, Dirichlet leaves";
    ex.oracle.spectrum_rule = "((k - 1/2) pi)^2 simple and (k pi)^2 double, k >= 1";
    for (int k = 1; k <= n; ++k) all.push_back({std::pow((k - 0.5) * kPi, 2), 1});
  } else {
    ex.name = "star3-delta";
    ex.summary = "three unit edges, delta centre (sum u' = u), Dirichlet leaves";
    ex.oracle.spectrum_rule = "k^2 with 3 k cos k + sin k = 0, and (k pi)^2 double";
    auto f = [delta](double k) { return 3.0 * k * std::cos(k) + delta * std::sin(k); };
    for (int j = 1; j <= n; ++j) all.push_back({std::pow(bisect(f, (j - 0.5) * kPi, j * kPi), 2), 1});
  }
  ex.oracle.spectrum = merged(all, n);
  ex.oracle.weyl_constant = std::pow(kPi / 3.0, 2);
  ex.oracle.alpha0 = 3.0 / std::sqrt(4.0 * kPi);
  ex.oracle.alpha1 = -1.0;
  return ex;
}

// two unit edges glued at both end pairs: a circle of length 2
BuiltinExample circle(int n) {
  BuiltinExample ex;
  Builder b;
  const auto e0 = b.edge("e0", 1.0, EdgeOperator::laplacian());
  const auto e1 = b.edge("e1", 1.0, EdgeOperator::laplacian());
  const auto kirchhoff2 = std::vector<CMatrix>{rows({{1, -1}, {0, 0}}), rows({{0, 0}, {1, 1}})};
  b.vertex("v0", {{e0, Side::Left, 1.0}, {e1, Side::Left, 1.0}}, kirchhoff2);
  b.vertex("v1", {{e0, Side::Right, 1.0}, {e1, Side::Right, 1.0}}, kirchhoff2);
  b.p.sector = negative_half_plane();
  ex.problem = b.p;
  ex.name = "circle-glued";
  ex.summary = "two unit edges glued along both boundary pairs (circle of length 2)";
  ex.oracle.spectrum_rule = "0 simple and (k pi)^2 double, k >= 1";
  ex.oracle.spectrum.push_back({0.0, 1});
  for (int k = 1; static_cast<int>(ex.oracle.spectrum.size()) < n; ++k) ex.oracle.spectrum.push_back({std::pow(k * kPi, 2), 2});
  ex.oracle.weyl_constant = std::pow(kPi / 2.0, 2);
  ex.oracle.alpha0 = 2.0 / std::sqrt(4.0 * kPi);
  ex.oracle.alpha1 = 0.0;
  return ex;
}

BuiltinExample transmission_bad() {
  BuiltinExample ex;
  Builder b;
  const auto e0 = b.edge("e0", 1.0, EdgeOperator::laplacian());
  const auto e1 = b.edge("e1", 1.0, EdgeOperator::laplacian());
  b.vertex("joint", {{e0, Side::Left, 1.0}, {e1, Side::Left, 1.0}}, {rows({{1, -1}, {0, 0}}), rows({{0, 0}, {1, -1}})});
  dirichlet(b, "end0", e0, Side::Right);
  dirichlet(b, "end1", e1, Side::Right);
  b.p.sector = negative_half_plane();
  ex.problem = b.p;
  ex.name = "transmission-bad";
  ex.summary = "rows u1 - u2, u1' - u2' in inward jets: not elliptic, not symmetric";
  ex.oracle.elliptic = false;
  ex.oracle.symmetric = false;
  ex.oracle.spectrum_rule = "none";
  return ex;
}

BuiltinExample beam(int n) {
  BuiltinExample ex;
  Builder b;
  const Complex a[] = {0.0, 0.0, 0.0, 0.0, 1.0};
  const auto e = b.edge("e0", 1.0, EdgeOperator::constant(a));
  const auto clamp = std::vector<CMatrix>{rows({{1}, {0}}), rows({{0}, {1}}), rows({{0}, {0}}), rows({{0}, {0}})};
  b.vertex("left", {{e, Side::Left, 1.0}}, clamp);
  b.vertex("right", {{e, Side::Right, 1.0}}, clamp);
  b.p.sector = negative_half_plane();
  ex.problem = b.p;
  ex.name = "beam-clamped";
  ex.summary = "u'''' on [0, 1], u = u' = 0 at both ends";
  ex.oracle.spectrum_rule = "beta^4 with cos beta cosh beta = 1, beta > 0";
  auto g = [](double x) { return std::cos(x) - 1.0 / std::cosh(x); };
  for (int k = 1; k <= n; ++k) {
    const double c = (k + 0.5) * kPi;
    ex.oracle.spectrum.push_back({std::pow(bisect(g, c - 0.5, c + 0.5), 4), 1});
  }
  ex.oracle.weyl_constant = std::pow(kPi, 4);
  ex.oracle.alpha0 = std::tgamma(1.25) / kPi;
  return ex;
}

}  // namespace

std::vector<std::string> builtin_names() {
  return {"interval-dirichlet", "interval-neumann", "star3-kirchhoff", "star3-delta",
          "circle-glued",       "transmission-bad", "beam-clamped"};
}

BuiltinExample builtin_example(const std::string& name, int n) {
  if (name == "interval-dirichlet") return interval(false, n);
  if (name == "interval-neumann") return interval(true, n);
  if (name == "star3-kirchhoff") return star(0.0, n);
  if (name == "star3-delta") return star(1.0, n);
  if (name == "circle-glued") return circle(n);
  if (name == "transmission-bad") return transmission_bad();
  if (name == "beam-clamped") return beam(n);
  throw InputError("unknown builtin \"" + name + "\"");
}

nlohmann::json oracle_to_json(const BuiltinExample& ex) {
  nlohmann::json spectrum = nlohmann::json::array();
  for (const auto& c : ex.oracle.spectrum) spectrum.push_back({{"lambda", c.lambda}, {"multiplicity", c.multiplicity}});
  nlohmann::json out{{"schema_version", kSchemaVersion},
                     {"name", ex.name},
                     {"summary", ex.summary},
                     {"digest", canonical_hash(ex.problem)},
                     {"elliptic", ex.oracle.elliptic},
                     {"symmetric", ex.oracle.symmetric},
                     {"spectrum_rule", ex.oracle.spectrum_rule},
                     {"spectrum", spectrum}};
  if (ex.oracle.weyl_constant) out["weyl_constant"] = *ex.oracle.weyl_constant;
  if (ex.oracle.alpha0) out["heat"]["alpha0"] = *ex.oracle.alpha0;
  if (ex.oracle.alpha1) out["heat"]["alpha1"] = *ex.oracle.alpha1;
  return out;
}

}  // namespace bcp

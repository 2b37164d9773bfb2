#ifndef BCP_TESTS_SUPPORT_HPP
#define BCP_TESTS_SUPPORT_HPP

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>

#include <sys/wait.h>

#include "bcp/bcp.hpp"

namespace bcp::testing {

inline CMatrix mat(std::initializer_list<std::initializer_list<Complex>> values) {
  const auto n = static_cast<Eigen::Index>(values.size());
  const auto c = n ? static_cast<Eigen::Index>(values.begin()->size()) : 0;
  CMatrix m(n, c);
  Eigen::Index i = 0;
  for (const auto& row : values) {
    Eigen::Index j = 0;
    for (const auto& x : row) m(i, j++) = x;
    ++i;
  }
  return m;
}

inline BoundaryContactProblem builtin(const std::string& name) { return builtin_example(name).problem; }

// Dirichlet interval of length pi split at pi/2 by a Kirchhoff vertex
inline BoundaryContactProblem half_split() {
  BoundaryContactProblem p;
  p.graph.edges = {{"a", kPi / 2}, {"b", kPi / 2}};
  p.operators = {EdgeOperator::laplacian(), EdgeOperator::laplacian()};
  p.graph.vertices = {{"left", {{0, Side::Left, 1.0}}},
                      {"mid", {{0, Side::Right, 1.0}, {1, Side::Left, 1.0}}},
                      {"right", {{1, Side::Right, 1.0}}}};
  p.coupling = {{{mat({{1}}), mat({{0}})}},
                {{mat({{1, -1}, {0, 0}}), mat({{0, 0}, {1, 1}})}},
                {{mat({{1}}), mat({{0}})}}};
  p.sector = Sector::from_degrees(180.0, 90.0);
  return p;
}

// -u'' + x u on [0, 1], Dirichlet ends
inline BoundaryContactProblem airy_edge() {
  BoundaryContactProblem p = builtin("interval-dirichlet");
  p.graph.edges[0].length = 1.0;
  auto& op = p.operators[0];
  op.coefficients[0] = {mat({{0}}), mat({{1}})};
  return p;
}

// single edge, rank 2, a_2 = diag(-1, -e^{i pi/4}), Dirichlet ends
inline BoundaryContactProblem rank_two(const Sector& sector) {
  BoundaryContactProblem p;
  p.graph.edges = {{"e0", 1.0}};
  EdgeOperator op;
  op.order = 2;
  op.rank = 2;
  op.coefficients = {{CMatrix::Zero(2, 2)}, {CMatrix::Zero(2, 2)}, {mat({{-1, 0}, {0, -std::polar(1.0, kPi / 4)}})}};
  p.operators = {op};
  p.graph.vertices = {{"l", {{0, Side::Left, 1.0}}}, {"r", {{0, Side::Right, 1.0}}}};
  const CMatrix id = CMatrix::Identity(2, 2), zero = CMatrix::Zero(2, 2);
  p.coupling = {{{id, zero}}, {{id, zero}}};
  p.sector = sector;
  return p;
}

inline CMatrix random_complex(Eigen::Index rows, Eigen::Index cols, std::mt19937& rng) {
  std::normal_distribution<double> g;
  CMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = Complex(g(rng), g(rng));
  return m;
}

// identity plus a small random perturbation: condition number stays small
inline CMatrix well_conditioned(Eigen::Index n, std::mt19937& rng) {
  return CMatrix::Identity(n, n) + 0.3 * random_complex(n, n, rng) / std::sqrt(double(n));
}

inline double simpson(const std::vector<double>& x, const std::vector<Complex>& f, Complex* out = nullptr) {
  // composite Simpson on a uniform grid with an odd number of points
  const std::size_t n = x.size();
  const double h = x[1] - x[0];
  Complex acc = f[0] + f[n - 1];
  for (std::size_t i = 1; i + 1 < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * f[i];
  acc *= h / 3.0;
  if (out) *out = acc;
  return acc.real();
}

struct CommandResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::FILE* f = std::fopen(p.c_str(), "rb");
  if (!f) return {};
  std::string s;
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), f)) > 0) s.append(buf.data(), n);
  std::fclose(f);
  return s;
}

inline std::filesystem::path scratch_dir(const std::string& tag) {
  static std::mt19937_64 rng{std::random_device{}()};
  auto dir = std::filesystem::temp_directory_path() / ("bcp-" + tag + "-" + std::to_string(rng() % 1000000007));
  std::filesystem::create_directories(dir);
  return dir;
}

// runs the CLI with stdout/stderr captured to files
inline CommandResult run_cli(const std::string& binary, const std::string& args, const std::filesystem::path& dir) {
  const auto out = dir / "stdout.txt", err = dir / "stderr.txt";
  const std::string cmd = "'" + binary + "' " + args + " >'" + out.string() + "' 2>'" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  CommandResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

}  // namespace bcp::testing

#endif  // BCP_TESTS_SUPPORT_HPP

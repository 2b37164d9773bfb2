#ifndef BCP_IO_HPP
#define BCP_IO_HPP

#include <string>
#include <vector>

#include "json.hpp"

#include "bcp/asymptotics.hpp"
#include "bcp/ellipticity.hpp"
#include "bcp/problem.hpp"
#include "bcp/resolvent.hpp"
#include "bcp/spectrum.hpp"

namespace bcp {

inline constexpr int kSchemaVersion = 1;

/// Parses and validates a problem file. Errors carry the field path.
BoundaryContactProblem parse_problem(const std::string& text);
BoundaryContactProblem load_problem(const std::string& path);

nlohmann::json problem_to_json(const BoundaryContactProblem& problem);
/// Pretty-printed problem file.
std::string emit_problem(const BoundaryContactProblem& problem);
/// Compact, key-sorted serialization hashed by canonical_hash.
std::string canonical_form(const BoundaryContactProblem& problem);

std::string sha256_hex(const std::string& bytes);

/// %.17g
std::string format_number(double x);

nlohmann::json complex_to_json(Complex z);

nlohmann::json verdict_to_json(const EllipticityVerdict& verdict);
nlohmann::json fit_to_json(const AsymptoticFit& fit);
nlohmann::json weyl_to_json(const WeylFit& fit);
nlohmann::json zeta_to_json(const ZetaReport& report);

/// k,lambda,multiplicity
std::string spectrum_csv(const Spectrum& spectrum);
/// Everything but the eigenvalue list, which lives in the CSV.
nlohmann::json spectrum_metadata(const Spectrum& spectrum);
Spectrum spectrum_from(const std::string& csv, const nlohmann::json& metadata);

std::string heat_csv(const HeatTraceSeries& series);
std::string zeta_csv(const ZetaReport& report);
/// edge,x,component,re,im
std::string solution_csv(const BoundaryContactProblem& problem, const ResolventSolution& solution);
/// Reads a right-hand side in the solution_csv layout (component optional
/// for rank 1); each edge must carry a uniform grid including both ends.
std::vector<CMatrix> parse_rhs_csv(const BoundaryContactProblem& problem, const std::string& text);

/// Writes bytes to path via a temporary file and rename.
void write_file_atomic(const std::string& path, const std::string& bytes);
std::string read_file(const std::string& path);

}  // namespace bcp

#endif  // BCP_IO_HPP

#ifndef BCP_BUILTINS_HPP
#define BCP_BUILTINS_HPP

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "bcp/problem.hpp"

namespace bcp {

struct OracleCluster {
  double lambda = 0.0;
  int multiplicity = 1;
};

/// Closed-form facts about a builtin, independent of the solver.
struct BuiltinOracle {
  bool elliptic = true;
  bool symmetric = true;
  std::string spectrum_rule;
  std::vector<OracleCluster> spectrum;  // leading clusters, ascending
  std::optional<double> weyl_constant;  // lambda_k ~ C k^m
  std::optional<double> alpha0;         // heat coefficients of t^{-1/m}, t^0
  std::optional<double> alpha1;
};

struct BuiltinExample {
  std::string name;
  std::string summary;
  BoundaryContactProblem problem;
  BuiltinOracle oracle;
};

std::vector<std::string> builtin_names();
/// Throws InputError for unknown names.
BuiltinExample builtin_example(const std::string& name, int oracle_clusters = 40);

nlohmann::json oracle_to_json(const BuiltinExample& example);

}  // namespace bcp

#endif  // BCP_BUILTINS_HPP

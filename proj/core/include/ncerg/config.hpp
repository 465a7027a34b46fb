#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ncerg/algebra.hpp"
#include "ncerg/error.hpp"
#include "ncerg/rearrangement.hpp"

namespace ncerg {

/// Carries every violation found in a config, not just the first.
class ConfigError : public Error {
public:
  explicit ConfigError(std::vector<std::string> violations)
      : Error(join(violations)), violations(std::move(violations)) {}
  std::vector<std::string> violations;

private:
  static std::string join(const std::vector<std::string>& v) {
    std::string s = "invalid config:";
    for (const auto& e : v) s += "\n  - " + e;
    return s;
  }
};

/// One reproducible experiment: algebra shape, kernel recipe, seed element,
/// norm list, schedule and the command budgets.
struct ExperimentConfig {
  std::string id = "exp";
  uint64_t seed = 0;
  AlgebraShape shape;
  nlohmann::json kernel = {{"type", "identity"}};
  nlohmann::json element = {{"kind", "hermitian"}};
  std::vector<std::string> norms = {"L1", "Linf", "L1capLinf", "L1plusLinf"};
  std::vector<long long> schedule;
  int n_max = 4;
  double epsilon = 0.0625;
  double bound = 0.5;
  double tol = 1e-9;
  int trials = 20;

  /// Canonical TOML rendering; parse(to_toml()) is semantically identical.
  std::string to_toml() const;
};

/// Parses and validates TOML config text. Syntax errors raise TomlError with
/// line/column; semantic problems raise ConfigError listing every violation.
ExperimentConfig parse_config(const std::string& text);

/// Resolves one of the documented norm names: L1, Linf, L1capLinf,
/// L1plusLinf, Orlicz:p1, Orlicz:p2, Orlicz:p4, Orlicz:expm1.
NormId norm_id_from_name(const std::string& name);

/// Builds the config's seed element; random kinds draw from streams derived
/// from the effective seed.
Operator build_element(const ExperimentConfig& config, uint64_t effective_seed);

}  // namespace ncerg

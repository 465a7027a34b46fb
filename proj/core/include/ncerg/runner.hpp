#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ncerg/config.hpp"

namespace ncerg {

enum class Command { certify, norms, cesaro, dsae, prop1, theorem, embed };

std::optional<Command> command_from_string(std::string_view name);
std::string command_name(Command c);

/// One output record; value is always finite.
struct ResultRow {
  std::string experiment;
  std::string command;
  long long level = 0;
  std::string metric;
  double value = 0.0;
  std::string verdict;  // pass | fail | n/a

  bool operator==(const ResultRow&) const = default;
};

struct RunOutput {
  std::vector<ResultRow> rows;
  /// filename -> document; written under --dump. Every verdict in rows can be
  /// recomputed from these.
  std::map<std::string, nlohmann::json> artifacts;
  bool any_fail = false;
};

/// Executes one command on a validated config. Deterministic for a fixed
/// (config, effective_seed, include_artifacts). Infeasible budgets surface as
/// structured failure rows, not exceptions.
RunOutput run(const ExperimentConfig& config, Command command, uint64_t effective_seed,
              bool include_artifacts = false);

/// CSV with the fixed header experiment,command,level,metric,value,verdict and
/// RFC 4180 quoting; doubles as shortest round-trip decimals.
std::string emit_csv(const std::vector<ResultRow>& rows);
std::string emit_rows_json(const std::vector<ResultRow>& rows);
std::vector<ResultRow> parse_csv(const std::string& text);
std::vector<ResultRow> parse_rows_json(const std::string& text);

/// Shortest decimal that parses back to the same double.
std::string format_double(double v);

}  // namespace ncerg

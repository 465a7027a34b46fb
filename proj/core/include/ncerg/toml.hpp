#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "ncerg/error.hpp"

namespace ncerg {

/// Syntax error with 1-based position information.
class TomlError : public Error {
public:
  TomlError(const std::string& what, int line, int col)
      : Error("line " + std::to_string(line) + ", col " + std::to_string(col) + ": " +
              what),
        line(line), col(col) {}
  int line;
  int col;
};

/// Parses a practical TOML subset into a JSON tree: comments, [table] and
/// [[array-of-table]] headers with dotted keys, and key = value pairs where a
/// value is a string ("..." with escapes or '...'), integer, float, boolean,
/// or a (possibly nested, possibly multi-line) array. Duplicate keys are
/// rejected.
nlohmann::json parse_toml(const std::string& text);

/// Renders a JSON tree of the shape produced by parse_toml back to TOML.
/// Top-level scalars and arrays of scalars come first, then [tables] and
/// [[arrays of tables]]; keys are emitted in sorted order.
std::string emit_toml(const nlohmann::json& doc);

}  // namespace ncerg

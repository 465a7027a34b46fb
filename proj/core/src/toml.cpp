#include "ncerg/toml.hpp"

#include <cctype>
#include <charconv>
#include <cmath>

namespace ncerg {

using nlohmann::json;

namespace {

class Scanner {
public:
  explicit Scanner(const std::string& text) : text_(text) {}

  bool eof() const { return pos_ >= text_.size(); }
  char peek() const { return eof() ? '\0' : text_[pos_]; }
  char peek2() const { return pos_ + 1 >= text_.size() ? '\0' : text_[pos_ + 1]; }

  char advance() {
    const char c = text_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  void skip_ws_inline() {
    while (!eof() && (peek() == ' ' || peek() == '\t')) advance();
  }

  // Whitespace, newlines and comments.
  void skip_ws_all() {
    while (!eof()) {
      const char c = peek();
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else if (c == '#') {
        while (!eof() && peek() != '\n') advance();
      } else {
        break;
      }
    }
  }

  void skip_comment_then_expect_eol() {
    skip_ws_inline();
    if (eof() || peek() == '\n' || peek() == '\r') return;
    if (peek() == '#') {
      while (!eof() && peek() != '\n') advance();
      return;
    }
    fail("unexpected trailing characters");
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw TomlError(what, line_, col_);
  }

  int line() const { return line_; }
  int col() const { return col_; }

private:
  const std::string& text_;
  size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

bool is_bare_key_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

std::string parse_basic_string(Scanner& s) {
  s.advance();  // opening quote
  std::string out;
  while (true) {
    if (s.eof()) s.fail("unterminated string");
    const char c = s.advance();
    if (c == '"') break;
    if (c == '\n') s.fail("newline in string");
    if (c == '\\') {
      if (s.eof()) s.fail("dangling escape");
      const char e = s.advance();
      switch (e) {
        case 'n': out.push_back('\n'); break;
        case 't': out.push_back('\t'); break;
        case 'r': out.push_back('\r'); break;
        case '"': out.push_back('"'); break;
        case '\\': out.push_back('\\'); break;
        default: s.fail(std::string("unsupported escape \\") + e);
      }
    } else {
      out.push_back(c);
    }
  }
  return out;
}

std::string parse_literal_string(Scanner& s) {
  s.advance();  // opening quote
  std::string out;
  while (true) {
    if (s.eof()) s.fail("unterminated literal string");
    const char c = s.advance();
    if (c == '\'') break;
    if (c == '\n') s.fail("newline in string");
    out.push_back(c);
  }
  return out;
}

std::string parse_key(Scanner& s) {
  s.skip_ws_inline();
  if (s.peek() == '"') return parse_basic_string(s);
  if (s.peek() == '\'') return parse_literal_string(s);
  std::string key;
  while (!s.eof() && is_bare_key_char(s.peek())) key.push_back(s.advance());
  if (key.empty()) s.fail("expected a key");
  return key;
}

json parse_value(Scanner& s);

json parse_array(Scanner& s) {
  s.advance();  // '['
  json arr = json::array();
  while (true) {
    s.skip_ws_all();
    if (s.eof()) s.fail("unterminated array");
    if (s.peek() == ']') {
      s.advance();
      return arr;
    }
    arr.push_back(parse_value(s));
    s.skip_ws_all();
    if (s.peek() == ',') {
      s.advance();
      continue;
    }
    if (s.peek() == ']') {
      s.advance();
      return arr;
    }
    s.fail("expected ',' or ']' in array");
  }
}

json parse_number_or_bool(Scanner& s) {
  std::string tok;
  while (!s.eof()) {
    const char c = s.peek();
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '+' || c == '-' ||
        c == '.' || c == '_') {
      tok.push_back(s.advance());
    } else {
      break;
    }
  }
  if (tok.empty()) s.fail("expected a value");
  if (tok == "true") return json(true);
  if (tok == "false") return json(false);
  std::string digits;
  for (char c : tok)
    if (c != '_') digits.push_back(c);

  const bool looks_float = digits.find('.') != std::string::npos ||
                           digits.find('e') != std::string::npos ||
                           digits.find('E') != std::string::npos ||
                           digits == "inf" || digits == "-inf" || digits == "nan";
  if (!looks_float) {
    long long v = 0;
    const auto [p, ec] =
        std::from_chars(digits.data() + (digits[0] == '+' ? 1 : 0),
                        digits.data() + digits.size(), v);
    if (ec == std::errc() && p == digits.data() + digits.size()) return json(v);
  }
  try {
    size_t used = 0;
    const double d = std::stod(digits, &used);
    if (used == digits.size()) return json(d);
  } catch (...) {
  }
  s.fail("malformed value '" + tok + "'");
}

json parse_value(Scanner& s) {
  s.skip_ws_inline();
  if (s.eof()) s.fail("expected a value");
  const char c = s.peek();
  if (c == '"') return json(parse_basic_string(s));
  if (c == '\'') return json(parse_literal_string(s));
  if (c == '[') return parse_array(s);
  return parse_number_or_bool(s);
}

std::vector<std::string> parse_dotted_key(Scanner& s, char terminator) {
  std::vector<std::string> parts;
  while (true) {
    parts.push_back(parse_key(s));
    s.skip_ws_inline();
    if (s.peek() == '.') {
      s.advance();
      continue;
    }
    if (s.peek() == terminator) return parts;
    s.fail(std::string("expected '.' or '") + terminator + "' in table header");
  }
}

json* descend(json* node, const std::vector<std::string>& path, Scanner& s) {
  for (const auto& part : path) {
    if (!node->is_object()) s.fail("key path crosses a non-table value");
    json& child = (*node)[part];
    if (child.is_null()) child = json::object();
    // An array of tables: descend into its last element.
    if (child.is_array()) {
      if (child.empty() || !child.back().is_object())
        s.fail("key path crosses a non-table array");
      node = &child.back();
    } else {
      node = &child;
    }
  }
  return node;
}

}  // namespace

json parse_toml(const std::string& text) {
  Scanner s(text);
  json root = json::object();
  json* current = &root;

  while (true) {
    s.skip_ws_all();
    if (s.eof()) break;

    if (s.peek() == '[') {
      const bool array_of_tables = s.peek2() == '[';
      s.advance();
      if (array_of_tables) s.advance();
      const auto path = parse_dotted_key(s, ']');
      s.advance();  // ']'
      if (array_of_tables) {
        if (s.peek() != ']') s.fail("expected ']]'");
        s.advance();
      }
      s.skip_comment_then_expect_eol();

      json* parent = &root;
      if (path.size() > 1)
        parent = descend(parent, {path.begin(), path.end() - 1}, s);
      if (!parent->is_object()) s.fail("table header crosses a non-table value");
      json& slot = (*parent)[path.back()];
      if (array_of_tables) {
        if (slot.is_null()) slot = json::array();
        if (!slot.is_array()) s.fail("redefinition of a key as an array of tables");
        slot.push_back(json::object());
        current = &slot.back();
      } else {
        if (slot.is_null()) slot = json::object();
        if (!slot.is_object()) s.fail("redefinition of a key as a table");
        current = &slot;
      }
      continue;
    }

    // key = value
    const auto path = parse_dotted_key(s, '=');
    s.advance();  // '='
    const json value = parse_value(s);
    s.skip_comment_then_expect_eol();
    json* parent = current;
    if (path.size() > 1)
      parent = descend(parent, {path.begin(), path.end() - 1}, s);
    if (parent->contains(path.back()))
      s.fail("duplicate key '" + path.back() + "'");
    (*parent)[path.back()] = value;
  }
  return root;
}

namespace {

std::string render_scalar(const json& v) {
  if (v.is_string()) {
    std::string out = "\"";
    for (char c : v.get<std::string>()) {
      switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        case '\r': out += "\\r"; break;
        default: out.push_back(c);
      }
    }
    return out + "\"";
  }
  return v.dump();  // numbers and booleans; shortest round-trip for doubles
}

std::string render_value(const json& v) {
  if (v.is_array()) {
    std::string out = "[";
    for (size_t i = 0; i < v.size(); ++i) {
      if (i) out += ", ";
      out += render_value(v[i]);
    }
    return out + "]";
  }
  return render_scalar(v);
}

void emit_table(const json& table, const std::string& prefix, std::string& out) {
  // Scalars and plain arrays first.
  for (auto it = table.begin(); it != table.end(); ++it) {
    const json& v = it.value();
    const bool is_table = v.is_object();
    const bool is_table_array =
        v.is_array() && !v.empty() && v.front().is_object();
    if (is_table || is_table_array) continue;
    out += it.key() + " = " + render_value(v) + "\n";
  }
  for (auto it = table.begin(); it != table.end(); ++it) {
    const json& v = it.value();
    const std::string full = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (v.is_object()) {
      out += "\n[" + full + "]\n";
      emit_table(v, full, out);
    } else if (v.is_array() && !v.empty() && v.front().is_object()) {
      for (const auto& elem : v) {
        out += "\n[[" + full + "]]\n";
        emit_table(elem, full, out);
      }
    }
  }
}

}  // namespace

std::string emit_toml(const json& doc) {
  if (!doc.is_object()) throw InvalidArgument("emit_toml: document must be a table");
  std::string out;
  emit_table(doc, "", out);
  return out;
}

}  // namespace ncerg

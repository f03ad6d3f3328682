#include "farlab/harness/toml_lite.hpp"

#include <cctype>
#include <charconv>
#include <sstream>

#include "farlab/harness/errors.hpp"

namespace farlab::harness {

using nlohmann::json;

namespace {

struct Cursor {
  const std::string& s;
  std::size_t pos = 0;
  int line;

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("TOML line " + std::to_string(line) + ": " + what);
  }
  void skip_ws() {
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
  }
  bool done() const { return pos >= s.size() || s[pos] == '#'; }
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_key(const std::string& key, int line) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : key) {
    if (c == '.') {
      parts.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  parts.push_back(trim(cur));
  for (auto& p : parts) {
    if (p.size() >= 2 && p.front() == '"' && p.back() == '"') p = p.substr(1, p.size() - 2);
    if (p.empty()) throw ConfigError("TOML line " + std::to_string(line) + ": empty key");
  }
  return parts;
}

json parse_value(Cursor& c);

json parse_string(Cursor& c) {
  const char quote = c.s[c.pos++];
  std::string out;
  while (c.pos < c.s.size() && c.s[c.pos] != quote) {
    char ch = c.s[c.pos++];
    if (quote == '"' && ch == '\\' && c.pos < c.s.size()) {
      const char esc = c.s[c.pos++];
      switch (esc) {
        case 'n': ch = '\n'; break;
        case 't': ch = '\t'; break;
        case '\\': ch = '\\'; break;
        case '"': ch = '"'; break;
        default: c.fail(std::string("unsupported escape \\") + esc);
      }
    }
    out.push_back(ch);
  }
  if (c.pos >= c.s.size()) c.fail("unterminated string");
  ++c.pos;
  return out;
}

json parse_array(Cursor& c) {
  ++c.pos;
  json arr = json::array();
  for (;;) {
    c.skip_ws();
    if (c.pos >= c.s.size()) c.fail("unterminated array");
    if (c.s[c.pos] == ']') {
      ++c.pos;
      return arr;
    }
    arr.push_back(parse_value(c));
    c.skip_ws();
    if (c.pos < c.s.size() && c.s[c.pos] == ',') ++c.pos;
  }
}

json parse_scalar(Cursor& c) {
  const std::size_t start = c.pos;
  while (c.pos < c.s.size() && c.s[c.pos] != ',' && c.s[c.pos] != ']' && c.s[c.pos] != '#' &&
         c.s[c.pos] != ' ' && c.s[c.pos] != '\t')
    ++c.pos;
  std::string tok = c.s.substr(start, c.pos - start);
  if (tok == "true") return true;
  if (tok == "false") return false;
  std::string digits;
  for (char ch : tok)
    if (ch != '_') digits.push_back(ch);
  if (digits.empty()) c.fail("missing value");
  const bool is_float = digits.find_first_of(".eE") != std::string::npos || digits == "inf" || digits == "nan";
  if (!is_float) {
    long long v = 0;
    const char* b = digits.data() + (digits[0] == '+' ? 1 : 0);
    const auto r = std::from_chars(b, digits.data() + digits.size(), v);
    if (r.ec == std::errc{} && r.ptr == digits.data() + digits.size()) return v;
  }
  double d = 0.0;
  const char* b = digits.data() + (digits[0] == '+' ? 1 : 0);
  const auto r = std::from_chars(b, digits.data() + digits.size(), d);
  if (r.ec != std::errc{} || r.ptr != digits.data() + digits.size()) c.fail("cannot parse value '" + tok + "'");
  return d;
}

json parse_value(Cursor& c) {
  c.skip_ws();
  if (c.pos >= c.s.size()) c.fail("missing value");
  const char ch = c.s[c.pos];
  if (ch == '"' || ch == '\'') return parse_string(c);
  if (ch == '[') return parse_array(c);
  return parse_scalar(c);
}

json& descend(json& root, const std::vector<std::string>& path, int line) {
  json* node = &root;
  for (const auto& p : path) {
    if (!node->is_object()) throw ConfigError("TOML line " + std::to_string(line) + ": key '" + p + "' under a non-table");
    node = &(*node)[p];
    if (node->is_null()) *node = json::object();
  }
  return *node;
}

}  // namespace

json parse_toml(const std::string& text) {
  json root = json::object();
  std::vector<std::string> table;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;

    if (line[0] == '[') {
      const auto close = line.find(']');
      if (close == std::string::npos || line.rfind("[[", 0) == 0)
        throw ConfigError("TOML line " + std::to_string(line_no) + ": unsupported table header");
      table = split_key(line.substr(1, close - 1), line_no);
      descend(root, table, line_no);
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("TOML line " + std::to_string(line_no) + ": expected key = value");
    auto path = table;
    const auto key = split_key(line.substr(0, eq), line_no);
    path.insert(path.end(), key.begin(), key.end());
    const std::string leaf = path.back();
    path.pop_back();

    Cursor c{line, eq + 1, line_no};
    json value = parse_value(c);
    c.skip_ws();
    if (!c.done()) c.fail("trailing characters after value");
    json& parent = descend(root, path, line_no);
    if (parent.contains(leaf)) c.fail("duplicate key '" + leaf + "'");
    parent[leaf] = std::move(value);
  }
  return root;
}

}  // namespace farlab::harness

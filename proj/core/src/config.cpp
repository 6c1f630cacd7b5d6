#include "ctpack/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "ctpack/error.hpp"

namespace ctpack {
namespace {

using json = nlohmann::json;

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

[[noreturn]] void parse_error(std::size_t line, const std::string& what) {
  fail(Errc::ParseError, "config line " + std::to_string(line) + ": " + what);
}

// Drops a trailing comment that is not inside a string.
std::string_view strip_comment(std::string_view s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

json parse_scalar(std::string_view v, std::size_t line) {
  v = trim(v);
  if (v.empty()) parse_error(line, "missing value");
  if (v.front() == '"') {
    if (v.size() < 2 || v.back() != '"') parse_error(line, "unterminated string");
    std::string out;
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
      if (v[i] == '\\' && i + 2 < v.size()) {
        ++i;
        out += v[i] == 'n' ? '\n' : (v[i] == 't' ? '\t' : v[i]);
      } else {
        out += v[i];
      }
    }
    return out;
  }
  if (v == "true") return true;
  if (v == "false") return false;
  if (v == "inf" || v == "+inf") return std::numeric_limits<double>::infinity();
  if (v == "-inf") return -std::numeric_limits<double>::infinity();
  std::string digits;
  for (char c : v)
    if (c != '_') digits += c;
  const bool integral = digits.find_first_of(".eE") == std::string::npos;
  if (integral) {
    long long n = 0;
    auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), n);
    if (ec == std::errc() && p == digits.data() + digits.size()) return n;
  }
  double d = 0;
  auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), d);
  if (ec != std::errc() || p != digits.data() + digits.size()) parse_error(line, "bad value '" + std::string(v) + "'");
  return d;
}

json parse_value(std::string_view v, std::size_t line) {
  v = trim(v);
  if (!v.empty() && v.front() == '[') {
    if (v.back() != ']') parse_error(line, "unterminated array");
    json arr = json::array();
    std::string_view body = trim(v.substr(1, v.size() - 2));
    while (!body.empty()) {
      std::size_t comma = body.find(',');
      if (!body.empty() && body.front() == '"') {
        const std::size_t close = body.find('"', 1);
        comma = close == std::string_view::npos ? close : body.find(',', close);
      }
      const std::string_view item = trim(body.substr(0, comma));
      if (!item.empty()) arr.push_back(parse_scalar(item, line));
      if (comma == std::string_view::npos) break;
      body = trim(body.substr(comma + 1));
    }
    return arr;
  }
  return parse_scalar(v, line);
}

std::vector<std::string> split_key(std::string_view key, std::size_t line) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = key.find('.', start);
    const std::string_view part = trim(key.substr(start, dot == std::string_view::npos ? dot : dot - start));
    if (part.empty()) parse_error(line, "empty key segment");
    std::string p(part);
    if (p.size() >= 2 && p.front() == '"' && p.back() == '"') p = p.substr(1, p.size() - 2);
    parts.push_back(p);
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  return parts;
}

double number(const json& v, const char* key) {
  if (!v.is_number()) fail(Errc::ParseError, std::string("config: ") + key + " must be a number");
  return v.get<double>();
}

std::vector<double> numbers(const json& v, const char* key) {
  if (!v.is_array()) fail(Errc::ParseError, std::string("config: ") + key + " must be an array");
  std::vector<double> out;
  for (const json& x : v) out.push_back(number(x, key));
  return out;
}

}  // namespace

json parse_toml(std::string_view text) {
  json root = json::object();
  json* table = &root;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') parse_error(line_no, "unterminated table header");
      table = &root;
      for (const std::string& part : split_key(line.substr(1, line.size() - 2), line_no)) {
        json& next = (*table)[part];
        if (next.is_null()) next = json::object();
        if (!next.is_object()) parse_error(line_no, "'" + part + "' is not a table");
        table = &next;
      }
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) parse_error(line_no, "expected key = value");
    const auto parts = split_key(line.substr(0, eq), line_no);
    json* target = table;
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
      json& next = (*target)[parts[i]];
      if (next.is_null()) next = json::object();
      target = &next;
    }
    if (target->contains(parts.back())) parse_error(line_no, "duplicate key '" + parts.back() + "'");
    (*target)[parts.back()] = parse_value(line.substr(eq + 1), line_no);
  }
  return root;
}

ScanConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  const json doc = parse_toml(text);
  ScanConfig cfg;
  if (doc.contains("alignment")) {
    const json& a = doc.at("alignment");
    if (a.is_string()) {
      std::filesystem::path file = a.get<std::string>();
      if (file.is_relative()) file = base_dir / file;
      cfg.alignment = load_alignment(file);
    } else if (a.is_array()) {
      const auto v = numbers(a, "alignment");
      if (v.size() != 5) fail(Errc::ParseError, "config: alignment array needs 5 values");
      std::ostringstream ss;
      ss.precision(17);
      for (double x : v) ss << x << ' ';
      cfg.alignment = parse_alignment(ss.str());
    } else {
      fail(Errc::ParseError, "config: alignment must be a file name or 5 numbers");
    }
  }
  if (doc.contains("thresholds")) {
    const json& t = doc.at("thresholds");
    for (const char* key : {"a_divider", "b_divider"})
      if (!t.contains(key)) fail(Errc::ParseError, std::string("config: thresholds.") + key + " is required");
    ThresholdSet ts;
    ts.a_divider = number(t.at("a_divider"), "a_divider");
    ts.b_divider = number(t.at("b_divider"), "b_divider");
    ts.a_object = t.contains("a_object") ? number(t.at("a_object"), "a_object") : ts.b_divider;
    if (t.contains("b_object")) ts.b_object = number(t.at("b_object"), "b_object");
    ts.validate();
    cfg.thresholds = ts;
  }
  if (doc.contains("isolevel")) cfg.isolevel = number(doc.at("isolevel"), "isolevel");
  if (doc.contains("pad")) cfg.pad = number(doc.at("pad"), "pad");
  if (doc.contains("voxel_pitch_um")) cfg.voxel_pitch_um = number(doc.at("voxel_pitch_um"), "voxel_pitch_um");
  if (doc.contains("overrides")) {
    const json& o = doc.at("overrides");
    if (o.contains("tier_cuts")) {
      std::vector<std::size_t> cuts;
      for (double c : numbers(o.at("tier_cuts"), "tier_cuts")) {
        if (c < 0 || c != std::floor(c)) fail(Errc::ParseError, "config: tier_cuts must be non-negative integers");
        cuts.push_back(static_cast<std::size_t>(c));
      }
      cfg.tier_cuts = cuts;
    }
    if (o.contains("grid")) {
      for (const auto& [key, g] : o.at("grid").items()) {
        int tier = 0;
        auto [p, ec] = std::from_chars(key.data(), key.data() + key.size(), tier);
        if (ec != std::errc() || p != key.data() + key.size() || tier < 1)
          fail(Errc::ParseError, "config: overrides.grid keys are tier numbers, got '" + key + "'");
        GridOverride go;
        if (g.contains("row_cuts")) go.row_cuts = numbers(g.at("row_cuts"), "row_cuts");
        if (g.contains("col_cuts")) go.col_cuts = numbers(g.at("col_cuts"), "col_cuts");
        cfg.grid_cuts[tier] = go;
      }
    }
  }
  return cfg;
}

ScanConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) fail(Errc::IoError, "cannot open config " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), file.parent_path());
}

}  // namespace ctpack

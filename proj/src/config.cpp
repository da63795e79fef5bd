#include "censurv/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace censurv {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// Strips a trailing comment that is not inside a quoted string.
std::string strip_comment(const std::string& s) {
  bool in_str = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') in_str = !in_str;
    if (s[i] == '#' && !in_str) return s.substr(0, i);
  }
  return s;
}

bool parse_int_token(const std::string& tok, std::int64_t& out) {
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || p != tok.data() + tok.size()) return false;
  out = v;
  return true;
}

bool parse_double_token(const std::string& tok, double& out) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || p != tok.data() + tok.size()) return false;
  out = v;
  return true;
}

Config::Value parse_scalar(const std::string& tok, const std::string& ctx) {
  if (tok.size() >= 2 && tok.front() == '"' && tok.back() == '"')
    return tok.substr(1, tok.size() - 2);
  if (tok == "true") return true;
  if (tok == "false") return false;
  std::int64_t iv;
  if (parse_int_token(tok, iv)) return iv;
  double dv;
  if (parse_double_token(tok, dv)) return dv;
  throw ConfigError(ctx + ": cannot parse value '" + tok + "'");
}

std::vector<std::string> split_array_items(const std::string& body, const std::string& ctx) {
  std::vector<std::string> items;
  std::string cur;
  bool in_str = false;
  for (char ch : body) {
    if (ch == '"') in_str = !in_str;
    if (ch == ',' && !in_str) {
      items.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  const std::string last = trim(cur);
  if (!last.empty()) items.push_back(last);
  for (const std::string& it : items)
    if (it.empty()) throw ConfigError(ctx + ": empty array element");
  return items;
}

}  // namespace

Config Config::from_toml_text(const std::string& text, const std::string& origin) {
  Config cfg;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string ctx = origin + " line " + std::to_string(lineno);
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[')
      throw ConfigError(ctx + ": table headers are not supported; use flat keys");
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(ctx + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty() || val.empty()) throw ConfigError(ctx + ": expected key = value");
    if (cfg.values_.count(key)) throw ConfigError(ctx + ": duplicate key '" + key + "'");

    if (val.front() == '[') {
      if (val.back() != ']') throw ConfigError(ctx + ": arrays must close on the same line");
      const std::vector<std::string> items =
          split_array_items(val.substr(1, val.size() - 2), ctx);
      bool all_strings = !items.empty();
      for (const std::string& it : items)
        if (it.front() != '"') all_strings = false;
      if (all_strings) {
        std::vector<std::string> out;
        for (const std::string& it : items)
          out.push_back(std::get<std::string>(parse_scalar(it, ctx)));
        cfg.values_[key] = std::move(out);
      } else {
        std::vector<double> out;
        for (const std::string& it : items) {
          const Value v = parse_scalar(it, ctx);
          if (std::holds_alternative<std::int64_t>(v))
            out.push_back(static_cast<double>(std::get<std::int64_t>(v)));
          else if (std::holds_alternative<double>(v))
            out.push_back(std::get<double>(v));
          else
            throw ConfigError(ctx + ": mixed array types");
        }
        cfg.values_[key] = std::move(out);
      }
    } else {
      cfg.values_[key] = parse_scalar(val, ctx);
    }
  }
  return cfg;
}

Config Config::from_json_text(const std::string& text, const std::string& origin) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError(origin + ": top level must be an object");
  Config cfg;
  cfg.origin_ = origin;
  for (const auto& [key, v] : j.items()) {
    if (v.is_boolean())
      cfg.values_[key] = v.get<bool>();
    else if (v.is_number_integer() || v.is_number_unsigned())
      cfg.values_[key] = v.get<std::int64_t>();
    else if (v.is_number_float())
      cfg.values_[key] = v.get<double>();
    else if (v.is_string())
      cfg.values_[key] = v.get<std::string>();
    else if (v.is_array()) {
      bool all_strings = !v.empty(), all_numbers = !v.empty();
      for (const auto& item : v) {
        if (!item.is_string()) all_strings = false;
        if (!item.is_number()) all_numbers = false;
      }
      if (all_strings)
        cfg.values_[key] = v.get<std::vector<std::string>>();
      else if (all_numbers)
        cfg.values_[key] = v.get<std::vector<double>>();
      else
        throw ConfigError(origin + ": key '" + key + "': unsupported array contents");
    } else {
      throw ConfigError(origin + ": key '" + key + "': unsupported value type");
    }
  }
  return cfg;
}

Config Config::from_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const bool is_json = path.size() >= 5 && path.substr(path.size() - 5) == ".json";
  return is_json ? from_json_text(buf.str(), path) : from_toml_text(buf.str(), path);
}

const Config::Value& Config::require(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError(origin_ + ": missing required key '" + key + "'");
  return it->second;
}

std::string Config::get_string(const std::string& key) const {
  const Value& v = require(key);
  if (!std::holds_alternative<std::string>(v))
    throw ConfigError(origin_ + ": key '" + key + "' must be a string");
  return std::get<std::string>(v);
}

std::string Config::get_string_or(const std::string& key, const std::string& dflt) const {
  return has(key) ? get_string(key) : dflt;
}

std::int64_t Config::get_int(const std::string& key) const {
  const Value& v = require(key);
  if (std::holds_alternative<std::int64_t>(v)) return std::get<std::int64_t>(v);
  throw ConfigError(origin_ + ": key '" + key + "' must be an integer");
}

std::int64_t Config::get_int_or(const std::string& key, std::int64_t dflt) const {
  return has(key) ? get_int(key) : dflt;
}

double Config::get_double(const std::string& key) const {
  const Value& v = require(key);
  if (std::holds_alternative<double>(v)) return std::get<double>(v);
  if (std::holds_alternative<std::int64_t>(v))
    return static_cast<double>(std::get<std::int64_t>(v));
  throw ConfigError(origin_ + ": key '" + key + "' must be a number");
}

double Config::get_double_or(const std::string& key, double dflt) const {
  return has(key) ? get_double(key) : dflt;
}

bool Config::get_bool_or(const std::string& key, bool dflt) const {
  if (!has(key)) return dflt;
  const Value& v = require(key);
  if (!std::holds_alternative<bool>(v))
    throw ConfigError(origin_ + ": key '" + key + "' must be a boolean");
  return std::get<bool>(v);
}

std::vector<double> Config::get_double_list(const std::string& key) const {
  const Value& v = require(key);
  if (std::holds_alternative<std::vector<double>>(v)) return std::get<std::vector<double>>(v);
  throw ConfigError(origin_ + ": key '" + key + "' must be a numeric array");
}

std::vector<double> Config::get_double_list_or(const std::string& key,
                                               const std::vector<double>& dflt) const {
  return has(key) ? get_double_list(key) : dflt;
}

std::vector<std::string> Config::get_string_list_or(const std::string& key,
                                                    const std::vector<std::string>& dflt) const {
  if (!has(key)) return dflt;
  const Value& v = require(key);
  if (std::holds_alternative<std::vector<std::string>>(v))
    return std::get<std::vector<std::string>>(v);
  throw ConfigError(origin_ + ": key '" + key + "' must be a string array");
}

void Config::restrict_keys(const std::vector<std::string>& allowed) const {
  for (const auto& [key, _] : values_)
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ConfigError(origin_ + ": unknown key '" + key + "'");
}

}  // namespace censurv

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "censurv/errors.hpp"

namespace censurv {

// Flat configuration map loaded from TOML (key = value subset: strings,
// numbers, booleans, homogeneous arrays; # comments) or from a JSON object.
// The format is picked by extension: .json parses as JSON, anything else as
// TOML.
class Config {
 public:
  using Value = std::variant<bool, std::int64_t, double, std::string, std::vector<double>,
                             std::vector<std::string>>;

  static Config from_file(const std::string& path);
  static Config from_toml_text(const std::string& text, const std::string& origin = "<toml>");
  static Config from_json_text(const std::string& text, const std::string& origin = "<json>");

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key) const;
  std::string get_string_or(const std::string& key, const std::string& dflt) const;
  std::int64_t get_int(const std::string& key) const;
  std::int64_t get_int_or(const std::string& key, std::int64_t dflt) const;
  double get_double(const std::string& key) const;
  double get_double_or(const std::string& key, double dflt) const;
  bool get_bool_or(const std::string& key, bool dflt) const;
  std::vector<double> get_double_list(const std::string& key) const;
  std::vector<double> get_double_list_or(const std::string& key,
                                         const std::vector<double>& dflt) const;
  std::vector<std::string> get_string_list_or(const std::string& key,
                                              const std::vector<std::string>& dflt) const;

  // Rejects keys outside the allowed set (typo guard).
  void restrict_keys(const std::vector<std::string>& allowed) const;

  void set(const std::string& key, Value v) { values_[key] = std::move(v); }

 private:
  const Value& require(const std::string& key) const;
  std::map<std::string, Value> values_;
  std::string origin_;
};

}  // namespace censurv

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace ttsmt {

// A small TOML subset, enough for the model registry and the CLI config:
// [table] and [[array-of-tables]] headers, bare or quoted keys, strings,
// integers (with _ separators), floats, booleans, and flat arrays of those.
// No inline tables, dates or dotted keys on the left-hand side.

using TomlScalar = std::variant<bool, std::int64_t, double, std::string>;
using TomlValue = std::variant<bool, std::int64_t, double, std::string, std::vector<TomlScalar>>;

class TomlTable {
 public:
  TomlTable() = default;
  explicit TomlTable(std::string where) : where_(std::move(where)) {}

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::map<std::string, TomlValue>& values() const { return values_; }
  /// "file:line" of the table header, for diagnostics.
  const std::string& where() const { return where_; }

  std::optional<std::string> get_string(const std::string& key) const;
  std::optional<std::int64_t> get_int(const std::string& key) const;
  /// Integers are accepted and widened.
  std::optional<double> get_double(const std::string& key) const;
  std::optional<bool> get_bool(const std::string& key) const;
  std::optional<std::vector<std::string>> get_string_list(const std::string& key) const;

  std::string require_string(const std::string& key) const;
  std::int64_t require_int(const std::string& key) const;

  void set(const std::string& key, TomlValue value) { values_[key] = std::move(value); }

 private:
  std::string where_;
  std::map<std::string, TomlValue> values_;
};

struct TomlDocument {
  /// Keyed by the full header path; the root table is "".
  std::map<std::string, TomlTable> tables;
  std::map<std::string, std::vector<TomlTable>> arrays;

  const TomlTable* table(const std::string& name) const;
  const std::vector<TomlTable>& array(const std::string& name) const;
  /// Tables whose header starts with `prefix.`, keyed by the remainder.
  std::map<std::string, const TomlTable*> subtables(const std::string& prefix) const;
};

/// Raises ConfigError("source:line: ...") on syntax errors.
TomlDocument parse_toml(std::string_view text, std::string_view source = "<toml>");
TomlDocument load_toml(const std::filesystem::path& path);

}  // namespace ttsmt

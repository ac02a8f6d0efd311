#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace ttsmt {

struct LanguageInfo {
  std::string code;
  /// Display name substituted into the translation prompt.
  std::string name;
  /// Unicode scripts a fluent text in this language is expected to use.
  std::vector<std::string> scripts;
};

/// Lowercase ASCII letters, length 2-3.
bool is_valid_language_code(std::string_view code);

/// Code -> display name / expected scripts. Ships with the WMT24 pairs and a
/// handful of common languages; the CLI config can add or override entries.
class LanguageTable {
 public:
  static const LanguageTable& defaults();

  void set(LanguageInfo info);
  bool contains(std::string_view code) const;
  const LanguageInfo* find(std::string_view code) const;
  /// Throws ConfigError naming the code.
  const LanguageInfo& at(std::string_view code) const;

 private:
  std::map<std::string, LanguageInfo, std::less<>> entries_;
};

}  // namespace ttsmt

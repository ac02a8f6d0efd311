#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ttsmt/corpus.hpp"
#include "ttsmt/generation.hpp"
#include "ttsmt/languages.hpp"
#include "ttsmt/selection.hpp"

namespace ttsmt {

inline constexpr double kDefaultCodeSwitchThreshold = 0.30;

/// Letter counts per Unicode script. Digits, punctuation, symbols and
/// whitespace are not counted.
struct ScriptProfile {
  std::map<std::string, std::int64_t> counts;
  std::int64_t total_letters = 0;

  std::map<std::string, double> ratios() const;
};

struct CodeSwitchVerdict {
  bool flagged = false;
  double foreign_ratio = 0.0;
  std::optional<std::string> dominant_foreign_script;
  double threshold = kDefaultCodeSwitchThreshold;
};

ScriptProfile script_profile(std::string_view text);

/// Share of letters outside the target language's expected scripts; flagged
/// when it reaches the threshold. Throws ConfigError for an unconfigured
/// language. Text without letters is never flagged.
CodeSwitchVerdict detect(std::string_view text, std::string_view tgt_lang,
                         double threshold = kDefaultCodeSwitchThreshold,
                         const LanguageTable& languages = LanguageTable::defaults());

/// Fraction of flagged candidates. Throws ValidationError on an empty pool.
double pool_codeswitch_rate(const CandidatePool& pool, std::string_view tgt_lang,
                            double threshold = kDefaultCodeSwitchThreshold,
                            const LanguageTable& languages = LanguageTable::defaults());

struct CodeSwitchRecord {
  std::string seg_id;
  std::int64_t cand_idx = 0;
  CodeSwitchVerdict verdict;
};

/// Verdicts for every candidate, in pool order. Target language per pool comes
/// from the dataset.
std::vector<CodeSwitchRecord> detect_pools(const std::vector<CandidatePool>& pools,
                                           const Dataset& dataset,
                                           double threshold = kDefaultCodeSwitchThreshold,
                                           const LanguageTable& languages = LanguageTable::defaults());

std::string serialize_codeswitch(const std::vector<CodeSwitchRecord>& records);
std::vector<CodeSwitchRecord> load_codeswitch(const std::filesystem::path& path);

struct CodeSwitchRatePoint {
  std::int64_t n = 0;
  /// Mean over draws of the fraction of segments whose pick was flagged.
  double rate = 0.0;
};

/// Code-switch rate among the selected candidates at each N. `flags[s][i]`
/// is the verdict for candidate i of segment s of the table.
std::vector<CodeSwitchRatePoint> selected_codeswitch_rate(
    const DrawTable& table, std::span<const std::vector<bool>> flags);

}  // namespace ttsmt

#include "ttsmt/codeswitch.hpp"

#include <algorithm>

#include "ttsmt/error.hpp"
#include "ttsmt/io.hpp"
#include "ttsmt/unicode.hpp"

namespace ttsmt {

std::map<std::string, double> ScriptProfile::ratios() const {
  std::map<std::string, double> out;
  if (total_letters == 0) return out;
  for (const auto& [script, n] : counts) {
    out[script] = static_cast<double>(n) / static_cast<double>(total_letters);
  }
  return out;
}

ScriptProfile script_profile(std::string_view text) {
  ScriptProfile p;
  for (char32_t cp : unicode::decode(text)) {
    if (!unicode::is_letter(cp)) continue;
    ++p.counts[std::string(unicode::script_name(cp))];
    ++p.total_letters;
  }
  return p;
}

CodeSwitchVerdict detect(std::string_view text, std::string_view tgt_lang, double threshold,
                         const LanguageTable& languages) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw ConfigError("code-switch threshold must lie in [0, 1]");
  }
  const LanguageInfo& info = languages.at(tgt_lang);
  if (info.scripts.empty()) {
    throw ConfigError("language '" + info.code + "' has no expected scripts configured");
  }
  const ScriptProfile p = script_profile(text);
  CodeSwitchVerdict v;
  v.threshold = threshold;
  if (p.total_letters == 0) return v;
  std::int64_t foreign = 0;
  std::int64_t dominant_count = 0;
  for (const auto& [script, n] : p.counts) {
    if (std::find(info.scripts.begin(), info.scripts.end(), script) != info.scripts.end()) continue;
    foreign += n;
    if (n > dominant_count) {
      dominant_count = n;
      v.dominant_foreign_script = script;
    }
  }
  v.foreign_ratio = static_cast<double>(foreign) / static_cast<double>(p.total_letters);
  v.flagged = v.foreign_ratio >= threshold;
  return v;
}

double pool_codeswitch_rate(const CandidatePool& pool, std::string_view tgt_lang, double threshold,
                            const LanguageTable& languages) {
  if (pool.candidates.empty()) throw ValidationError("empty pool for \"" + pool.seg_id + "\"");
  std::size_t flagged = 0;
  for (const auto& c : pool.candidates) {
    if (detect(c.text, tgt_lang, threshold, languages).flagged) ++flagged;
  }
  return static_cast<double>(flagged) / static_cast<double>(pool.size());
}

std::vector<CodeSwitchRecord> detect_pools(const std::vector<CandidatePool>& pools,
                                           const Dataset& dataset, double threshold,
                                           const LanguageTable& languages) {
  std::vector<CodeSwitchRecord> out;
  for (const auto& pool : pools) {
    const Segment& seg = dataset.at(pool.seg_id);
    for (const auto& c : pool.candidates) {
      out.push_back({c.seg_id, c.cand_idx, detect(c.text, seg.pair.tgt, threshold, languages)});
    }
  }
  return out;
}

std::string serialize_codeswitch(const std::vector<CodeSwitchRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    json rec = {{"seg_id", r.seg_id},
                {"cand_idx", r.cand_idx},
                {"flagged", r.verdict.flagged},
                {"foreign_ratio", r.verdict.foreign_ratio},
                {"dominant_foreign_script", nullptr}};
    if (r.verdict.dominant_foreign_script) {
      rec["dominant_foreign_script"] = *r.verdict.dominant_foreign_script;
    }
    out += dump_line(rec);
    out += '\n';
  }
  return out;
}

std::vector<CodeSwitchRecord> load_codeswitch(const std::filesystem::path& path) {
  std::vector<CodeSwitchRecord> out;
  for_each_jsonl(path, [&](std::size_t line_no, const json& rec) {
    const std::string where = path.string() + ":" + std::to_string(line_no);
    CodeSwitchRecord r;
    r.seg_id = get_string(rec, "seg_id", where);
    r.cand_idx = get_int(rec, "cand_idx", where);
    auto flagged = rec.find("flagged");
    if (flagged == rec.end() || !flagged->is_boolean()) {
      throw ValidationError(where + ": field 'flagged' must be a boolean");
    }
    r.verdict.flagged = flagged->get<bool>();
    r.verdict.foreign_ratio = get_number(rec, "foreign_ratio", where);
    auto dom = rec.find("dominant_foreign_script");
    if (dom != rec.end() && dom->is_string()) r.verdict.dominant_foreign_script = dom->get<std::string>();
    out.push_back(std::move(r));
  });
  return out;
}

std::vector<CodeSwitchRatePoint> selected_codeswitch_rate(
    const DrawTable& table, std::span<const std::vector<bool>> flags) {
  if (flags.size() != table.seg_ids.size()) {
    throw ValidationError("code-switch flags cover " + std::to_string(flags.size()) +
                          " segments, selections cover " + std::to_string(table.seg_ids.size()));
  }
  std::vector<CodeSwitchRatePoint> out;
  for (std::size_t ni = 0; ni < table.schedule.size(); ++ni) {
    double sum = 0.0;
    for (const auto& per_draw : table.chosen[ni]) {
      std::size_t flagged = 0;
      for (std::size_t s = 0; s < per_draw.size(); ++s) {
        const auto idx = static_cast<std::size_t>(per_draw[s]);
        if (idx < flags[s].size() && flags[s][idx]) ++flagged;
      }
      sum += static_cast<double>(flagged) / static_cast<double>(per_draw.size());
    }
    out.push_back({table.schedule[ni], sum / static_cast<double>(table.chosen[ni].size())});
  }
  return out;
}

}  // namespace ttsmt

#include "ttsmt/generation.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "ttsmt/error.hpp"
#include "ttsmt/unicode.hpp"

namespace ttsmt {

void DecodeConfig::validate() const {
  if (!(temperature >= 0.0) || !std::isfinite(temperature)) {
    throw ValidationError("temperature must be >= 0");
  }
  if (!(top_p > 0.0 && top_p <= 1.0)) {
    throw ValidationError("top_p must lie in (0, 1]");
  }
  if (n_cand < 1) throw ValidationError("n_cand must be >= 1");
  if (max_new_tokens < 1) throw ValidationError("max_new_tokens must be >= 1");
}

std::size_t CandidatePool::truncated_count() const {
  return static_cast<std::size_t>(
      std::count_if(candidates.begin(), candidates.end(),
                    [&](const Candidate& c) { return c.gen_tokens >= decode.max_new_tokens; }));
}

Prompt build_prompt(const Segment& seg, const LanguageTable& languages,
                    const PromptOptions& options) {
  const std::string& src_name = languages.at(seg.pair.src).name;
  const std::string& tgt_name = languages.at(seg.pair.tgt).name;
  std::string instruction =
      "You are a helpful translation assistant. Now translate the following " + src_name +
      " text (in " + seg.domain + " domain) into natural, fluent " + tgt_name +
      " sentence while preserving the original meaning, tone, and register. Please retain the "
      "lines and paragraph breaks in the translation, and do not produce explanations or "
      "commentary in your answer.";
  Prompt prompt;
  prompt.push_back({"user", std::move(instruction)});
  prompt.push_back({options.literal_assistant_source ? "assistant" : "user", seg.src});
  return prompt;
}

std::int64_t count_tokens_approx(std::string_view text) {
  std::int64_t count = 0;
  bool in_run = false;
  for (char32_t cp : unicode::decode(text)) {
    if (unicode::is_space(cp)) {
      in_run = false;
    } else if (unicode::is_cjk(cp)) {
      ++count;
      in_run = false;
    } else if (!in_run) {
      ++count;
      in_run = true;
    }
  }
  return count;
}

std::int64_t count_prompt_tokens_approx(const Prompt& prompt) {
  std::int64_t total = 0;
  for (const auto& m : prompt) total += count_tokens_approx(m.content);
  return total;
}

CandidatePool generate_pool(const Segment& seg, const DecodeConfig& cfg, GenerationBackend& backend,
                            const LanguageTable& languages, const PromptOptions& options) {
  cfg.validate();
  const Prompt prompt = build_prompt(seg, languages, options);
  std::vector<Completion> completions = backend.complete({seg, prompt, cfg});
  if (completions.size() != static_cast<std::size_t>(cfg.n_cand)) {
    throw BackendError("backend '" + backend.id() + "' returned " +
                       std::to_string(completions.size()) + " completions for segment \"" +
                       seg.id + "\", expected " + std::to_string(cfg.n_cand));
  }

  bool prompt_approx = true;
  std::int64_t prompt_tokens = 0;
  for (const auto& c : completions) {
    if (c.prompt_tokens) {
      prompt_tokens = *c.prompt_tokens;
      prompt_approx = false;
      break;
    }
  }
  if (prompt_approx) prompt_tokens = count_prompt_tokens_approx(prompt);

  CandidatePool pool;
  pool.seg_id = seg.id;
  pool.decode = cfg;
  pool.candidates.reserve(completions.size());
  for (std::size_t i = 0; i < completions.size(); ++i) {
    auto& c = completions[i];
    Candidate cand;
    cand.seg_id = seg.id;
    cand.cand_idx = static_cast<std::int64_t>(i);
    cand.prompt_tokens = prompt_tokens;
    cand.gen_tokens = c.gen_tokens ? *c.gen_tokens : count_tokens_approx(c.text);
    cand.approx_tokens = prompt_approx || !c.gen_tokens;
    cand.text = std::move(c.text);
    cand.backend_id = backend.id();
    cand.latent_quality = c.latent_quality;
    pool.candidates.push_back(std::move(cand));
  }
  return pool;
}

json candidate_to_json(const Candidate& c) {
  json rec = json::object();
  rec["seg_id"] = c.seg_id;
  rec["cand_idx"] = c.cand_idx;
  rec["text"] = c.text;
  rec["prompt_tokens"] = c.prompt_tokens;
  rec["gen_tokens"] = c.gen_tokens;
  rec["backend_id"] = c.backend_id;
  rec["latent_quality"] = c.latent_quality ? json(*c.latent_quality) : json(nullptr);
  if (c.approx_tokens) rec["approx_tokens"] = true;
  return rec;
}

std::string serialize_pools(const std::vector<CandidatePool>& pools) {
  std::string out;
  for (const auto& pool : pools) {
    for (const auto& c : pool.candidates) {
      out += dump_line(candidate_to_json(c));
      out += '\n';
    }
  }
  return out;
}

void save_pools(const std::vector<CandidatePool>& pools, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_pools(pools));
}

std::vector<CandidatePool> load_pools(const std::filesystem::path& path) {
  std::vector<CandidatePool> pools;
  std::map<std::string, std::size_t> index;
  for_each_jsonl(path, [&](std::size_t line_no, const json& rec) {
    const std::string where = path.string() + ":" + std::to_string(line_no);
    Candidate c;
    c.seg_id = get_string(rec, "seg_id", where);
    c.cand_idx = get_int(rec, "cand_idx", where);
    c.text = get_string(rec, "text", where);
    c.prompt_tokens = get_int(rec, "prompt_tokens", where);
    c.gen_tokens = get_int(rec, "gen_tokens", where);
    c.backend_id = get_string(rec, "backend_id", where);
    c.latent_quality = get_optional_number(rec, "latent_quality", where);
    if (auto it = rec.find("approx_tokens"); it != rec.end() && it->is_boolean()) {
      c.approx_tokens = it->get<bool>();
    }
    if (c.cand_idx < 0) throw ValidationError(where + ": negative cand_idx");
    if (c.prompt_tokens < 0 || c.gen_tokens < 0) {
      throw ValidationError(where + ": negative token count");
    }
    auto [it, inserted] = index.emplace(c.seg_id, pools.size());
    if (inserted) {
      pools.emplace_back();
      pools.back().seg_id = c.seg_id;
    }
    pools[it->second].candidates.push_back(std::move(c));
  });
  for (auto& pool : pools) {
    auto& cands = pool.candidates;
    std::stable_sort(cands.begin(), cands.end(),
                     [](const Candidate& a, const Candidate& b) { return a.cand_idx < b.cand_idx; });
    for (std::size_t i = 0; i < cands.size(); ++i) {
      if (cands[i].cand_idx != static_cast<std::int64_t>(i)) {
        throw ValidationError(path.string() + ": pool \"" + pool.seg_id +
                              "\" does not have indices exactly 0.." +
                              std::to_string(cands.size() - 1));
      }
      if (cands[i].prompt_tokens != cands.front().prompt_tokens) {
        throw ValidationError(path.string() + ": pool \"" + pool.seg_id +
                              "\" has inconsistent prompt_tokens");
      }
    }
    pool.decode.n_cand = static_cast<std::int64_t>(cands.size());
  }
  return pools;
}

const CandidatePool* find_pool(const std::vector<CandidatePool>& pools, std::string_view seg_id) {
  for (const auto& p : pools) {
    if (p.seg_id == seg_id) return &p;
  }
  return nullptr;
}

}  // namespace ttsmt

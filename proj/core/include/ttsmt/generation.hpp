#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ttsmt/corpus.hpp"
#include "ttsmt/languages.hpp"

namespace ttsmt {

/// Sampling hyperparameters shared by every candidate of a pool.
struct DecodeConfig {
  double temperature = 1.0;
  double top_p = 0.95;
  std::int64_t n_cand = 1;
  std::int64_t max_new_tokens = 1024;
  std::uint64_t seed = 0;

  /// Throws ValidationError when temperature < 0, top_p outside (0, 1],
  /// n_cand < 1 or max_new_tokens < 1.
  void validate() const;
};

struct Candidate {
  std::string seg_id;
  std::int64_t cand_idx = 0;
  std::string text;
  /// Prompt (prefill) length. Identical across a pool: the prompt is paid once.
  std::int64_t prompt_tokens = 0;
  std::int64_t gen_tokens = 0;
  std::string backend_id;
  /// True quality draw; only the simulator knows it.
  std::optional<double> latent_quality;
  /// Token counts came from the approximate counter, not backend usage.
  bool approx_tokens = false;

  friend bool operator==(const Candidate&, const Candidate&) = default;
};

struct CandidatePool {
  std::string seg_id;
  std::vector<Candidate> candidates;
  DecodeConfig decode;

  std::size_t size() const { return candidates.size(); }
  /// Number of candidates that hit max_new_tokens.
  std::size_t truncated_count() const;
};

struct ChatMessage {
  std::string role;
  std::string content;

  friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

using Prompt = std::vector<ChatMessage>;

struct PromptOptions {
  /// Reproduce the published template verbatim, which places the source
  /// sentence in an assistant turn. Off by default: the source goes in a
  /// second user turn.
  bool literal_assistant_source = false;
};

/// Instantiates the fixed translation instruction with display names for the
/// pair's languages and the segment's domain. Throws ConfigError for a code
/// with no display name.
Prompt build_prompt(const Segment& seg, const LanguageTable& languages = LanguageTable::defaults(),
                    const PromptOptions& options = {});

/// Whitespace-delimited runs count one token each; every Han, kana or Hangul
/// character counts as its own token.
std::int64_t count_tokens_approx(std::string_view text);
std::int64_t count_prompt_tokens_approx(const Prompt& prompt);

struct GenerationRequest {
  const Segment& segment;
  const Prompt& prompt;
  const DecodeConfig& decode;
};

struct Completion {
  std::string text;
  std::optional<std::int64_t> prompt_tokens;
  std::optional<std::int64_t> gen_tokens;
  std::optional<double> latent_quality;
};

/// Produces decode.n_cand independent completions for one prompt. Completions
/// are returned in candidate-index order.
class GenerationBackend {
 public:
  virtual ~GenerationBackend() = default;
  virtual std::string id() const = 0;
  virtual std::vector<Completion> complete(const GenerationRequest& request) = 0;
};

/// Builds the prompt, draws n_cand candidates, and fills token counts from
/// backend usage where reported and from the approximate counter otherwise.
CandidatePool generate_pool(const Segment& seg, const DecodeConfig& cfg, GenerationBackend& backend,
                            const LanguageTable& languages = LanguageTable::defaults(),
                            const PromptOptions& options = {});

// candidates.jsonl ----------------------------------------------------------

json candidate_to_json(const Candidate& c);
std::string serialize_pools(const std::vector<CandidatePool>& pools);
void save_pools(const std::vector<CandidatePool>& pools, const std::filesystem::path& path);

/// Groups records by seg_id (first-appearance order) and checks that every
/// pool has indices exactly 0..n-1 and a single prompt_tokens value.
std::vector<CandidatePool> load_pools(const std::filesystem::path& path);

/// Finds the pool for `seg_id`, or nullptr.
const CandidatePool* find_pool(const std::vector<CandidatePool>& pools, std::string_view seg_id);

}  // namespace ttsmt

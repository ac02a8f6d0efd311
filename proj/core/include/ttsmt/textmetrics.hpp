#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ttsmt/corpus.hpp"
#include "ttsmt/generation.hpp"
#include "ttsmt/selection.hpp"

namespace ttsmt {

// BLEU and chrF++ with the conventions of the standard WMT scoring tool
// (sacreBLEU 2.x): same tokenization, n-gram statistics and corner cases.

enum class BleuTokenizer { k13a, kChar };

std::string_view to_string(BleuTokenizer tok);
BleuTokenizer parse_bleu_tokenizer(std::string_view text);
/// Character-level for zh and ja targets, 13a otherwise.
BleuTokenizer default_tokenizer(std::string_view tgt_lang);

struct BleuConfig {
  enum class Smoothing { kNone, kAddK };

  std::int64_t max_ngram = 4;
  Smoothing smoothing = Smoothing::kNone;
  /// k for add-k, applied to orders 2 and up.
  double smooth_value = 1.0;
  BleuTokenizer tokenizer = BleuTokenizer::k13a;
  bool case_sensitive = true;

  void validate() const;
};

struct ChrfConfig {
  std::int64_t char_order = 6;
  std::int64_t word_order = 2;
  double beta = 2.0;
  bool case_sensitive = true;

  void validate() const;
};

std::string tokenize_13a(std::string_view line);
std::string tokenize_char(std::string_view line);

/// Additive corpus statistics for one hypothesis.
struct BleuStats {
  std::int64_t sys_len = 0;
  std::int64_t ref_len = 0;
  std::vector<std::int64_t> correct;
  std::vector<std::int64_t> total;

  BleuStats& operator+=(const BleuStats& o);
};

/// Per order: hypothesis n-grams, reference n-grams, matches.
struct ChrfStats {
  std::vector<std::int64_t> counts;

  ChrfStats& operator+=(const ChrfStats& o);
};

BleuStats bleu_segment_stats(std::string_view hyp, std::span<const std::string> refs,
                             const BleuConfig& cfg);
double bleu_from_stats(const BleuStats& stats, const BleuConfig& cfg);

/// Statistics against the reference with the best segment-level F-score.
ChrfStats chrf_segment_stats(std::string_view hyp, std::span<const std::string> refs,
                             const ChrfConfig& cfg);
double chrf_from_stats(const ChrfStats& stats, const ChrfConfig& cfg);

/// Corpus scores in [0, 100]. `refs[i]` lists every reference of segment i.
/// Throws ValidationError on a length mismatch, an empty corpus or an empty
/// reference list.
double bleu_corpus(std::span<const std::string> hyps,
                   std::span<const std::vector<std::string>> refs, const BleuConfig& cfg = {});
double chrfpp_corpus(std::span<const std::string> hyps,
                     std::span<const std::vector<std::string>> refs, const ChrfConfig& cfg = {});

std::string bleu_signature(const BleuConfig& cfg, std::size_t n_refs);
std::string chrf_signature(const ChrfConfig& cfg, std::size_t n_refs);

/// A corpus metric resolved for one target language.
struct CorpusMetric {
  enum class Kind { kBleu, kChrf };

  Kind kind = Kind::kBleu;
  BleuConfig bleu;
  ChrfConfig chrf;

  /// "bleu" or "chrf++"; tokenizer picked from the target language.
  static CorpusMetric resolve(std::string_view name, std::string_view tgt_lang);
  std::string name() const { return kind == Kind::kBleu ? "bleu" : "chrf++"; }
  std::string signature(std::size_t n_refs) const;
  double corpus(std::span<const std::string> hyps,
                std::span<const std::vector<std::string>> refs) const;
};

/// Per-draw corpus scores for the hypotheses a draw table selected, then mean
/// and population sd across draws at each N. `pools[i]` and `segments[i]` must
/// line up with `table.seg_ids[i]`.
std::vector<CurvePoint> curve_eval_corpus(const DrawTable& table,
                                          std::span<const CandidatePool* const> pools,
                                          std::span<const Segment* const> segments,
                                          const CorpusMetric& metric, const MetricId& id);

}  // namespace ttsmt

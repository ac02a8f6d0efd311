#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "ttsmt/corpus.hpp"
#include "ttsmt/generation.hpp"

namespace ttsmt {

enum class MetricKind { kQe, kRefBased };
enum class MetricRole { kSelection, kEvaluation };
enum class Orientation { kHigherBetter, kLowerBetter };
/// Segment metrics come from a scorer per candidate; corpus metrics (BLEU,
/// chrF++) are recomputed from selected texts.
enum class MetricLevel { kSegment, kCorpus };

struct MetricId {
  std::string name;
  MetricKind kind = MetricKind::kQe;
  std::set<MetricRole> roles;
  Orientation orientation = Orientation::kHigherBetter;
  MetricLevel level = MetricLevel::kSegment;
  /// Declared score range. When unset, only finiteness is checked.
  std::optional<std::pair<double, double>> range;

  /// Maps a raw score onto a higher-is-better scale.
  double oriented(double raw) const {
    return orientation == Orientation::kHigherBetter ? raw : -raw;
  }
  bool has_role(MetricRole r) const { return roles.count(r) != 0; }
  MetricId with_role(MetricRole r) const {
    MetricId m = *this;
    m.roles.insert(r);
    return m;
  }
  /// Selection metrics must be reference-free.
  void validate() const;
};

std::string_view to_string(MetricKind kind);

/// Known metric names and their kind/orientation. Names not in the catalog can
/// be spelled "name:qe", "name:ref" or "name:ref:lower".
class MetricCatalog {
 public:
  static const MetricCatalog& defaults();

  void set(MetricId metric);
  const MetricId* find(std::string_view name) const;
  /// Throws ConfigError for unknown names without an explicit kind.
  MetricId resolve(std::string_view spec) const;

 private:
  std::map<std::string, MetricId, std::less<>> entries_;
};

/// Scores for one segment's pool under one metric, indexed by cand_idx.
struct ScoreSet {
  std::string seg_id;
  MetricId metric;
  std::vector<double> scores;

  std::size_t size() const { return scores.size(); }
  double at(std::int64_t idx) const { return scores.at(static_cast<std::size_t>(idx)); }
  double oriented(std::int64_t idx) const { return metric.oriented(at(idx)); }
};

/// Observation noise of the simulated QE. Either `sigma` (gaussian sd, or the
/// replacement probability for rank_corrupt) or `target_correlation` is used.
struct NoiseModel {
  enum class Family { kNone, kGaussian, kRankCorrupt };

  Family family = Family::kNone;
  double sigma = 0.0;
  std::optional<double> target_correlation;

  static NoiseModel none() { return {}; }
  static NoiseModel gaussian(double sigma) { return {Family::kGaussian, sigma, std::nullopt}; }
  static NoiseModel correlated(double rho) { return {Family::kGaussian, 0.0, rho}; }
  static NoiseModel rank_corrupt(double p) { return {Family::kRankCorrupt, p, std::nullopt}; }

  void validate() const;
  /// Gaussian sd that yields target_correlation against a latent of sd
  /// `latent_std`; plain `sigma` when no correlation target is set.
  double effective_sigma(double latent_std) const;
};

struct ScoreItem {
  std::string_view seg_id;
  std::int64_t cand_idx = 0;
  std::string_view src;
  std::string_view hyp;
  /// Null for reference-free metrics.
  const std::vector<std::string>* refs = nullptr;
  std::optional<double> latent_quality;
};

class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual std::string id() const = 0;
  /// One score per item, positionally aligned.
  virtual std::vector<double> score(const MetricId& metric, std::span<const ScoreItem> items) = 0;
};

/// Scores keyed by (metric, seg_id, cand_idx, text hash). Concurrent readers,
/// serialized writers.
class ScoreCache {
 public:
  using Key = std::tuple<std::string, std::string, std::int64_t, std::string>;

  ScoreCache() = default;
  ScoreCache(ScoreCache&& other) noexcept : entries_(std::move(other.entries_)) {}
  ScoreCache& operator=(ScoreCache&& other) noexcept {
    if (this != &other) entries_ = std::move(other.entries_);
    return *this;
  }

  std::optional<double> lookup(const Key& key) const;
  void store(const Key& key, double score);
  std::size_t size() const;

  /// Missing file is an empty cache.
  static ScoreCache load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

 private:
  mutable std::shared_mutex mu_;
  std::map<Key, double> entries_;
};

ScoreCache::Key cache_key(const MetricId& metric, const Candidate& c);

/// Scores every candidate of `pool`. Reference-free metrics see (src, hyp)
/// only; reference-based ones also get the segment's refs and fail when there
/// are none. Non-finite or out-of-range scores are rejected. Cache hits skip
/// the scorer.
ScoreSet score_pool(const CandidatePool& pool, const Segment& seg, const MetricId& metric,
                    Scorer& scorer, ScoreCache* cache = nullptr);

/// Approximate QE input length: tokens of src plus tokens of hyp.
std::int64_t qe_token_length(std::string_view src, std::string_view hyp);

// scores.jsonl --------------------------------------------------------------

std::string serialize_scores(const std::vector<ScoreSet>& sets);

/// All score sets in a file, in first-appearance order of (metric, seg_id).
/// Each set must cover indices 0..n-1 exactly once.
std::vector<ScoreSet> load_scores(const std::filesystem::path& path,
                                  const MetricCatalog& catalog = MetricCatalog::defaults());

/// Lookup by (metric name, seg_id).
class ScoreTable {
 public:
  ScoreTable() = default;
  explicit ScoreTable(std::vector<ScoreSet> sets);

  void put(ScoreSet set);
  const ScoreSet* find(std::string_view metric, std::string_view seg_id) const;
  /// Throws ValidationError when absent.
  const ScoreSet& at(std::string_view metric, std::string_view seg_id) const;
  std::vector<std::string> metric_names() const;
  const std::vector<ScoreSet>& sets() const { return sets_; }

 private:
  std::vector<ScoreSet> sets_;
  std::map<std::pair<std::string, std::string>, std::size_t> index_;
};

// Interference guard ---------------------------------------------------------

struct GuardOptions {
  /// Names sharing one of these prefixes are treated as related models.
  std::vector<std::string> family_prefixes = {"kiwi", "comet", "xcomet", "metricx", "remedy"};
  /// Permit evaluating with the selection metric itself.
  bool allow_identity = false;
};

struct InterferencePlan {
  MetricId selection;
  std::vector<MetricId> evaluation;
  std::vector<std::string> warnings;
};

/// Rejects plans that evaluate with the selection metric (unless overridden)
/// or select with a reference-based metric; warns on shared families.
InterferencePlan interference_guard(const MetricId& selection,
                                    const std::vector<MetricId>& evaluation,
                                    const GuardOptions& options = {});

}  // namespace ttsmt

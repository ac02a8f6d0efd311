#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ttsmt/generation.hpp"
#include "ttsmt/scoring.hpp"

namespace ttsmt {

struct SelectionResult {
  std::string seg_id;
  std::int64_t n = 0;
  std::int64_t chosen_idx = 0;
  double chosen_score = 0.0;
  std::int64_t draw_id = 0;

  friend bool operator==(const SelectionResult&, const SelectionResult&) = default;
};

struct CurvePoint {
  std::int64_t n = 0;
  MetricId metric;
  double mean = 0.0;
  /// Population sd across draws of the segment-averaged quality.
  double std = 0.0;
  std::int64_t n_draws = 0;

  double standard_error() const;
};

/// Argmax of oriented selection score over `subset`; ties go to the lowest
/// cand_idx. Throws ValidationError for an empty subset or a bad index.
SelectionResult best_of_n(const ScoreSet& scores, std::span<const std::int64_t> subset,
                          std::int64_t draw_id = 0);

/// Full-pool selection: the translation emitted for the segment.
const Candidate& select_final(const CandidatePool& pool, const ScoreSet& scores);

/// Same, but candidates with `excluded[i]` set are skipped unless every
/// candidate is excluded. Experimental code-switch filter.
const Candidate& select_final(const CandidatePool& pool, const ScoreSet& scores,
                              const std::vector<bool>& excluded);

/// 1, 2, 4, ... up to and including the largest power of two <= max_n.
std::vector<std::int64_t> power_of_two_schedule(std::int64_t max_n = 1024);

struct DrawPlan {
  std::vector<std::int64_t> schedule;
  std::int64_t draws = 5;
  std::uint64_t seed = 0;
  /// Make the draws for one (segment, N) mutually disjoint. Needs draws * N
  /// <= pool size.
  bool disjoint = false;
};

/// Chosen candidate per (schedule entry, draw, segment).
struct DrawTable {
  std::vector<std::int64_t> schedule;
  /// Draws actually taken per schedule entry: 1 when N equals every pool size.
  std::vector<std::int64_t> draws;
  /// chosen[n_index][draw][segment].
  std::vector<std::vector<std::vector<std::int64_t>>> chosen;
  std::vector<std::string> seg_ids;
};

/// For every segment and N, draws uniform size-N subsets without replacement
/// from the pool and records the selection argmax. Each (segment, N, draw)
/// has its own RNG stream, so results do not depend on thread scheduling.
DrawTable draw_selections(std::span<const ScoreSet* const> selection, const DrawPlan& plan);

/// Evaluation-score curve over a draw table: per draw, the mean over segments
/// of the chosen candidates' eval scores; then mean and sd over draws.
std::vector<CurvePoint> curve_from_draws(const DrawTable& table,
                                         std::span<const ScoreSet* const> evaluation);

/// draw_selections followed by curve_from_draws.
std::vector<CurvePoint> subsample_curve(std::span<const ScoreSet* const> selection,
                                        std::span<const ScoreSet* const> evaluation,
                                        const DrawPlan& plan);

/// Flattens a draw table into selections.jsonl rows.
std::vector<SelectionResult> selection_rows(const DrawTable& table,
                                            std::span<const ScoreSet* const> selection);
std::string serialize_selections(const std::vector<SelectionResult>& rows);
std::vector<SelectionResult> load_selections(const std::filesystem::path& path);

/// log C(n, k) via lgamma; -inf when k > n.
double log_binomial(std::int64_t n, std::int64_t k);

/// P(rank-k candidate is the argmax of a uniform size-n subset of m), for
/// k = 1..m: C(m-k, n-1) / C(m, n), computed in log space.
std::vector<double> argmax_rank_probabilities(std::int64_t m, std::int64_t n);

/// Exact expected eval score of best-of-n over uniform size-n subsets:
/// sum_k P(k) * eval(rank k), with ranks by descending oriented selection
/// score and ties broken by lower index.
double expected_bon_exact(const ScoreSet& selection, const ScoreSet& evaluation, std::int64_t n);

}  // namespace ttsmt

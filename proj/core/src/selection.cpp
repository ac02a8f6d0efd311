#include "ttsmt/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ttsmt/error.hpp"
#include "ttsmt/parallel.hpp"
#include "ttsmt/rng.hpp"

namespace ttsmt {

double CurvePoint::standard_error() const {
  return n_draws > 0 ? std / std::sqrt(static_cast<double>(n_draws)) : 0.0;
}

namespace {

/// Index with the best oriented score in [first, last); lowest index on ties.
std::int64_t argmax_of(const ScoreSet& scores, const std::int64_t* first, const std::int64_t* last) {
  std::int64_t best = *first;
  double best_score = scores.oriented(best);
  for (const std::int64_t* p = first + 1; p != last; ++p) {
    const double s = scores.oriented(*p);
    if (s > best_score || (s == best_score && *p < best)) {
      best = *p;
      best_score = s;
    }
  }
  return best;
}

}  // namespace

SelectionResult best_of_n(const ScoreSet& scores, std::span<const std::int64_t> subset,
                          std::int64_t draw_id) {
  if (subset.empty()) throw ValidationError("best_of_n on an empty subset");
  for (std::int64_t idx : subset) {
    if (idx < 0 || static_cast<std::size_t>(idx) >= scores.size()) {
      throw ValidationError("candidate index " + std::to_string(idx) + " outside pool of " +
                            std::to_string(scores.size()));
    }
  }
  const std::int64_t chosen = argmax_of(scores, subset.data(), subset.data() + subset.size());
  return {scores.seg_id, static_cast<std::int64_t>(subset.size()), chosen, scores.at(chosen),
          draw_id};
}

const Candidate& select_final(const CandidatePool& pool, const ScoreSet& scores) {
  return select_final(pool, scores, std::vector<bool>(pool.size(), false));
}

const Candidate& select_final(const CandidatePool& pool, const ScoreSet& scores,
                              const std::vector<bool>& excluded) {
  if (pool.candidates.empty()) throw ValidationError("empty pool for \"" + pool.seg_id + "\"");
  if (scores.seg_id != pool.seg_id || scores.size() != pool.size()) {
    throw ValidationError("incomplete scores for pool \"" + pool.seg_id + "\": have " +
                          std::to_string(scores.size()) + " of " + std::to_string(pool.size()));
  }
  std::vector<std::int64_t> subset;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (i >= excluded.size() || !excluded[i]) subset.push_back(static_cast<std::int64_t>(i));
  }
  if (subset.empty()) {
    subset.resize(pool.size());
    std::iota(subset.begin(), subset.end(), 0);
  }
  const auto r = best_of_n(scores, subset);
  return pool.candidates[static_cast<std::size_t>(r.chosen_idx)];
}

std::vector<std::int64_t> power_of_two_schedule(std::int64_t max_n) {
  std::vector<std::int64_t> out;
  for (std::int64_t n = 1; n <= max_n; n *= 2) out.push_back(n);
  return out;
}

DrawTable draw_selections(std::span<const ScoreSet* const> selection, const DrawPlan& plan) {
  if (plan.draws < 1) throw ValidationError("draws must be >= 1");
  if (plan.schedule.empty()) throw ValidationError("empty N schedule");
  if (selection.empty()) throw ValidationError("no segments to select from");
  std::size_t min_pool = selection.front()->size();
  bool uniform_pools = true;
  for (const ScoreSet* s : selection) {
    if (s->size() == 0) throw ValidationError("empty score set for \"" + s->seg_id + "\"");
    uniform_pools = uniform_pools && s->size() == selection.front()->size();
    min_pool = std::min(min_pool, s->size());
  }
  for (std::int64_t n : plan.schedule) {
    if (n < 1) throw ValidationError("schedule entries must be >= 1");
    if (static_cast<std::size_t>(n) > min_pool) {
      throw ValidationError("schedule entry N=" + std::to_string(n) + " exceeds pool size " +
                            std::to_string(min_pool));
    }
    if (plan.disjoint && static_cast<std::size_t>(n * plan.draws) > min_pool &&
        static_cast<std::size_t>(n) != min_pool) {
      throw ValidationError("disjoint draws need draws * N <= pool size (N=" + std::to_string(n) +
                            ")");
    }
  }

  DrawTable table;
  table.schedule = plan.schedule;
  for (const ScoreSet* s : selection) table.seg_ids.push_back(s->seg_id);
  const std::size_t n_seg = selection.size();
  for (std::int64_t n : plan.schedule) {
    const bool exhaustive = uniform_pools && static_cast<std::size_t>(n) == min_pool;
    const std::int64_t draws = exhaustive ? 1 : plan.draws;
    table.draws.push_back(draws);
    table.chosen.emplace_back(static_cast<std::size_t>(draws), std::vector<std::int64_t>(n_seg));
  }

  parallel_for(n_seg, [&](std::size_t s) {
    const ScoreSet& scores = *selection[s];
    const auto m = static_cast<std::int64_t>(scores.size());
    std::vector<std::int64_t> perm(static_cast<std::size_t>(m));
    for (std::size_t ni = 0; ni < table.schedule.size(); ++ni) {
      const std::int64_t n = table.schedule[ni];
      const std::int64_t draws = table.draws[ni];
      if (n == m) {
        std::iota(perm.begin(), perm.end(), 0);
        const std::int64_t full = argmax_of(scores, perm.data(), perm.data() + m);
        for (std::int64_t d = 0; d < draws; ++d) table.chosen[ni][static_cast<std::size_t>(d)][s] = full;
        continue;
      }
      if (plan.disjoint) {
        std::iota(perm.begin(), perm.end(), 0);
        auto eng = StreamKey(plan.seed, "subsample.disjoint").add(scores.seg_id)
                       .add(static_cast<std::uint64_t>(n)).engine();
        const std::int64_t need = n * draws;
        for (std::int64_t i = 0; i < need; ++i) {
          const auto j = i + static_cast<std::int64_t>(uniform_below(eng, static_cast<std::uint64_t>(m - i)));
          std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
        }
        for (std::int64_t d = 0; d < draws; ++d) {
          const std::int64_t* first = perm.data() + d * n;
          table.chosen[ni][static_cast<std::size_t>(d)][s] = argmax_of(scores, first, first + n);
        }
        continue;
      }
      for (std::int64_t d = 0; d < draws; ++d) {
        std::iota(perm.begin(), perm.end(), 0);
        auto eng = StreamKey(plan.seed, "subsample").add(scores.seg_id)
                       .add(static_cast<std::uint64_t>(n)).add(static_cast<std::uint64_t>(d)).engine();
        for (std::int64_t i = 0; i < n; ++i) {
          const auto j = i + static_cast<std::int64_t>(uniform_below(eng, static_cast<std::uint64_t>(m - i)));
          std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
        }
        table.chosen[ni][static_cast<std::size_t>(d)][s] = argmax_of(scores, perm.data(), perm.data() + n);
      }
    }
  });
  return table;
}

std::vector<CurvePoint> curve_from_draws(const DrawTable& table,
                                         std::span<const ScoreSet* const> evaluation) {
  if (evaluation.size() != table.seg_ids.size()) {
    throw ValidationError("evaluation scores cover " + std::to_string(evaluation.size()) +
                          " segments, selections cover " + std::to_string(table.seg_ids.size()));
  }
  for (std::size_t s = 0; s < evaluation.size(); ++s) {
    if (evaluation[s]->seg_id != table.seg_ids[s]) {
      throw ValidationError("evaluation scores for \"" + evaluation[s]->seg_id +
                            "\" misaligned with selections for \"" + table.seg_ids[s] + "\"");
    }
  }
  std::vector<CurvePoint> out;
  const double n_seg = static_cast<double>(evaluation.size());
  for (std::size_t ni = 0; ni < table.schedule.size(); ++ni) {
    const auto& per_draw = table.chosen[ni];
    std::vector<double> q(per_draw.size(), 0.0);
    for (std::size_t d = 0; d < per_draw.size(); ++d) {
      double sum = 0.0;
      for (std::size_t s = 0; s < evaluation.size(); ++s) {
        sum += evaluation[s]->at(per_draw[d][s]);
      }
      q[d] = sum / n_seg;
    }
    CurvePoint p;
    p.n = table.schedule[ni];
    p.metric = evaluation.front()->metric;
    p.n_draws = static_cast<std::int64_t>(q.size());
    p.mean = std::accumulate(q.begin(), q.end(), 0.0) / static_cast<double>(q.size());
    double var = 0.0;
    for (double v : q) var += (v - p.mean) * (v - p.mean);
    p.std = std::sqrt(var / static_cast<double>(q.size()));
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<CurvePoint> subsample_curve(std::span<const ScoreSet* const> selection,
                                        std::span<const ScoreSet* const> evaluation,
                                        const DrawPlan& plan) {
  for (std::size_t s = 0; s < selection.size() && s < evaluation.size(); ++s) {
    if (selection[s]->size() != evaluation[s]->size()) {
      throw ValidationError("selection and evaluation pools differ in size for \"" +
                            selection[s]->seg_id + "\"");
    }
    if (selection[s]->metric.name == evaluation[s]->metric.name) {
      throw ValidationError("evaluation metric '" + evaluation[s]->metric.name +
                            "' equals the selection metric");
    }
  }
  return curve_from_draws(draw_selections(selection, plan), evaluation);
}

std::vector<SelectionResult> selection_rows(const DrawTable& table,
                                            std::span<const ScoreSet* const> selection) {
  std::vector<SelectionResult> rows;
  for (std::size_t s = 0; s < table.seg_ids.size(); ++s) {
    for (std::size_t ni = 0; ni < table.schedule.size(); ++ni) {
      for (std::size_t d = 0; d < table.chosen[ni].size(); ++d) {
        const std::int64_t idx = table.chosen[ni][d][s];
        rows.push_back({table.seg_ids[s], table.schedule[ni], idx, selection[s]->at(idx),
                        static_cast<std::int64_t>(d)});
      }
    }
  }
  return rows;
}

std::string serialize_selections(const std::vector<SelectionResult>& rows) {
  std::string out;
  for (const auto& r : rows) {
    json rec = {{"seg_id", r.seg_id},
                {"n", r.n},
                {"draw_id", r.draw_id},
                {"chosen_idx", r.chosen_idx},
                {"sel_score", r.chosen_score}};
    out += dump_line(rec);
    out += '\n';
  }
  return out;
}

std::vector<SelectionResult> load_selections(const std::filesystem::path& path) {
  std::vector<SelectionResult> rows;
  for_each_jsonl(path, [&](std::size_t line_no, const json& rec) {
    const std::string where = path.string() + ":" + std::to_string(line_no);
    rows.push_back({get_string(rec, "seg_id", where), get_int(rec, "n", where),
                    get_int(rec, "chosen_idx", where), get_number(rec, "sel_score", where),
                    get_int(rec, "draw_id", where)});
  });
  return rows;
}

double log_binomial(std::int64_t n, std::int64_t k) {
  if (k < 0 || n < 0 || k > n) return -std::numeric_limits<double>::infinity();
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

std::vector<double> argmax_rank_probabilities(std::int64_t m, std::int64_t n) {
  if (n < 1 || n > m) {
    throw ValidationError("subset size " + std::to_string(n) + " not in [1, " +
                          std::to_string(m) + "]");
  }
  const double log_total = log_binomial(m, n);
  std::vector<double> p(static_cast<std::size_t>(m), 0.0);
  for (std::int64_t k = 1; k <= m - n + 1; ++k) {
    p[static_cast<std::size_t>(k - 1)] = std::exp(log_binomial(m - k, n - 1) - log_total);
  }
  return p;
}

double expected_bon_exact(const ScoreSet& selection, const ScoreSet& evaluation, std::int64_t n) {
  const auto m = static_cast<std::int64_t>(selection.size());
  if (evaluation.size() != selection.size()) {
    throw ValidationError("selection and evaluation pools differ in size");
  }
  if (n > m) {
    throw ValidationError("N=" + std::to_string(n) + " exceeds pool size " + std::to_string(m));
  }
  std::vector<std::int64_t> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::int64_t a, std::int64_t b) {
    return selection.oriented(a) > selection.oriented(b);
  });
  const auto p = argmax_rank_probabilities(m, n);
  double total = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (p[k] != 0.0) total += p[k] * evaluation.at(order[k]);
  }
  return total;
}

}  // namespace ttsmt

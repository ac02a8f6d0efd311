#include "ttsmt/scoring.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <mutex>

#include "ttsmt/error.hpp"

namespace ttsmt {

std::string_view to_string(MetricKind kind) {
  return kind == MetricKind::kQe ? "qe" : "ref_based";
}

void MetricId::validate() const {
  if (name.empty()) throw ValidationError("metric name is empty");
  if (has_role(MetricRole::kSelection) && kind != MetricKind::kQe) {
    throw ValidationError("selection metric '" + name + "' must be reference-free (qe)");
  }
  if (range && !(range->first < range->second)) {
    throw ValidationError("metric '" + name + "' has an empty range");
  }
}

const MetricCatalog& MetricCatalog::defaults() {
  static const MetricCatalog catalog = [] {
    MetricCatalog c;
    auto add = [&](std::string name, MetricKind kind, Orientation o = Orientation::kHigherBetter,
                   MetricLevel level = MetricLevel::kSegment) {
      MetricId m;
      m.name = std::move(name);
      m.kind = kind;
      m.orientation = o;
      m.level = level;
      c.set(std::move(m));
    };
    const auto qe = MetricKind::kQe;
    const auto ref = MetricKind::kRefBased;
    const auto lower = Orientation::kLowerBetter;
    add("kiwi22", qe);
    add("kiwi22-sim", qe);
    add("kiwi22-remote", qe);
    add("kiwi-xl", qe);
    add("cometkiwi", qe);
    add("metricx-qe", qe, lower);
    add("remedy-qe", qe);
    add("comet22", ref);
    add("xcomet", ref);
    add("xcomet-remote", ref);
    add("remedy", ref);
    add("metricx", ref, lower);
    add("metricx-remote", ref, lower);
    add("sim-oracle", ref);
    add("bleu", ref, Orientation::kHigherBetter, MetricLevel::kCorpus);
    add("chrf++", ref, Orientation::kHigherBetter, MetricLevel::kCorpus);
    return c;
  }();
  return catalog;
}

void MetricCatalog::set(MetricId metric) {
  std::string name = metric.name;
  entries_[name] = std::move(metric);
}

const MetricId* MetricCatalog::find(std::string_view name) const {
  auto it = entries_.find(name);
  return it == entries_.end() ? nullptr : &it->second;
}

MetricId MetricCatalog::resolve(std::string_view spec) const {
  auto parts = split(spec, ':');
  const std::string& name = parts.front();
  if (parts.size() == 1) {
    if (const MetricId* m = find(name)) return *m;
    throw ConfigError("unknown metric '" + name + "' (spell it name:qe or name:ref)");
  }
  MetricId m;
  if (const MetricId* known = find(name)) m = *known;
  m.name = name;
  if (parts[1] == "qe") {
    m.kind = MetricKind::kQe;
  } else if (parts[1] == "ref") {
    m.kind = MetricKind::kRefBased;
  } else {
    throw ConfigError("metric kind in '" + std::string(spec) + "' must be qe or ref");
  }
  if (parts.size() >= 3) {
    if (parts[2] == "lower") {
      m.orientation = Orientation::kLowerBetter;
    } else if (parts[2] == "higher") {
      m.orientation = Orientation::kHigherBetter;
    } else {
      throw ConfigError("orientation in '" + std::string(spec) + "' must be higher or lower");
    }
  }
  if (parts.size() > 3) throw ConfigError("malformed metric spec '" + std::string(spec) + "'");
  return m;
}

void NoiseModel::validate() const {
  if (target_correlation) {
    if (family != Family::kGaussian) {
      throw ValidationError("target_correlation applies to gaussian noise only");
    }
    if (sigma != 0.0) {
      throw ValidationError("noise model sets both sigma and target_correlation");
    }
    const double rho = *target_correlation;
    if (!(rho > 0.0 && rho <= 1.0)) {
      throw ValidationError("gaussian target_correlation must lie in (0, 1]");
    }
    return;
  }
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ValidationError("noise sigma must be >= 0");
  if (family == Family::kRankCorrupt && sigma > 1.0) {
    throw ValidationError("rank_corrupt probability must lie in [0, 1]");
  }
}

double NoiseModel::effective_sigma(double latent_std) const {
  if (!target_correlation) return sigma;
  const double rho = *target_correlation;
  return latent_std * std::sqrt(1.0 / (rho * rho) - 1.0);
}

std::optional<double> ScoreCache::lookup(const Key& key) const {
  std::shared_lock lock(mu_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void ScoreCache::store(const Key& key, double score) {
  std::unique_lock lock(mu_);
  entries_[key] = score;
}

std::size_t ScoreCache::size() const {
  std::shared_lock lock(mu_);
  return entries_.size();
}

ScoreCache ScoreCache::load(const std::filesystem::path& path) {
  ScoreCache cache;
  if (!std::filesystem::exists(path)) return cache;
  for_each_jsonl(path, [&](std::size_t line_no, const json& rec) {
    const std::string where = path.string() + ":" + std::to_string(line_no);
    Key key{get_string(rec, "metric", where), get_string(rec, "seg_id", where),
            get_int(rec, "cand_idx", where), get_string(rec, "text_hash", where)};
    cache.entries_[std::move(key)] = get_number(rec, "score", where);
  });
  return cache;
}

void ScoreCache::save(const std::filesystem::path& path) const {
  std::shared_lock lock(mu_);
  std::string out;
  for (const auto& [key, score] : entries_) {
    json rec = {{"metric", std::get<0>(key)},
                {"seg_id", std::get<1>(key)},
                {"cand_idx", std::get<2>(key)},
                {"text_hash", std::get<3>(key)},
                {"score", score}};
    out += dump_line(rec);
    out += '\n';
  }
  write_file_atomic(path, out);
}

ScoreCache::Key cache_key(const MetricId& metric, const Candidate& c) {
  return {metric.name, c.seg_id, c.cand_idx, text_hash(c.text)};
}

std::int64_t qe_token_length(std::string_view src, std::string_view hyp) {
  return count_tokens_approx(src) + count_tokens_approx(hyp);
}

ScoreSet score_pool(const CandidatePool& pool, const Segment& seg, const MetricId& metric,
                    Scorer& scorer, ScoreCache* cache) {
  metric.validate();
  if (pool.seg_id != seg.id) {
    throw ValidationError("pool \"" + pool.seg_id + "\" scored against segment \"" + seg.id + "\"");
  }
  const bool needs_refs = metric.kind == MetricKind::kRefBased;
  if (needs_refs && seg.refs.empty()) {
    throw ValidationError("reference-based metric '" + metric.name + "' on segment \"" + seg.id +
                          "\" which has no references");
  }

  ScoreSet out;
  out.seg_id = seg.id;
  out.metric = metric;
  out.scores.assign(pool.size(), 0.0);

  std::vector<ScoreItem> misses;
  std::vector<std::size_t> miss_slots;
  std::vector<ScoreCache::Key> miss_keys;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const Candidate& c = pool.candidates[i];
    if (c.cand_idx != static_cast<std::int64_t>(i)) {
      throw ValidationError("pool \"" + pool.seg_id + "\" is not indexed 0..n-1");
    }
    if (cache) {
      auto key = cache_key(metric, c);
      if (auto hit = cache->lookup(key)) {
        out.scores[i] = *hit;
        continue;
      }
      miss_keys.push_back(std::move(key));
    }
    ScoreItem item;
    item.seg_id = c.seg_id;
    item.cand_idx = c.cand_idx;
    item.src = seg.src;
    item.hyp = c.text;
    item.refs = needs_refs ? &seg.refs : nullptr;
    item.latent_quality = c.latent_quality;
    misses.push_back(item);
    miss_slots.push_back(i);
  }

  if (!misses.empty()) {
    std::vector<double> fresh = scorer.score(metric, misses);
    if (fresh.size() != misses.size()) {
      throw BackendError("scorer '" + scorer.id() + "' returned " + std::to_string(fresh.size()) +
                         " scores for " + std::to_string(misses.size()) + " items");
    }
    for (std::size_t k = 0; k < fresh.size(); ++k) {
      const double s = fresh[k];
      const std::size_t slot = miss_slots[k];
      if (!std::isfinite(s)) {
        throw ValidationError("scorer '" + scorer.id() + "' returned a non-finite score for " +
                              seg.id + "#" + std::to_string(slot));
      }
      if (metric.range && (s < metric.range->first || s > metric.range->second)) {
        throw ValidationError("score " + format_double(s) + " for " + seg.id + "#" +
                              std::to_string(slot) + " is outside the declared range of '" +
                              metric.name + "'");
      }
      out.scores[slot] = s;
      if (cache) cache->store(miss_keys[k], s);
    }
  }
  return out;
}

std::string serialize_scores(const std::vector<ScoreSet>& sets) {
  std::string out;
  for (const auto& set : sets) {
    for (std::size_t i = 0; i < set.scores.size(); ++i) {
      json rec = {{"seg_id", set.seg_id},
                  {"cand_idx", static_cast<std::int64_t>(i)},
                  {"metric", set.metric.name},
                  {"score", set.scores[i]}};
      out += dump_line(rec);
      out += '\n';
    }
  }
  return out;
}

std::vector<ScoreSet> load_scores(const std::filesystem::path& path, const MetricCatalog& catalog) {
  std::vector<ScoreSet> sets;
  std::vector<std::map<std::int64_t, double>> partial;
  std::map<std::pair<std::string, std::string>, std::size_t> index;
  for_each_jsonl(path, [&](std::size_t line_no, const json& rec) {
    const std::string where = path.string() + ":" + std::to_string(line_no);
    std::string seg_id = get_string(rec, "seg_id", where);
    const std::int64_t idx = get_int(rec, "cand_idx", where);
    std::string metric = get_string(rec, "metric", where);
    const double score = get_number(rec, "score", where);
    if (idx < 0) throw ValidationError(where + ": negative cand_idx");
    auto [it, inserted] = index.emplace(std::make_pair(metric, seg_id), sets.size());
    if (inserted) {
      ScoreSet s;
      s.seg_id = seg_id;
      if (const MetricId* known = catalog.find(metric)) {
        s.metric = *known;
      } else {
        s.metric.name = metric;
      }
      sets.push_back(std::move(s));
      partial.emplace_back();
    }
    if (!partial[it->second].emplace(idx, score).second) {
      throw ValidationError(where + ": duplicate score for " + seg_id + "#" + std::to_string(idx) +
                            " under '" + metric + "'");
    }
  });
  for (std::size_t i = 0; i < sets.size(); ++i) {
    const auto& m = partial[i];
    if (m.rbegin()->first != static_cast<std::int64_t>(m.size()) - 1) {
      throw ValidationError(path.string() + ": incomplete scores for segment \"" + sets[i].seg_id +
                            "\" under '" + sets[i].metric.name + "'");
    }
    for (const auto& [idx, score] : m) sets[i].scores.push_back(score);
  }
  return sets;
}

ScoreTable::ScoreTable(std::vector<ScoreSet> sets) {
  for (auto& s : sets) put(std::move(s));
}

void ScoreTable::put(ScoreSet set) {
  auto key = std::make_pair(set.metric.name, set.seg_id);
  auto it = index_.find(key);
  if (it != index_.end()) {
    sets_[it->second] = std::move(set);
    return;
  }
  index_.emplace(std::move(key), sets_.size());
  sets_.push_back(std::move(set));
}

const ScoreSet* ScoreTable::find(std::string_view metric, std::string_view seg_id) const {
  auto it = index_.find({std::string(metric), std::string(seg_id)});
  return it == index_.end() ? nullptr : &sets_[it->second];
}

const ScoreSet& ScoreTable::at(std::string_view metric, std::string_view seg_id) const {
  const ScoreSet* s = find(metric, seg_id);
  if (!s) {
    throw ValidationError("no '" + std::string(metric) + "' scores for segment \"" +
                          std::string(seg_id) + "\"");
  }
  return *s;
}

std::vector<std::string> ScoreTable::metric_names() const {
  std::vector<std::string> names;
  for (const auto& s : sets_) {
    if (std::find(names.begin(), names.end(), s.metric.name) == names.end()) {
      names.push_back(s.metric.name);
    }
  }
  return names;
}

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::optional<std::string> family_of(std::string_view name, const std::vector<std::string>& prefixes) {
  const std::string n = lower(name);
  std::optional<std::string> best;
  for (const auto& p : prefixes) {
    const std::string lp = lower(p);
    if (!lp.empty() && n.rfind(lp, 0) == 0 && (!best || lp.size() > best->size())) best = lp;
  }
  return best;
}

}  // namespace

InterferencePlan interference_guard(const MetricId& selection,
                                    const std::vector<MetricId>& evaluation,
                                    const GuardOptions& options) {
  InterferencePlan plan;
  plan.selection = selection.with_role(MetricRole::kSelection);
  plan.selection.validate();
  const auto sel_family = family_of(selection.name, options.family_prefixes);
  for (const auto& e : evaluation) {
    if (e.name == selection.name) {
      if (!options.allow_identity) {
        throw ValidationError("evaluation metric '" + e.name +
                              "' is the selection metric; scores would be inflated");
      }
      plan.warnings.push_back("evaluating with the selection metric '" + e.name +
                              "' (override set)");
    } else if (sel_family && family_of(e.name, options.family_prefixes) == sel_family) {
      plan.warnings.push_back("evaluation metric '" + e.name + "' shares the '" + *sel_family +
                              "' family with selection metric '" + selection.name + "'");
    }
    plan.evaluation.push_back(e.with_role(MetricRole::kEvaluation));
  }
  return plan;
}

}  // namespace ttsmt

#include "ttsmt_cli/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "default_registry.hpp"
#include "ttsmt/analysis.hpp"
#include "ttsmt/codeswitch.hpp"
#include "ttsmt/compute.hpp"
#include "ttsmt/corpus.hpp"
#include "ttsmt/error.hpp"
#include "ttsmt/generation.hpp"
#include "ttsmt/http_backend.hpp"
#include "ttsmt/io.hpp"
#include "ttsmt/parallel.hpp"
#include "ttsmt/registry.hpp"
#include "ttsmt/remote_scorer.hpp"
#include "ttsmt/scoring.hpp"
#include "ttsmt/selection.hpp"
#include "ttsmt/sim_scorer.hpp"
#include "ttsmt/simulator.hpp"
#include "ttsmt/textmetrics.hpp"
#include "ttsmt/toml_lite.hpp"

namespace fs = std::filesystem;

namespace ttsmt::cli {

namespace {

struct Globals {
  std::string config;
  std::uint64_t seed = 0;
  std::string out = ".";
  int verbosity = 0;
  std::size_t jobs = 0;
};

/// Everything a command needs after global flags and the config file are read.
class Context {
 public:
  Context(const Globals& g, std::ostream& out, std::ostream& err) : g_(g), out_(out), err_(err) {
    languages_ = LanguageTable::defaults();
    if (!g.config.empty()) {
      doc_ = load_toml(g.config);
      for (const auto& [code, t] : doc_.subtables("languages")) {
        LanguageInfo info;
        info.code = code;
        if (!is_valid_language_code(code)) {
          throw ConfigError(t->where() + ": invalid language code '" + code + "'");
        }
        const LanguageInfo* base = languages_.find(code);
        info.name = t->get_string("name").value_or(base ? base->name : "");
        if (info.name.empty()) throw ConfigError(t->where() + ": language '" + code + "' needs a name");
        info.scripts = t->get_string_list("scripts").value_or(
            base ? base->scripts : std::vector<std::string>{"Latin"});
        languages_.set(std::move(info));
      }
    }
  }

  const Globals& globals() const { return g_; }
  std::ostream& out() { return out_; }
  const LanguageTable& languages() const { return languages_; }

  const TomlTable* section(const std::string& name) const { return doc_.table(name); }

  std::string config_string(const std::string& table, const std::string& key,
                            const std::string& fallback) const {
    if (const TomlTable* t = section(table)) return t->get_string(key).value_or(fallback);
    return fallback;
  }
  double config_double(const std::string& table, const std::string& key, double fallback) const {
    if (const TomlTable* t = section(table)) return t->get_double(key).value_or(fallback);
    return fallback;
  }
  std::int64_t config_int(const std::string& table, const std::string& key,
                          std::int64_t fallback) const {
    if (const TomlTable* t = section(table)) return t->get_int(key).value_or(fallback);
    return fallback;
  }
  bool config_bool(const std::string& table, const std::string& key, bool fallback) const {
    if (const TomlTable* t = section(table)) return t->get_bool(key).value_or(fallback);
    return fallback;
  }
  std::vector<std::string> config_list(const std::string& table, const std::string& key,
                                       std::vector<std::string> fallback) const {
    if (const TomlTable* t = section(table)) return t->get_string_list(key).value_or(fallback);
    return fallback;
  }

  /// A path from the config is relative to the config file.
  fs::path config_path(const std::string& table, const std::string& key) const {
    const std::string p = config_string(table, key, "");
    if (p.empty()) return {};
    fs::path path(p);
    if (path.is_relative() && !g_.config.empty()) path = fs::path(g_.config).parent_path() / path;
    return path;
  }

  fs::path out_path(const std::string& name) const { return fs::path(g_.out) / name; }
  fs::path in_path(const std::string& flag, const std::string& default_name) const {
    return flag.empty() ? out_path(default_name) : fs::path(flag);
  }

  void info(const std::string& msg) {
    if (g_.verbosity > 0) err_ << "ttsmt: " << msg << '\n';
  }
  void warn(const std::string& msg) { err_ << "ttsmt: warning: " << msg << '\n'; }

  ModelRegistry registry(const std::string& flag) const {
    if (!flag.empty()) return load_registry(flag);
    const fs::path from_config = config_path("paths", "registry");
    if (!from_config.empty()) return load_registry(from_config);
    return parse_registry(kDefaultRegistry, "<builtin models>");
  }

 private:
  Globals g_;
  std::ostream& out_;
  std::ostream& err_;
  TomlDocument doc_;
  LanguageTable languages_;
};

void write_output(Context& ctx, const fs::path& path, std::string_view content) {
  write_file_atomic(path, content);
  ctx.info("wrote " + path.string());
}

std::vector<std::int64_t> parse_schedule(const std::string& text, std::int64_t pool_size) {
  if (text.empty()) return power_of_two_schedule(pool_size);
  if (text.starts_with("pow2:")) {
    const auto max = parse_schedule(text.substr(5), pool_size);
    if (max.size() != 1) throw ValidationError("pow2:<max> takes one bound");
    return power_of_two_schedule(max.front());
  }
  std::vector<std::int64_t> out;
  for (const auto& piece : split(text, ',')) {
    std::size_t used = 0;
    std::int64_t v = 0;
    try {
      v = std::stoll(piece, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (piece.empty() || used != piece.size() || v < 1) {
      throw ValidationError("bad schedule entry '" + piece + "' (expected positive integers)");
    }
    out.push_back(v);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::int64_t min_pool_size(const std::vector<CandidatePool>& pools) {
  std::int64_t m = 0;
  for (const auto& p : pools) {
    const auto s = static_cast<std::int64_t>(p.size());
    m = m == 0 ? s : std::min(m, s);
  }
  return m;
}

std::int64_t min_set_size(const std::vector<const ScoreSet*>& sets) {
  std::int64_t m = 0;
  for (const ScoreSet* s : sets) {
    const auto n = static_cast<std::int64_t>(s->size());
    m = m == 0 ? n : std::min(m, n);
  }
  return m;
}

NoiseModel make_noise(const std::string& family, double sigma, double target_corr) {
  NoiseModel n;
  if (family == "none") {
    n = NoiseModel::none();
  } else if (family == "gaussian") {
    n = target_corr > 0.0 ? NoiseModel::correlated(target_corr) : NoiseModel::gaussian(sigma);
  } else if (family == "rank_corrupt") {
    n = NoiseModel::rank_corrupt(sigma);
  } else {
    throw ConfigError("unknown noise family '" + family + "' (none, gaussian, rank_corrupt)");
  }
  n.validate();
  return n;
}

QualityLaw make_law(const std::string& family, double a, double b, double codeswitch_rate) {
  QualityLaw law;
  if (family == "uniform") {
    law = QualityLaw::uniform(a, b);
  } else if (family == "beta") {
    law = QualityLaw::beta(a, b);
  } else {
    throw ConfigError("unknown quality law '" + family + "' (uniform, beta)");
  }
  law.codeswitch_rate = codeswitch_rate;
  law.validate();
  return law;
}

MetricId resolve_metric(const std::string& name, MetricRole role) {
  MetricId m = MetricCatalog::defaults().resolve(name).with_role(role);
  m.validate();
  return m;
}

void check_pair_filter(const std::string& pair, std::optional<LangPair>& out) {
  if (!pair.empty()) out = LangPair::parse(pair);
}

// gen ------------------------------------------------------------------------

struct GenOptions {
  std::string dataset;
  std::string backend;
  std::int64_t n = 1;
  double temperature = 1.0;
  double top_p = 0.95;
  std::int64_t max_new_tokens = 1024;
  std::string pair;
  std::string law = "uniform";
  double law_a = 0.0;
  double law_b = 1.0;
  double codeswitch_rate = 0.0;
  bool literal_template = false;
  std::string base_url;
  std::string model_name;
};

int cmd_gen(Context& ctx, const GenOptions& o) {
  Dataset ds = load_dataset(o.dataset, ctx.languages());
  std::optional<LangPair> pair;
  check_pair_filter(o.pair, pair);
  if (pair) ds = filter_pair(ds, *pair);
  DecodeConfig cfg{o.temperature, o.top_p, o.n, o.max_new_tokens, ctx.globals().seed};
  cfg.validate();

  const std::string backend_kind =
      o.backend.empty() ? ctx.config_string("backend", "kind", "sim") : o.backend;
  std::unique_ptr<GenerationBackend> backend;
  if (backend_kind == "sim") {
    backend = std::make_unique<SimulatorBackend>(make_law(o.law, o.law_a, o.law_b, o.codeswitch_rate));
  } else if (backend_kind == "http") {
    HttpBackendConfig hc;
    hc.base_url = o.base_url.empty() ? ctx.config_string("backend", "base_url", hc.base_url) : o.base_url;
    hc.model = o.model_name.empty() ? ctx.config_string("backend", "model", "") : o.model_name;
    if (hc.model.empty()) throw ConfigError("http backend needs a model name (--model-name)");
    hc.api_key_env = ctx.config_string("backend", "api_key_env", hc.api_key_env);
    hc.supports_n = ctx.config_bool("backend", "supports_n", hc.supports_n);
    hc.max_n_per_request = ctx.config_int("backend", "max_n_per_request", hc.max_n_per_request);
    hc.max_in_flight = static_cast<int>(ctx.config_int("backend", "max_in_flight", hc.max_in_flight));
    hc.timeout = std::chrono::seconds(ctx.config_int("backend", "timeout_s", hc.timeout.count()));
    hc.retry.max_retries = static_cast<int>(ctx.config_int("backend", "max_retries", hc.retry.max_retries));
    backend = std::make_unique<HttpBackend>(hc);
  } else {
    throw ConfigError("unknown backend '" + backend_kind + "' (sim, http)");
  }
  PromptOptions prompt_opts;
  prompt_opts.literal_assistant_source =
      o.literal_template || ctx.config_bool("prompt", "literal_template", false);

  const fs::path path = ctx.out_path("candidates.jsonl");
  std::vector<CandidatePool> existing;
  if (fs::exists(path)) existing = load_pools(path);
  std::vector<const Segment*> todo;
  for (const auto& seg : ds.segments()) {
    const CandidatePool* have = find_pool(existing, seg.id);
    if (!have) {
      todo.push_back(&seg);
    } else if (static_cast<std::int64_t>(have->size()) != o.n) {
      throw ValidationError(path.string() + " already holds " + std::to_string(have->size()) +
                            " candidates for \"" + seg.id + "\", not " + std::to_string(o.n) +
                            "; use a fresh --out directory");
    }
  }
  if (todo.empty()) {
    ctx.info("all " + std::to_string(ds.size()) + " pools present in " + path.string());
    return kExitOk;
  }
  std::vector<CandidatePool> fresh(todo.size());
  auto make = [&](std::size_t i) {
    fresh[i] = generate_pool(*todo[i], cfg, *backend, ctx.languages(), prompt_opts);
  };
  if (backend_kind == "sim") {
    parallel_for(todo.size(), make);
  } else {
    for (std::size_t i = 0; i < todo.size(); ++i) make(i);
  }
  std::size_t truncated = 0;
  for (const auto& p : fresh) truncated += p.truncated_count();
  if (truncated > 0) ctx.warn(std::to_string(truncated) + " candidates hit max_new_tokens");
  existing.insert(existing.end(), std::make_move_iterator(fresh.begin()),
                  std::make_move_iterator(fresh.end()));
  write_output(ctx, path, serialize_pools(existing));
  ctx.info("generated " + std::to_string(todo.size()) + " pools");
  return kExitOk;
}

// score ----------------------------------------------------------------------

struct ScoreOptions {
  std::string dataset;
  std::string candidates;
  std::vector<std::string> metrics;
  std::string scorer = "auto";
  std::string noise = "none";
  double sigma = 0.0;
  double target_corr = 0.0;
  std::string url;
  std::size_t batch_size = 64;
  bool no_cache = false;
};

std::string scorer_kind_for(const std::string& requested, const std::string& metric) {
  if (requested != "auto") return requested;
  if (metric == "sim-oracle" || metric.ends_with("-sim")) return "sim";
  if (metric.ends_with("-remote")) return "remote";
  throw ConfigError("no scorer known for metric '" + metric + "'; pass --scorer sim|remote");
}

int cmd_score(Context& ctx, const ScoreOptions& o) {
  const Dataset ds = load_dataset(o.dataset, ctx.languages());
  const std::vector<CandidatePool> pools = load_pools(ctx.in_path(o.candidates, "candidates.jsonl"));
  std::vector<std::string> names = o.metrics;
  if (names.empty()) {
    names.push_back(ctx.config_string("plan", "selection", "kiwi22-sim"));
  }
  const fs::path cache_path = ctx.out_path("score_cache.jsonl");
  ScoreCache cache = o.no_cache ? ScoreCache{} : ScoreCache::load(cache_path);

  std::vector<ScoreSet> produced;
  std::set<std::string> scored_names;
  for (const auto& name : names) {
    MetricId metric = MetricCatalog::defaults().resolve(name);
    if (metric.level == MetricLevel::kCorpus) {
      throw ValidationError("'" + metric.name +
                            "' is a corpus metric; curve and report compute it from selections");
    }
    if (!scored_names.insert(metric.name).second) continue;
    const std::string kind = scorer_kind_for(o.scorer, metric.name);
    std::unique_ptr<Scorer> scorer;
    if (kind == "sim") {
      const NoiseModel noise = metric.name == "sim-oracle" ? NoiseModel::none()
                                                           : make_noise(o.noise, o.sigma, o.target_corr);
      scorer = std::make_unique<SimulatedScorer>(noise, ctx.globals().seed);
    } else if (kind == "remote") {
      RemoteScorerConfig rc;
      rc.url = o.url.empty() ? ctx.config_string("scorer", "url", rc.url) : o.url;
      rc.batch_size = o.batch_size;
      rc.max_concurrent = static_cast<int>(ctx.config_int("scorer", "max_concurrent", rc.max_concurrent));
      scorer = std::make_unique<RemoteScorer>(rc);
    } else {
      throw ConfigError("unknown scorer '" + kind + "' (auto, sim, remote)");
    }
    for (const auto& pool : pools) {
      const Segment* seg = ds.find(pool.seg_id);
      if (!seg) throw ValidationError("candidates for \"" + pool.seg_id + "\" not in the dataset");
      produced.push_back(score_pool(pool, *seg, metric, *scorer, o.no_cache ? nullptr : &cache));
    }
    ctx.info("scored " + std::to_string(pools.size()) + " pools with " + metric.name);
  }

  const fs::path path = ctx.out_path("scores.jsonl");
  std::vector<ScoreSet> merged;
  if (fs::exists(path)) {
    for (auto& set : load_scores(path)) {
      if (!scored_names.count(set.metric.name)) merged.push_back(std::move(set));
    }
  }
  merged.insert(merged.end(), std::make_move_iterator(produced.begin()),
                std::make_move_iterator(produced.end()));
  write_output(ctx, path, serialize_scores(merged));
  if (!o.no_cache) cache.save(cache_path);
  return kExitOk;
}

// select ---------------------------------------------------------------------

struct SelectOptions {
  std::string scores;
  std::string candidates;
  std::string dataset;
  std::string metric;
  std::string schedule;
  std::int64_t draws = 5;
  bool disjoint = false;
  bool filter_codeswitch = false;
  double threshold = kDefaultCodeSwitchThreshold;
};

int cmd_select(Context& ctx, const SelectOptions& o) {
  const ScoreTable table(load_scores(ctx.in_path(o.scores, "scores.jsonl")));
  const std::string metric_name =
      o.metric.empty() ? ctx.config_string("plan", "selection", "kiwi22-sim") : o.metric;
  const MetricId metric = resolve_metric(metric_name, MetricRole::kSelection);
  std::vector<const ScoreSet*> sel;
  for (const auto& set : table.sets()) {
    if (set.metric.name == metric.name) sel.push_back(&set);
  }
  if (sel.empty()) throw ValidationError("no scores for selection metric '" + metric.name + "'");

  const DrawPlan plan{parse_schedule(o.schedule, min_set_size(sel)), o.draws, ctx.globals().seed,
                      o.disjoint};
  const DrawTable draws = draw_selections(sel, plan);
  write_output(ctx, ctx.out_path("selections.jsonl"), serialize_selections(selection_rows(draws, sel)));

  const fs::path cand_path = ctx.in_path(o.candidates, "candidates.jsonl");
  if (!o.candidates.empty() || fs::exists(cand_path)) {
    const auto pools = load_pools(cand_path);
    std::optional<Dataset> ds;
    if (o.filter_codeswitch) {
      if (o.dataset.empty()) throw ValidationError("--filter-codeswitch needs --dataset");
      ds = load_dataset(o.dataset, ctx.languages());
      ctx.warn("code-switch filtering is experimental");
    }
    std::string final_out;
    for (const ScoreSet* s : sel) {
      const CandidatePool* pool = find_pool(pools, s->seg_id);
      if (!pool) throw ValidationError("no candidates for scored segment \"" + s->seg_id + "\"");
      std::vector<bool> excluded(pool->size(), false);
      if (ds) {
        const std::string& tgt = ds->at(s->seg_id).pair.tgt;
        for (std::size_t i = 0; i < pool->size(); ++i) {
          excluded[i] = detect(pool->candidates[i].text, tgt, o.threshold, ctx.languages()).flagged;
        }
      }
      const Candidate& c = select_final(*pool, *s, excluded);
      final_out += dump_line({{"seg_id", c.seg_id},
                              {"cand_idx", c.cand_idx},
                              {"score", s->at(c.cand_idx)},
                              {"text", c.text}});
      final_out += '\n';
    }
    write_output(ctx, ctx.out_path("final.jsonl"), final_out);
  }
  return kExitOk;
}

// curve / report -------------------------------------------------------------

struct ReportOptions {
  std::string dataset;
  std::string candidates;
  std::string scores;
  std::string registry;
  std::string model;
  std::string qe = "kiwi22";
  std::string select;
  std::vector<std::string> eval;
  std::string schedule;
  std::int64_t draws = 5;
  std::string pair;
  bool allow_identity = false;
  bool disjoint = false;
  double threshold = kDefaultCodeSwitchThreshold;
  std::vector<std::string> include;
  bool average = false;
};

ScalingReport assemble_report(Context& ctx, const ReportOptions& o) {
  const Dataset ds = load_dataset(o.dataset, ctx.languages());
  const auto pools = load_pools(ctx.in_path(o.candidates, "candidates.jsonl"));
  const ScoreTable scores(load_scores(ctx.in_path(o.scores, "scores.jsonl")));
  const ModelRegistry registry = ctx.registry(o.registry);

  RunManifest base;
  base.model = o.model.empty() ? ctx.config_string("plan", "model", "") : o.model;
  if (base.model.empty()) throw ValidationError("--model is required");
  base.qe_model = o.qe;
  base.draws = o.draws;
  base.seed = ctx.globals().seed;
  base.disjoint_draws = o.disjoint;
  base.codeswitch_threshold = o.threshold;
  base.guard.allow_identity = o.allow_identity;
  base.guard.family_prefixes = ctx.config_list("plan", "family_prefixes", base.guard.family_prefixes);
  base.selection_metric = resolve_metric(
      o.select.empty() ? ctx.config_string("plan", "selection", "kiwi22-sim") : o.select,
      MetricRole::kSelection);
  const auto eval_names =
      o.eval.empty() ? ctx.config_list("plan", "evaluation", {"bleu", "chrf++"}) : o.eval;
  for (const auto& e : eval_names) base.eval_metrics.push_back(resolve_metric(e, MetricRole::kEvaluation));

  std::vector<LangPair> pairs;
  if (!o.pair.empty()) {
    pairs.push_back(LangPair::parse(o.pair));
  } else {
    std::set<LangPair> seen;
    for (const auto& seg : ds.segments()) {
      if (seen.insert(seg.pair).second && find_pool(pools, seg.id)) pairs.push_back(seg.pair);
    }
  }
  if (pairs.empty()) throw ValidationError("no language pair has candidate pools");

  std::vector<ScalingReport> parts;
  for (const auto& pair : pairs) {
    RunManifest m = base;
    m.pair = pair;
    std::vector<CandidatePool> pair_pools;
    for (const auto& seg : filter_pair(ds, pair).segments()) {
      if (const CandidatePool* p = find_pool(pools, seg.id)) pair_pools.push_back(*p);
    }
    m.schedule = parse_schedule(o.schedule, min_pool_size(pair_pools));
    ScalingReport r = build_report(m, ds, pools, scores, registry, ctx.languages());
    for (const auto& w : r.warnings) ctx.warn(w);
    parts.push_back(std::move(r));
  }
  for (const auto& inc : o.include) parts.push_back(load_report_any(inc));
  ScalingReport merged = merge_reports(parts);
  if (o.average && pairs.size() > 1) {
    for (auto& c : average_over_pairs(merged.curves)) merged.curves.push_back(std::move(c));
  }
  return merged;
}

int cmd_curve(Context& ctx, const ReportOptions& o) {
  const ScalingReport r = assemble_report(ctx, o);
  write_output(ctx, ctx.out_path("curve.csv"), render_curve_csv(r));
  return kExitOk;
}

int cmd_report(Context& ctx, const ReportOptions& o) {
  const ScalingReport r = assemble_report(ctx, o);
  write_output(ctx, ctx.out_path("report.json"), serialize_report(r));
  write_output(ctx, ctx.out_path("curve.csv"), render_curve_csv(r));
  for (const auto& x : r.crossovers) {
    ctx.out() << "crossover " << x.model << " reaches " << x.baseline << " N=1 " << x.metric
              << " on " << x.pair << " at N=" << x.n << '\n';
  }
  return kExitOk;
}

// flops / mem ----------------------------------------------------------------

struct FlopsOptions {
  std::string registry;
  std::string model;
  std::string qe = "none";
  double p = 0.0;
  double t = 0.0;
  double s_qe = 0.0;
  std::vector<std::int64_t> n = {1};
  std::string dataset;
  std::string candidates;
  std::string csv;
};

int cmd_flops(Context& ctx, const FlopsOptions& o) {
  const ModelRegistry registry = ctx.registry(o.registry);
  const ModelSpec& gen = registry.at(o.model);
  const ModelSpec* qe = o.qe == "none" ? nullptr : &registry.at(o.qe);
  UsageProfile usage;
  if (!o.candidates.empty()) {
    if (o.dataset.empty()) throw ValidationError("--candidates needs --dataset to measure QE lengths");
    usage = measure_usage(load_pools(o.candidates), load_dataset(o.dataset, ctx.languages()));
  } else {
    usage.prompt_tokens = o.p;
    usage.gen_tokens = o.t;
    usage.qe_tokens = o.s_qe;
  }
  std::vector<FlopsRow> rows;
  for (std::int64_t n : o.n) {
    if (n < 0) throw ValidationError("--n must be >= 0");
    const UsageProfile u = usage.with_n(n);
    const ComputeLedger ledger = total_cost(gen, qe, u);
    rows.push_back(flops_row(gen, qe, u));
    ctx.out() << "n " << n << '\n'
              << "c_gen " << format_double(ledger.c_gen) << '\n'
              << "c_qe " << format_double(ledger.c_qe) << '\n'
              << "c_total " << format_double(ledger.c_total) << '\n'
              << "c_total_tflops " << format_double(ledger.total_tflops()) << '\n';
  }
  if (!o.csv.empty()) write_output(ctx, o.csv, render_flops_csv(rows));
  return kExitOk;
}

struct MemOptions {
  std::string registry;
  std::string model;
  double bytes_per_param = 2.0;
  std::int64_t params = -1;
  bool derive = false;
};

int cmd_mem(Context& ctx, const MemOptions& o) {
  ModelSpec spec;
  if (!o.model.empty()) {
    spec = ctx.registry(o.registry).at(o.model);
  } else {
    spec.name = "custom";
    spec.layers = 0;
    spec.hidden = 1;
    spec.mlp = 1;
  }
  if (o.params >= 0) spec.total_params = o.params;
  const MemoryEstimate est = memory_estimate(spec, o.bytes_per_param, o.derive);
  ctx.out() << "model " << spec.name << '\n'
            << "params " << format_double(est.params) << '\n'
            << "bytes " << format_double(est.bytes) << '\n'
            << "gb " << format_double(est.gigabytes()) << '\n'
            << "label " << est.label << '\n'
            << "convention " << est.convention << '\n';
  return kExitOk;
}

// detect-cs ------------------------------------------------------------------

struct DetectOptions {
  std::string dataset;
  std::string candidates;
  std::string text;
  std::string tgt;
  double threshold = kDefaultCodeSwitchThreshold;
};

int cmd_detect(Context& ctx, const DetectOptions& o) {
  const double threshold = ctx.config_double("codeswitch", "threshold", o.threshold);
  if (!o.text.empty()) {
    if (o.tgt.empty()) throw ValidationError("--text needs --tgt");
    const auto v = detect(o.text, o.tgt, threshold, ctx.languages());
    json rec = {{"flagged", v.flagged},
                {"foreign_ratio", v.foreign_ratio},
                {"dominant_foreign_script", nullptr},
                {"threshold", v.threshold}};
    if (v.dominant_foreign_script) rec["dominant_foreign_script"] = *v.dominant_foreign_script;
    ctx.out() << dump_line(rec) << '\n';
    return kExitOk;
  }
  if (o.dataset.empty()) throw ValidationError("detect-cs needs --dataset (or --text)");
  const Dataset ds = load_dataset(o.dataset, ctx.languages());
  const auto pools = load_pools(ctx.in_path(o.candidates, "candidates.jsonl"));
  const auto records = detect_pools(pools, ds, threshold, ctx.languages());
  write_output(ctx, ctx.out_path("codeswitch.jsonl"), serialize_codeswitch(records));
  std::size_t flagged = 0;
  for (const auto& r : records) flagged += r.verdict.flagged ? 1 : 0;
  ctx.out() << "candidates " << records.size() << '\n'
            << "flagged " << flagged << '\n'
            << "rate "
            << format_double(records.empty() ? 0.0
                                             : static_cast<double>(flagged) /
                                                   static_cast<double>(records.size()))
            << '\n';
  return kExitOk;
}

// simulate -------------------------------------------------------------------

struct SimulateOptions {
  std::string law = "uniform";
  double law_a = 0.0;
  double law_b = 1.0;
  std::string noise = "none";
  double sigma = 0.0;
  double target_corr = 0.0;
  std::vector<std::string> modes = {"same", "independent"};
  std::string schedule = "1,2,4,8,16,32";
  std::int64_t trials = 10000;
  std::int64_t pool_size = 0;
};

int cmd_simulate(Context& ctx, const SimulateOptions& o) {
  InterferenceConfig cfg;
  cfg.law = make_law(o.law, o.law_a, o.law_b, 0.0);
  cfg.selection_noise = make_noise(o.noise, o.sigma, o.target_corr);
  cfg.modes.clear();
  for (const auto& m : o.modes) cfg.modes.push_back(EvalMode::parse(m));
  cfg.schedule = parse_schedule(o.schedule, 1024);
  cfg.trials = o.trials;
  cfg.pool_size = o.pool_size;
  cfg.seed = ctx.globals().seed;
  const std::string csv = render_interference_csv(interference_study(cfg));
  write_output(ctx, ctx.out_path("interference.csv"), csv);
  ctx.out() << csv;
  return kExitOk;
}

// ingest / diff --------------------------------------------------------------

struct IngestOptions {
  std::string results;
  std::int64_t from = 1;
  std::int64_t to = 0;
  std::string export_path;
};

int cmd_ingest(Context& ctx, const IngestOptions& o) {
  const ResultsTable table = ingest_results(o.results);
  std::int64_t to = o.to;
  if (to == 0) {
    for (const auto& c : table.report.curves) {
      for (const auto& r : c.rows) to = std::max(to, r.n);
    }
  }
  ctx.out() << render_deltas(compute_deltas(table.report, o.from, to));
  if (!o.export_path.empty()) write_output(ctx, o.export_path, export_results(table));
  return kExitOk;
}

struct DiffOptions {
  std::string ours;
  std::string theirs;
  double tolerance = 0.0;
  bool fail_on_diff = false;
};

int cmd_diff(Context& ctx, const DiffOptions& o) {
  const auto lines = diff_reports(load_report_any(o.ours), load_report_any(o.theirs), o.tolerance);
  ctx.out() << render_diff(lines);
  return lines.empty() || !o.fail_on_diff ? kExitOk : kExitDiff;
}

std::string_view error_class(const Error& e) { return to_string(e.kind()); }

int exit_code_for(ErrorKind kind) {
  return kind == ErrorKind::kBackend ? kExitBackend : kExitValidation;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Test-time scaling harness for machine translation", "ttsmt"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--config", g.config, "TOML config file (backends, registry path, plan)");
  app.add_option("--seed", g.seed, "Seed for every random stream");
  app.add_option("--out", g.out, "Output directory");
  app.add_flag("-v,--verbose", g.verbosity, "Log progress to stderr (repeatable)");
  app.add_option("--jobs", g.jobs, "Worker thread cap (0: all cores)");

  GenOptions gen;
  auto* c_gen = app.add_subcommand("gen", "Generate candidate pools (candidates.jsonl)");
  c_gen->add_option("--dataset", gen.dataset, "segments.jsonl")->required();
  c_gen->add_option("--backend", gen.backend, "sim or http (default: config, else sim)");
  c_gen->add_option("--n", gen.n, "Candidates per segment");
  c_gen->add_option("--temperature", gen.temperature, "Sampling temperature");
  c_gen->add_option("--top-p", gen.top_p, "Nucleus sampling mass");
  c_gen->add_option("--max-new-tokens", gen.max_new_tokens, "Generation length cap");
  c_gen->add_option("--pair", gen.pair, "Only segments of this pair, e.g. en-is");
  c_gen->add_option("--law", gen.law, "Simulator quality law: uniform or beta");
  c_gen->add_option("--law-a", gen.law_a, "Uniform lower bound or beta alpha");
  c_gen->add_option("--law-b", gen.law_b, "Uniform upper bound or beta beta");
  c_gen->add_option("--codeswitch-rate", gen.codeswitch_rate, "Simulator code-switch injection rate");
  c_gen->add_flag("--literal-template", gen.literal_template,
                  "Send the source in an assistant turn, as the published template does");
  c_gen->add_option("--base-url", gen.base_url, "http backend base URL");
  c_gen->add_option("--model-name", gen.model_name, "http backend model name");

  ScoreOptions score;
  auto* c_score = app.add_subcommand("score", "Score candidates (scores.jsonl)");
  c_score->add_option("--dataset", score.dataset, "segments.jsonl")->required();
  c_score->add_option("--candidates", score.candidates, "candidates.jsonl (default: <out>/candidates.jsonl)");
  c_score->add_option("--metric", score.metrics, "Metric to score (repeatable)");
  c_score->add_option("--scorer", score.scorer, "auto, sim or remote");
  c_score->add_option("--noise", score.noise, "Simulated QE noise: none, gaussian, rank_corrupt");
  c_score->add_option("--sigma", score.sigma, "Gaussian sd or rank_corrupt probability");
  c_score->add_option("--target-corr", score.target_corr, "Gaussian noise set by target correlation");
  c_score->add_option("--url", score.url, "Scorer service URL");
  c_score->add_option("--batch-size", score.batch_size, "Pairs per scorer request");
  c_score->add_flag("--no-cache", score.no_cache, "Bypass the score cache");

  SelectOptions sel;
  auto* c_select = app.add_subcommand("select", "Best-of-N selection (selections.jsonl, final.jsonl)");
  c_select->add_option("--scores", sel.scores, "scores.jsonl (default: <out>/scores.jsonl)");
  c_select->add_option("--candidates", sel.candidates, "candidates.jsonl (default: <out>/candidates.jsonl)");
  c_select->add_option("--dataset", sel.dataset, "segments.jsonl (for --filter-codeswitch)");
  c_select->add_option("--metric", sel.metric, "Selection QE metric (default: config, else kiwi22-sim)");
  c_select->add_option("--schedule", sel.schedule, "N values, e.g. 1,2,4 (default: powers of two)");
  c_select->add_option("--draws", sel.draws, "Subsamples per N");
  c_select->add_flag("--disjoint", sel.disjoint, "Make the draws for one N non-overlapping");
  c_select->add_flag("--filter-codeswitch", sel.filter_codeswitch,
                     "Experimental: skip code-switched candidates in final.jsonl");
  c_select->add_option("--threshold", sel.threshold, "Code-switch threshold");

  ReportOptions rep;
  auto add_report_flags = [&](CLI::App* c) {
    c->add_option("--dataset", rep.dataset, "segments.jsonl")->required();
    c->add_option("--candidates", rep.candidates, "candidates.jsonl (default: <out>/candidates.jsonl)");
    c->add_option("--scores", rep.scores, "scores.jsonl (default: <out>/scores.jsonl)");
    c->add_option("--registry", rep.registry, "models.toml (default: config, else built-in)");
    c->add_option("--model", rep.model, "Generator model name in the registry");
    c->add_option("--qe", rep.qe, "QE model name in the registry, or none");
    c->add_option("--select", rep.select, "Selection QE metric (default: config, else kiwi22-sim)");
    c->add_option("--eval", rep.eval, "Evaluation metric (repeatable; default: bleu, chrf++)");
    c->add_option("--schedule", rep.schedule, "N values, e.g. 1,2,4 (default: powers of two)");
    c->add_option("--draws", rep.draws, "Subsamples per N");
    c->add_option("--pair", rep.pair, "Only this pair (default: every pair with pools)");
    c->add_flag("--allow-identity", rep.allow_identity, "Permit evaluating with the selection metric");
    c->add_flag("--disjoint", rep.disjoint, "Make the draws for one N non-overlapping");
    c->add_option("--threshold", rep.threshold, "Code-switch threshold");
    c->add_option("--include", rep.include, "Extra report.json / curve.csv to merge (repeatable)");
    c->add_flag("--average", rep.average, "Append unweighted pair-mean curves");
  };
  auto* c_curve = app.add_subcommand("curve", "Quality-vs-N curves (curve.csv)");
  add_report_flags(c_curve);
  auto* c_report = app.add_subcommand("report", "Scaling report (report.json, curve.csv)");
  add_report_flags(c_report);

  FlopsOptions fl;
  auto* c_flops = app.add_subcommand("flops", "Inference compute per segment");
  c_flops->add_option("--registry", fl.registry, "models.toml (default: config, else built-in)");
  c_flops->add_option("--model", fl.model, "Generator model name")->required();
  c_flops->add_option("--qe", fl.qe, "QE model name, or none");
  c_flops->add_option("--P", fl.p, "Prompt tokens per segment");
  c_flops->add_option("--T", fl.t, "Generated tokens per candidate");
  c_flops->add_option("--Sqe", fl.s_qe, "QE input tokens per candidate");
  c_flops->add_option("--n", fl.n, "Candidates per segment (repeatable)");
  c_flops->add_option("--dataset", fl.dataset, "segments.jsonl, to measure usage");
  c_flops->add_option("--candidates", fl.candidates, "candidates.jsonl, to measure usage");
  c_flops->add_option("--csv", fl.csv, "Also write the flops CSV here");

  MemOptions mem;
  auto* c_mem = app.add_subcommand("mem", "Weights-only memory estimate");
  c_mem->add_option("--registry", mem.registry, "models.toml (default: config, else built-in)");
  c_mem->add_option("--model", mem.model, "Model name");
  c_mem->add_option("--bytes-per-param", mem.bytes_per_param, "2 for bf16");
  c_mem->add_option("--params", mem.params, "Override the parameter count (-1: registry)");
  c_mem->add_flag("--derive", mem.derive, "Fall back to the non-embedding count");

  DetectOptions det;
  auto* c_detect = app.add_subcommand("detect-cs", "Code-switch detection (codeswitch.jsonl)");
  c_detect->add_option("--dataset", det.dataset, "segments.jsonl");
  c_detect->add_option("--candidates", det.candidates, "candidates.jsonl (default: <out>/candidates.jsonl)");
  c_detect->add_option("--text", det.text, "Check one text instead");
  c_detect->add_option("--tgt", det.tgt, "Target language of --text");
  c_detect->add_option("--threshold", det.threshold, "Foreign-letter ratio that flags");

  SimulateOptions sim;
  auto* c_sim = app.add_subcommand("simulate", "Metric-interference study (interference.csv)");
  c_sim->add_option("--law", sim.law, "Quality law: uniform or beta");
  c_sim->add_option("--law-a", sim.law_a, "Uniform lower bound or beta alpha");
  c_sim->add_option("--law-b", sim.law_b, "Uniform upper bound or beta beta");
  c_sim->add_option("--noise", sim.noise, "Selection QE noise: none, gaussian, rank_corrupt");
  c_sim->add_option("--sigma", sim.sigma, "Gaussian sd or rank_corrupt probability");
  c_sim->add_option("--target-corr", sim.target_corr, "Gaussian noise set by target correlation");
  c_sim->add_option("--mode", sim.modes, "Eval mode: same, independent, rho=<r> (repeatable)");
  c_sim->add_option("--schedule", sim.schedule, "N values");
  c_sim->add_option("--trials", sim.trials, "Simulated pools");
  c_sim->add_option("--pool-size", sim.pool_size, "Pool size (0: largest N)");

  IngestOptions ing;
  auto* c_ingest = app.add_subcommand("ingest", "Load a results table and print N deltas");
  c_ingest->add_option("--results", ing.results, "curve.csv or model,pair,n,<metric>... CSV")->required();
  c_ingest->add_option("--from", ing.from, "Baseline N");
  c_ingest->add_option("--to", ing.to, "Compared N (0: largest)");
  c_ingest->add_option("--export", ing.export_path, "Re-export the table here");

  DiffOptions dif;
  auto* c_diff = app.add_subcommand("diff", "Compare two reports per (model, pair, metric, N)");
  c_diff->add_option("--ours", dif.ours, "report.json or CSV")->required();
  c_diff->add_option("--theirs", dif.theirs, "report.json or CSV")->required();
  c_diff->add_option("--tolerance", dif.tolerance, "Absolute difference to ignore");
  c_diff->add_flag("--fail-on-diff", dif.fail_on_diff, "Exit 1 when anything differs");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    if (!args.empty() && !args.front().starts_with("-") &&
        app.get_subcommands().empty()) {
      err << "ttsmt: error: usage: unknown command '" << args.front() << "'\n";
    } else {
      err << "ttsmt: error: usage: " << e.what() << '\n';
    }
    return kExitUsage;
  }

  try {
    set_max_jobs(g.jobs);
    Context ctx(g, out, err);
    if (c_gen->parsed()) return cmd_gen(ctx, gen);
    if (c_score->parsed()) return cmd_score(ctx, score);
    if (c_select->parsed()) return cmd_select(ctx, sel);
    if (c_curve->parsed()) return cmd_curve(ctx, rep);
    if (c_report->parsed()) return cmd_report(ctx, rep);
    if (c_flops->parsed()) return cmd_flops(ctx, fl);
    if (c_mem->parsed()) return cmd_mem(ctx, mem);
    if (c_detect->parsed()) return cmd_detect(ctx, det);
    if (c_sim->parsed()) return cmd_simulate(ctx, sim);
    if (c_ingest->parsed()) return cmd_ingest(ctx, ing);
    if (c_diff->parsed()) return cmd_diff(ctx, dif);
  } catch (const Error& e) {
    err << "ttsmt: error: " << error_class(e) << ": " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "ttsmt: error: internal: " << e.what() << '\n';
    return kExitValidation;
  }
  err << "ttsmt: error: usage: no command given\n";
  return kExitUsage;
}

}  // namespace ttsmt::cli

#include "ttsmt/analysis.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>

#include "ttsmt/error.hpp"
#include "ttsmt/io.hpp"
#include "ttsmt/textmetrics.hpp"

namespace ttsmt {

namespace {

std::string_view orientation_name(Orientation o) {
  return o == Orientation::kHigherBetter ? "higher" : "lower";
}

Orientation parse_orientation(std::string_view s) {
  if (s == "higher") return Orientation::kHigherBetter;
  if (s == "lower") return Orientation::kLowerBetter;
  throw ValidationError("unknown orientation '" + std::string(s) + "'");
}

double oriented_value(Orientation o, double v) { return o == Orientation::kHigherBetter ? v : -v; }

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

std::string format_reported(const ReportedValue& v) {
  if (v.decimals < 0) return format_double(v.value);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", v.decimals, v.value);
  return buf;
}

void RunManifest::validate() const {
  if (model.empty()) throw ValidationError("manifest has no model");
  if (schedule.empty()) throw ValidationError("manifest has an empty N schedule");
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (schedule[i] < 1) throw ValidationError("schedule entries must be >= 1");
    if (i > 0 && schedule[i] <= schedule[i - 1]) {
      throw ValidationError("schedule must be strictly ascending");
    }
  }
  if (draws < 1) throw ValidationError("draws must be >= 1");
  if (eval_metrics.empty()) throw ValidationError("manifest has no evaluation metrics");
  selection_metric.validate();
}

json RunManifest::to_json() const {
  json evals = json::array();
  for (const auto& m : eval_metrics) evals.push_back(m.name);
  return {{"model", model},
          {"qe_model", qe_model},
          {"pair", pair.str()},
          {"schedule", schedule},
          {"draws", draws},
          {"selection_metric", selection_metric.name},
          {"eval_metrics", evals},
          {"seed", seed},
          {"disjoint_draws", disjoint_draws},
          {"codeswitch_threshold", codeswitch_threshold}};
}

const CurveRow* ScalingCurve::at_n(std::int64_t n) const {
  for (const auto& r : rows) {
    if (r.n == n) return &r;
  }
  return nullptr;
}

ScalingReport build_report(const RunManifest& manifest, const Dataset& dataset,
                           const std::vector<CandidatePool>& pools, const ScoreTable& scores,
                           const ModelRegistry& registry, const LanguageTable& languages) {
  manifest.validate();
  const InterferencePlan plan =
      interference_guard(manifest.selection_metric, manifest.eval_metrics, manifest.guard);

  const ModelSpec& gen_spec = registry.at(manifest.model);
  const ModelSpec* qe_spec = nullptr;
  if (!manifest.qe_model.empty() && manifest.qe_model != "none") {
    qe_spec = &registry.at(manifest.qe_model);
  }

  const Dataset subset = filter_pair(dataset, manifest.pair);
  if (subset.empty()) {
    throw ValidationError("dataset has no segments for " + manifest.pair.str());
  }
  std::vector<const Segment*> segs;
  std::vector<const CandidatePool*> seg_pools;
  std::vector<const ScoreSet*> selection;
  std::vector<CandidatePool> used_pools;
  for (const auto& seg : subset.segments()) {
    const CandidatePool* pool = find_pool(pools, seg.id);
    if (!pool) throw ValidationError("missing candidate pool for segment \"" + seg.id + "\"");
    const ScoreSet& sel = scores.at(manifest.selection_metric.name, seg.id);
    if (sel.size() != pool->size()) {
      throw ValidationError("incomplete " + manifest.selection_metric.name + " scores for \"" +
                            seg.id + "\": have " + std::to_string(sel.size()) + " of " +
                            std::to_string(pool->size()));
    }
    segs.push_back(&dataset.at(seg.id));
    seg_pools.push_back(pool);
    selection.push_back(&sel);
    used_pools.push_back(*pool);
  }

  ScalingReport report;
  report.manifest = manifest;
  report.warnings = plan.warnings;

  const DrawTable table = draw_selections(
      selection, DrawPlan{manifest.schedule, manifest.draws, manifest.seed, manifest.disjoint_draws});

  const UsageProfile usage = measure_usage(used_pools, dataset);
  report.usage = usage;
  for (std::int64_t n : manifest.schedule) {
    LedgerRow row{gen_spec.name, qe_spec ? qe_spec->name : "none", manifest.pair.str(), n,
                  total_cost(gen_spec, qe_spec, usage.with_n(n))};
    report.ledgers.push_back(std::move(row));
  }
  for (std::size_t i = 1; i < report.ledgers.size(); ++i) {
    if (!(report.ledgers[i].ledger.c_total > report.ledgers[i - 1].ledger.c_total)) {
      report.warnings.push_back("compute does not grow with N: zero decode and QE tokens");
      break;
    }
  }

  for (const MetricId& metric : plan.evaluation) {
    std::vector<CurvePoint> points;
    if (metric.level == MetricLevel::kCorpus) {
      const CorpusMetric cm = CorpusMetric::resolve(metric.name, manifest.pair.tgt);
      points = curve_eval_corpus(table, seg_pools, segs, cm, metric);
    } else {
      std::vector<const ScoreSet*> eval;
      for (std::size_t s = 0; s < segs.size(); ++s) {
        const ScoreSet& set = scores.at(metric.name, segs[s]->id);
        if (set.size() != seg_pools[s]->size()) {
          throw ValidationError("incomplete " + metric.name + " scores for \"" + segs[s]->id + "\"");
        }
        eval.push_back(&set);
      }
      points = curve_from_draws(table, eval);
    }
    ScalingCurve curve{gen_spec.name, manifest.pair.str(), metric.name, metric.orientation, {}};
    for (std::size_t i = 0; i < points.size(); ++i) {
      curve.rows.push_back({points[i].n, {points[i].mean, -1}, points[i].std, points[i].n_draws,
                            report.ledgers[i].ledger.total_tflops()});
    }
    report.curves.push_back(std::move(curve));
  }

  const LanguageInfo* tgt = languages.find(manifest.pair.tgt);
  if (tgt && !tgt->scripts.empty()) {
    std::vector<std::vector<bool>> flags(segs.size());
    for (std::size_t s = 0; s < segs.size(); ++s) {
      for (const auto& c : seg_pools[s]->candidates) {
        flags[s].push_back(
            detect(c.text, manifest.pair.tgt, manifest.codeswitch_threshold, languages).flagged);
      }
    }
    report.codeswitch = selected_codeswitch_rate(table, flags);
  }
  return report;
}

std::vector<Crossover> find_crossovers(const std::vector<ScalingCurve>& curves) {
  std::vector<Crossover> out;
  for (const auto& a : curves) {
    const CurveRow* a1 = a.at_n(1);
    if (!a1) continue;
    for (const auto& b : curves) {
      if (&a == &b || a.model == b.model || a.pair != b.pair || a.metric != b.metric) continue;
      const CurveRow* b1 = b.at_n(1);
      if (!b1) continue;
      const double target = oriented_value(b.orientation, b1->mean.value);
      if (oriented_value(a.orientation, a1->mean.value) >= target) continue;
      std::vector<const CurveRow*> rows;
      for (const auto& r : a.rows) {
        if (r.n >= 1) rows.push_back(&r);
      }
      std::sort(rows.begin(), rows.end(),
                [](const CurveRow* x, const CurveRow* y) { return x->n < y->n; });
      for (const CurveRow* r : rows) {
        if (oriented_value(a.orientation, r->mean.value) >= target) {
          out.push_back({a.model, b.model, a.pair, a.metric, r->n, r->mean.value, b1->mean.value});
          break;
        }
      }
    }
  }
  return out;
}

std::vector<ScalingCurve> average_over_pairs(const std::vector<ScalingCurve>& curves) {
  std::map<std::pair<std::string, std::string>, std::vector<const ScalingCurve*>> groups;
  std::vector<std::pair<std::string, std::string>> order;
  for (const auto& c : curves) {
    auto key = std::make_pair(c.model, c.metric);
    if (!groups.count(key)) order.push_back(key);
    groups[key].push_back(&c);
  }
  std::vector<ScalingCurve> out;
  for (const auto& key : order) {
    const auto& group = groups[key];
    ScalingCurve avg{key.first, "avg", key.second, group.front()->orientation, {}};
    for (const auto& row : group.front()->rows) {
      double mean = 0.0;
      double sd = 0.0;
      double tflops = 0.0;
      bool have_tflops = true;
      std::int64_t draws = row.draws;
      int decimals = row.mean.decimals;
      bool complete = true;
      for (const ScalingCurve* c : group) {
        const CurveRow* r = c->at_n(row.n);
        if (!r) {
          complete = false;
          break;
        }
        mean += r->mean.value;
        sd += r->std;
        draws = std::min(draws, r->draws);
        decimals = std::max(decimals, r->mean.decimals);
        if (r->tflops_per_seg) {
          tflops += *r->tflops_per_seg;
        } else {
          have_tflops = false;
        }
      }
      if (!complete) continue;
      const auto k = static_cast<double>(group.size());
      CurveRow r{row.n, {mean / k, decimals}, sd / k, draws, std::nullopt};
      if (have_tflops) r.tflops_per_seg = tflops / k;
      avg.rows.push_back(r);
    }
    out.push_back(std::move(avg));
  }
  return out;
}

ScalingReport merge_reports(const std::vector<ScalingReport>& reports) {
  ScalingReport out;
  for (const auto& r : reports) {
    out.curves.insert(out.curves.end(), r.curves.begin(), r.curves.end());
    out.ledgers.insert(out.ledgers.end(), r.ledgers.begin(), r.ledgers.end());
    out.warnings.insert(out.warnings.end(), r.warnings.begin(), r.warnings.end());
  }
  if (reports.size() == 1) {
    out.manifest = reports.front().manifest;
    out.usage = reports.front().usage;
    out.codeswitch = reports.front().codeswitch;
  }
  out.crossovers = find_crossovers(out.curves);
  return out;
}

json report_to_json(const ScalingReport& report) {
  json doc;
  doc["manifest"] = report.manifest ? report.manifest->to_json() : json(nullptr);
  if (report.usage) {
    doc["usage"] = {{"prompt_tokens", report.usage->prompt_tokens},
                    {"gen_tokens", report.usage->gen_tokens},
                    {"qe_tokens", report.usage->qe_tokens},
                    {"n_cand", report.usage->n_cand},
                    {"measured", report.usage->measured},
                    {"approximate", report.usage->approximate}};
  } else {
    doc["usage"] = nullptr;
  }
  json curves = json::array();
  for (const auto& c : report.curves) {
    json rows = json::array();
    for (const auto& r : c.rows) {
      rows.push_back({{"n", r.n},
                      {"mean", r.mean.value},
                      {"std", r.std},
                      {"draws", r.draws},
                      {"tflops_per_seg", optional_number(r.tflops_per_seg)}});
    }
    curves.push_back({{"model", c.model},
                      {"pair", c.pair},
                      {"metric", c.metric},
                      {"orientation", orientation_name(c.orientation)},
                      {"rows", rows}});
  }
  doc["curves"] = curves;
  json ledgers = json::array();
  for (const auto& l : report.ledgers) {
    ledgers.push_back({{"model", l.model},
                       {"qe_model", l.qe_model},
                       {"pair", l.pair},
                       {"n", l.n},
                       {"c_gen", l.ledger.c_gen},
                       {"c_qe", l.ledger.c_qe},
                       {"c_total", l.ledger.c_total},
                       {"c_total_tflops", l.ledger.total_tflops()},
                       {"per", l.ledger.per == LedgerScope::kSegment ? "segment" : "corpus"},
                       {"assumptions", l.ledger.assumptions}});
  }
  doc["ledgers"] = ledgers;
  json cross = json::array();
  for (const auto& x : report.crossovers) {
    cross.push_back({{"model", x.model},
                     {"baseline", x.baseline},
                     {"pair", x.pair},
                     {"metric", x.metric},
                     {"n", x.n},
                     {"quality", x.quality},
                     {"baseline_quality", x.baseline_quality}});
  }
  doc["crossovers"] = cross;
  json cs = json::array();
  for (const auto& p : report.codeswitch) cs.push_back({{"n", p.n}, {"rate", p.rate}});
  doc["codeswitch"] = cs;
  doc["warnings"] = report.warnings;
  return doc;
}

ScalingReport report_from_json(const json& doc) {
  ScalingReport report;
  try {
    for (const auto& c : doc.at("curves")) {
      ScalingCurve curve{c.at("model").get<std::string>(), c.at("pair").get<std::string>(),
                         c.at("metric").get<std::string>(),
                         parse_orientation(c.value("orientation", std::string("higher"))), {}};
      for (const auto& r : c.at("rows")) {
        CurveRow row{r.at("n").get<std::int64_t>(), {r.at("mean").get<double>(), -1},
                     r.value("std", 0.0), r.value("draws", std::int64_t{0}), std::nullopt};
        if (r.contains("tflops_per_seg") && r["tflops_per_seg"].is_number()) {
          row.tflops_per_seg = r["tflops_per_seg"].get<double>();
        }
        curve.rows.push_back(row);
      }
      report.curves.push_back(std::move(curve));
    }
    if (doc.contains("ledgers")) {
      for (const auto& l : doc["ledgers"]) {
        LedgerRow row{l.value("model", std::string()), l.value("qe_model", std::string()),
                      l.value("pair", std::string()), l.at("n").get<std::int64_t>(), {}};
        row.ledger.c_gen = l.at("c_gen").get<double>();
        row.ledger.c_qe = l.at("c_qe").get<double>();
        row.ledger.c_total = l.at("c_total").get<double>();
        row.ledger.assumptions = l.value("assumptions", std::vector<std::string>{});
        report.ledgers.push_back(std::move(row));
      }
    }
    if (doc.contains("codeswitch")) {
      for (const auto& p : doc["codeswitch"]) {
        report.codeswitch.push_back({p.at("n").get<std::int64_t>(), p.at("rate").get<double>()});
      }
    }
    if (doc.contains("warnings")) report.warnings = doc["warnings"].get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed report: ") + e.what());
  }
  report.crossovers = find_crossovers(report.curves);
  return report;
}

std::string serialize_report(const ScalingReport& report) {
  return report_to_json(report).dump(2, ' ', false, json::error_handler_t::strict) + "\n";
}

std::string render_curve_csv(const ScalingReport& report) {
  std::string out = "model,pair,metric,n,mean,std,draws,tflops_per_seg\n";
  for (const auto& c : report.curves) {
    for (const auto& r : c.rows) {
      out += c.model + ',' + c.pair + ',' + c.metric + ',' + std::to_string(r.n) + ',' +
             format_reported(r.mean) + ',' + format_double(r.std) + ',' + std::to_string(r.draws) +
             ',' + (r.tflops_per_seg ? format_double(*r.tflops_per_seg) : std::string()) + '\n';
    }
  }
  return out;
}

}  // namespace ttsmt

#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"
#include "ttsmt/analysis.hpp"
#include "ttsmt/error.hpp"
#include "ttsmt/registry.hpp"
#include "ttsmt/sim_scorer.hpp"
#include "ttsmt/simulator.hpp"

using namespace ttsmt;
using ttsmt::testing::fixture;
using ttsmt::testing::TempDir;

namespace {

const char* const kRegistry = R"(
[[model]]
name = "small"
family = "decoder_swiglu"
layers = 2
hidden = 4
mlp = 8
[[model]]
name = "qe"
family = "encoder_gelu"
layers = 2
hidden = 4
mlp = 8
)";

struct Pipeline {
  Dataset ds = load_dataset(fixture("segments.jsonl"));
  std::vector<CandidatePool> pools;
  ScoreTable scores;
  ModelRegistry registry = parse_registry(kRegistry);

  explicit Pipeline(std::int64_t n = 8, double codeswitch = 0.0) {
    QualityLaw law = QualityLaw::uniform();
    law.codeswitch_rate = codeswitch;
    DecodeConfig d;
    d.n_cand = n;
    d.seed = 5;
    for (const auto& seg : ds.segments()) pools.push_back(simulate_candidates(seg, d, law));
    SimulatedScorer noisy(NoiseModel::gaussian(0.1), 5), exact(NoiseModel::none(), 5);
    const auto& cat = MetricCatalog::defaults();
    for (const auto& p : pools) {
      const Segment& seg = ds.at(p.seg_id);
      scores.put(score_pool(p, seg, cat.resolve("kiwi22-sim"), noisy));
      scores.put(score_pool(p, seg, cat.resolve("sim-oracle"), exact));
    }
  }

  RunManifest manifest(const std::string& pair = "en-de") const {
    RunManifest m;
    m.model = "small";
    m.qe_model = "qe";
    m.pair = LangPair::parse(pair);
    m.schedule = power_of_two_schedule(static_cast<std::int64_t>(pools.front().size()));
    m.draws = 4;
    m.seed = 1;
    const auto& cat = MetricCatalog::defaults();
    m.selection_metric = cat.resolve("kiwi22-sim").with_role(MetricRole::kSelection);
    m.eval_metrics = {cat.resolve("sim-oracle").with_role(MetricRole::kEvaluation),
                      cat.resolve("bleu").with_role(MetricRole::kEvaluation),
                      cat.resolve("chrf++").with_role(MetricRole::kEvaluation)};
    return m;
  }
};

ScalingCurve curve(const std::string& model, std::vector<std::pair<std::int64_t, double>> pts,
                   Orientation o = Orientation::kHigherBetter) {
  ScalingCurve c{model, "en-de", "xcomet", o, {}};
  for (auto [n, v] : pts) c.rows.push_back({n, {v, -1}, 0.0, 1, std::nullopt});
  return c;
}

}  // namespace

TEST(Manifest, Validation) {
  Pipeline p(4);
  RunManifest m = p.manifest();
  EXPECT_NO_THROW(m.validate());
  m.schedule = {2, 1};
  EXPECT_THROW(m.validate(), ValidationError);
  m.schedule = {};
  EXPECT_THROW(m.validate(), ValidationError);
  m = p.manifest();
  m.draws = 0;
  EXPECT_THROW(m.validate(), ValidationError);
}

TEST(Report, CurvesLedgersAndCodeSwitch) {
  const Pipeline p(8, 0.2);
  const ScalingReport r = build_report(p.manifest(), p.ds, p.pools, p.scores, p.registry);
  ASSERT_EQ(r.curves.size(), 3u);
  for (const auto& c : r.curves) {
    EXPECT_EQ(c.model, "small");
    EXPECT_EQ(c.pair, "en-de");
    ASSERT_EQ(c.rows.size(), 4u);
    EXPECT_EQ(c.rows.back().draws, 1);
    ASSERT_TRUE(c.rows[0].tflops_per_seg.has_value());
    EXPECT_LT(*c.rows[0].tflops_per_seg, *c.rows[3].tflops_per_seg);
  }
  EXPECT_EQ(r.ledgers.size(), 4u);
  for (const auto& l : r.ledgers) EXPECT_EQ(l.ledger.c_total, l.ledger.c_gen + l.ledger.c_qe);
  EXPECT_EQ(r.codeswitch.size(), 4u);
  ASSERT_TRUE(r.usage.has_value());
  EXPECT_TRUE(r.usage->measured);
  // The full-pool oracle value is the mean best-of-8 latent under noisy QE, so
  // it cannot exceed the mean of per-segment maxima.
  double best = 0.0;
  const Dataset de = filter_pair(p.ds, LangPair::parse("en-de"));
  for (const auto& seg : de.segments()) {
    const ScoreSet& s = p.scores.at("sim-oracle", seg.id);
    best += *std::max_element(s.scores.begin(), s.scores.end());
  }
  best /= static_cast<double>(de.size());
  const ScalingCurve* oracle = nullptr;
  for (const auto& c : r.curves) oracle = c.metric == "sim-oracle" ? &c : oracle;
  ASSERT_NE(oracle, nullptr);
  EXPECT_LE(oracle->rows.back().mean.value, best + 1e-12);
}

TEST(Report, DeterministicSerialization) {
  const Pipeline p(8);
  const auto a = serialize_report(build_report(p.manifest(), p.ds, p.pools, p.scores, p.registry));
  const auto b = serialize_report(build_report(p.manifest(), p.ds, p.pools, p.scores, p.registry));
  EXPECT_EQ(a, b);
}

TEST(Report, GuardAndInputChecks) {
  const Pipeline p(8);
  RunManifest m = p.manifest();
  m.eval_metrics.push_back(MetricCatalog::defaults().resolve("kiwi22-sim"));
  EXPECT_THROW(build_report(m, p.ds, p.pools, p.scores, p.registry), ValidationError);
  m = p.manifest();
  m.schedule = {1, 16};
  EXPECT_THROW(build_report(m, p.ds, p.pools, p.scores, p.registry), ValidationError);
  m = p.manifest("en-ja");
  EXPECT_THROW(build_report(m, p.ds, p.pools, p.scores, p.registry), ValidationError);
  m = p.manifest();
  m.model = "unknown";
  EXPECT_THROW(build_report(m, p.ds, p.pools, p.scores, p.registry), ConfigError);
}

TEST(Report, JsonRoundTripAndCsv) {
  const Pipeline p(4);
  const ScalingReport r = build_report(p.manifest(), p.ds, p.pools, p.scores, p.registry);
  const ScalingReport back = report_from_json(report_to_json(r));
  ASSERT_EQ(back.curves.size(), r.curves.size());
  EXPECT_EQ(render_curve_csv(back), render_curve_csv(r));
  EXPECT_EQ(back.ledgers.size(), r.ledgers.size());
  const std::string csv = render_curve_csv(r);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "model,pair,metric,n,mean,std,draws,tflops_per_seg");
}

TEST(Crossover, SmallestNReachingBaseline) {
  const auto small = curve("3b", {{1, 70.0}, {2, 72.0}, {4, 75.5}, {8, 76.0}});
  const auto large = curve("7b", {{1, 75.0}, {2, 78.0}});
  const auto x = find_crossovers({small, large});
  ASSERT_EQ(x.size(), 1u);
  EXPECT_EQ(x[0].model, "3b");
  EXPECT_EQ(x[0].baseline, "7b");
  EXPECT_EQ(x[0].n, 4);
  EXPECT_EQ(x[0].quality, 75.5);
  EXPECT_EQ(x[0].baseline_quality, 75.0);
}

TEST(Crossover, LowerIsBetterAndNeverReached) {
  const auto lo = Orientation::kLowerBetter;
  const auto small = curve("3b", {{1, 5.0}, {4, 3.0}}, lo);
  const auto large = curve("7b", {{1, 3.5}}, lo);
  const auto x = find_crossovers({small, large});
  ASSERT_EQ(x.size(), 1u);
  EXPECT_EQ(x[0].n, 4);
  EXPECT_TRUE(find_crossovers({curve("a", {{1, 1.0}, {2, 1.5}}), curve("b", {{1, 2.0}})}).empty());
}

TEST(Average, UnweightedOverPairs) {
  auto a = curve("m", {{1, 10.0}, {2, 20.0}, {4, 30.0}});
  auto b = curve("m", {{1, 20.0}, {2, 40.0}});
  b.pair = "en-ja";
  const auto avg = average_over_pairs({a, b});
  ASSERT_EQ(avg.size(), 1u);
  EXPECT_EQ(avg[0].pair, "avg");
  ASSERT_EQ(avg[0].rows.size(), 2u);
  EXPECT_EQ(avg[0].rows[0].mean.value, 15.0);
  EXPECT_EQ(avg[0].rows[1].mean.value, 30.0);
}

TEST(Merge, RecomputesCrossovers) {
  ScalingReport a, b;
  a.curves = {curve("3b", {{1, 70.0}, {8, 76.0}})};
  b.curves = {curve("7b", {{1, 75.0}})};
  const ScalingReport m = merge_reports({a, b});
  EXPECT_EQ(m.curves.size(), 2u);
  ASSERT_EQ(m.crossovers.size(), 1u);
  EXPECT_EQ(m.crossovers[0].n, 8);
}

TEST(Interference, ModesParse) {
  EXPECT_EQ(EvalMode::parse("same").kind, EvalMode::Kind::kSameAsSelection);
  EXPECT_EQ(EvalMode::parse("independent").kind, EvalMode::Kind::kIndependent);
  const EvalMode r = EvalMode::parse("rho=0.5");
  EXPECT_EQ(r.kind, EvalMode::Kind::kCorrelated);
  EXPECT_EQ(r.rho, 0.5);
  EXPECT_THROW(EvalMode::parse("rho=2"), ConfigError);
  EXPECT_THROW(EvalMode::parse("sideways"), ConfigError);
  EXPECT_EQ(EvalMode::parse("correlated:-0.25").rho, -0.25);
}

TEST(Interference, OrderingOfModes) {
  InterferenceConfig cfg;
  cfg.selection_noise = NoiseModel::gaussian(0.1);
  cfg.modes = {EvalMode::same_as_selection(), EvalMode::correlated(0.5), EvalMode::independent()};
  cfg.schedule = {1, 2, 4, 8};
  cfg.trials = 3000;
  cfg.seed = 3;
  const auto curves = interference_study(cfg);
  ASSERT_EQ(curves.size(), 3u);
  for (std::size_t i = 1; i < 4; ++i) {
    EXPECT_GT(curves[0].points[i].mean, curves[1].points[i].mean);
    EXPECT_GT(curves[1].points[i].mean, curves[2].points[i].mean);
    EXPECT_NEAR(curves[2].points[i].mean, 0.5, 5 * curves[2].points[i].standard_error);
  }
  const auto again = interference_study(cfg);
  EXPECT_EQ(render_interference_csv(curves), render_interference_csv(again));
}

TEST(Interference, PerfectQeSameModeIsOrderStatistic) {
  InterferenceConfig cfg;
  cfg.schedule = {1, 2, 4};
  cfg.modes = {EvalMode::same_as_selection()};
  cfg.trials = 5000;
  const auto c = interference_study(cfg);
  for (const auto& pt : c[0].points) {
    const double n = static_cast<double>(pt.n);
    EXPECT_NEAR(pt.mean, n / (n + 1), 5 * pt.standard_error + 2e-3) << pt.n;
  }
}

TEST(Interference, SimulatedLatentsOnly) {
  const Pipeline p(2);
  EXPECT_EQ(simulated_latents(p.pools).size(), p.pools.size());
  auto live = p.pools;
  live[0].candidates[0].latent_quality.reset();
  EXPECT_THROW(simulated_latents(live), ValidationError);
}

TEST(Results, FormatReported) {
  EXPECT_EQ(format_reported({30.4, 1}), "30.4");
  EXPECT_EQ(format_reported({80.9, 2}), "80.90");
  EXPECT_EQ(format_reported({0.125, -1}), "0.125");
}

TEST(Results, PublishedTableDeltas) {
  const ResultsTable t = ingest_results(fixture("table2_en_zh.csv"));
  EXPECT_EQ(t.schema, ResultsTable::Schema::kWide);
  const auto deltas = compute_deltas(t.report, 1, 1024);
  auto find = [&](const std::string& model, const std::string& metric) -> const Delta* {
    for (const auto& d : deltas) {
      if (d.model == model && d.metric == metric) return &d;
    }
    return nullptr;
  };
  ASSERT_NE(find("Qwen2.5-3B", "bleu"), nullptr);
  EXPECT_EQ(find("Qwen2.5-3B", "bleu")->rendered(), "+1.3");
  EXPECT_EQ(find("Qwen2.5-72B", "xcomet")->rendered(), "+3.57");
  EXPECT_EQ(find("Qwen2.5-72B", "bleu")->rendered(), "+0.0");
  EXPECT_EQ(find("Qwen2.5-7B", "bleu")->rendered(), "+0.2");
  EXPECT_EQ(find("GPT4 (2024/08)", "bleu"), nullptr);
  EXPECT_EQ(export_results(t), read_file(fixture("table2_en_zh.csv")));
}

TEST(Results, NegativeAndMixedDecimals) {
  Delta d;
  d.from = {-3.50, 2};
  d.to = {-2.58, 2};
  EXPECT_EQ(d.rendered(), "+0.92");
  d.from = {40.6, 1};
  d.to = {40.55, 2};
  EXPECT_EQ(d.rendered(), "-0.05");
  d.from = {1.0, 0};
  d.to = {1.0, 0};
  EXPECT_EQ(d.rendered(), "+0");
}

TEST(Results, CrlfQuotesAndMissingCells) {
  const std::string text =
      "model,pair,n,bleu,\"chrf++\"\r\n\"Model, A\",en-de,1,30.4,NA\r\n\"Model, A\",en-de,8,31.0,--\r\n";
  const ResultsTable t = parse_results(text);
  EXPECT_TRUE(t.crlf);
  EXPECT_EQ(export_results(t), text);
  ASSERT_FALSE(t.report.curves.empty());
  EXPECT_EQ(t.report.curves[0].model, "Model, A");
}

TEST(Results, CurveSchemaRoundTrip) {
  const Pipeline p(4);
  const ScalingReport r = build_report(p.manifest(), p.ds, p.pools, p.scores, p.registry);
  const std::string csv = render_curve_csv(r);
  const ResultsTable t = parse_results(csv);
  EXPECT_EQ(t.schema, ResultsTable::Schema::kCurve);
  EXPECT_EQ(export_results(t), csv);
  EXPECT_EQ(render_curve_csv(t.report), csv);
}

TEST(Results, SchemaErrorsNameRowAndColumn) {
  try {
    parse_results("model,pair,n,bleu\nA,en-de,one,30\n", "t.csv");
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("t.csv"), std::string::npos) << msg;
    EXPECT_NE(msg.find("2"), std::string::npos) << msg;
  }
  EXPECT_THROW(parse_results("a,b\n1,2\n"), ValidationError);
  EXPECT_THROW(parse_results("model,pair,n,bleu\nA,en-de,1\n"), ValidationError);
}

TEST(Diff, ReportsDifferencesAndMissingKeys) {
  ScalingReport a, b;
  a.curves = {curve("m", {{1, 70.0}, {2, 71.0}})};
  b.curves = {curve("m", {{1, 70.05}, {4, 72.0}})};
  const auto lines = diff_reports(a, b, 0.1);
  ASSERT_EQ(lines.size(), 2u);
  const std::string out = render_diff(lines);
  EXPECT_NE(out.find("m|en-de|xcomet|2,71,NA"), std::string::npos) << out;
  EXPECT_NE(out.find("m|en-de|xcomet|4,NA,72"), std::string::npos) << out;
  EXPECT_EQ(diff_reports(a, b, 0.0).size(), 3u);
  EXPECT_TRUE(diff_reports(a, a).empty());
}

TEST(Diff, LoadAnyFormat) {
  TempDir dir("diff");
  const Pipeline p(4);
  const ScalingReport r = build_report(p.manifest(), p.ds, p.pools, p.scores, p.registry);
  write_file_atomic(dir / "report.json", serialize_report(r));
  write_file_atomic(dir / "curve.csv", render_curve_csv(r));
  EXPECT_TRUE(diff_reports(load_report_any(dir / "report.json"), load_report_any(dir / "curve.csv")).empty());
}

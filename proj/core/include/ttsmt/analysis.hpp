#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ttsmt/codeswitch.hpp"
#include "ttsmt/compute.hpp"
#include "ttsmt/corpus.hpp"
#include "ttsmt/generation.hpp"
#include "ttsmt/registry.hpp"
#include "ttsmt/scoring.hpp"
#include "ttsmt/selection.hpp"
#include "ttsmt/simulator.hpp"

namespace ttsmt {

/// One experiment: a generator, a QE model, a language pair and an N schedule.
struct RunManifest {
  std::string model;
  std::string qe_model;
  LangPair pair;
  std::vector<std::int64_t> schedule;
  std::int64_t draws = 5;
  MetricId selection_metric;
  std::vector<MetricId> eval_metrics;
  std::uint64_t seed = 0;
  bool disjoint_draws = false;
  GuardOptions guard;
  double codeswitch_threshold = kDefaultCodeSwitchThreshold;

  /// Schedule non-empty, positive and strictly ascending; draws >= 1.
  void validate() const;
  json to_json() const;
};

/// A reported number, remembering how many decimals it was written with so
/// ingested tables re-render exactly.
struct ReportedValue {
  double value = 0.0;
  int decimals = -1;

  friend bool operator==(const ReportedValue&, const ReportedValue&) = default;
};

/// Fixed-point with the remembered decimals, else shortest round-trip.
std::string format_reported(const ReportedValue& v);

struct CurveRow {
  /// 0 when the row has no candidate count (e.g. a closed-model baseline).
  std::int64_t n = 0;
  ReportedValue mean;
  double std = 0.0;
  std::int64_t draws = 0;
  std::optional<double> tflops_per_seg;
};

struct ScalingCurve {
  std::string model;
  std::string pair;
  std::string metric;
  Orientation orientation = Orientation::kHigherBetter;
  std::vector<CurveRow> rows;

  const CurveRow* at_n(std::int64_t n) const;
};

struct LedgerRow {
  std::string model;
  std::string qe_model;
  std::string pair;
  std::int64_t n = 0;
  ComputeLedger ledger;
};

/// Smallest N at which `model` reaches `baseline`'s N=1 quality, recorded
/// only when `model` starts below it.
struct Crossover {
  std::string model;
  std::string baseline;
  std::string pair;
  std::string metric;
  std::int64_t n = 0;
  double quality = 0.0;
  double baseline_quality = 0.0;

  friend bool operator==(const Crossover&, const Crossover&) = default;
};

struct ScalingReport {
  std::optional<RunManifest> manifest;
  std::vector<ScalingCurve> curves;
  std::vector<LedgerRow> ledgers;
  std::vector<Crossover> crossovers;
  std::vector<CodeSwitchRatePoint> codeswitch;
  std::optional<UsageProfile> usage;
  std::vector<std::string> warnings;
};

/// Curves for every evaluation metric (segment metrics through the subsample
/// estimator, corpus metrics recomputed per draw), one ledger per N from the
/// measured usage, and the selected-candidate code-switch rate.
ScalingReport build_report(const RunManifest& manifest, const Dataset& dataset,
                           const std::vector<CandidatePool>& pools, const ScoreTable& scores,
                           const ModelRegistry& registry,
                           const LanguageTable& languages = LanguageTable::defaults());

/// Crossovers between every ordered pair of models sharing a pair and metric.
std::vector<Crossover> find_crossovers(const std::vector<ScalingCurve>& curves);

/// Unweighted mean over language pairs per (model, metric, N); the result's
/// pair is "avg". Only N present for every pair of a model are kept.
std::vector<ScalingCurve> average_over_pairs(const std::vector<ScalingCurve>& curves);

/// Merges reports (one per model or pair) and recomputes crossovers.
ScalingReport merge_reports(const std::vector<ScalingReport>& reports);

json report_to_json(const ScalingReport& report);
/// Curves, ledgers, crossovers and code-switch rates back from report.json.
ScalingReport report_from_json(const json& doc);
std::string serialize_report(const ScalingReport& report);
/// model,pair,metric,n,mean,std,draws,tflops_per_seg
std::string render_curve_csv(const ScalingReport& report);

// Interference study ---------------------------------------------------------

struct EvalMode {
  enum class Kind { kSameAsSelection, kIndependent, kCorrelated };

  Kind kind = Kind::kIndependent;
  double rho = 0.0;

  static EvalMode same_as_selection() { return {Kind::kSameAsSelection, 1.0}; }
  static EvalMode independent() { return {Kind::kIndependent, 0.0}; }
  static EvalMode correlated(double rho) { return {Kind::kCorrelated, rho}; }
  /// "same", "independent" or "rho=<value>".
  static EvalMode parse(std::string_view text);
  std::string label() const;
};

struct InterferenceConfig {
  QualityLaw law;
  NoiseModel selection_noise;
  std::vector<EvalMode> modes = {EvalMode::same_as_selection(), EvalMode::independent()};
  std::vector<std::int64_t> schedule = {1, 2, 4, 8, 16, 32};
  std::int64_t trials = 10000;
  /// Pool size per trial; defaults to the largest schedule entry.
  std::int64_t pool_size = 0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct InterferencePoint {
  std::int64_t n = 0;
  double mean = 0.0;
  double standard_error = 0.0;
};

struct InterferenceCurve {
  EvalMode mode;
  std::vector<InterferencePoint> points;
};

/// Simulated pools per trial; selection scores observe the latent quality
/// through `selection_noise`; the eval metric depends on the mode:
///   same        eval = selection score;
///   independent eval drawn afresh from the quality law;
///   rho         eval = mu + rho (s - mu) + sqrt(1 - rho^2) (z - mu).
/// Each trial contributes the exact best-of-N expectation over subsets.
std::vector<InterferenceCurve> interference_study(const InterferenceConfig& cfg);

/// Latent qualities of simulated pools, rejecting live-backend pools.
std::vector<std::vector<double>> simulated_latents(const std::vector<CandidatePool>& pools);

/// mode,rho,n,mean,se
std::string render_interference_csv(const std::vector<InterferenceCurve>& curves);

// Results ingestion ----------------------------------------------------------

/// A results CSV in either the curve.csv schema or the wide results-table
/// schema (model,pair,n,<metric>...), kept field-for-field for re-export.
struct ResultsTable {
  enum class Schema { kCurve, kWide };

  Schema schema = Schema::kCurve;
  std::vector<std::string> header;
  /// Fields exactly as written, quotes included.
  std::vector<std::string> header_raw;
  std::vector<std::vector<std::string>> rows;
  bool crlf = false;
  ScalingReport report;
};

/// Throws ValidationError naming the row and column of any schema problem.
ResultsTable ingest_results(const std::filesystem::path& path);
ResultsTable parse_results(std::string_view text, std::string_view source = "<results>");
std::string export_results(const ResultsTable& table);

struct Delta {
  std::string model;
  std::string pair;
  std::string metric;
  std::int64_t n_from = 1;
  std::int64_t n_to = 0;
  ReportedValue from;
  ReportedValue to;

  /// Signed, with the larger decimal count of the two inputs ("+1.3").
  std::string rendered() const;
};

std::vector<Delta> compute_deltas(const ScalingReport& report, std::int64_t n_from,
                                  std::int64_t n_to);
/// model,pair,metric,from_n,to_n,from,to,delta
std::string render_deltas(const std::vector<Delta>& deltas);

struct DiffLine {
  std::string key;
  std::optional<double> ours;
  std::optional<double> theirs;
};

/// Per (model, pair, metric, N) differences beyond `tolerance`, plus keys
/// present on one side only.
std::vector<DiffLine> diff_reports(const ScalingReport& ours, const ScalingReport& theirs,
                                   double tolerance = 0.0);
/// key,ours,theirs,delta
std::string render_diff(const std::vector<DiffLine>& lines);

/// Loads curve.csv or a wide table into curves; report.json is also accepted.
ScalingReport load_report_any(const std::filesystem::path& path);

}  // namespace ttsmt

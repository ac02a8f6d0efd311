#include <algorithm>
#include <cmath>

#include "ttsmt/analysis.hpp"
#include "ttsmt/error.hpp"
#include "ttsmt/io.hpp"
#include "ttsmt/parallel.hpp"
#include "ttsmt/rng.hpp"
#include "ttsmt/sim_scorer.hpp"

namespace ttsmt {

EvalMode EvalMode::parse(std::string_view text) {
  if (text == "same" || text == "same_as_selection") return same_as_selection();
  if (text == "independent") return independent();
  std::string_view value;
  if (text.starts_with("rho=")) {
    value = text.substr(4);
  } else if (text.starts_with("correlated:")) {
    value = text.substr(11);
  } else {
    throw ConfigError("unknown eval mode '" + std::string(text) +
                      "' (expected same, independent or rho=<value>)");
  }
  std::size_t used = 0;
  double rho = 0.0;
  try {
    rho = std::stod(std::string(value), &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != value.size() || value.empty() || !(rho >= -1.0 && rho <= 1.0)) {
    throw ConfigError("eval mode correlation must be a number in [-1, 1], got '" +
                      std::string(value) + "'");
  }
  return correlated(rho);
}

std::string EvalMode::label() const {
  switch (kind) {
    case Kind::kSameAsSelection:
      return "same";
    case Kind::kIndependent:
      return "independent";
    case Kind::kCorrelated:
      return "rho=" + format_double(rho);
  }
  return "independent";
}

void InterferenceConfig::validate() const {
  law.validate();
  selection_noise.validate();
  if (trials < 1) throw ValidationError("interference study needs trials >= 1");
  if (schedule.empty()) throw ValidationError("interference study needs an N schedule");
  if (modes.empty()) throw ValidationError("interference study needs at least one eval mode");
  const std::int64_t max_n = *std::max_element(schedule.begin(), schedule.end());
  for (std::int64_t n : schedule) {
    if (n < 1) throw ValidationError("schedule entries must be >= 1");
  }
  if (pool_size != 0 && pool_size < max_n) {
    throw ValidationError("pool size " + std::to_string(pool_size) + " is below N=" +
                          std::to_string(max_n));
  }
  for (const auto& m : modes) {
    if (!(m.rho >= -1.0 && m.rho <= 1.0)) throw ValidationError("eval correlation outside [-1, 1]");
  }
}

std::vector<InterferenceCurve> interference_study(const InterferenceConfig& cfg) {
  cfg.validate();
  const std::int64_t m =
      cfg.pool_size != 0 ? cfg.pool_size : *std::max_element(cfg.schedule.begin(), cfg.schedule.end());
  const auto pool = static_cast<std::size_t>(m);
  const double mu = cfg.law.mean();
  const std::pair<double, double> support =
      cfg.law.family == QualityLaw::Family::kUniform ? std::make_pair(cfg.law.a, cfg.law.b)
                                                     : std::make_pair(0.0, 1.0);
  const SimulatedScorer observer(cfg.selection_noise, cfg.seed, cfg.law.stddev(), support);

  MetricId sel_metric;
  sel_metric.name = "selection";
  sel_metric.roles = {MetricRole::kSelection};
  MetricId eval_metric;
  eval_metric.name = "evaluation";
  eval_metric.kind = MetricKind::kRefBased;
  eval_metric.roles = {MetricRole::kEvaluation};

  const std::size_t n_modes = cfg.modes.size();
  const std::size_t n_sched = cfg.schedule.size();
  // value[trial][mode * n_sched + n_index]
  std::vector<std::vector<double>> value(static_cast<std::size_t>(cfg.trials),
                                         std::vector<double>(n_modes * n_sched));
  parallel_for(static_cast<std::size_t>(cfg.trials), [&](std::size_t t) {
    auto latent_eng = StreamKey(cfg.seed, "interference.latent").add(t).engine();
    auto eval_eng = StreamKey(cfg.seed, "interference.eval").add(t).engine();
    const std::string trial_id = "trial-" + std::to_string(t);
    ScoreSet sel{trial_id, sel_metric, std::vector<double>(pool)};
    std::vector<double> fresh(pool);
    for (std::size_t i = 0; i < pool; ++i) {
      const double q = cfg.law.sample(latent_eng);
      sel.scores[i] = observer.observe("selection", trial_id, static_cast<std::int64_t>(i), q);
      fresh[i] = cfg.law.sample(eval_eng);
    }
    ScoreSet eval{trial_id, eval_metric, std::vector<double>(pool)};
    for (std::size_t k = 0; k < n_modes; ++k) {
      const EvalMode& mode = cfg.modes[k];
      for (std::size_t i = 0; i < pool; ++i) {
        const double s = sel.scores[i];
        switch (mode.kind) {
          case EvalMode::Kind::kSameAsSelection:
            eval.scores[i] = s;
            break;
          case EvalMode::Kind::kIndependent:
            eval.scores[i] = fresh[i];
            break;
          case EvalMode::Kind::kCorrelated:
            eval.scores[i] = mode.rho == 1.0
                                 ? s
                                 : mu + mode.rho * (s - mu) +
                                       std::sqrt(1.0 - mode.rho * mode.rho) * (fresh[i] - mu);
            break;
        }
      }
      for (std::size_t j = 0; j < n_sched; ++j) {
        value[t][k * n_sched + j] = expected_bon_exact(sel, eval, cfg.schedule[j]);
      }
    }
  });

  std::vector<InterferenceCurve> out;
  const auto trials = static_cast<double>(cfg.trials);
  for (std::size_t k = 0; k < n_modes; ++k) {
    InterferenceCurve curve{cfg.modes[k], {}};
    for (std::size_t j = 0; j < n_sched; ++j) {
      double sum = 0.0;
      for (const auto& row : value) sum += row[k * n_sched + j];
      const double mean = sum / trials;
      double ss = 0.0;
      for (const auto& row : value) {
        const double d = row[k * n_sched + j] - mean;
        ss += d * d;
      }
      const double se = cfg.trials > 1 ? std::sqrt(ss / (trials - 1.0) / trials) : 0.0;
      curve.points.push_back({cfg.schedule[j], mean, se});
    }
    out.push_back(std::move(curve));
  }
  return out;
}

std::vector<std::vector<double>> simulated_latents(const std::vector<CandidatePool>& pools) {
  std::vector<std::vector<double>> out;
  for (const auto& pool : pools) {
    std::vector<double> q;
    for (const auto& c : pool.candidates) {
      if (!c.latent_quality) {
        throw ValidationError("candidate " + std::to_string(c.cand_idx) + " of \"" + c.seg_id +
                              "\" from backend '" + c.backend_id +
                              "' has no latent quality; interference studies need simulated pools");
      }
      q.push_back(*c.latent_quality);
    }
    out.push_back(std::move(q));
  }
  return out;
}

std::string render_interference_csv(const std::vector<InterferenceCurve>& curves) {
  std::string out = "mode,rho,n,mean,se\n";
  for (const auto& c : curves) {
    for (const auto& p : c.points) {
      out += c.mode.label() + ',' + format_double(c.mode.rho) + ',' + std::to_string(p.n) + ',' +
             format_double(p.mean) + ',' + format_double(p.standard_error) + '\n';
    }
  }
  return out;
}

}  // namespace ttsmt

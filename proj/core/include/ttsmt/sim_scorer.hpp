#pragma once

#include <cstdint>

#include "ttsmt/scoring.hpp"

namespace ttsmt {

/// Observes each candidate's latent quality through a noise model. The score
/// is a pure function of (seed, metric name, seg_id, cand_idx, noise model).
class SimulatedScorer final : public Scorer {
 public:
  /// `latent_std` converts a target correlation into a noise sd; the default
  /// is the sd of Uniform(0, 1). `corrupt_range` bounds rank_corrupt draws.
  SimulatedScorer(NoiseModel noise, std::uint64_t seed, double latent_std = 0.28867513459481287,
                  std::pair<double, double> corrupt_range = {0.0, 1.0});

  std::string id() const override { return "sim"; }
  std::vector<double> score(const MetricId& metric, std::span<const ScoreItem> items) override;

  /// Score of a single observation, exposed for oracles and audits.
  double observe(std::string_view metric, std::string_view seg_id, std::int64_t cand_idx,
                 double latent) const;

  std::size_t calls() const { return calls_; }
  std::size_t items_scored() const { return items_scored_; }

 private:
  NoiseModel noise_;
  std::uint64_t seed_;
  double sigma_;
  std::pair<double, double> corrupt_range_;
  std::size_t calls_ = 0;
  std::size_t items_scored_ = 0;
};

}  // namespace ttsmt

#include "ttsmt/sim_scorer.hpp"

#include "ttsmt/error.hpp"
#include "ttsmt/rng.hpp"

namespace ttsmt {

SimulatedScorer::SimulatedScorer(NoiseModel noise, std::uint64_t seed, double latent_std,
                                 std::pair<double, double> corrupt_range)
    : noise_(noise), seed_(seed), corrupt_range_(corrupt_range) {
  noise_.validate();
  sigma_ = noise_.effective_sigma(latent_std);
}

double SimulatedScorer::observe(std::string_view metric, std::string_view seg_id,
                                std::int64_t cand_idx, double latent) const {
  switch (noise_.family) {
    case NoiseModel::Family::kNone:
      return latent;
    case NoiseModel::Family::kGaussian: {
      if (sigma_ == 0.0) return latent;
      auto eng = StreamKey(seed_, "qe.gaussian").add(metric).add(seg_id)
                     .add(static_cast<std::uint64_t>(cand_idx)).engine();
      return latent + sigma_ * standard_normal(eng);
    }
    case NoiseModel::Family::kRankCorrupt: {
      auto eng = StreamKey(seed_, "qe.corrupt").add(metric).add(seg_id)
                     .add(static_cast<std::uint64_t>(cand_idx)).engine();
      if (uniform01(eng) < sigma_) {
        return corrupt_range_.first +
               (corrupt_range_.second - corrupt_range_.first) * uniform01(eng);
      }
      return latent;
    }
  }
  return latent;
}

std::vector<double> SimulatedScorer::score(const MetricId& metric,
                                           std::span<const ScoreItem> items) {
  ++calls_;
  items_scored_ += items.size();
  std::vector<double> out;
  out.reserve(items.size());
  for (const auto& item : items) {
    if (!item.latent_quality) {
      throw ValidationError("simulated scorer needs latent quality for " +
                            std::string(item.seg_id) + "#" + std::to_string(item.cand_idx) +
                            " (candidates were not produced by the simulator)");
    }
    out.push_back(observe(metric.name, item.seg_id, item.cand_idx, *item.latent_quality));
  }
  return out;
}

}  // namespace ttsmt

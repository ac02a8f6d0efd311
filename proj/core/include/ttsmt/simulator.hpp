#pragma once

#include <cstdint>
#include <string>

#include "ttsmt/generation.hpp"

namespace ttsmt {

/// Distribution of per-candidate latent quality in the simulator.
struct QualityLaw {
  enum class Family { kUniform, kBeta };

  Family family = Family::kUniform;
  /// Uniform: lower/upper bound. Beta: alpha/beta shape parameters.
  double a = 0.0;
  double b = 1.0;
  /// Fraction of candidates whose text is replaced by Han-script output,
  /// mimicking the low-resource code-switching failure.
  double codeswitch_rate = 0.0;

  static QualityLaw uniform(double lo = 0.0, double hi = 1.0) {
    return {Family::kUniform, lo, hi, 0.0};
  }
  static QualityLaw beta(double alpha, double beta) { return {Family::kBeta, alpha, beta, 0.0}; }

  void validate() const;
  double mean() const;
  double stddev() const;

  template <class Engine>
  double sample(Engine& eng) const;
};

/// Deterministic stand-in for an LLM: each candidate's latent quality is a pure
/// function of (seed, seg_id, cand_idx), and its text is a corruption of the
/// segment's first reference (or source) whose severity tracks 1 - quality.
class SimulatorBackend final : public GenerationBackend {
 public:
  explicit SimulatorBackend(QualityLaw law, std::string id = "sim");

  std::string id() const override { return id_; }
  std::vector<Completion> complete(const GenerationRequest& request) override;

  const QualityLaw& law() const { return law_; }

  double latent_quality(std::uint64_t seed, std::string_view seg_id, std::int64_t cand_idx) const;
  bool is_codeswitched(std::uint64_t seed, std::string_view seg_id, std::int64_t cand_idx) const;
  std::string synthesize_text(const Segment& seg, std::uint64_t seed, std::int64_t cand_idx,
                              double quality, std::int64_t max_tokens) const;

 private:
  QualityLaw law_;
  std::string id_;
};

/// Convenience: a full simulated pool for one segment.
CandidatePool simulate_candidates(const Segment& seg, const DecodeConfig& cfg,
                                  const QualityLaw& law);

}  // namespace ttsmt

#pragma once

#include <chrono>
#include <string>
#include <vector>

#include "ttsmt/http_backend.hpp"
#include "ttsmt/scoring.hpp"

namespace ttsmt {

struct RemoteScorerConfig {
  /// Service root, e.g. "http://localhost:8080".
  std::string url = "http://localhost:8080";
  std::size_t batch_size = 64;
  int max_concurrent = 4;
  std::chrono::seconds timeout{300};
  RetryPolicy retry;
};

/// Client for the scorer service: POST /score with
/// {"metric", "pairs": [{"src", "hyp", "refs"|null}]} -> {"scores": [...]},
/// GET /healthz -> {"metric_names": [...]}.
class RemoteScorer final : public Scorer {
 public:
  explicit RemoteScorer(RemoteScorerConfig config);

  std::string id() const override { return "remote:" + config_.url; }
  std::vector<double> score(const MetricId& metric, std::span<const ScoreItem> items) override;

  /// Metric names the service reports; throws BackendError if not healthy.
  std::vector<std::string> health() const;

 private:
  RemoteScorerConfig config_;
};

}  // namespace ttsmt

#pragma once

#include <chrono>
#include <cstdint>
#include <string>

#include "ttsmt/generation.hpp"

namespace ttsmt {

struct RetryPolicy {
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{500};
  std::chrono::milliseconds max_backoff{8000};
};

struct HttpBackendConfig {
  /// Base URL of an OpenAI-compatible server, e.g. "http://localhost:8000/v1".
  /// Requests go to base_url + "/chat/completions".
  std::string base_url = "http://localhost:8000/v1";
  std::string model;
  /// Environment variable holding the bearer token; unset or empty sends none.
  std::string api_key_env = "OPENAI_API_KEY";
  /// Ask for several choices per request via "n". When false, one request is
  /// issued per candidate.
  bool supports_n = true;
  /// Upper bound on "n" per request (0: the whole pool in one request).
  std::int64_t max_n_per_request = 0;
  int max_in_flight = 8;
  std::chrono::seconds timeout{120};
  RetryPolicy retry;
};

/// Chat-completions client. Each request carries model, messages, temperature,
/// top_p, n, max_tokens and a seed derived from (decode.seed, first index) so
/// that sequential single-choice requests are not identical.
class HttpBackend final : public GenerationBackend {
 public:
  explicit HttpBackend(HttpBackendConfig config);

  std::string id() const override;
  std::vector<Completion> complete(const GenerationRequest& request) override;

  const HttpBackendConfig& config() const { return config_; }

 private:
  HttpBackendConfig config_;
};

}  // namespace ttsmt

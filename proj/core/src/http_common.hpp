#pragma once

#include <chrono>
#include <string>
#include <vector>

#include "ttsmt/http_backend.hpp"

namespace ttsmt::detail {

struct Endpoint {
  /// "http://host:port" as accepted by httplib::Client.
  std::string origin;
  /// Path prefix without trailing slash, e.g. "/v1".
  std::string prefix;
};

/// Throws ConfigError for anything other than http(s)://host[:port][/path].
Endpoint parse_endpoint(const std::string& url);

struct HttpResponse {
  int status = 0;
  std::string body;
};

/// POSTs JSON, retrying network errors and 408/409/429/5xx with capped
/// exponential backoff (honouring Retry-After seconds). Other statuses and
/// exhausted retries raise BackendError mentioning `what`.
HttpResponse post_json(const Endpoint& ep, const std::string& path, const std::string& body,
                       const std::vector<std::pair<std::string, std::string>>& headers,
                       std::chrono::seconds timeout, const RetryPolicy& retry,
                       const std::string& what);

/// Single GET without retries; status 0 on connection failure.
HttpResponse get(const Endpoint& ep, const std::string& path, std::chrono::seconds timeout);

}  // namespace ttsmt::detail

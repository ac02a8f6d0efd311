#include "ttsmt/http_backend.hpp"

#include <algorithm>
#include <cstdlib>
#include <mutex>
#include <thread>

#include <httplib.h>

#include "http_common.hpp"
#include "ttsmt/error.hpp"

namespace ttsmt {

namespace detail {

Endpoint parse_endpoint(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError("URL '" + url + "' has no scheme");
  }
  const std::string scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw ConfigError("URL '" + url + "' must use http or https");
  }
  const auto host_start = scheme_end + 3;
  const auto path_start = url.find('/', host_start);
  Endpoint ep;
  ep.origin = url.substr(0, path_start);
  if (ep.origin.size() <= host_start) throw ConfigError("URL '" + url + "' has no host");
  if (path_start != std::string::npos) {
    ep.prefix = url.substr(path_start);
    while (!ep.prefix.empty() && ep.prefix.back() == '/') ep.prefix.pop_back();
  }
  return ep;
}

namespace {

bool retryable(int status) {
  return status == 408 || status == 409 || status == 429 || (status >= 500 && status <= 599);
}

}  // namespace

HttpResponse post_json(const Endpoint& ep, const std::string& path, const std::string& body,
                       const std::vector<std::pair<std::string, std::string>>& headers,
                       std::chrono::seconds timeout, const RetryPolicy& retry,
                       const std::string& what) {
  httplib::Headers hdrs;
  for (const auto& [k, v] : headers) hdrs.emplace(k, v);
  std::string last_error;
  std::chrono::milliseconds backoff = retry.initial_backoff;
  for (int attempt = 0; attempt <= retry.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(backoff);
      backoff = std::min(retry.max_backoff, backoff * 2);
    }
    httplib::Client client(ep.origin);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    auto res = client.Post(ep.prefix + path, hdrs, body, "application/json");
    if (!res) {
      last_error = "connection failed (" + httplib::to_string(res.error()) + ")";
      continue;
    }
    if (res->status >= 200 && res->status < 300) {
      return {res->status, res->body};
    }
    last_error = "HTTP " + std::to_string(res->status);
    if (!retryable(res->status)) break;
    if (auto ra = res->get_header_value("Retry-After"); !ra.empty()) {
      char* end = nullptr;
      const double secs = std::strtod(ra.c_str(), &end);
      if (end != ra.c_str() && secs >= 0) {
        backoff = std::min(retry.max_backoff,
                           std::chrono::milliseconds(static_cast<long>(secs * 1000.0)));
      }
    }
  }
  throw BackendError(what + ": " + last_error + " after " + std::to_string(retry.max_retries) +
                     " retries");
}

HttpResponse get(const Endpoint& ep, const std::string& path, std::chrono::seconds timeout) {
  httplib::Client client(ep.origin);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  auto res = client.Get(ep.prefix + path);
  if (!res) return {0, {}};
  return {res->status, res->body};
}

}  // namespace detail

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
  detail::parse_endpoint(config_.base_url);
  if (config_.model.empty()) throw ConfigError("http backend needs a model name");
  if (config_.max_in_flight < 1) throw ConfigError("max_in_flight must be >= 1");
}

std::string HttpBackend::id() const { return "http:" + config_.model; }

namespace {

struct Batch {
  std::int64_t first = 0;
  std::int64_t count = 0;
};

}  // namespace

std::vector<Completion> HttpBackend::complete(const GenerationRequest& request) {
  const detail::Endpoint ep = detail::parse_endpoint(config_.base_url);
  const std::int64_t n_cand = request.decode.n_cand;

  std::vector<Batch> batches;
  std::int64_t per_request = 1;
  if (config_.supports_n) {
    per_request = config_.max_n_per_request > 0 ? config_.max_n_per_request : n_cand;
  }
  for (std::int64_t first = 0; first < n_cand; first += per_request) {
    batches.push_back({first, std::min(per_request, n_cand - first)});
  }

  std::vector<std::pair<std::string, std::string>> headers;
  if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key) {
    headers.emplace_back("Authorization", std::string("Bearer ") + key);
  }

  json messages = json::array();
  for (const auto& m : request.prompt) {
    messages.push_back({{"role", m.role}, {"content", m.content}});
  }

  std::vector<Completion> out(static_cast<std::size_t>(n_cand));
  auto run_batch = [&](const Batch& batch) {
    json body = {
        {"model", config_.model},
        {"messages", messages},
        {"temperature", request.decode.temperature},
        {"top_p", request.decode.top_p},
        {"n", batch.count},
        {"max_tokens", request.decode.max_new_tokens},
        {"seed", request.decode.seed + static_cast<std::uint64_t>(batch.first)},
    };
    const std::string what = "chat completion for segment \"" + request.segment.id + "\"";
    auto res = detail::post_json(ep, "/chat/completions", dump_line(body), headers,
                                 config_.timeout, config_.retry, what);
    json reply;
    try {
      reply = json::parse(res.body);
    } catch (const json::parse_error&) {
      throw BackendError(what + ": response is not JSON");
    }
    const auto choices = reply.find("choices");
    if (choices == reply.end() || !choices->is_array() ||
        choices->size() != static_cast<std::size_t>(batch.count)) {
      throw BackendError(what + ": expected " + std::to_string(batch.count) + " choices");
    }
    std::optional<std::int64_t> prompt_tokens;
    std::optional<std::int64_t> completion_tokens;
    if (auto usage = reply.find("usage"); usage != reply.end() && usage->is_object()) {
      if (auto p = usage->find("prompt_tokens"); p != usage->end() && p->is_number_integer()) {
        prompt_tokens = p->get<std::int64_t>();
      }
      if (auto c = usage->find("completion_tokens"); c != usage->end() && c->is_number_integer()) {
        completion_tokens = c->get<std::int64_t>();
      }
    }
    for (std::size_t k = 0; k < choices->size(); ++k) {
      const json& choice = (*choices)[k];
      std::size_t slot = k;
      if (auto idx = choice.find("index"); idx != choice.end() && idx->is_number_integer()) {
        slot = idx->get<std::size_t>();
      }
      if (slot >= static_cast<std::size_t>(batch.count)) {
        throw BackendError(what + ": choice index out of range");
      }
      const json* content = nullptr;
      if (auto msg = choice.find("message"); msg != choice.end() && msg->is_object()) {
        if (auto c = msg->find("content"); c != msg->end() && c->is_string()) content = &*c;
      }
      if (!content) throw BackendError(what + ": choice without message.content");
      Completion& dst = out[static_cast<std::size_t>(batch.first) + slot];
      dst.text = content->get<std::string>();
      dst.prompt_tokens = prompt_tokens;
      // Usage is per request; it only pins a single candidate's length.
      if (batch.count == 1) dst.gen_tokens = completion_tokens;
    }
  };

  std::mutex mu;
  std::size_t next = 0;
  std::exception_ptr failure;
  auto worker = [&] {
    while (true) {
      Batch batch;
      {
        std::lock_guard lock(mu);
        if (failure || next >= batches.size()) return;
        batch = batches[next++];
      }
      try {
        run_batch(batch);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };
  const auto workers = std::min<std::size_t>(batches.size(), static_cast<std::size_t>(config_.max_in_flight));
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace ttsmt

#include "ttsmt/remote_scorer.hpp"

#include <algorithm>
#include <mutex>
#include <thread>

#include "http_common.hpp"
#include "ttsmt/error.hpp"

namespace ttsmt {

RemoteScorer::RemoteScorer(RemoteScorerConfig config) : config_(std::move(config)) {
  detail::parse_endpoint(config_.url);
  if (config_.batch_size == 0) throw ConfigError("scorer batch_size must be >= 1");
  if (config_.max_concurrent < 1) throw ConfigError("scorer max_concurrent must be >= 1");
}

std::vector<std::string> RemoteScorer::health() const {
  const auto ep = detail::parse_endpoint(config_.url);
  auto res = detail::get(ep, "/healthz", config_.timeout);
  if (res.status != 200) {
    throw BackendError("scorer at " + config_.url + " is not healthy (status " +
                       std::to_string(res.status) + ")");
  }
  try {
    json body = json::parse(res.body);
    return body.at("metric_names").get<std::vector<std::string>>();
  } catch (const json::exception&) {
    throw BackendError("scorer at " + config_.url + " returned a malformed /healthz body");
  }
}

std::vector<double> RemoteScorer::score(const MetricId& metric, std::span<const ScoreItem> items) {
  const auto ep = detail::parse_endpoint(config_.url);
  std::vector<double> out(items.size(), 0.0);
  const std::size_t n_batches = (items.size() + config_.batch_size - 1) / config_.batch_size;

  auto run_batch = [&](std::size_t b) {
    const std::size_t first = b * config_.batch_size;
    const std::size_t last = std::min(items.size(), first + config_.batch_size);
    json pairs = json::array();
    for (std::size_t i = first; i < last; ++i) {
      const ScoreItem& it = items[i];
      json pair = {{"src", std::string(it.src)}, {"hyp", std::string(it.hyp)}};
      pair["refs"] = it.refs ? json(*it.refs) : json(nullptr);
      pairs.push_back(std::move(pair));
    }
    json body = {{"metric", metric.name}, {"pairs", std::move(pairs)}};
    const std::string what = "scoring batch " + std::to_string(b) + " with '" + metric.name + "'";
    auto res = detail::post_json(ep, "/score", dump_line(body), {}, config_.timeout, config_.retry,
                                 what);
    std::vector<double> scores;
    try {
      scores = json::parse(res.body).at("scores").get<std::vector<double>>();
    } catch (const json::exception&) {
      throw BackendError(what + ": malformed response");
    }
    if (scores.size() != last - first) {
      throw BackendError(what + ": expected " + std::to_string(last - first) + " scores, got " +
                         std::to_string(scores.size()));
    }
    std::copy(scores.begin(), scores.end(), out.begin() + static_cast<std::ptrdiff_t>(first));
  };

  std::mutex mu;
  std::size_t next = 0;
  std::exception_ptr failure;
  auto worker = [&] {
    while (true) {
      std::size_t b;
      {
        std::lock_guard lock(mu);
        if (failure || next >= n_batches) return;
        b = next++;
      }
      try {
        run_batch(b);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };
  const auto workers = std::min<std::size_t>(n_batches, static_cast<std::size_t>(config_.max_concurrent));
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace ttsmt

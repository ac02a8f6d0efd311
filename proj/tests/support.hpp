#pragma once

#include <unistd.h>

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "ttsmt/scoring.hpp"

namespace ttsmt::testing {

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(TTSMT_FIXTURE_DIR) / name;
}

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("ttsmt-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline MetricId qe_metric(const std::string& name = "qe") {
  MetricId m;
  m.name = name;
  m.kind = MetricKind::kQe;
  m.roles = {MetricRole::kSelection};
  return m;
}

inline MetricId ref_metric(const std::string& name = "ref") {
  MetricId m;
  m.name = name;
  m.kind = MetricKind::kRefBased;
  m.roles = {MetricRole::kEvaluation};
  return m;
}

inline ScoreSet make_set(const std::string& seg, const MetricId& metric, std::vector<double> scores) {
  return ScoreSet{seg, metric, std::move(scores)};
}

/// Pools of uniform random selection and eval scores.
struct RandomPools {
  std::vector<ScoreSet> sel;
  std::vector<ScoreSet> eval;

  RandomPools(std::size_t pools, std::size_t m, std::uint64_t seed) {
    std::mt19937_64 eng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t p = 0; p < pools; ++p) {
      std::vector<double> s(m), e(m);
      for (std::size_t i = 0; i < m; ++i) {
        s[i] = u(eng);
        e[i] = u(eng);
      }
      const std::string id = "seg-" + std::to_string(p);
      sel.push_back(make_set(id, qe_metric(), s));
      eval.push_back(make_set(id, ref_metric(), e));
    }
  }

  std::vector<const ScoreSet*> sel_ptrs() const { return ptrs(sel); }
  std::vector<const ScoreSet*> eval_ptrs() const { return ptrs(eval); }

 private:
  static std::vector<const ScoreSet*> ptrs(const std::vector<ScoreSet>& v) {
    std::vector<const ScoreSet*> out;
    for (const auto& s : v) out.push_back(&s);
    return out;
  }
};

}  // namespace ttsmt::testing

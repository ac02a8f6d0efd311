#include "ttsmt/parallel.hpp"

namespace ttsmt {

namespace {
std::atomic<std::size_t> g_max_jobs{0};
}

void set_max_jobs(std::size_t jobs) { g_max_jobs.store(jobs); }

std::size_t max_jobs() {
  std::size_t jobs = g_max_jobs.load();
  if (jobs == 0) {
    jobs = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  }
  return jobs;
}

}  // namespace ttsmt

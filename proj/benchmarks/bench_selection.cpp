#include <benchmark/benchmark.h>

#include <random>

#include "ttsmt/selection.hpp"

namespace {

struct Pools {
  std::vector<ttsmt::ScoreSet> sel, eval;
  std::vector<const ttsmt::ScoreSet*> sp, ep;

  Pools(std::size_t n, std::size_t m) {
    std::mt19937_64 eng(9);
    std::uniform_real_distribution<double> u;
    ttsmt::MetricId q;
    q.name = "qe";
    q.kind = ttsmt::MetricKind::kQe;
    ttsmt::MetricId r;
    r.name = "ref";
    r.kind = ttsmt::MetricKind::kRefBased;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> s(m), e(m);
      for (std::size_t k = 0; k < m; ++k) {
        s[k] = u(eng);
        e[k] = u(eng);
      }
      sel.push_back({"s" + std::to_string(i), q, s});
      eval.push_back({"s" + std::to_string(i), r, e});
    }
    for (std::size_t i = 0; i < n; ++i) {
      sp.push_back(&sel[i]);
      ep.push_back(&eval[i]);
    }
  }
};

void BM_SubsampleCurve(benchmark::State& state) {
  const Pools p(50, 256);
  const ttsmt::DrawPlan plan{ttsmt::power_of_two_schedule(256), state.range(0), 1, false};
  for (auto _ : state) benchmark::DoNotOptimize(ttsmt::subsample_curve(p.sp, p.ep, plan));
}
BENCHMARK(BM_SubsampleCurve)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_ExpectedExact(benchmark::State& state) {
  const Pools p(1, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(ttsmt::expected_bon_exact(p.sel[0], p.eval[0], state.range(0) / 4));
  }
}
BENCHMARK(BM_ExpectedExact)->Arg(64)->Arg(1024);

}  // namespace

BENCHMARK_MAIN();

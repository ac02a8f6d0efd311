#include <benchmark/benchmark.h>

#include "ttsmt/codeswitch.hpp"

namespace {

void BM_Detect(benchmark::State& state) {
  std::string text;
  for (int i = 0; i < state.range(0); ++i) {
    text += i % 5 == 0 ? "监狱系统以提供所需的支持 " : "Takk fyrir yndislegt kvöld ";
  }
  for (auto _ : state) benchmark::DoNotOptimize(ttsmt::detect(text, "is"));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(text.size()));
}
BENCHMARK(BM_Detect)->Arg(1)->Arg(100);

}  // namespace

BENCHMARK_MAIN();

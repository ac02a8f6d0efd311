#include <benchmark/benchmark.h>

#include <random>

#include "ttsmt/textmetrics.hpp"

namespace {

std::vector<std::string> corpus(std::size_t n, std::uint64_t seed) {
  static const std::vector<std::string> vocab = {"the", "house", "is", "big", ",", "and", "not",
                                                 "small", ".", "we", "saw", "3.5", "km", "(a)"};
  std::mt19937_64 eng(seed);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::string s;
    for (int w = 0; w < 25; ++w) s += (w ? " " : "") + vocab[eng() % vocab.size()];
    out.push_back(std::move(s));
  }
  return out;
}

void BM_CorpusBleu(benchmark::State& state) {
  const auto hyps = corpus(static_cast<std::size_t>(state.range(0)), 1);
  std::vector<std::vector<std::string>> refs;
  for (const auto& r : corpus(hyps.size(), 2)) refs.push_back({r});
  for (auto _ : state) benchmark::DoNotOptimize(ttsmt::bleu_corpus(hyps, refs));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CorpusBleu)->Arg(100)->Arg(1000);

void BM_CorpusChrfpp(benchmark::State& state) {
  const auto hyps = corpus(static_cast<std::size_t>(state.range(0)), 3);
  std::vector<std::vector<std::string>> refs;
  for (const auto& r : corpus(hyps.size(), 4)) refs.push_back({r});
  for (auto _ : state) benchmark::DoNotOptimize(ttsmt::chrfpp_corpus(hyps, refs));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CorpusChrfpp)->Arg(100)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();

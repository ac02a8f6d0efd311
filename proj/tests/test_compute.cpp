#include <gtest/gtest.h>

#include "support.hpp"
#include "ttsmt/compute.hpp"
#include "ttsmt/error.hpp"
#include "ttsmt/registry.hpp"
#include "ttsmt/simulator.hpp"

using namespace ttsmt;

namespace {

ModelSpec toy(ModelFamily f, std::int64_t layers = 2) {
  ModelSpec s;
  s.name = f == ModelFamily::kDecoderSwiglu ? "toy-dec" : "toy-enc";
  s.family = f;
  s.layers = layers;
  s.hidden = 4;
  s.mlp = 8;
  return s;
}

UsageProfile usage(double p, double t, double s, std::int64_t n) {
  UsageProfile u;
  u.prompt_tokens = p;
  u.gen_tokens = t;
  u.qe_tokens = s;
  u.n_cand = n;
  return u;
}

}  // namespace

TEST(NonEmbed, HandEvaluations) {
  EXPECT_EQ(nonembed_params(toy(ModelFamily::kDecoderSwiglu)), 320);
  EXPECT_EQ(nonembed_params(toy(ModelFamily::kEncoderGelu)), 256);
  EXPECT_EQ(nonembed_params(toy(ModelFamily::kDecoderSwiglu, 0)), 0);
}

TEST(NonEmbed, LargeShapesDoNotOverflow) {
  ModelSpec s;
  s.name = "big";
  s.layers = 80;
  s.hidden = 8192;
  s.mlp = 29568;
  const std::int64_t expect = 80 * (4 * 8192LL * 8192 + 3 * 8192LL * 29568);
  EXPECT_EQ(nonembed_params(s), expect);
}

TEST(Cost, GenerationHandValues) {
  const ModelSpec d = toy(ModelFamily::kDecoderSwiglu);
  EXPECT_EQ(gen_cost(d, usage(10, 5, 7, 2)), 12800.0);
  EXPECT_EQ(gen_cost(d, usage(10, 5, 7, 0)), 2.0 * 320 * 10);
  for (std::int64_t n : {1, 3, 64}) {
    EXPECT_EQ(gen_cost(d, usage(10, 5, 7, 2 * n)) - gen_cost(d, usage(10, 5, 7, n)), 2.0 * 320 * n * 5);
  }
  EXPECT_THROW(gen_cost(toy(ModelFamily::kEncoderGelu), usage(1, 1, 1, 1)), ValidationError);
}

TEST(Cost, QeHandValues) {
  const ModelSpec e = toy(ModelFamily::kEncoderGelu);
  EXPECT_EQ(qe_cost(e, usage(10, 5, 7, 3)), 10752.0);
  EXPECT_EQ(qe_cost(e, usage(10, 5, 0, 1)), 0.0);
  EXPECT_EQ(qe_cost(e, usage(10, 5, 7, 0)), 0.0);
  EXPECT_EQ(qe_cost(e, usage(10, 5, 7, 8)), 2 * qe_cost(e, usage(10, 5, 7, 4)));
  EXPECT_THROW(qe_cost(toy(ModelFamily::kDecoderSwiglu), usage(1, 1, 1, 1)), ValidationError);
}

TEST(Cost, TotalLedger) {
  const ModelSpec d = toy(ModelFamily::kDecoderSwiglu), e = toy(ModelFamily::kEncoderGelu);
  const ComputeLedger l = total_cost(d, &e, usage(10, 5, 7, 2));
  EXPECT_EQ(l.c_gen, 12800.0);
  EXPECT_EQ(l.c_qe, 7168.0);
  EXPECT_EQ(l.c_total, 19968.0);
  EXPECT_EQ(l.per, LedgerScope::kSegment);
  EXPECT_DOUBLE_EQ(l.total_tflops(), 19968.0 / 1e12);
  const ComputeLedger no_qe = total_cost(d, nullptr, usage(10, 5, 7, 1));
  EXPECT_EQ(no_qe.c_total, no_qe.c_gen);
  EXPECT_EQ(no_qe.c_qe, 0.0);
}

TEST(Cost, PrefillPaidOnce) {
  const ModelSpec d = toy(ModelFamily::kDecoderSwiglu), e = toy(ModelFamily::kEncoderGelu);
  const ComputeLedger a = total_cost(d, &e, usage(10, 5, 7, 1));
  const ComputeLedger b = total_cost(d, &e, usage(10, 5, 7, 1024));
  EXPECT_EQ(b.c_gen - a.c_gen, 2.0 * 320 * 1023 * 5);
  EXPECT_EQ(b.c_qe - a.c_qe, 2.0 * 256 * 1023 * 7);
}

TEST(Cost, AffineInN) {
  const ModelSpec d = toy(ModelFamily::kDecoderSwiglu), e = toy(ModelFamily::kEncoderGelu);
  const double c1 = total_cost(d, &e, usage(10, 5, 7, 1)).c_total;
  const double c2 = total_cost(d, &e, usage(10, 5, 7, 2)).c_total;
  const double c5 = total_cost(d, &e, usage(10, 5, 7, 5)).c_total;
  EXPECT_EQ((c2 - c1) * (5 - 1), (c5 - c1) * (2 - 1));
}

TEST(Cost, ApproximateUsageIsRecorded) {
  const ModelSpec d = toy(ModelFamily::kDecoderSwiglu);
  UsageProfile u = usage(10, 5, 7, 2);
  u.approximate = true;
  const ComputeLedger l = total_cost(d, nullptr, u);
  ASSERT_FALSE(l.assumptions.empty());
  bool found = false;
  for (const auto& a : l.assumptions) found |= a.find("approximate") != std::string::npos;
  EXPECT_TRUE(found);
}

TEST(Usage, Validation) {
  EXPECT_THROW(usage(-1, 5, 7, 2).validate(), ValidationError);
  EXPECT_THROW(usage(1, 5, 7, -2).validate(), ValidationError);
  const ModelSpec d = toy(ModelFamily::kDecoderSwiglu);
  EXPECT_THROW(gen_cost(d, usage(1, -5, 7, 2)), ValidationError);
}

TEST(Memory, WeightsOnly) {
  ModelSpec s = toy(ModelFamily::kDecoderSwiglu);
  s.total_params = 14'000'000'000;
  const MemoryEstimate m = memory_estimate(s, 2.0);
  EXPECT_EQ(m.bytes, 28e9);
  EXPECT_EQ(m.gigabytes(), 28.0);
  EXPECT_EQ(m.label, "weights-only lower bound");
  s.total_params = 7'000'000'000;
  EXPECT_EQ(memory_estimate(s, 2.0).gigabytes(), 14.0);
  s.total_params = 0;
  EXPECT_EQ(memory_estimate(s, 2.0).bytes, 0.0);
}

TEST(Memory, MissingCount) {
  const ModelSpec s = toy(ModelFamily::kDecoderSwiglu);
  EXPECT_THROW(memory_estimate(s, 2.0), ValidationError);
  EXPECT_EQ(memory_estimate(s, 2.0, true).bytes, 640.0);
}

TEST(MeasureUsage, AveragesFromPools) {
  Segment seg;
  seg.id = "a";
  seg.pair = {"en", "de"};
  seg.domain = "news";
  seg.src = "one two three";
  seg.refs = {"eins zwei drei vier"};
  CandidatePool pool;
  pool.seg_id = "a";
  pool.candidates = {{"a", 0, "x y", 20, 2, "t", {}, false}, {"a", 1, "x y z w", 20, 4, "t", {}, true}};
  const UsageProfile u = measure_usage({pool}, Dataset("d", {seg}));
  EXPECT_EQ(u.prompt_tokens, 20.0);
  EXPECT_EQ(u.gen_tokens, 3.0);
  EXPECT_EQ(u.qe_tokens, (3.0 + 2.0 + 3.0 + 4.0) / 2.0);
  EXPECT_EQ(u.n_cand, 2);
  EXPECT_TRUE(u.measured);
  EXPECT_TRUE(u.approximate);
}

TEST(FlopsCsv, Header) {
  const ModelSpec d = toy(ModelFamily::kDecoderSwiglu), e = toy(ModelFamily::kEncoderGelu);
  const std::string csv = render_flops_csv({flops_row(d, &e, usage(10, 5, 7, 2))});
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "model,qe_model,n,P,T,S_qe,c_gen,c_qe,c_total_tflops");
  EXPECT_NE(csv.find("toy-dec,toy-enc,2,10,5,7,12800,7168,"), std::string::npos) << csv;
}

TEST(Registry, ParsesAndRejects) {
  const ModelRegistry r = parse_registry(R"(
[[model]]
name = "a"
family = "decoder_swiglu"
layers = 2
hidden = 4
mlp = 8
total_params = 1_000

[[model]]
name = "b"
family = "encoder_gelu"
layers = 2
hidden = 4
mlp = 8
)");
  EXPECT_EQ(r.size(), 2u);
  EXPECT_EQ(r.at("a").total_params, 1000);
  EXPECT_FALSE(r.at("b").total_params.has_value());
  EXPECT_EQ(r.at("b").family, ModelFamily::kEncoderGelu);
  EXPECT_EQ(r.find("c"), nullptr);
  EXPECT_THROW(r.at("c"), ConfigError);
  EXPECT_THROW(parse_registry(""), ConfigError);
  EXPECT_THROW(parse_registry("[[model]]\nname = \"a\"\nfamily = \"rnn\"\nlayers = 1\nhidden = 1\nmlp = 1\n"),
               ConfigError);
  EXPECT_THROW(parse_registry("[[model]]\nname = \"a\"\nfamily = \"encoder_gelu\"\nlayers = 1\nhidden = 0\nmlp = 1\n"),
               ConfigError);
}

TEST(Registry, ShippedModels) {
  const ModelRegistry r = load_registry(std::filesystem::path(TTSMT_FIXTURE_DIR) / "../../config/models.toml");
  for (const char* name : {"qwen2.5-3b", "qwen2.5-7b", "qwen2.5-14b", "qwen2.5-32b", "qwen2.5-72b", "kiwi22",
                           "toy-dec", "toy-enc"}) {
    EXPECT_NE(r.find(name), nullptr) << name;
  }
  EXPECT_EQ(nonembed_params(r.at("toy-dec")), 320);
  EXPECT_EQ(r.at("kiwi22").family, ModelFamily::kEncoderGelu);
}

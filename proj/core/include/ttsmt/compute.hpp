#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ttsmt/corpus.hpp"
#include "ttsmt/generation.hpp"

namespace ttsmt {

enum class ModelFamily { kDecoderSwiglu, kEncoderGelu };

std::string_view to_string(ModelFamily family);
/// "decoder_swiglu" or "encoder_gelu"; ConfigError otherwise.
ModelFamily parse_model_family(std::string_view text);

struct ModelSpec {
  std::string name;
  ModelFamily family = ModelFamily::kDecoderSwiglu;
  std::int64_t layers = 0;
  std::int64_t hidden = 0;
  std::int64_t mlp = 0;
  /// Published headline parameter count, embeddings included.
  std::optional<std::int64_t> total_params;

  /// Layers may be zero; widths must be positive.
  void validate() const;
};

/// Per-segment token usage. P is paid once; T and S_QE are per candidate.
struct UsageProfile {
  double prompt_tokens = 0.0;
  double gen_tokens = 0.0;
  double qe_tokens = 0.0;
  std::int64_t n_cand = 0;
  /// Averaged from candidate records rather than declared.
  bool measured = false;
  /// Some token counts came from the approximate counter.
  bool approximate = false;

  void validate() const;
  UsageProfile with_n(std::int64_t n) const {
    UsageProfile u = *this;
    u.n_cand = n;
    return u;
  }
};

enum class LedgerScope { kSegment, kCorpus };

struct ComputeLedger {
  double c_gen = 0.0;
  double c_qe = 0.0;
  double c_total = 0.0;
  LedgerScope per = LedgerScope::kSegment;
  std::vector<std::string> assumptions;

  double total_tflops() const { return c_total / 1e12; }
};

/// Decoder (SwiGLU): L(4d^2 + 3 d d_ff). Encoder (GELU): L(4d^2 + 2 d d_ff).
std::int64_t nonembed_params(const ModelSpec& spec);

/// 2 N (P + n T). Throws ValidationError for an encoder spec.
double gen_cost(const ModelSpec& spec, const UsageProfile& usage);
/// 2 N n S_QE. Throws ValidationError for a decoder spec.
double qe_cost(const ModelSpec& spec, const UsageProfile& usage);
/// Per-segment ledger. Without a QE spec the selection cost is zero.
ComputeLedger total_cost(const ModelSpec& gen_spec, const ModelSpec* qe_spec,
                         const UsageProfile& usage);

struct MemoryEstimate {
  double bytes = 0.0;
  double params = 0.0;
  std::string label = "weights-only lower bound";
  /// Where the parameter count came from.
  std::string convention;

  double gigabytes() const { return bytes / 1e9; }
};

/// total_params x bytes_per_param. Excludes KV cache and activations. With
/// `derive_from_shape`, a missing total_params falls back to the
/// non-embedding count; otherwise a missing count is a ValidationError.
MemoryEstimate memory_estimate(const ModelSpec& spec, double bytes_per_param,
                               bool derive_from_shape = false);

/// P averaged over pools; T and S_QE averaged over every candidate.
UsageProfile measure_usage(const std::vector<CandidatePool>& pools, const Dataset& dataset);

// flops report ---------------------------------------------------------------

struct FlopsRow {
  std::string model;
  std::string qe_model;
  std::int64_t n = 0;
  double prompt_tokens = 0.0;
  double gen_tokens = 0.0;
  double qe_tokens = 0.0;
  double c_gen = 0.0;
  double c_qe = 0.0;
  double c_total_tflops = 0.0;
};

FlopsRow flops_row(const ModelSpec& gen_spec, const ModelSpec* qe_spec, const UsageProfile& usage);
std::string render_flops_csv(const std::vector<FlopsRow>& rows);

}  // namespace ttsmt

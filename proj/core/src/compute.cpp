#include "ttsmt/compute.hpp"

#include <cmath>
#include <limits>

#include "ttsmt/error.hpp"
#include "ttsmt/io.hpp"
#include "ttsmt/scoring.hpp"

namespace ttsmt {

std::string_view to_string(ModelFamily family) {
  return family == ModelFamily::kDecoderSwiglu ? "decoder_swiglu" : "encoder_gelu";
}

ModelFamily parse_model_family(std::string_view text) {
  if (text == "decoder_swiglu") return ModelFamily::kDecoderSwiglu;
  if (text == "encoder_gelu") return ModelFamily::kEncoderGelu;
  throw ConfigError("unknown model family '" + std::string(text) +
                    "' (expected decoder_swiglu or encoder_gelu)");
}

void ModelSpec::validate() const {
  if (name.empty()) throw ConfigError("model spec without a name");
  if (layers < 0) throw ConfigError("model '" + name + "': layers must be >= 0");
  if (hidden <= 0) throw ConfigError("model '" + name + "': hidden must be positive");
  if (mlp <= 0) throw ConfigError("model '" + name + "': mlp must be positive");
  if (total_params && *total_params < 0) {
    throw ConfigError("model '" + name + "': total_params must be >= 0");
  }
}

void UsageProfile::validate() const {
  auto check = [](double v, const char* what) {
    if (!std::isfinite(v) || v < 0.0) {
      throw ValidationError(std::string(what) + " must be a finite non-negative number");
    }
  };
  check(prompt_tokens, "prompt tokens");
  check(gen_tokens, "generated tokens");
  check(qe_tokens, "QE tokens");
  if (n_cand < 0) throw ValidationError("n_cand must be >= 0");
}

namespace {
__extension__ typedef __int128 i128;
}  // namespace

std::int64_t nonembed_params(const ModelSpec& spec) {
  const i128 d = spec.hidden;
  const i128 ff = spec.mlp;
  const i128 mlp_mats = spec.family == ModelFamily::kDecoderSwiglu ? 3 : 2;
  const i128 total = static_cast<i128>(spec.layers) * (4 * d * d + mlp_mats * d * ff);
  if (total > std::numeric_limits<std::int64_t>::max()) {
    throw ValidationError("parameter count of '" + spec.name + "' overflows 64 bits");
  }
  return static_cast<std::int64_t>(total);
}

double gen_cost(const ModelSpec& spec, const UsageProfile& usage) {
  if (spec.family != ModelFamily::kDecoderSwiglu) {
    throw ValidationError("generation cost needs a decoder model, got '" + spec.name + "' (" +
                          std::string(to_string(spec.family)) + ")");
  }
  usage.validate();
  const double n = static_cast<double>(nonembed_params(spec));
  return 2.0 * n * (usage.prompt_tokens + static_cast<double>(usage.n_cand) * usage.gen_tokens);
}

double qe_cost(const ModelSpec& spec, const UsageProfile& usage) {
  if (spec.family != ModelFamily::kEncoderGelu) {
    throw ValidationError("QE cost needs an encoder model, got '" + spec.name + "' (" +
                          std::string(to_string(spec.family)) + ")");
  }
  usage.validate();
  const double n = static_cast<double>(nonembed_params(spec));
  return 2.0 * n * static_cast<double>(usage.n_cand) * usage.qe_tokens;
}

ComputeLedger total_cost(const ModelSpec& gen_spec, const ModelSpec* qe_spec,
                         const UsageProfile& usage) {
  ComputeLedger ledger;
  ledger.c_gen = gen_cost(gen_spec, usage);
  ledger.c_qe = qe_spec ? qe_cost(*qe_spec, usage) : 0.0;
  ledger.c_total = ledger.c_gen + ledger.c_qe;
  ledger.assumptions.push_back("2 x non-embedding params x tokens; attention terms ignored");
  ledger.assumptions.push_back(usage.measured ? "usage measured from candidates"
                                              : "usage declared");
  if (usage.approximate) ledger.assumptions.push_back("approximate token counts");
  if (!qe_spec) ledger.assumptions.push_back("no QE selection cost");
  return ledger;
}

MemoryEstimate memory_estimate(const ModelSpec& spec, double bytes_per_param,
                               bool derive_from_shape) {
  if (!std::isfinite(bytes_per_param) || bytes_per_param < 0.0) {
    throw ValidationError("bytes per parameter must be a finite non-negative number");
  }
  MemoryEstimate est;
  if (spec.total_params) {
    est.params = static_cast<double>(*spec.total_params);
    est.convention = "published total parameter count";
  } else if (derive_from_shape) {
    est.params = static_cast<double>(nonembed_params(spec));
    est.convention = "non-embedding parameters derived from shape";
  } else {
    throw ValidationError("model '" + spec.name + "' has no total_params for a memory estimate");
  }
  est.bytes = est.params * bytes_per_param;
  return est;
}

UsageProfile measure_usage(const std::vector<CandidatePool>& pools, const Dataset& dataset) {
  if (pools.empty()) throw ValidationError("no candidate pools to measure usage from");
  UsageProfile u;
  u.measured = true;
  double prompt_sum = 0.0;
  double gen_sum = 0.0;
  double qe_sum = 0.0;
  std::size_t n_candidates = 0;
  std::int64_t min_pool = std::numeric_limits<std::int64_t>::max();
  for (const auto& pool : pools) {
    if (pool.candidates.empty()) throw ValidationError("empty pool for \"" + pool.seg_id + "\"");
    const Segment& seg = dataset.at(pool.seg_id);
    prompt_sum += static_cast<double>(pool.candidates.front().prompt_tokens);
    for (const auto& c : pool.candidates) {
      gen_sum += static_cast<double>(c.gen_tokens);
      qe_sum += static_cast<double>(qe_token_length(seg.src, c.text));
      u.approximate = u.approximate || c.approx_tokens;
    }
    n_candidates += pool.size();
    min_pool = std::min(min_pool, static_cast<std::int64_t>(pool.size()));
  }
  u.prompt_tokens = prompt_sum / static_cast<double>(pools.size());
  u.gen_tokens = gen_sum / static_cast<double>(n_candidates);
  u.qe_tokens = qe_sum / static_cast<double>(n_candidates);
  u.n_cand = min_pool;
  return u;
}

FlopsRow flops_row(const ModelSpec& gen_spec, const ModelSpec* qe_spec, const UsageProfile& usage) {
  const ComputeLedger ledger = total_cost(gen_spec, qe_spec, usage);
  return {gen_spec.name,   qe_spec ? qe_spec->name : std::string("none"),
          usage.n_cand,    usage.prompt_tokens,
          usage.gen_tokens, usage.qe_tokens,
          ledger.c_gen,    ledger.c_qe,
          ledger.total_tflops()};
}

std::string render_flops_csv(const std::vector<FlopsRow>& rows) {
  std::string out = "model,qe_model,n,P,T,S_qe,c_gen,c_qe,c_total_tflops\n";
  for (const auto& r : rows) {
    out += r.model + ',' + r.qe_model + ',' + std::to_string(r.n) + ',' +
           format_double(r.prompt_tokens) + ',' + format_double(r.gen_tokens) + ',' +
           format_double(r.qe_tokens) + ',' + format_double(r.c_gen) + ',' +
           format_double(r.c_qe) + ',' + format_double(r.c_total_tflops) + '\n';
  }
  return out;
}

}  // namespace ttsmt

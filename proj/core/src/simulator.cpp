#include "ttsmt/simulator.hpp"

#include <algorithm>
#include <cmath>

#include "ttsmt/error.hpp"
#include "ttsmt/parallel.hpp"
#include "ttsmt/rng.hpp"
#include "ttsmt/unicode.hpp"

namespace ttsmt {

void QualityLaw::validate() const {
  if (family == Family::kUniform && !(a < b)) {
    throw ValidationError("uniform quality law needs lower < upper");
  }
  if (family == Family::kBeta && !(a > 0.0 && b > 0.0)) {
    throw ValidationError("beta quality law needs positive shape parameters");
  }
  if (!(codeswitch_rate >= 0.0 && codeswitch_rate <= 1.0)) {
    throw ValidationError("codeswitch rate must lie in [0, 1]");
  }
}

double QualityLaw::mean() const {
  if (family == Family::kUniform) return 0.5 * (a + b);
  return a / (a + b);
}

double QualityLaw::stddev() const {
  if (family == Family::kUniform) return (b - a) / std::sqrt(12.0);
  const double s = a + b;
  return std::sqrt(a * b / (s * s * (s + 1.0)));
}

template <class Engine>
double QualityLaw::sample(Engine& eng) const {
  if (family == Family::kUniform) return a + (b - a) * uniform01(eng);
  return beta_sample(eng, a, b);
}

template double QualityLaw::sample<SplitMix64>(SplitMix64&) const;

SimulatorBackend::SimulatorBackend(QualityLaw law, std::string id)
    : law_(law), id_(std::move(id)) {
  law_.validate();
}

double SimulatorBackend::latent_quality(std::uint64_t seed, std::string_view seg_id,
                                        std::int64_t cand_idx) const {
  auto eng = StreamKey(seed, "sim.latent").add(seg_id).add(static_cast<std::uint64_t>(cand_idx)).engine();
  return law_.sample(eng);
}

bool SimulatorBackend::is_codeswitched(std::uint64_t seed, std::string_view seg_id,
                                       std::int64_t cand_idx) const {
  if (law_.codeswitch_rate <= 0.0) return false;
  auto eng = StreamKey(seed, "sim.codeswitch").add(seg_id).add(static_cast<std::uint64_t>(cand_idx)).engine();
  return uniform01(eng) < law_.codeswitch_rate;
}

namespace {

bool spaceless_script(const std::u32string& text) {
  std::size_t letters = 0;
  std::size_t cjk = 0;
  for (char32_t cp : text) {
    if (!unicode::is_letter(cp)) continue;
    ++letters;
    if (unicode::is_cjk(cp)) ++cjk;
  }
  return letters > 0 && 2 * cjk > letters;
}

std::u32string pseudo_word(SplitMix64& eng) {
  const std::size_t len = 2 + uniform_below(eng, 6);
  std::u32string w;
  for (std::size_t i = 0; i < len; ++i) {
    w.push_back(U'a' + static_cast<char32_t>(uniform_below(eng, 26)));
  }
  return w;
}

char32_t random_han(SplitMix64& eng) {
  // CJK Unified Ideographs, first 8k code points (all assigned).
  return 0x4E00 + static_cast<char32_t>(uniform_below(eng, 0x2000));
}

}  // namespace

std::string SimulatorBackend::synthesize_text(const Segment& seg, std::uint64_t seed,
                                              std::int64_t cand_idx, double quality,
                                              std::int64_t max_tokens) const {
  const std::string& base_text = seg.refs.empty() ? seg.src : seg.refs.front();
  const std::u32string base = unicode::decode(base_text);
  const bool spaceless = spaceless_script(base);

  std::vector<std::u32string> units;
  if (spaceless) {
    for (char32_t cp : base) {
      if (!unicode::is_space(cp)) units.emplace_back(1, cp);
    }
  } else {
    units = unicode::split_whitespace(base);
  }

  auto eng = StreamKey(seed, "sim.text").add(seg.id).add(static_cast<std::uint64_t>(cand_idx)).engine();
  const bool switched = is_codeswitched(seed, seg.id, cand_idx);
  const double keep = std::clamp(quality, 0.0, 1.0);

  std::u32string out;
  std::int64_t emitted = 0;
  for (const auto& unit : units) {
    if (emitted >= max_tokens) break;
    std::u32string piece;
    if (switched) {
      const std::size_t n = spaceless ? 1 : std::max<std::size_t>(1, unit.size() / 2);
      for (std::size_t i = 0; i < n; ++i) piece.push_back(random_han(eng));
    } else if (uniform01(eng) < keep) {
      piece = unit;
    } else if (spaceless) {
      piece.push_back(random_han(eng));
    } else {
      piece = pseudo_word(eng);
    }
    if (!out.empty() && !spaceless && !switched) out.push_back(U' ');
    out += piece;
    emitted += switched ? static_cast<std::int64_t>(piece.size()) : 1;
  }
  return unicode::encode(out);
}

std::vector<Completion> SimulatorBackend::complete(const GenerationRequest& request) {
  const auto n = static_cast<std::size_t>(request.decode.n_cand);
  std::vector<Completion> out(n);
  auto draw = [&](std::size_t i) {
    const auto idx = static_cast<std::int64_t>(i);
    const double q = latent_quality(request.decode.seed, request.segment.id, idx);
    Completion c;
    c.text = synthesize_text(request.segment, request.decode.seed, idx, q,
                             request.decode.max_new_tokens);
    c.latent_quality = q;
    out[i] = std::move(c);
  };
  if (n >= 256) {
    parallel_for(n, draw);
  } else {
    for (std::size_t i = 0; i < n; ++i) draw(i);
  }
  return out;
}

CandidatePool simulate_candidates(const Segment& seg, const DecodeConfig& cfg,
                                  const QualityLaw& law) {
  SimulatorBackend backend(law);
  return generate_pool(seg, cfg, backend);
}

}  // namespace ttsmt

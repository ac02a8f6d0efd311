#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <string_view>

namespace ttsmt {

/// SplitMix64: tiny, fast to seed, fully specified output. Used for the many
/// short per-(segment, N, draw) streams where seeding a Mersenne Twister per
/// stream would dominate runtime.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed = 0) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// Stateless 64-bit finalizer (the SplitMix64 output function).
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t hash_string(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Derives an independent stream seed from a base seed, a purpose tag and a
/// sequence of integer coordinates. Order matters.
class StreamKey {
 public:
  StreamKey(std::uint64_t seed, std::string_view tag) noexcept
      : h_(mix64(seed ^ mix64(hash_string(tag)))) {}

  StreamKey& add(std::uint64_t v) noexcept {
    h_ = mix64(h_ ^ mix64(v + 0x632be59bd9b4e019ULL));
    return *this;
  }
  StreamKey& add(std::string_view s) noexcept { return add(hash_string(s)); }

  std::uint64_t value() const noexcept { return h_; }
  SplitMix64 engine() const noexcept { return SplitMix64(h_); }

 private:
  std::uint64_t h_;
};

/// Uniform double in [0, 1) with 53 random bits.
template <class Engine>
double uniform01(Engine& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, bound) by Lemire's multiply-shift with rejection.
template <class Engine>
std::uint64_t uniform_below(Engine& eng, std::uint64_t bound) {
  if (bound <= 1) return 0;
  std::uint64_t x = eng();
  __uint128_t m = static_cast<__uint128_t>(x) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      x = eng();
      m = static_cast<__uint128_t>(x) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

/// Standard normal via Box-Muller (one value per call; the pair's second half
/// is discarded so that streams stay position-independent).
template <class Engine>
double standard_normal(Engine& eng) {
  double u1 = 1.0 - uniform01(eng);  // (0, 1]
  double u2 = uniform01(eng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

/// Gamma(shape, 1) by Marsaglia-Tsang.
template <class Engine>
double gamma_sample(Engine& eng, double shape) {
  if (shape < 1.0) {
    double u = 1.0 - uniform01(eng);
    return gamma_sample(eng, shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  while (true) {
    double x = standard_normal(eng);
    double v = 1.0 + c * x;
    if (v <= 0.0) continue;
    v = v * v * v;
    double u = 1.0 - uniform01(eng);
    if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) {
      return d * v;
    }
  }
}

template <class Engine>
double beta_sample(Engine& eng, double alpha, double beta) {
  double x = gamma_sample(eng, alpha);
  double y = gamma_sample(eng, beta);
  return x / (x + y);
}

}  // namespace ttsmt

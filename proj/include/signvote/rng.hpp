#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace signvote {

// Finalizer from splitmix64. Bijective on 64-bit ints.
inline constexpr std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// Counter-based generator: draw i of stream `key` is mix64(key + i*kGolden),
// i.e. splitmix64 evaluated at an arbitrary offset. A stream is fully
// determined by its key, so replay needs only (key, counter). Every worker,
// adversary and oracle owns its own stream; nothing is shared.
class CounterRng {
 public:
  CounterRng() = default;
  explicit CounterRng(std::uint64_t key) : key_(key) {}

  // Stream for worker `worker_id` of a run seeded with `base_seed`.
  static CounterRng for_worker(std::uint64_t base_seed, std::uint32_t worker_id) {
    return CounterRng(mix64(base_seed) ^ mix64(kGolden * (worker_id + 1)));
  }

  // Stream derived from (key, tag), e.g. a per-round adversary stream.
  static CounterRng derive(std::uint64_t key, std::uint64_t tag) {
    return CounterRng(mix64(key ^ mix64(tag + 1)));
  }

  std::uint64_t next_u64() { return mix64(key_ + kGolden * ++counter_); }

  // Uniform on (0, 1]. Never returns 0, so log() is safe.
  double next_unit() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  double next_uniform(double lo, double hi) {
    return lo + (hi - lo) * next_unit();
  }

  // Standard normal via Box-Muller, cosine branch only. Consumes exactly
  // two raw draws per call, which keeps counters transport-independent.
  double next_gaussian() {
    const double u1 = next_unit();
    const double u2 = next_unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  // Bernoulli(p) as 0/1.
  int next_bernoulli(double p) { return next_unit() <= p ? 1 : 0; }

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace signvote

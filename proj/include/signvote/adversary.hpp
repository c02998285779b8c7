#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "signvote/rng.hpp"

namespace signvote {

// Blind multiplicative adversary: the worker element-wise multiplies its
// stochastic gradient by a vector chosen before that gradient is observed.
// The multiplier for round t is a deterministic function of
// (kind, seed, t, dim) only, which is how blindness is enforced: there is no
// gradient in the signature.
enum class AdversaryKind : std::uint8_t {
  None = 0,       // honest worker
  Invert,         // all -1; the worst case of the class
  Rescale,        // all c for a fixed c > 0; nullified by the sign
  SignRandomize,  // iid +/-1 per coordinate per round
  CustomMask,     // seeded finite nonzero vector, for scripted adversaries
};

struct AdversarySpec {
  AdversaryKind kind = AdversaryKind::None;
  double scale = 1.0;  // Rescale only
  std::uint64_t seed = 0;

  static AdversarySpec none() { return {}; }
  static AdversarySpec invert() { return {AdversaryKind::Invert, 1.0, 0}; }
  static AdversarySpec rescale(double c) {
    if (!(c > 0.0)) throw std::invalid_argument("rescale adversary: c must be positive");
    return {AdversaryKind::Rescale, c, 0};
  }
  static AdversarySpec sign_randomize(std::uint64_t seed) {
    return {AdversaryKind::SignRandomize, 1.0, seed};
  }
  static AdversarySpec custom_mask(std::uint64_t seed) {
    return {AdversaryKind::CustomMask, 1.0, seed};
  }
};

inline std::vector<double> adversary_multiplier(const AdversarySpec& spec, std::uint32_t round,
                                                std::uint32_t dim) {
  std::vector<double> v(dim, 1.0);
  switch (spec.kind) {
    case AdversaryKind::None:
      break;
    case AdversaryKind::Invert:
      for (double& x : v) x = -1.0;
      break;
    case AdversaryKind::Rescale:
      for (double& x : v) x = spec.scale;
      break;
    case AdversaryKind::SignRandomize: {
      CounterRng rng = CounterRng::derive(spec.seed, round);
      for (double& x : v) x = (rng.next_u64() & 1) ? 1.0 : -1.0;
      break;
    }
    case AdversaryKind::CustomMask: {
      // Arbitrary but reproducible: log-uniform magnitude in [1e-3, 1e3]
      // with a random sign. Never zero.
      CounterRng rng = CounterRng::derive(spec.seed ^ 0xC0FFEEULL, round);
      for (double& x : v) {
        const double mag = std::pow(10.0, rng.next_uniform(-3.0, 3.0));
        x = (rng.next_u64() & 1) ? mag : -mag;
      }
      break;
    }
  }
  return v;
}

// Element-wise corruption g~ -> v_t (x) g~.
inline std::vector<double> corrupt(std::span<const double> g_tilde,
                                   std::span<const double> v_t) {
  if (g_tilde.size() != v_t.size())
    throw std::invalid_argument("corrupt: dimension mismatch (" +
                                std::to_string(g_tilde.size()) + " vs " +
                                std::to_string(v_t.size()) + ")");
  std::vector<double> out(g_tilde.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = g_tilde[i] * v_t[i];
  return out;
}

inline void corrupt_in_place(std::span<double> g_tilde, std::span<const double> v_t) {
  if (g_tilde.size() != v_t.size())
    throw std::invalid_argument("corrupt: dimension mismatch");
  for (std::size_t i = 0; i < g_tilde.size(); ++i) g_tilde[i] *= v_t[i];
}

}  // namespace signvote

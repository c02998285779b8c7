#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "signvote/rng.hpp"

namespace signvote {

// Sparse ternary quantization result: the surviving coordinates as
// (index, sign) pairs with indices strictly increasing, plus the norm the
// keep-probabilities were taken against.
struct QuantizedVector {
  std::uint32_t dim = 0;
  std::vector<std::pair<std::uint32_t, std::int8_t>> entries;
  double norm_scalar = 0.0;
};

enum class BitScheme : std::uint8_t { MajorityVote, L2Qsgd1Bit, MaxQsgd1Bit };

inline const char* bit_scheme_name(BitScheme s) {
  switch (s) {
    case BitScheme::MajorityVote: return "majority_vote";
    case BitScheme::L2Qsgd1Bit: return "l2_qsgd_1bit";
    case BitScheme::MaxQsgd1Bit: return "max_qsgd_1bit";
  }
  return "?";
}

struct BitCostReport {
  BitScheme scheme = BitScheme::MajorityVote;
  std::uint64_t bits_per_iteration = 0;
  std::uint32_t workers = 0;
  std::uint64_t dim = 0;
  bool degenerate = false;  // M = 1 leaves the L2 scheme with no peers
};

namespace detail {
inline QuantizedVector qsgd_quantize(std::span<const double> g, double norm, CounterRng& rng) {
  QuantizedVector q;
  q.dim = static_cast<std::uint32_t>(g.size());
  q.norm_scalar = norm;
  if (norm == 0.0) return q;  // zero vector: empty quantization
  for (std::uint32_t i = 0; i < g.size(); ++i) {
    const double keep = std::abs(g[i]) / norm;
    if (keep >= 1.0 || rng.next_unit() <= keep) {
      if (g[i] != 0.0) q.entries.emplace_back(i, g[i] < 0.0 ? -1 : 1);
    }
  }
  return q;
}
}  // namespace detail

// Keep coordinate i as sign(g_i) with probability |g_i|/||g||_2, drop it
// otherwise. Expected survivors ||g||_1/||g||_2 <= sqrt(d).
inline QuantizedVector l2_qsgd_quantize(std::span<const double> g, CounterRng& rng) {
  double norm = 0.0;
  for (double v : g) norm += v * v;
  return detail::qsgd_quantize(g, std::sqrt(norm), rng);
}

// Keep with probability |g_i|/||g||_inf. No sparsity guarantee; sign vectors
// pass through unchanged.
inline QuantizedVector max_qsgd_quantize(std::span<const double> g, CounterRng& rng) {
  double norm = 0.0;
  for (double v : g) norm = std::max(norm, std::abs(v));
  return detail::qsgd_quantize(g, norm, rng);
}

// Dense {-1, 0, +1} expansion.
inline std::vector<std::int8_t> dequantize(const QuantizedVector& q) {
  std::vector<std::int8_t> out(q.dim, 0);
  std::uint32_t prev = 0;
  bool first = true;
  for (const auto& [idx, sign] : q.entries) {
    if (idx >= q.dim) throw std::invalid_argument("dequantize: index out of range");
    if (!first && idx <= prev) throw std::invalid_argument("dequantize: indices not increasing");
    out[idx] = sign;
    prev = idx;
    first = false;
  }
  return out;
}

// Idealized per-iteration communication cost:
//   majority_vote  2 M d            (M d-bit votes up, M d-bit broadcasts down)
//   l2_qsgd_1bit   M (M-1) ceil(sqrt(d) (1 + ceil(log2 d)))
//                                   (all-to-all broadcast of expected-sparsity
//                                    vectors, 1 sign + ceil(log2 d) index bits
//                                    per nonzero)
//   max_qsgd_1bit  2 M d            (dense ternary worst case at 2 bits per
//                                    coordinate, two-way)
inline BitCostReport bit_cost(BitScheme scheme, std::uint32_t workers, std::uint64_t dim) {
  if (workers < 1 || dim < 1) throw std::invalid_argument("bit_cost: M, d >= 1 required");
  BitCostReport r;
  r.scheme = scheme;
  r.workers = workers;
  r.dim = dim;
  switch (scheme) {
    case BitScheme::MajorityVote:
      r.bits_per_iteration = 2ULL * workers * dim;
      break;
    case BitScheme::L2Qsgd1Bit: {
      const double log2d = std::ceil(std::log2(static_cast<double>(dim)));
      const double per_vector = std::ceil(std::sqrt(static_cast<double>(dim)) * (1.0 + log2d));
      r.bits_per_iteration = static_cast<std::uint64_t>(workers) * (workers - 1) *
                             static_cast<std::uint64_t>(per_vector);
      r.degenerate = workers == 1;
      break;
    }
    case BitScheme::MaxQsgd1Bit:
      r.bits_per_iteration = 2ULL * workers * dim;
      break;
  }
  return r;
}

}  // namespace signvote

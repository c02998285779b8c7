#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace signvote {

struct CodecError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bit-packed vector in {-1,+1}^dim: one bit per coordinate, LSB-first within
// each byte, bit = 1 encodes +1. Padding bits past `dim` are zero; receivers
// reject frames that violate this.
struct SignVector {
  std::uint32_t dim = 0;
  std::vector<std::uint8_t> payload;

  static std::size_t payload_size(std::uint32_t dim) {
    return (static_cast<std::size_t>(dim) + 7) / 8;
  }

  bool get(std::uint32_t i) const { return (payload[i >> 3] >> (i & 7)) & 1; }

  bool operator==(const SignVector&) const = default;
};

// Per-coordinate sum of M sign vectors; counts[i] is in [-M, M] and has the
// parity of M.
struct VoteTally {
  std::uint32_t dim = 0;
  std::vector<std::int32_t> counts;
};

// Element-wise sign with sign(0) = +1. The codec has no third symbol, so a
// zero component votes +1; documented and applied identically on workers and
// server.
inline std::vector<std::int8_t> take_sign(std::span<const double> v) {
  std::vector<std::int8_t> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (std::isnan(v[i]))
      throw CodecError("take_sign: NaN at coordinate " + std::to_string(i));
    out[i] = v[i] < 0.0 ? -1 : 1;
  }
  return out;
}

inline SignVector pack(std::span<const std::int8_t> s) {
  SignVector sv;
  sv.dim = static_cast<std::uint32_t>(s.size());
  sv.payload.assign(SignVector::payload_size(sv.dim), 0);
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != 1 && s[i] != -1)
      throw CodecError("pack: component " + std::to_string(i) + " not in {-1,+1}");
    if (s[i] > 0) sv.payload[i >> 3] |= static_cast<std::uint8_t>(1u << (i & 7));
  }
  return sv;
}

inline void validate(const SignVector& sv) {
  if (sv.payload.size() != SignVector::payload_size(sv.dim))
    throw CodecError("sign vector: payload length " + std::to_string(sv.payload.size()) +
                     " does not match dim " + std::to_string(sv.dim));
  const unsigned tail = sv.dim & 7;
  if (tail != 0) {
    const std::uint8_t mask = static_cast<std::uint8_t>(0xFFu << tail);
    if (sv.payload.back() & mask)
      throw CodecError("sign vector: nonzero padding bits");
  }
}

inline std::vector<std::int8_t> unpack(const SignVector& sv) {
  validate(sv);
  std::vector<std::int8_t> out(sv.dim);
  for (std::uint32_t i = 0; i < sv.dim; ++i) out[i] = sv.get(i) ? 1 : -1;
  return out;
}

// V = sum of worker sign vectors, coordinate-wise. Order of the vote list
// does not matter.
inline VoteTally majority_sum(std::span<const SignVector> votes) {
  if (votes.empty()) throw CodecError("majority_sum: empty vote list");
  const std::uint32_t dim = votes.front().dim;
  VoteTally tally;
  tally.dim = dim;
  tally.counts.assign(dim, 0);
  for (const SignVector& sv : votes) {
    if (sv.dim != dim)
      throw CodecError("majority_sum: dimension mismatch (" + std::to_string(sv.dim) +
                       " vs " + std::to_string(dim) + ")");
    validate(sv);
    for (std::uint32_t i = 0; i < dim; ++i) tally.counts[i] += sv.get(i) ? 1 : -1;
  }
  return tally;
}

// Accumulate one vote into a running tally (the server-side form; keeps
// memory at O(d) for any number of workers).
inline void accumulate_vote(VoteTally& tally, const SignVector& sv) {
  if (sv.dim != tally.dim) throw CodecError("accumulate_vote: dimension mismatch");
  for (std::uint32_t i = 0; i < tally.dim; ++i) tally.counts[i] += sv.get(i) ? 1 : -1;
}

// sign(V) with the same sign(0) = +1 rule as take_sign. With an odd worker
// count a zero count cannot occur.
inline SignVector tally_sign(const VoteTally& t) {
  SignVector sv;
  sv.dim = t.dim;
  sv.payload.assign(SignVector::payload_size(t.dim), 0);
  for (std::uint32_t i = 0; i < t.dim; ++i)
    if (t.counts[i] >= 0) sv.payload[i >> 3] |= static_cast<std::uint8_t>(1u << (i & 7));
  return sv;
}

}  // namespace signvote

#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "signvote/sign_codec.hpp"

namespace signvote {

struct FrameError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Wire format, all multi-byte integers little-endian:
//
//   offset  size  field
//        0     4  magic "SGNV"
//        4     1  version (1)
//        5     1  msg_type
//        6     2  worker_id
//        8     4  round
//       12     4  dim
//       16     4  payload_len
//       20     *  payload (bit-packed signs; empty for HELLO/ABORT)
//
// payload_len must equal ceil(dim/8) for VOTE and BROADCAST and 0 for HELLO
// and ABORT, so frames are self-delimiting. worker_id identifies the sender
// for HELLO/VOTE and is 0 in server-originated frames.
enum class MsgType : std::uint8_t { Hello = 0, Vote = 1, Broadcast = 2, Abort = 3 };

inline constexpr std::size_t kFrameHeaderSize = 20;
inline constexpr std::array<std::uint8_t, 4> kFrameMagic = {'S', 'G', 'N', 'V'};
inline constexpr std::uint8_t kFrameVersion = 1;

struct Frame {
  MsgType type = MsgType::Hello;
  std::uint16_t worker_id = 0;
  std::uint32_t round = 0;
  std::uint32_t dim = 0;
  std::vector<std::uint8_t> payload;

  bool operator==(const Frame&) const = default;

  static Frame hello(std::uint16_t worker_id, std::uint32_t dim) {
    return Frame{MsgType::Hello, worker_id, 0, dim, {}};
  }
  static Frame vote(std::uint16_t worker_id, std::uint32_t round, const SignVector& sv) {
    return Frame{MsgType::Vote, worker_id, round, sv.dim, sv.payload};
  }
  static Frame broadcast(std::uint32_t round, const SignVector& sv) {
    return Frame{MsgType::Broadcast, 0, round, sv.dim, sv.payload};
  }
  static Frame abort_frame(std::uint32_t round) {
    return Frame{MsgType::Abort, 0, round, 0, {}};
  }

  bool carries_payload() const {
    return type == MsgType::Vote || type == MsgType::Broadcast;
  }

  SignVector sign_vector() const {
    if (!carries_payload()) throw FrameError("frame carries no sign vector");
    return SignVector{dim, payload};
  }
};

namespace detail {
inline void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}
inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}
inline std::uint16_t get_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
inline std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
}  // namespace detail

inline void validate_frame(const Frame& f) {
  if (f.carries_payload()) {
    if (f.payload.size() != SignVector::payload_size(f.dim))
      throw FrameError("frame: payload_len " + std::to_string(f.payload.size()) +
                       " inconsistent with dim " + std::to_string(f.dim));
    try {
      validate(SignVector{f.dim, f.payload});  // padding bits must be zero
    } catch (const CodecError& e) {
      throw FrameError(std::string("frame: ") + e.what());
    }
  } else if (!f.payload.empty()) {
    throw FrameError("frame: HELLO/ABORT must carry no payload");
  }
}

inline std::vector<std::uint8_t> encode_frame(const Frame& f) {
  validate_frame(f);
  std::vector<std::uint8_t> out;
  out.reserve(kFrameHeaderSize + f.payload.size());
  for (std::uint8_t b : kFrameMagic) out.push_back(b);
  out.push_back(kFrameVersion);
  out.push_back(static_cast<std::uint8_t>(f.type));
  detail::put_u16(out, f.worker_id);
  detail::put_u32(out, f.round);
  detail::put_u32(out, f.dim);
  detail::put_u32(out, static_cast<std::uint32_t>(f.payload.size()));
  out.insert(out.end(), f.payload.begin(), f.payload.end());
  return out;
}

// Header fields plus the expected payload length; lets stream readers size
// the rest of the frame before decoding it.
struct FrameHeader {
  MsgType type;
  std::uint16_t worker_id;
  std::uint32_t round;
  std::uint32_t dim;
  std::uint32_t payload_len;
};

inline FrameHeader decode_header(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kFrameHeaderSize) throw FrameError("frame: truncated header");
  if (!std::equal(kFrameMagic.begin(), kFrameMagic.end(), bytes.begin()))
    throw FrameError("frame: bad magic");
  if (bytes[4] != kFrameVersion)
    throw FrameError("frame: unsupported version " + std::to_string(bytes[4]));
  if (bytes[5] > static_cast<std::uint8_t>(MsgType::Abort))
    throw FrameError("frame: unknown msg_type " + std::to_string(bytes[5]));
  FrameHeader h;
  h.type = static_cast<MsgType>(bytes[5]);
  h.worker_id = detail::get_u16(bytes.data() + 6);
  h.round = detail::get_u32(bytes.data() + 8);
  h.dim = detail::get_u32(bytes.data() + 12);
  h.payload_len = detail::get_u32(bytes.data() + 16);
  return h;
}

inline Frame decode_frame(std::span<const std::uint8_t> bytes) {
  const FrameHeader h = decode_header(bytes);
  if (bytes.size() != kFrameHeaderSize + h.payload_len)
    throw FrameError("frame: length " + std::to_string(bytes.size()) +
                     " does not match header payload_len " + std::to_string(h.payload_len));
  Frame f;
  f.type = h.type;
  f.worker_id = h.worker_id;
  f.round = h.round;
  f.dim = h.dim;
  f.payload.assign(bytes.begin() + kFrameHeaderSize, bytes.end());
  validate_frame(f);
  return f;
}

}  // namespace signvote

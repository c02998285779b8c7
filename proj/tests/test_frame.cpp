#include "signvote/frame.hpp"

#include <gtest/gtest.h>

#include <vector>

#include "signvote/rng.hpp"

namespace signvote {
namespace {

TEST(frame, hello_is_20_bytes) {
  const auto bytes = encode_frame(Frame::hello(3, 100));
  EXPECT_EQ(bytes.size(), 20u);
}

TEST(frame, vote_d8_is_21_bytes) {
  const SignVector sv = pack(std::vector<std::int8_t>(8, 1));
  const auto bytes = encode_frame(Frame::vote(0, 0, sv));
  EXPECT_EQ(bytes.size(), 21u);
}

TEST(frame, exact_little_endian_layout) {
  SignVector sv{8, {0x4D}};
  Frame f = Frame::vote(3, 0x01020304u, sv);
  const std::vector<std::uint8_t> expected{
      'S', 'G', 'N', 'V',     // magic
      1,                      // version
      1,                      // msg_type VOTE
      3, 0,                   // worker_id LE
      0x04, 0x03, 0x02, 0x01, // round LE
      8, 0, 0, 0,             // dim LE
      1, 0, 0, 0,             // payload_len LE
      0x4D};
  EXPECT_EQ(encode_frame(f), expected);
}

TEST(frame, roundtrip_random_frames) {
  CounterRng rng(12);
  for (int t = 0; t < 300; ++t) {
    Frame f;
    f.type = static_cast<MsgType>(rng.next_u64() % 4);
    f.worker_id = static_cast<std::uint16_t>(rng.next_u64() % 65536);
    f.round = static_cast<std::uint32_t>(rng.next_u64());
    if (f.carries_payload()) {
      const std::uint32_t dim = 1 + static_cast<std::uint32_t>(rng.next_u64() % 500);
      std::vector<std::int8_t> s(dim);
      for (auto& x : s) x = (rng.next_u64() & 1) ? 1 : -1;
      const SignVector sv = pack(s);
      f.dim = dim;
      f.payload = sv.payload;
    } else {
      f.dim = static_cast<std::uint32_t>(rng.next_u64() % 1000);
    }
    ASSERT_EQ(decode_frame(encode_frame(f)), f);
  }
}

TEST(frame, decode_rejects_corruption) {
  const SignVector sv = pack(std::vector<std::int8_t>{1, -1, 1, -1});
  auto bytes = encode_frame(Frame::vote(1, 2, sv));

  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_THROW(decode_frame(bad_magic), FrameError);

  auto bad_version = bytes;
  bad_version[4] = 9;
  EXPECT_THROW(decode_frame(bad_version), FrameError);

  auto bad_type = bytes;
  bad_type[5] = 7;
  EXPECT_THROW(decode_frame(bad_type), FrameError);

  auto truncated = bytes;
  truncated.pop_back();
  EXPECT_THROW(decode_frame(truncated), FrameError);

  auto bad_padding = bytes;
  bad_padding.back() = 0xFF;  // dim 4 only allows the low nibble
  EXPECT_THROW(decode_frame(bad_padding), FrameError);

  // payload_len inconsistent with dim
  auto bad_len = bytes;
  bad_len[12] = 80;  // dim = 80 needs 10 payload bytes, frame carries 1
  EXPECT_THROW(decode_frame(bad_len), FrameError);
}

TEST(frame, hello_and_abort_must_be_payload_free) {
  Frame f = Frame::hello(1, 8);
  f.payload = {0x01};
  EXPECT_THROW(encode_frame(f), FrameError);
}

TEST(frame, valid_broadcast_decodes) {
  const SignVector sv = pack(std::vector<std::int8_t>{-1, -1, 1});
  const Frame f = decode_frame(encode_frame(Frame::broadcast(9, sv)));
  EXPECT_EQ(f.type, MsgType::Broadcast);
  EXPECT_EQ(f.round, 9u);
  EXPECT_EQ(f.sign_vector(), sv);
}

}  // namespace
}  // namespace signvote

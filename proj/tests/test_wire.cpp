#include <doctest.h>

#include <cstdio>
#include <cstring>

#include "sohip/federation.hpp"
#include "sohip/wire.hpp"

using namespace sohip;

TEST_CASE("upload messages round-trip and have the exact wire size") {
  Vector memory{0.25, -1.5, 3.0};
  const MemoryUploadMsg msg = make_upload(7, 42, memory);
  const auto bytes = encode(msg);
  CHECK(bytes.size() == 30);  // 18 + 4 * 3
  CHECK(bytes.size() == upload_wire_size(3));

  const MemoryUploadMsg back = decode_upload(bytes);
  CHECK(back.round == 7);
  CHECK(back.agent_id == 42);
  CHECK(back.payload == msg.payload);
  CHECK(encode(back) == bytes);  // encode(decode(bytes)) == bytes
}

TEST_CASE("broadcast messages round-trip and have the exact wire size") {
  Vector memory{1.0, 2.0};
  const BroadcastMsg msg = make_broadcast(9, memory);
  const auto bytes = encode(msg);
  CHECK(bytes.size() == 22);  // 14 + 4 * 2
  CHECK(bytes.size() == broadcast_wire_size(2));

  const BroadcastMsg back = decode_broadcast(bytes);
  CHECK(back.round == 9);
  CHECK(back.payload == msg.payload);
  CHECK(encode(back) == bytes);
}

TEST_CASE("payload quantization is the only round-trip loss") {
  Vector memory{0.1, -0.2, 1e-20, 123456.789};
  const auto bytes = encode(make_upload(1, 2, memory));
  const Vector back = dequantize(decode_upload(bytes).payload);
  for (std::size_t j = 0; j < memory.dim(); ++j)
    CHECK(back[j] == static_cast<double>(static_cast<float>(memory[j])));
}

TEST_CASE("flipping any payload byte changes exactly one decoded float") {
  Vector memory{0.5, -2.25, 7.125};
  const auto bytes = encode(make_upload(3, 1, memory));
  const MemoryUploadMsg reference = decode_upload(bytes);

  for (std::size_t pos = 18; pos < bytes.size(); ++pos) {
    auto tampered = bytes;
    tampered[pos] ^= 0x01;
    const MemoryUploadMsg decoded = decode_upload(tampered);
    int changed = 0;
    for (std::size_t j = 0; j < decoded.payload.size(); ++j) {
      const bool differs =
          std::memcmp(&decoded.payload[j], &reference.payload[j], 4) != 0;
      if (differs) {
        ++changed;
        CHECK(j == (pos - 18) / 4);  // the float this byte belongs to
      }
    }
    CHECK(changed == 1);
  }
}

TEST_CASE("decode rejects malformed messages with an offset") {
  const auto good = encode(make_upload(1, 2, Vector{1.0, 2.0}));

  auto bad_magic = good;
  bad_magic[0] = 'X';
  CHECK_THROWS_AS(decode_upload(bad_magic), DecodeError);

  auto bad_version = good;
  bad_version[4] = 0x7f;
  try {
    decode_upload(bad_version);
    FAIL("expected DecodeError");
  } catch (const DecodeError& err) {
    CHECK(err.offset() == 4);
  }

  auto truncated = good;
  truncated.pop_back();
  CHECK_THROWS_AS(decode_upload(truncated), DecodeError);

  auto padded = good;
  padded.push_back(0);
  CHECK_THROWS_AS(decode_upload(padded), DecodeError);

  // upload bytes are not a broadcast
  CHECK_THROWS_AS(decode_broadcast(good), DecodeError);
}

TEST_CASE("transcripts round-trip length-prefixed frames") {
  const std::string path = "/tmp/sohip_test_transcript.bin";
  std::vector<std::vector<std::uint8_t>> frames;
  frames.push_back(encode(make_broadcast(1, Vector{0.0, 0.5})));
  frames.push_back(encode(make_upload(1, 0, Vector{1.0, -1.0})));
  frames.push_back(encode(make_upload(1, 3, Vector{2.0, 0.25})));

  write_transcript(path, frames);
  const auto back = read_transcript(path);
  CHECK(back == frames);
  std::remove(path.c_str());
}

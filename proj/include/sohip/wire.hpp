#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "sohip/tensor.hpp"

namespace sohip {

// The only two message kinds that ever cross the agent/server boundary.
// Layouts are fixed and little-endian:
//   upload:    "SHMU" | version u16 | round u32 | agent_id u32 | m u32 | m x f32
//   broadcast: "SHMB" | version u16 | round u32 |               m u32 | m x f32
// giving 18 + 4m and 14 + 4m bytes respectively.

inline constexpr std::uint16_t kWireVersion = 1;
inline constexpr char kUploadMagic[4] = {'S', 'H', 'M', 'U'};
inline constexpr char kBroadcastMagic[4] = {'S', 'H', 'M', 'B'};

inline constexpr std::size_t upload_wire_size(std::size_t mem_dim) {
  return 18 + 4 * mem_dim;
}
inline constexpr std::size_t broadcast_wire_size(std::size_t mem_dim) {
  return 14 + 4 * mem_dim;
}

struct MemoryUploadMsg {
  std::uint16_t version = kWireVersion;
  std::uint32_t round = 0;
  std::uint32_t agent_id = 0;
  std::vector<float> payload;
};

struct BroadcastMsg {
  std::uint16_t version = kWireVersion;
  std::uint32_t round = 0;
  std::vector<float> payload;
};

class DecodeError : public std::runtime_error {
 public:
  DecodeError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

std::vector<std::uint8_t> encode(const MemoryUploadMsg& msg);
std::vector<std::uint8_t> encode(const BroadcastMsg& msg);

MemoryUploadMsg decode_upload(const std::vector<std::uint8_t>& bytes);
BroadcastMsg decode_broadcast(const std::vector<std::uint8_t>& bytes);

// f64 compute state <-> f32 wire payload
std::vector<float> quantize(const Vector& v);
Vector dequantize(const std::vector<float>& v);

MemoryUploadMsg make_upload(std::uint32_t round, std::uint32_t agent_id,
                            const Vector& memory);
BroadcastMsg make_broadcast(std::uint32_t round, const Vector& memory);

}  // namespace sohip

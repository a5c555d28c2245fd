#include "sohip/wire.hpp"

#include <cstring>

namespace sohip {

namespace {

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
  out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 24));
}

void put_f32(std::vector<std::uint8_t>& out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  put_u32(out, bits);
}

std::uint16_t get_u16(const std::vector<std::uint8_t>& in, std::size_t pos) {
  return static_cast<std::uint16_t>(in[pos] | (in[pos + 1] << 8));
}

std::uint32_t get_u32(const std::vector<std::uint8_t>& in, std::size_t pos) {
  return static_cast<std::uint32_t>(in[pos]) |
         (static_cast<std::uint32_t>(in[pos + 1]) << 8) |
         (static_cast<std::uint32_t>(in[pos + 2]) << 16) |
         (static_cast<std::uint32_t>(in[pos + 3]) << 24);
}

float get_f32(const std::vector<std::uint8_t>& in, std::size_t pos) {
  const std::uint32_t bits = get_u32(in, pos);
  float v;
  std::memcpy(&v, &bits, sizeof(v));
  return v;
}

void check_magic(const std::vector<std::uint8_t>& bytes, const char magic[4],
                 const char* kind) {
  if (bytes.size() < 4)
    throw DecodeError(std::string(kind) + ": message truncated before magic", bytes.size());
  for (std::size_t i = 0; i < 4; ++i) {
    if (bytes[i] != static_cast<std::uint8_t>(magic[i]))
      throw DecodeError(std::string(kind) + ": bad magic", i);
  }
}

}  // namespace

std::vector<std::uint8_t> encode(const MemoryUploadMsg& msg) {
  std::vector<std::uint8_t> out;
  out.reserve(upload_wire_size(msg.payload.size()));
  out.insert(out.end(), kUploadMagic, kUploadMagic + 4);
  put_u16(out, msg.version);
  put_u32(out, msg.round);
  put_u32(out, msg.agent_id);
  put_u32(out, static_cast<std::uint32_t>(msg.payload.size()));
  for (float v : msg.payload) put_f32(out, v);
  return out;
}

std::vector<std::uint8_t> encode(const BroadcastMsg& msg) {
  std::vector<std::uint8_t> out;
  out.reserve(broadcast_wire_size(msg.payload.size()));
  out.insert(out.end(), kBroadcastMagic, kBroadcastMagic + 4);
  put_u16(out, msg.version);
  put_u32(out, msg.round);
  put_u32(out, static_cast<std::uint32_t>(msg.payload.size()));
  for (float v : msg.payload) put_f32(out, v);
  return out;
}

MemoryUploadMsg decode_upload(const std::vector<std::uint8_t>& bytes) {
  check_magic(bytes, kUploadMagic, "upload");
  if (bytes.size() < 18)
    throw DecodeError("upload: message truncated before payload length", bytes.size());
  MemoryUploadMsg msg;
  msg.version = get_u16(bytes, 4);
  if (msg.version != kWireVersion)
    throw DecodeError("upload: unsupported version " + std::to_string(msg.version), 4);
  msg.round = get_u32(bytes, 6);
  msg.agent_id = get_u32(bytes, 10);
  const std::uint32_t count = get_u32(bytes, 14);
  if (bytes.size() != upload_wire_size(count))
    throw DecodeError("upload: length " + std::to_string(bytes.size()) +
                          " does not match declared payload of " +
                          std::to_string(count) + " floats",
                      14);
  msg.payload.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i)
    msg.payload.push_back(get_f32(bytes, 18 + 4 * i));
  return msg;
}

BroadcastMsg decode_broadcast(const std::vector<std::uint8_t>& bytes) {
  check_magic(bytes, kBroadcastMagic, "broadcast");
  if (bytes.size() < 14)
    throw DecodeError("broadcast: message truncated before payload length", bytes.size());
  BroadcastMsg msg;
  msg.version = get_u16(bytes, 4);
  if (msg.version != kWireVersion)
    throw DecodeError("broadcast: unsupported version " + std::to_string(msg.version), 4);
  msg.round = get_u32(bytes, 6);
  const std::uint32_t count = get_u32(bytes, 10);
  if (bytes.size() != broadcast_wire_size(count))
    throw DecodeError("broadcast: length " + std::to_string(bytes.size()) +
                          " does not match declared payload of " +
                          std::to_string(count) + " floats",
                      10);
  msg.payload.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i)
    msg.payload.push_back(get_f32(bytes, 14 + 4 * i));
  return msg;
}

std::vector<float> quantize(const Vector& v) {
  std::vector<float> out;
  out.reserve(v.dim());
  for (double x : v.data) out.push_back(static_cast<float>(x));
  return out;
}

Vector dequantize(const std::vector<float>& v) {
  Vector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = static_cast<double>(v[i]);
  return out;
}

MemoryUploadMsg make_upload(std::uint32_t round, std::uint32_t agent_id,
                            const Vector& memory) {
  MemoryUploadMsg msg;
  msg.round = round;
  msg.agent_id = agent_id;
  msg.payload = quantize(memory);
  return msg;
}

BroadcastMsg make_broadcast(std::uint32_t round, const Vector& memory) {
  BroadcastMsg msg;
  msg.round = round;
  msg.payload = quantize(memory);
  return msg;
}

}  // namespace sohip

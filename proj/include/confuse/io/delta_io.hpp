// Raw perturbation files (.delta): a 16-byte header followed by the float
// payload. PNG cannot represent negative perturbations, so deltas are
// persisted losslessly as little-endian IEEE-754 32-bit floats:
//
//   offset 0  magic   "DLTA"
//   offset 4  u16 LE  format version (1)
//   offset 6  u16 LE  channels
//   offset 8  u32 LE  height
//   offset 12 u32 LE  width
//   offset 16 f32 LE  data, channel-major (C*H*W values)
#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "confuse/core/grid.hpp"

namespace confuse {

namespace detail {

inline void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
}

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline std::uint16_t get_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

inline std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace detail

inline void save_delta(const std::string& path, const PixelGrid& delta) {
  std::string header;
  header.reserve(16);
  header += "DLTA";
  detail::put_u16(header, 1);
  detail::put_u16(header, static_cast<std::uint16_t>(delta.channels));
  detail::put_u32(header, static_cast<std::uint32_t>(delta.height));
  detail::put_u32(header, static_cast<std::uint32_t>(delta.width));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  for (float v : delta.data) {
    std::uint32_t bits = std::bit_cast<std::uint32_t>(v);
    char buf[4];
    for (int i = 0; i < 4; ++i) buf[i] = static_cast<char>((bits >> (8 * i)) & 0xFF);
    out.write(buf, 4);
  }
  if (!out) throw IoError("short write to '" + path + "'");
}

inline PixelGrid load_delta(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  unsigned char header[16];
  if (!in.read(reinterpret_cast<char*>(header), 16)) {
    throw IoError("'" + path + "' is too short for a delta header");
  }
  if (std::memcmp(header, "DLTA", 4) != 0) {
    throw IoError("'" + path + "' is not a delta file (bad magic)");
  }
  std::uint16_t version = detail::get_u16(header + 4);
  if (version != 1) {
    throw IoError("'" + path + "' has unsupported delta version " + std::to_string(version));
  }
  int channels = detail::get_u16(header + 6);
  int height = static_cast<int>(detail::get_u32(header + 8));
  int width = static_cast<int>(detail::get_u32(header + 12));
  PixelGrid grid(channels, height, width, 0.0f);
  for (float& v : grid.data) {
    unsigned char buf[4];
    if (!in.read(reinterpret_cast<char*>(buf), 4)) {
      throw IoError("'" + path + "' truncated payload");
    }
    v = std::bit_cast<float>(detail::get_u32(buf));
  }
  return grid;
}

}  // namespace confuse

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "ksr/error.hpp"

namespace ksr {

// Little-endian scalar I/O for the model and feature file formats.

inline void write_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {
      static_cast<unsigned char>(v & 0xff),
      static_cast<unsigned char>((v >> 8) & 0xff),
      static_cast<unsigned char>((v >> 16) & 0xff),
      static_cast<unsigned char>((v >> 24) & 0xff),
  };
  out.write(reinterpret_cast<const char*>(b), 4);
}

inline void write_u16(std::ostream& out, std::uint16_t v) {
  unsigned char b[2] = {
      static_cast<unsigned char>(v & 0xff),
      static_cast<unsigned char>((v >> 8) & 0xff),
  };
  out.write(reinterpret_cast<const char*>(b), 2);
}

inline void write_f64(std::ostream& out, double v) {
  const std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i)
    b[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(b), 8);
}

inline std::uint32_t read_u32(std::istream& in, const std::string& ctx) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (in.gcount() != 4) fail(ErrorCode::TruncatedFile, ctx);
  return static_cast<std::uint32_t>(b[0]) |
         (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

inline std::uint16_t read_u16(std::istream& in, const std::string& ctx) {
  unsigned char b[2];
  in.read(reinterpret_cast<char*>(b), 2);
  if (in.gcount() != 2) fail(ErrorCode::TruncatedFile, ctx);
  return static_cast<std::uint16_t>(static_cast<std::uint16_t>(b[0]) |
                                    (static_cast<std::uint16_t>(b[1]) << 8));
}

inline double read_f64(std::istream& in, const std::string& ctx) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  if (in.gcount() != 8) fail(ErrorCode::TruncatedFile, ctx);
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

inline void write_magic(std::ostream& out, const char magic[5]) {
  out.write(magic, 4);
}

inline void expect_magic(std::istream& in, const char magic[5],
                         const std::string& ctx) {
  char buf[4];
  in.read(buf, 4);
  if (in.gcount() != 4) fail(ErrorCode::TruncatedFile, ctx);
  if (std::memcmp(buf, magic, 4) != 0)
    fail(ErrorCode::UnsupportedFormat, ctx + ": bad magic");
}

}  // namespace ksr

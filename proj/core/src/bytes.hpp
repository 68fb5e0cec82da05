// Copyright (c) 2026 The distillkit Authors
// SPDX-License-Identifier: Apache-2.0

// Internal byte-order helpers for the checkpoint and IDX file formats.
// Both formats are defined at the byte level (checkpoints little-endian,
// IDX big-endian), so integers are packed explicitly instead of relying on
// host endianness.

#pragma once

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "distillkit/error.hpp"

namespace distillkit::detail {

inline void write_u32_le(std::ostream& out, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(b, 4);
}

inline void write_u64_le(std::ostream& out, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(b, 8);
}

inline void write_f32_le(std::ostream& out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  write_u32_le(out, bits);
}

inline void write_u32_be(std::ostream& out, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * (3 - i))) & 0xFF);
  out.write(b, 4);
}

inline void read_exact(std::istream& in, char* buf, std::size_t n, const char* what) {
  in.read(buf, static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) {
    throw Error(std::string("truncated file while reading ") + what);
  }
}

inline std::uint32_t read_u32_le(std::istream& in, const char* what) {
  char b[4];
  read_exact(in, b, 4, what);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(b[i])) << (8 * i);
  }
  return v;
}

inline std::uint64_t read_u64_le(std::istream& in, const char* what) {
  char b[8];
  read_exact(in, b, 8, what);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(b[i])) << (8 * i);
  }
  return v;
}

inline float read_f32_le(std::istream& in, const char* what) {
  const std::uint32_t bits = read_u32_le(in, what);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

inline std::uint32_t read_u32_be(std::istream& in, const char* what) {
  char b[4];
  read_exact(in, b, 4, what);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v = (v << 8) | static_cast<std::uint32_t>(static_cast<unsigned char>(b[i]));
  }
  return v;
}

}  // namespace distillkit::detail

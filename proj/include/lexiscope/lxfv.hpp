#pragma once

// LXFV binary feature files:
//   "LXFV" | u16 version (=1) | u32 rows | u32 dim | rows*dim f32
// all little-endian, row-major.

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "lexiscope/error.hpp"
#include "lexiscope/numerics.hpp"

namespace lexiscope {

inline constexpr char kLxfvMagic[4] = {'L', 'X', 'F', 'V'};
inline constexpr std::uint16_t kLxfvVersion = 1;
inline constexpr std::size_t kLxfvHeaderSize = 14;

namespace detail {

inline void put_le(std::vector<std::uint8_t>& out, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline std::uint64_t get_le(const std::uint8_t* p, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

}  // namespace detail

inline std::vector<std::uint8_t> encode_lxfv(const Matrix& m) {
  std::vector<std::uint8_t> out(std::begin(kLxfvMagic), std::end(kLxfvMagic));
  out.reserve(kLxfvHeaderSize + m.rows() * m.cols() * 4);
  detail::put_le(out, kLxfvVersion, 2);
  detail::put_le(out, m.rows(), 4);
  detail::put_le(out, m.cols(), 4);
  for (double v : m.data()) {
    const auto f = static_cast<float>(v);
    if (!std::isfinite(f)) fail(ErrorCode::kNonFiniteValue, "value not representable as finite f32");
    detail::put_le(out, std::bit_cast<std::uint32_t>(f), 4);
  }
  return out;
}

inline Matrix decode_lxfv(const std::vector<std::uint8_t>& bytes, const std::string& origin = "<memory>") {
  if (bytes.size() < kLxfvHeaderSize || std::memcmp(bytes.data(), kLxfvMagic, 4) != 0) {
    fail(ErrorCode::kBadMagic, origin + ": not an LXFV file");
  }
  const auto version = detail::get_le(bytes.data() + 4, 2);
  if (version != kLxfvVersion) fail(ErrorCode::kBadMagic, origin + ": unsupported LXFV version " + std::to_string(version));
  const auto rows = static_cast<std::size_t>(detail::get_le(bytes.data() + 6, 4));
  const auto dim = static_cast<std::size_t>(detail::get_le(bytes.data() + 10, 4));
  if (bytes.size() != kLxfvHeaderSize + rows * dim * 4) {
    fail(ErrorCode::kCountMismatch, origin + ": payload size does not match " + std::to_string(rows) + "x" + std::to_string(dim));
  }
  Matrix m(rows, dim);
  const std::uint8_t* p = bytes.data() + kLxfvHeaderSize;
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < dim; ++j, p += 4) {
      const auto f = std::bit_cast<float>(static_cast<std::uint32_t>(detail::get_le(p, 4)));
      if (!std::isfinite(f)) {
        fail(ErrorCode::kNonFiniteValue, origin + ": non-finite value at row " + std::to_string(i) + ", col " + std::to_string(j));
      }
      m(i, j) = static_cast<double>(f);
    }
  }
  return m;
}

inline std::vector<std::uint8_t> read_binary_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_binary_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::kIo, "write failed: " + path);
}

inline Matrix read_lxfv(const std::string& path) { return decode_lxfv(read_binary_file(path), path); }

inline void write_lxfv(const std::string& path, const Matrix& m) { write_binary_file(path, encode_lxfv(m)); }

// Rounds every value through f32, which is what a write/read cycle does.
inline Matrix round_to_f32(const Matrix& m) {
  Matrix out = m;
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (double& v : out.row(i)) v = static_cast<double>(static_cast<float>(v));
  return out;
}

}  // namespace lexiscope

#pragma once

#include <cctype>
#include <cstdint>
#include <string>
#include <vector>

#include "lexiscope/error.hpp"
#include "lexiscope/lxfv.hpp"

namespace lexiscope {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  bool operator==(const Rgb&) const = default;
};

// Row-major RGB raster.
struct Image {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<Rgb> pixels;

  Image() = default;
  Image(std::size_t w, std::size_t h, Rgb fill = {}) : width(w), height(h), pixels(w * h, fill) {
    if (w == 0 || h == 0) fail(ErrorCode::kBadImage, "image dimensions must be positive");
  }

  Rgb& at(std::size_t x, std::size_t y) { return pixels[y * width + x]; }
  const Rgb& at(std::size_t x, std::size_t y) const { return pixels[y * width + x]; }
};

// ITU-R BT.601 luma, rounded half up, on integers so no float rounding
// creeps into bin boundaries.
constexpr std::uint8_t gray_level(Rgb p) {
  return static_cast<std::uint8_t>((299u * p.r + 587u * p.g + 114u * p.b + 500u) / 1000u);
}

// Binary PPM (P6), maxval 255.
inline Image decode_ppm(const std::vector<std::uint8_t>& bytes, const std::string& origin = "<memory>") {
  std::size_t pos = 0;
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_uint = [&]() -> std::size_t {
    skip_space();
    if (pos >= bytes.size() || !std::isdigit(bytes[pos])) fail(ErrorCode::kBadImage, origin + ": bad PPM header");
    std::size_t v = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      v = v * 10 + (bytes[pos++] - '0');
      if (v > (1u << 24)) fail(ErrorCode::kBadImage, origin + ": PPM header value too large");
    }
    return v;
  };
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') fail(ErrorCode::kBadImage, origin + ": not a binary PPM (P6)");
  pos = 2;
  const auto w = read_uint();
  const auto h = read_uint();
  const auto maxval = read_uint();
  if (maxval != 255) fail(ErrorCode::kBadImage, origin + ": only 8-bit PPM is supported");
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) fail(ErrorCode::kBadImage, origin + ": bad PPM header");
  ++pos;
  if (w == 0 || h == 0) fail(ErrorCode::kBadImage, origin + ": empty image");
  if (bytes.size() - pos < w * h * 3) fail(ErrorCode::kBadImage, origin + ": truncated pixel data");
  Image img(w, h);
  for (auto& p : img.pixels) {
    p = {bytes[pos], bytes[pos + 1], bytes[pos + 2]};
    pos += 3;
  }
  return img;
}

inline std::vector<std::uint8_t> encode_ppm(const Image& img) {
  const std::string header = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + img.pixels.size() * 3);
  for (const auto& p : img.pixels) {
    out.push_back(p.r);
    out.push_back(p.g);
    out.push_back(p.b);
  }
  return out;
}

inline Image read_ppm(const std::string& path) { return decode_ppm(read_binary_file(path), path); }

inline void write_ppm(const std::string& path, const Image& img) { write_binary_file(path, encode_ppm(img)); }

}  // namespace lexiscope

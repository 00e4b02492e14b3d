#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "mattefuse/image.hpp"

namespace mattefuse {

// Undecoded integer samples as stored in the file (after palette / sub-byte
// expansion). bit_depth is 8 or 16.
struct RawPng {
  int width = 0;
  int height = 0;
  int channels = 0;
  int bit_depth = 0;
  std::vector<std::uint16_t> samples;
};

RawPng load_png_raw(const std::filesystem::path& path);

// Grayscale or RGB PNG, 8 or 16 bit, mapped linearly to [0,1] by dividing by
// 2^bits - 1. No gamma handling. Files with an alpha channel are rejected.
ImageF load_png(const std::filesystem::path& path);

// Encodes with samples clamped to [0,1] and rounded to nearest. Output bytes
// depend only on the pixel data and bit depth.
std::vector<std::uint8_t> encode_png(const ImageF& img, int bit_depth);
std::vector<std::uint8_t> encode_png_raw(const RawPng& raw);

// encode_png + atomic write. Returns the written bytes.
std::vector<std::uint8_t> save_png(const ImageF& img, const std::filesystem::path& path,
                                   int bit_depth = 16);

}  // namespace mattefuse

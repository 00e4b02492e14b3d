#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "mattefuse/image.hpp"

namespace mattefuse {

// Three-level fusion guidance: 1 = source A focused, 0 = source B focused,
// 0.5 = focused/defocused boundary band.
class GuidanceMap {
 public:
  static constexpr double kSourceB = 0.0;
  static constexpr double kBand = 0.5;
  static constexpr double kSourceA = 1.0;

  GuidanceMap() = default;
  // Throws ValidationError unless every pixel is exactly 0, 0.5 or 1.
  explicit GuidanceMap(ImageF levels);
  static GuidanceMap filled(int width, int height, double level);

  const ImageF& image() const noexcept { return levels_; }
  int width() const noexcept { return levels_.width(); }
  int height() const noexcept { return levels_.height(); }
  double at(int x, int y) const { return levels_.at(x, y); }

  // Swaps the A/B roles: 0 <-> 1, band unchanged.
  GuidanceMap inverted() const;
  bool is_constant() const;

  std::size_t count(double level) const;

  friend bool operator==(const GuidanceMap&, const GuidanceMap&) = default;

 private:
  ImageF levels_;
};

struct EstimateParams {
  int window = 9;           // focus-measure box, odd
  int band_radius = 6;      // Chebyshev radius of the 0.5 band around transitions
  int majority_radius = 7;  // (2r+1)^2 majority vote on the binary decision
};

// Sum of squared 4-neighbour Laplacian over a window x window box, reflect-101
// borders. Input must be single-channel.
ImageF laplacian_energy(const ImageF& gray, int window);

// Classical estimator standing in for a learned initial-fusion stage:
// decision = 1 where A's focus measure is strictly larger (ties go to B),
// majority filtered, then every pixel within band_radius of a 0/1 transition
// becomes 0.5.
GuidanceMap estimate_guidance(const ImageF& a, const ImageF& b, const EstimateParams& params = {});

struct GuidanceCheck {
  std::size_t off_level_count = 0;
  std::vector<std::pair<int, int>> first_off_level;  // (x, y), at most 10
  // Band pixels that do not have both a 0 and a 1 pixel within band_radius
  // (informational; thin structures legitimately produce these).
  std::size_t band_pixels = 0;
  std::size_t band_orphans = 0;

  bool levels_ok() const noexcept { return off_level_count == 0; }
  std::string summary() const;
};

// Level check for an 8-bit grayscale level file: values within +-2 of
// {0, 128, 255} are accepted.
GuidanceCheck check_guidance_levels(const std::vector<std::uint16_t>& samples, int width);
GuidanceCheck check_band(const GuidanceMap& map, int band_radius);

// 8-bit grayscale PNG with levels {0, 128, 255}. load_guidance throws
// ValidationError listing up to 10 offending coordinates, IoError for
// unreadable files or non-8-bit-grayscale layouts.
GuidanceMap load_guidance(const std::filesystem::path& path);
GuidanceCheck validate_guidance_file(const std::filesystem::path& path, int band_radius = 6);
std::vector<std::uint8_t> encode_guidance(const GuidanceMap& map);
void save_guidance(const GuidanceMap& map, const std::filesystem::path& path);

// Chebyshev dilation of a binary mask by `radius` (separable max filter).
std::vector<std::uint8_t> dilate_square(const std::vector<std::uint8_t>& mask, int width, int height,
                                        int radius);

}  // namespace mattefuse

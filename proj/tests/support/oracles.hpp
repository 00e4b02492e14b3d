#pragma once

// Reference implementations used as test oracles. They are deliberately
// written differently from the library code: dense 2-D loops, direct
// formula evaluation, finite differences.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "mattefuse/defocus.hpp"
#include "mattefuse/image.hpp"

namespace oracle {

using mattefuse::ImageF;

// 1-D taps exp(-i^2 / 2 sigma^2), |i| <= max(1, ceil(3 sigma)), normalized.
// sigma == 0 gives {1}.
std::vector<double> gaussian_taps(double sigma);

// Mirror without repeating the edge sample, by repeated folding.
int mirror(int i, int n);

// Dense 2-D convolution with the outer product of gaussian_taps(sigma).
ImageF dense_blur(const ImageF& img, double sigma);

// Brute-force metrics written straight from the formulas on a grayscale image.
double lif(const ImageF& gray);
double ag(const ImageF& gray);
double msd(const ImageF& gray);
double gld(const ImageF& gray);

// Central difference of f at x along every sample of `target`.
std::vector<double> central_differences(ImageF& target, const std::function<double()>& f, double h);

// Seeded random image, samples uniform in [lo, hi).
ImageF random_image(int w, int h, int ch, std::uint64_t seed, double lo = 0.0, double hi = 1.0);

// Band-limited texture in [0,1]: a few random sinusoids plus blurred noise.
ImageF textured_image(int w, int h, int ch, std::uint64_t seed);

// Soft-edged ellipse matte (1 inside, 0 outside, about one pixel of
// anti-aliasing at the rim).
ImageF ellipse_matte(int w, int h, double cx, double cy, double rx, double ry);

// Desk-scale asset set on disk: foregrounds (textured color + ellipse matte)
// and textured backgrounds, plus catalog.yaml. Returns the catalog path.
std::filesystem::path write_desk_assets(const std::filesystem::path& dir, int n_fg, int n_bg, int fg_w, int fg_h,
                                        int bg_w, int bg_h, std::uint64_t seed);

// Chebyshev distance from pixel (x, y) to a half-open rectangle; 0 inside.
int rect_distance(int x, int y, int x0, int y0, int x1, int y1);

// Pixel sets on the three-object fixture with object 2 in focus. `strip` is
// visible object-2 pixels within `strip_radius` of object 3 and farther than
// `near_radius` from object 1; `rest` is every visible object-2 pixel farther
// than `near_radius` from object 1; `near` is visible object-2 pixels within
// `near_radius` of object 1.
struct Fig7Regions {
  std::vector<std::pair<int, int>> strip, rest, near;
};
Fig7Regions fig7_regions(int strip_radius, int near_radius);

// Scene with `layers` random layers (random soft mattes and colors, sigma in
// [0, 5]) in front of an opaque textured backdrop.
struct RandomSceneSpec {
  int width = 40;
  int height = 32;
  int channels = 3;
};
mattefuse::Scene random_scene(int layers, std::uint64_t seed, const RandomSceneSpec& spec = {});

// Unique scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

std::vector<std::uint8_t> file_bytes(const std::filesystem::path& p);

}  // namespace oracle

#include "mattefuse/guidance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>

#include "mattefuse/errors.hpp"
#include "mattefuse/file_util.hpp"
#include "mattefuse/gaussian.hpp"
#include "mattefuse/parallel.hpp"
#include "mattefuse/png_io.hpp"

namespace mattefuse {

namespace {

bool is_level(double v) {
  return v == GuidanceMap::kSourceB || v == GuidanceMap::kBand || v == GuidanceMap::kSourceA;
}

// Box sum with reflect-101 borders, separable. Exact for integer-valued input.
ImageF box_sum(const ImageF& img, int radius) {
  const int w = img.width();
  const int h = img.height();
  ImageF tmp(w, h, 1);
  parallel_for(0, h, [&](int y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int t = -radius; t <= radius; ++t) acc += img.at(reflect101(x + t, w), y);
      tmp.at(x, y) = acc;
    }
  });
  ImageF out(w, h, 1);
  parallel_for(0, h, [&](int y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int t = -radius; t <= radius; ++t) acc += tmp.at(x, reflect101(y + t, h));
      out.at(x, y) = acc;
    }
  });
  return out;
}

}  // namespace

GuidanceMap::GuidanceMap(ImageF levels) : levels_(std::move(levels)) {
  require_single_channel(levels_, "guidance map");
  for (std::size_t i = 0; i < levels_.size(); ++i) {
    if (!is_level(levels_.data()[i])) {
      const int x = static_cast<int>(i % static_cast<std::size_t>(levels_.width()));
      const int y = static_cast<int>(i / static_cast<std::size_t>(levels_.width()));
      throw ValidationError("guidance map pixel (" + std::to_string(x) + ", " + std::to_string(y) +
                            ") is not one of {0, 0.5, 1}");
    }
  }
}

GuidanceMap GuidanceMap::filled(int width, int height, double level) {
  return GuidanceMap(ImageF(width, height, 1, level));
}

GuidanceMap GuidanceMap::inverted() const {
  ImageF flipped = levels_;
  for (double& v : flipped.data()) {
    if (v != kBand) v = 1.0 - v;
  }
  GuidanceMap out;
  out.levels_ = std::move(flipped);
  return out;
}

bool GuidanceMap::is_constant() const {
  const auto d = levels_.data();
  return std::all_of(d.begin(), d.end(), [&](double v) { return v == d.front(); });
}

std::size_t GuidanceMap::count(double level) const {
  const auto d = levels_.data();
  return static_cast<std::size_t>(std::count(d.begin(), d.end(), level));
}

ImageF laplacian_energy(const ImageF& gray, int window) {
  require_single_channel(gray, "laplacian_energy input");
  if (window < 1 || window % 2 == 0) throw ArgumentError("focus window must be a positive odd size");
  const int w = gray.width();
  const int h = gray.height();
  ImageF lap2(w, h, 1);
  parallel_for(0, h, [&](int y) {
    for (int x = 0; x < w; ++x) {
      const double centre = gray.at(x, y);
      const double l = 4.0 * centre - gray.at(reflect101(x - 1, w), y) - gray.at(reflect101(x + 1, w), y) -
                       gray.at(x, reflect101(y - 1, h)) - gray.at(x, reflect101(y + 1, h));
      lap2.at(x, y) = l * l;
    }
  });
  return box_sum(lap2, window / 2);
}

std::vector<std::uint8_t> dilate_square(const std::vector<std::uint8_t>& mask, int width, int height,
                                        int radius) {
  if (radius <= 0) return mask;
  const auto idx = [width](int x, int y) {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x);
  };
  std::vector<std::uint8_t> tmp(mask.size(), 0);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const int lo = std::max(0, x - radius);
      const int hi = std::min(width - 1, x + radius);
      for (int t = lo; t <= hi; ++t) {
        if (mask[idx(t, y)]) {
          tmp[idx(x, y)] = 1;
          break;
        }
      }
    }
  }
  std::vector<std::uint8_t> out(mask.size(), 0);
  for (int y = 0; y < height; ++y) {
    const int lo = std::max(0, y - radius);
    const int hi = std::min(height - 1, y + radius);
    for (int x = 0; x < width; ++x) {
      for (int t = lo; t <= hi; ++t) {
        if (tmp[idx(x, t)]) {
          out[idx(x, y)] = 1;
          break;
        }
      }
    }
  }
  return out;
}

GuidanceMap estimate_guidance(const ImageF& a, const ImageF& b, const EstimateParams& params) {
  require_same_shape(a, b, "estimate_guidance");
  if (params.band_radius < 0 || params.majority_radius < 0) {
    throw ArgumentError("band and majority radii must be >= 0");
  }
  const int w = a.width();
  const int h = a.height();
  const ImageF energy_a = laplacian_energy(to_grayscale(a), params.window);
  const ImageF energy_b = laplacian_energy(to_grayscale(b), params.window);

  ImageF decision(w, h, 1);
  for (std::size_t i = 0; i < decision.size(); ++i) {
    decision.data()[i] = energy_a.data()[i] > energy_b.data()[i] ? 1.0 : 0.0;
  }

  // The vote window has an odd pixel count, so there are no ties.
  if (params.majority_radius > 0) {
    const ImageF votes = box_sum(decision, params.majority_radius);
    const double side = 2.0 * params.majority_radius + 1.0;
    const double half = side * side / 2.0;
    for (std::size_t i = 0; i < decision.size(); ++i) decision.data()[i] = votes.data()[i] > half ? 1.0 : 0.0;
  }

  std::vector<std::uint8_t> transition(decision.size(), 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double d = decision.at(x, y);
      const bool edge = (x > 0 && decision.at(x - 1, y) != d) || (x + 1 < w && decision.at(x + 1, y) != d) ||
                        (y > 0 && decision.at(x, y - 1) != d) || (y + 1 < h && decision.at(x, y + 1) != d);
      transition[static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x)] =
          edge ? 1 : 0;
    }
  }
  const auto band = dilate_square(transition, w, h, params.band_radius);
  for (std::size_t i = 0; i < band.size(); ++i) {
    if (band[i]) decision.data()[i] = GuidanceMap::kBand;
  }
  return GuidanceMap(std::move(decision));
}

std::string GuidanceCheck::summary() const {
  std::ostringstream os;
  if (levels_ok()) {
    os << "levels ok";
  } else {
    os << off_level_count << " off-level pixel(s); first at";
    for (const auto& [x, y] : first_off_level) os << " (" << x << ", " << y << ")";
  }
  os << "; band pixels " << band_pixels << ", without both sides nearby " << band_orphans;
  return os.str();
}

GuidanceCheck check_guidance_levels(const std::vector<std::uint16_t>& samples, int width) {
  GuidanceCheck check;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const int v = samples[i];
    if (v <= 2 || std::abs(v - 128) <= 2 || v >= 253) continue;
    ++check.off_level_count;
    if (check.first_off_level.size() < 10) {
      check.first_off_level.emplace_back(static_cast<int>(i % static_cast<std::size_t>(width)),
                                         static_cast<int>(i / static_cast<std::size_t>(width)));
    }
  }
  return check;
}

GuidanceCheck check_band(const GuidanceMap& map, int band_radius) {
  GuidanceCheck check;
  const int w = map.width();
  const int h = map.height();
  const auto d = map.image().data();
  std::vector<std::uint8_t> zeros(d.size()), ones(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    zeros[i] = d[i] == GuidanceMap::kSourceB;
    ones[i] = d[i] == GuidanceMap::kSourceA;
    if (d[i] == GuidanceMap::kBand) ++check.band_pixels;
  }
  if (map.is_constant()) return check;
  const auto near_zero = dilate_square(zeros, w, h, band_radius);
  const auto near_one = dilate_square(ones, w, h, band_radius);
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d[i] == GuidanceMap::kBand && !(near_zero[i] && near_one[i])) ++check.band_orphans;
  }
  return check;
}

namespace {

RawPng load_gray8(const std::filesystem::path& path) {
  RawPng raw = load_png_raw(path);
  if (raw.channels != 1 || raw.bit_depth != 8) {
    throw IoError(path.string() + ": guidance maps must be 8-bit grayscale PNGs");
  }
  return raw;
}

double snap(std::uint16_t v) {
  if (v <= 2) return GuidanceMap::kSourceB;
  if (v >= 253) return GuidanceMap::kSourceA;
  return GuidanceMap::kBand;
}

}  // namespace

GuidanceMap load_guidance(const std::filesystem::path& path) {
  const RawPng raw = load_gray8(path);
  const GuidanceCheck check = check_guidance_levels(raw.samples, raw.width);
  if (!check.levels_ok()) throw ValidationError(path.string() + ": " + check.summary());
  ImageF levels(raw.width, raw.height, 1);
  for (std::size_t i = 0; i < raw.samples.size(); ++i) levels.data()[i] = snap(raw.samples[i]);
  return GuidanceMap(std::move(levels));
}

GuidanceCheck validate_guidance_file(const std::filesystem::path& path, int band_radius) {
  const RawPng raw = load_gray8(path);
  GuidanceCheck check = check_guidance_levels(raw.samples, raw.width);
  if (!check.levels_ok()) return check;
  ImageF levels(raw.width, raw.height, 1);
  for (std::size_t i = 0; i < raw.samples.size(); ++i) levels.data()[i] = snap(raw.samples[i]);
  const GuidanceCheck band = check_band(GuidanceMap(std::move(levels)), band_radius);
  check.band_pixels = band.band_pixels;
  check.band_orphans = band.band_orphans;
  return check;
}

std::vector<std::uint8_t> encode_guidance(const GuidanceMap& map) {
  RawPng raw;
  raw.width = map.width();
  raw.height = map.height();
  raw.channels = 1;
  raw.bit_depth = 8;
  raw.samples.resize(map.image().size());
  const auto d = map.image().data();
  for (std::size_t i = 0; i < d.size(); ++i) {
    raw.samples[i] = d[i] == GuidanceMap::kSourceA ? 255 : d[i] == GuidanceMap::kBand ? 128 : 0;
  }
  return encode_png_raw(raw);
}

void save_guidance(const GuidanceMap& map, const std::filesystem::path& path) {
  write_file_atomic(path, encode_guidance(map));
}

}  // namespace mattefuse

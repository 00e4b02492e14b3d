#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mattefuse/guidance.hpp"
#include "mattefuse/image.hpp"

namespace mattefuse {

enum class FocusSide { A, B };

// Foreground (color + clear matte) and background image paths. Loaded from a
// YAML/JSON document:
//   foregrounds:
//     - {color: fg/0.png, matte: fg/0_alpha.png}
//   backgrounds: [bg/0.png, bg/1.png]
// Relative paths resolve against the catalog's directory.
struct AssetCatalog {
  struct Foreground {
    std::filesystem::path color;
    std::filesystem::path matte;
  };
  std::vector<Foreground> foregrounds;
  std::vector<std::filesystem::path> backgrounds;

  static AssetCatalog load(const std::filesystem::path& path);
  void validate() const;
};

struct GenConfig {
  int out_size = 512;
  int backgrounds_per_fg = 20;
  double sigma_min = 1.0;
  double sigma_max = 5.0;
  double swap_probability = 0.5;
  std::uint64_t seed = 0;
  double noise_stddev = 0.0;          // 0 disables the additive noise stage
  bool independent_bg_sigma = false;  // sample a second sigma for the background

  // out_size >= 64, 0.5 <= sigma_min <= sigma_max <= 10, per-fg count >= 1,
  // probability in [0,1], noise >= 0.
  void validate() const;
};

// Validates `cfg` against catalog sizes (sampling is without replacement, so
// backgrounds_per_fg may not exceed the background count) and returns the
// number of pairs a full run produces.
std::size_t planned_pair_count(std::size_t foregrounds, std::size_t backgrounds, const GenConfig& cfg);

struct PairParams {
  double sigma_fg = 0.0;
  double sigma_bg = 0.0;
  bool swap = false;
};

struct FusionPair {
  ImageF image_a;
  ImageF image_b;
  ImageF ground_truth;
  ImageF matte_clear;  // alpha^C
  ImageF matte_blur;   // alpha^B
  GuidanceMap gmap;
  PairParams params;
  FocusSide fg_focused_in = FocusSide::A;
};

// Three-level guidance from a blurred matte: with the foreground focused in
// A, 1 where alpha^B >= 1 - eps, 0 where alpha^B <= eps, 0.5 elsewhere.
// Focus in B swaps 0 and 1. Throws ArgumentError for values outside
// [-eps, 1 + eps].
GuidanceMap make_guidance(const ImageF& matte_blur, FocusSide fg_focused_in, double eps = 1e-6);

// Builds one training pair from a straight-color foreground, its clear matte
// and a background, all at the same size:
//   FG^C = color * alpha^C,  FG^B = G*FG^C,  BG^B = G*BG^C,  alpha^B = G*alpha^C
//   S1 = FG^C + (1 - alpha^C) BG^B      (foreground in focus)
//   S2 = FG^B + (1 - alpha^B) BG^C      (background in focus)
//   GT = FG^C + (1 - alpha^C) BG^C
// (A, B) = (S1, S2), or (S2, S1) when swapped.
FusionPair generate_pair(const ImageF& fg_color, const ImageF& matte_clear, const ImageF& background,
                         const PairParams& params);

// Assets as the generator sees them: foreground scaled so its shorter side is
// out_size and center-cropped; background resized to out_size x out_size;
// gray images broadcast to RGB when the other input is RGB.
struct PreparedAssets {
  ImageF fg_color;
  ImageF matte;
  ImageF background;
};
PreparedAssets prepare_assets(const AssetCatalog::Foreground& fg, const std::filesystem::path& background,
                              int out_size);

struct PairRecord {
  std::string id;
  std::size_t fg_index = 0;
  std::size_t pair_index = 0;
  std::size_t bg_index = 0;
  std::string fg_color;
  std::string fg_matte;
  std::string background;
  double sigma_fg = 0.0;
  double sigma_bg = 0.0;
  bool swap = false;
  std::vector<std::pair<std::string, std::string>> files;  // role -> path relative to out dir
  std::vector<std::pair<std::string, std::string>> file_sha256;
  std::string checksum;  // sha256 over the per-file digests in role order
};

struct PairError {
  std::string id;
  std::string message;
};

struct Manifest {
  GenConfig config;
  std::size_t planned_pairs = 0;
  std::vector<PairRecord> pairs;
  std::vector<PairError> errors;

  std::string to_json() const;
  static Manifest from_json(const std::string& text);
  static Manifest load(const std::filesystem::path& path);
};

// Deterministic sampling plan (no I/O): per foreground, backgrounds drawn
// without replacement from KeyedRng(seed, {fg, 0xB6}); per pair, sigma and
// swap drawn from KeyedRng(seed, {fg, pair, 0x5A}).
std::vector<PairRecord> plan_pairs(const AssetCatalog& catalog, const GenConfig& cfg);

// Writes pairs/<id>/{a,b,gt,matte,gmap}.png (gmap 8-bit levels, the rest
// 16-bit) and manifest.json. Per-pair failures are recorded in
// Manifest::errors and do not abort the run.
Manifest generate_dataset(const AssetCatalog& catalog, const GenConfig& cfg,
                          const std::filesystem::path& out_dir);

struct PairVerification {
  std::string id;
  double max_err_a = 0.0;
  double max_err_b = 0.0;
  double max_err_gt = 0.0;
  double max_err_matte = 0.0;
  std::size_t gmap_mismatches = 0;
  std::string error;  // non-empty when the pair could not be checked

  bool ok(double tolerance) const {
    return error.empty() && gmap_mismatches == 0 && max_err_a <= tolerance && max_err_b <= tolerance &&
           max_err_gt <= tolerance && max_err_matte <= tolerance;
  }
};

// Re-derives every pair of a generated dataset from its manifest and source
// assets and compares against the stored PNGs.
std::vector<PairVerification> verify_dataset(const std::filesystem::path& out_dir);

// Tolerance for 16-bit stored images: half a quantization step plus slack.
inline constexpr double kPng16Tolerance = 0.5 / 65535.0 + 1e-12;

}  // namespace mattefuse

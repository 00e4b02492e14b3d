#pragma once

#include <filesystem>
#include <optional>
#include <variant>

#include "mattefuse/guidance.hpp"
#include "mattefuse/image.hpp"
#include "mattefuse/metrics.hpp"

namespace mattefuse {

// Boundary correction added inside the 0.5 band. Stands in for a learned
// boundary-refinement stage.
struct ZeroCorrection {};
struct ImageCorrection {
  ImageF offsets;  // signed, nominally [-1, 1]; one channel or the source's
};
struct OracleCorrection {
  ImageF ground_truth;  // correction = ground_truth - initial fusion
};
using CorrectionSource = std::variant<ZeroCorrection, ImageCorrection, OracleCorrection>;

// gmap * A + (1 - gmap) * B, gmap broadcast over channels.
ImageF initial_fusion(const ImageF& a, const ImageF& b, const GuidanceMap& gmap);

// 1 - |2 gmap - 1|: 1 on the band, 0 on both focused levels.
ImageF boundary_map(const GuidanceMap& gmap);

// clamp(initial + bmap * correction, 0, 1).
ImageF final_fusion(const ImageF& a, const ImageF& b, const GuidanceMap& gmap, const CorrectionSource& corr);

// Correction images on disk: 16-bit PNG storing (c + 1) / 2.
ImageF load_correction(const std::filesystem::path& path);
void save_correction(const ImageF& offsets, const std::filesystem::path& path);

struct FuseRequest {
  std::filesystem::path image_a;
  std::filesystem::path image_b;
  std::optional<std::filesystem::path> gmap;        // estimated when absent
  std::optional<std::filesystem::path> correction;  // mutually exclusive with oracle_gt
  std::optional<std::filesystem::path> oracle_gt;
  std::filesystem::path out;
  std::optional<std::filesystem::path> metrics_out;
  std::optional<std::filesystem::path> gmap_out;
  EstimateParams estimate;
  double metrics_scale = 255.0;
};

struct FuseResult {
  GuidanceMap gmap;
  bool gmap_estimated = false;
  ImageF fused;
  std::optional<MetricsReport> metrics;
};

// Load, estimate or load guidance, fuse, write. Throws IoError /
// ValidationError / ArgumentError.
FuseResult run_fuse(const FuseRequest& request);

}  // namespace mattefuse

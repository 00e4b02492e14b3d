#include "mattefuse/fusion.hpp"

#include <algorithm>
#include <cmath>

#include "mattefuse/errors.hpp"
#include "mattefuse/file_util.hpp"
#include "mattefuse/png_io.hpp"

namespace mattefuse {

namespace {

void check_inputs(const ImageF& a, const ImageF& b, const GuidanceMap& gmap) {
  require_same_shape(a, b, "fusion sources");
  require_same_size(a, gmap.image(), "fusion guidance map");
}

// Correction offsets at the source's shape.
ImageF correction_offsets(const CorrectionSource& corr, const ImageF& initial) {
  return std::visit(
      [&](const auto& c) -> ImageF {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, ZeroCorrection>) {
          return ImageF(initial.width(), initial.height(), initial.channels(), 0.0);
        } else if constexpr (std::is_same_v<T, ImageCorrection>) {
          if (c.offsets.empty()) throw ArgumentError("correction image is empty");
          require_same_size(c.offsets, initial, "correction image");
          if (c.offsets.channels() == initial.channels()) return c.offsets;
          if (c.offsets.channels() == 1) return broadcast_channels(c.offsets, initial.channels());
          throw ArgumentError("correction image channel count does not match the sources");
        } else {
          if (c.ground_truth.empty()) throw ArgumentError("oracle correction requested without ground truth");
          require_same_shape(c.ground_truth, initial, "oracle ground truth");
          ImageF diff(initial.width(), initial.height(), initial.channels());
          for (std::size_t i = 0; i < diff.size(); ++i) {
            diff.data()[i] = c.ground_truth.data()[i] - initial.data()[i];
          }
          return diff;
        }
      },
      corr);
}

}  // namespace

ImageF initial_fusion(const ImageF& a, const ImageF& b, const GuidanceMap& gmap) {
  check_inputs(a, b, gmap);
  ImageF out(a.width(), a.height(), a.channels());
  const auto g = gmap.image().data();
  const auto da = a.data();
  const auto db = b.data();
  auto dst = out.data();
  const auto ch = static_cast<std::size_t>(a.channels());
  for (std::size_t p = 0; p < g.size(); ++p) {
    for (std::size_t c = 0; c < ch; ++c) {
      const std::size_t i = p * ch + c;
      dst[i] = g[p] * da[i] + (1.0 - g[p]) * db[i];
    }
  }
  return out;
}

ImageF boundary_map(const GuidanceMap& gmap) {
  ImageF out = gmap.image();
  for (double& v : out.data()) v = 1.0 - std::abs(2.0 * v - 1.0);
  return out;
}

ImageF final_fusion(const ImageF& a, const ImageF& b, const GuidanceMap& gmap, const CorrectionSource& corr) {
  ImageF out = initial_fusion(a, b, gmap);
  if (std::holds_alternative<ZeroCorrection>(corr)) {
    clamp01(out);
    return out;
  }
  const ImageF offsets = correction_offsets(corr, out);
  const ImageF bmap = boundary_map(gmap);
  const auto m = bmap.data();
  const auto off = offsets.data();
  auto dst = out.data();
  const auto ch = static_cast<std::size_t>(out.channels());
  for (std::size_t p = 0; p < m.size(); ++p) {
    if (m[p] == 0.0) continue;
    for (std::size_t c = 0; c < ch; ++c) dst[p * ch + c] += m[p] * off[p * ch + c];
  }
  clamp01(out);
  return out;
}

ImageF load_correction(const std::filesystem::path& path) {
  ImageF img = load_png(path);
  for (double& v : img.data()) v = 2.0 * v - 1.0;
  return img;
}

void save_correction(const ImageF& offsets, const std::filesystem::path& path) {
  ImageF stored = offsets;
  for (double& v : stored.data()) v = (std::clamp(v, -1.0, 1.0) + 1.0) / 2.0;
  save_png(stored, path, 16);
}

FuseResult run_fuse(const FuseRequest& request) {
  if (request.correction && request.oracle_gt) {
    throw ArgumentError("--corr and --oracle-gt are mutually exclusive");
  }
  ImageF a = load_png(request.image_a);
  ImageF b = load_png(request.image_b);
  if (a.channels() != b.channels()) {
    const int ch = std::max(a.channels(), b.channels());
    if (a.channels() == 1) a = broadcast_channels(a, ch);
    if (b.channels() == 1) b = broadcast_channels(b, ch);
  }
  require_same_shape(a, b, "fuse sources");

  FuseResult result;
  if (request.gmap) {
    result.gmap = load_guidance(*request.gmap);
  } else {
    result.gmap = estimate_guidance(a, b, request.estimate);
    result.gmap_estimated = true;
  }

  CorrectionSource corr = ZeroCorrection{};
  if (request.correction) corr = ImageCorrection{load_correction(*request.correction)};
  if (request.oracle_gt) corr = OracleCorrection{load_png(*request.oracle_gt)};

  result.fused = final_fusion(a, b, result.gmap, corr);
  save_png(result.fused, request.out, 16);
  if (request.gmap_out) save_guidance(result.gmap, *request.gmap_out);

  if (request.metrics_out) {
    MethodImages fused{"fused", {{request.out.stem().string(), result.fused}}};
    result.metrics = evaluate_images({fused}, request.metrics_scale);
    write_text_atomic(*request.metrics_out, result.metrics->to_json());
  }
  return result;
}

}  // namespace mattefuse

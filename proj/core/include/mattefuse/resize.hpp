#pragma once

#include "mattefuse/image.hpp"

namespace mattefuse {

// Bilinear resampling with pixel-center alignment:
//   src = (dst + 0.5) * in / out - 0.5, clamped to [0, in - 1].
ImageF resize_bilinear(const ImageF& img, int new_width, int new_height);

// Scales so the shorter side equals `side`, then center-crops to side x side.
ImageF resize_cover_crop(const ImageF& img, int side);

}  // namespace mattefuse

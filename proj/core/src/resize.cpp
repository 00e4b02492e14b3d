#include "mattefuse/resize.hpp"

#include <algorithm>
#include <cmath>

#include "mattefuse/errors.hpp"
#include "mattefuse/parallel.hpp"

namespace mattefuse {

namespace {

struct Tap {
  int lo;
  int hi;
  double frac;  // weight of hi
};

std::vector<Tap> axis_taps(int in, int out) {
  std::vector<Tap> taps(static_cast<std::size_t>(out));
  const double scale = static_cast<double>(in) / out;
  for (int d = 0; d < out; ++d) {
    double s = (d + 0.5) * scale - 0.5;
    s = std::clamp(s, 0.0, static_cast<double>(in - 1));
    const int lo = static_cast<int>(std::floor(s));
    const int hi = std::min(lo + 1, in - 1);
    taps[static_cast<std::size_t>(d)] = {lo, hi, s - lo};
  }
  return taps;
}

}  // namespace

ImageF resize_bilinear(const ImageF& img, int new_width, int new_height) {
  if (new_width < 1 || new_height < 1) {
    throw ArgumentError("resize target dimensions must be >= 1");
  }
  if (img.empty()) throw ArgumentError("cannot resize an empty image");
  if (new_width == img.width() && new_height == img.height()) return img;

  const auto xt = axis_taps(img.width(), new_width);
  const auto yt = axis_taps(img.height(), new_height);
  const int ch = img.channels();
  ImageF out(new_width, new_height, ch);
  parallel_for(0, new_height, [&](int y) {
    const Tap& ty = yt[static_cast<std::size_t>(y)];
    for (int x = 0; x < new_width; ++x) {
      const Tap& tx = xt[static_cast<std::size_t>(x)];
      for (int c = 0; c < ch; ++c) {
        const double top = (1.0 - tx.frac) * img.at(tx.lo, ty.lo, c) + tx.frac * img.at(tx.hi, ty.lo, c);
        const double bot = (1.0 - tx.frac) * img.at(tx.lo, ty.hi, c) + tx.frac * img.at(tx.hi, ty.hi, c);
        out.at(x, y, c) = (1.0 - ty.frac) * top + ty.frac * bot;
      }
    }
  });
  return out;
}

ImageF resize_cover_crop(const ImageF& img, int side) {
  if (side < 1) throw ArgumentError("crop side must be >= 1");
  const double scale = static_cast<double>(side) / std::min(img.width(), img.height());
  const int sw = std::max(side, static_cast<int>(std::lround(img.width() * scale)));
  const int sh = std::max(side, static_cast<int>(std::lround(img.height() * scale)));
  const ImageF scaled = resize_bilinear(img, sw, sh);
  if (sw == side && sh == side) return scaled;
  const int x0 = (sw - side) / 2;
  const int y0 = (sh - side) / 2;
  ImageF out(side, side, img.channels());
  for (int y = 0; y < side; ++y) {
    for (int x = 0; x < side; ++x) {
      for (int c = 0; c < img.channels(); ++c) out.at(x, y, c) = scaled.at(x0 + x, y0 + y, c);
    }
  }
  return out;
}

}  // namespace mattefuse

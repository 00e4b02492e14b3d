#include "mattefuse/gaussian.hpp"

#include <cmath>
#include <string>

#include "mattefuse/errors.hpp"
#include "mattefuse/parallel.hpp"
#include "mattefuse/rng.hpp"

namespace mattefuse {

GaussianKernel GaussianKernel::make(double sigma) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw ArgumentError("gaussian sigma must be finite and >= 0, got " + std::to_string(sigma));
  }
  GaussianKernel k;
  k.sigma = sigma;
  if (sigma == 0.0) {
    k.radius = 0;
    k.taps = {1.0};
    return k;
  }
  k.radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  k.taps.resize(static_cast<std::size_t>(2 * k.radius + 1));
  const double denom = 2.0 * sigma * sigma;
  double sum = 0.0;
  for (int i = -k.radius; i <= k.radius; ++i) {
    const double w = std::exp(-static_cast<double>(i) * i / denom);
    k.taps[static_cast<std::size_t>(i + k.radius)] = w;
    sum += w;
  }
  for (double& w : k.taps) w /= sum;
  return k;
}

int reflect101(int i, int n) noexcept {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

namespace {

// Convolves each row; `out` must have the same shape as `in`.
void blur_rows(const ImageF& in, ImageF& out, const GaussianKernel& k) {
  const int w = in.width();
  const int ch = in.channels();
  parallel_for(0, in.height(), [&](int y) {
    const auto src = in.row(y);
    auto dst = out.row(y);
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < ch; ++c) {
        double acc = 0.0;
        for (int t = -k.radius; t <= k.radius; ++t) {
          const int xs = reflect101(x + t, w);
          acc += k.tap(t) * src[static_cast<std::size_t>(xs * ch + c)];
        }
        dst[static_cast<std::size_t>(x * ch + c)] = acc;
      }
    }
  });
}

void blur_cols(const ImageF& in, ImageF& out, const GaussianKernel& k) {
  const int h = in.height();
  const std::size_t stride = static_cast<std::size_t>(in.width()) * static_cast<std::size_t>(in.channels());
  parallel_for(0, h, [&](int y) {
    auto dst = out.row(y);
    for (std::size_t i = 0; i < stride; ++i) dst[i] = 0.0;
    for (int t = -k.radius; t <= k.radius; ++t) {
      const auto src = in.row(reflect101(y + t, h));
      const double wt = k.tap(t);
      for (std::size_t i = 0; i < stride; ++i) dst[i] += wt * src[i];
    }
  });
}

}  // namespace

ImageF gaussian_blur(const ImageF& img, double sigma) {
  const GaussianKernel k = GaussianKernel::make(sigma);
  if (k.radius == 0 || img.empty()) return img;
  ImageF tmp(img.width(), img.height(), img.channels());
  blur_rows(img, tmp, k);
  ImageF out(img.width(), img.height(), img.channels());
  blur_cols(tmp, out, k);
  return out;
}

ImageF add_gaussian_noise(const ImageF& img, double stddev, unsigned long long seed) {
  if (!(stddev >= 0.0)) throw ArgumentError("noise stddev must be >= 0");
  if (stddev == 0.0) return img;
  ImageF out = img;
  KeyedRng rng(seed, {0x6e6f697365ULL});
  for (double& v : out.data()) v += stddev * rng.normal();
  return out;
}

}  // namespace mattefuse

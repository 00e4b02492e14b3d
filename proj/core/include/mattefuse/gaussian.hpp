#pragma once

#include <vector>

#include "mattefuse/image.hpp"

namespace mattefuse {

// Truncated, renormalized 1-D Gaussian. radius = ceil(3*sigma) for sigma > 0;
// sigma == 0 gives the identity kernel {1}.
struct GaussianKernel {
  double sigma = 0.0;
  int radius = 0;
  std::vector<double> taps;  // size 2*radius+1, symmetric, sums to 1

  static GaussianKernel make(double sigma);
  double tap(int offset) const { return taps[static_cast<std::size_t>(offset + radius)]; }
};

// Reflect-101 ("gfedcb|abcdefgh|gfedcba") index mapping for any integer i.
int reflect101(int i, int n) noexcept;

// Separable Gaussian blur: horizontal pass then vertical pass, reflect-101
// borders, accumulation in double. sigma == 0 returns a copy.
ImageF gaussian_blur(const ImageF& img, double sigma);

// One-parameter defocus noise term: adds zero-mean Gaussian noise with the
// given standard deviation, drawn deterministically from `seed`.
ImageF add_gaussian_noise(const ImageF& img, double stddev, unsigned long long seed);

}  // namespace mattefuse

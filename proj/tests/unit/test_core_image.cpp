#include <atomic>
#include <cmath>
#include <numbers>
#include <set>

#include "doctest.h"
#include "mattefuse/errors.hpp"
#include "mattefuse/gaussian.hpp"
#include "mattefuse/image.hpp"
#include "mattefuse/parallel.hpp"
#include "mattefuse/png_io.hpp"
#include "mattefuse/resize.hpp"
#include "mattefuse/rng.hpp"
#include "mattefuse/file_util.hpp"
#include "oracles.hpp"

using namespace mattefuse;

namespace {

// Restores the default worker count when a test changes it.
struct ThreadGuard {
  ~ThreadGuard() { set_thread_count(0); }
};

}  // namespace

TEST_CASE("image container basics") {
  ImageF img(4, 3, 3, 0.25);
  CHECK(img.width() == 4);
  CHECK(img.height() == 3);
  CHECK(img.channels() == 3);
  CHECK(img.data().size() == 36);
  img.at(2, 1, 2) = 0.75;
  CHECK(img.data()[(1 * 4 + 2) * 3 + 2] == 0.75);
  CHECK_THROWS_AS(ImageF(4, 3, 2), ArgumentError);
  CHECK_THROWS_AS(ImageF(0, 3, 1), ArgumentError);

  const ImageF gray = to_grayscale(img);
  CHECK(gray.channels() == 1);
  CHECK(gray.at(2, 1) == doctest::Approx((0.25 + 0.25 + 0.75) / 3.0).epsilon(1e-15));
  CHECK(broadcast_channels(gray, 3).at(2, 1, 0) == gray.at(2, 1));
  CHECK_THROWS_AS(require_same_shape(img, gray, "x"), ArgumentError);
}

TEST_CASE("gaussian kernel shape") {
  for (double sigma : {0.1, 0.5, 1.0, 1.3, 2.0, 3.7, 5.0}) {
    const GaussianKernel k = GaussianKernel::make(sigma);
    CHECK(k.radius == std::max(1, static_cast<int>(std::ceil(3.0 * sigma))));
    double sum = 0.0;
    for (double t : k.taps) sum += t;
    CHECK(std::abs(sum - 1.0) < 1e-9);
    const auto expected = oracle::gaussian_taps(sigma);
    REQUIRE(expected.size() == k.taps.size());
    for (int i = -k.radius; i <= k.radius; ++i) {
      CHECK(k.tap(i) == k.tap(-i));
      CHECK(std::abs(k.tap(i) - expected[static_cast<std::size_t>(i + k.radius)]) < 1e-15);
    }
  }
  const GaussianKernel id = GaussianKernel::make(0.0);
  CHECK(id.radius == 0);
  CHECK(id.taps == std::vector<double>{1.0});
  CHECK_THROWS_AS(GaussianKernel::make(-1.0), ArgumentError);
}

TEST_CASE("reflect-101 index mapping") {
  for (int n = 1; n <= 7; ++n) {
    for (int i = -40; i <= 40; ++i) CHECK(reflect101(i, n) == oracle::mirror(i, n));
  }
  CHECK(reflect101(-1, 5) == 1);
  CHECK(reflect101(5, 5) == 3);
}

TEST_CASE("blur of constants and sigma zero") {
  const ImageF flat(13, 9, 3, 0.3);
  for (double sigma : {0.0, 0.7, 2.0, 6.0}) {
    CHECK(max_abs_diff(gaussian_blur(flat, sigma), flat) < 1e-15);
  }
  const ImageF img = oracle::random_image(11, 7, 3, 5);
  CHECK(gaussian_blur(img, 0.0) == img);
  CHECK_THROWS_AS(gaussian_blur(img, -0.5), ArgumentError);
}

TEST_CASE("impulse response against the continuous peak and the dense oracle") {
  ImageF impulse(9, 9, 1, 0.0);
  impulse.at(4, 4) = 1.0;
  const ImageF out = gaussian_blur(impulse, 1.0);
  const double peak = 1.0 / (2.0 * std::numbers::pi);
  CHECK(std::abs(out.at(4, 4) - peak) / peak < 0.02);
  CHECK(max_abs_diff(out, oracle::dense_blur(impulse, 1.0)) < 1e-12);
}

TEST_CASE("separable blur equals dense 2-D convolution") {
  const double sigmas[] = {0.4, 0.8, 1.0, 1.6, 2.5, 3.0, 3.3, 4.1, 5.0, 2.0};
  for (int i = 0; i < 10; ++i) {
    const ImageF img = oracle::random_image(16, 16, i % 2 ? 3 : 1, 100 + static_cast<std::uint64_t>(i));
    CHECK(max_abs_diff(gaussian_blur(img, sigmas[i]), oracle::dense_blur(img, sigmas[i])) < 1e-10);
  }
  // Kernel wider than the image exercises repeated reflection.
  const ImageF tiny = oracle::random_image(5, 3, 1, 77);
  CHECK(max_abs_diff(gaussian_blur(tiny, 4.0), oracle::dense_blur(tiny, 4.0)) < 1e-10);
}

TEST_CASE("blur is linear and range preserving") {
  const ImageF x = oracle::random_image(20, 17, 3, 1);
  const ImageF y = oracle::random_image(20, 17, 3, 2);
  ImageF mix(20, 17, 3);
  for (std::size_t i = 0; i < mix.data().size(); ++i) mix.data()[i] = 0.3 * x.data()[i] - 1.7 * y.data()[i];
  const ImageF bx = gaussian_blur(x, 2.2), by = gaussian_blur(y, 2.2), bm = gaussian_blur(mix, 2.2);
  for (std::size_t i = 0; i < mix.data().size(); ++i) {
    CHECK(std::abs(bm.data()[i] - (0.3 * bx.data()[i] - 1.7 * by.data()[i])) < 1e-9);
  }
  const auto [lo, hi] = std::minmax_element(x.data().begin(), x.data().end());
  for (double v : bx.data()) {
    CHECK(v >= *lo - 1e-12);
    CHECK(v <= *hi + 1e-12);
  }
}

TEST_CASE("blur output does not depend on the thread count") {
  ThreadGuard guard;
  const ImageF img = oracle::random_image(97, 61, 3, 9);
  set_thread_count(1);
  const ImageF one = gaussian_blur(img, 2.7);
  set_thread_count(5);
  const ImageF five = gaussian_blur(img, 2.7);
  CHECK(one == five);
}

TEST_CASE("additive noise stage") {
  const ImageF flat(64, 64, 1, 0.5);
  const ImageF a = add_gaussian_noise(flat, 0.05, 3);
  CHECK(a == add_gaussian_noise(flat, 0.05, 3));
  CHECK(a != add_gaussian_noise(flat, 0.05, 4));
  double mean = 0.0, var = 0.0;
  for (double v : a.data()) mean += v - 0.5;
  mean /= static_cast<double>(a.size());
  for (double v : a.data()) var += (v - 0.5 - mean) * (v - 0.5 - mean);
  var /= static_cast<double>(a.size());
  CHECK(std::abs(mean) < 0.005);
  CHECK(std::sqrt(var) == doctest::Approx(0.05).epsilon(0.1));
  CHECK(add_gaussian_noise(flat, 0.0, 3) == flat);
}

TEST_CASE("png round trips") {
  oracle::TempDir dir("png");
  const ImageF rgb = oracle::random_image(13, 6, 3, 11);
  save_png(rgb, dir / "rgb16.png");
  const ImageF back = load_png(dir / "rgb16.png");
  REQUIRE(back.same_shape(rgb));
  CHECK(max_abs_diff(back, rgb) <= 1.0 / 65535.0);

  const ImageF gray = oracle::random_image(7, 9, 1, 12);
  save_png(gray, dir / "g8.png", 8);
  const ImageF g8 = load_png(dir / "g8.png");
  CHECK(g8.channels() == 1);
  CHECK(max_abs_diff(g8, gray) <= 0.5 / 255.0 + 1e-12);

  RawPng raw{3, 1, 1, 8, {0, 128, 255}};
  write_file_atomic(dir / "levels.png", encode_png_raw(raw));
  const ImageF levels = load_png(dir / "levels.png");
  CHECK(levels.at(0, 0) == 0.0);
  CHECK(levels.at(1, 0) == 128.0 / 255.0);
  CHECK(levels.at(2, 0) == 1.0);

  CHECK(encode_png(rgb, 16) == encode_png(rgb, 16));
  CHECK(oracle::file_bytes(dir / "rgb16.png") == encode_png(rgb, 16));

  ImageF wild(2, 1, 1);
  wild.at(0, 0) = -0.3;
  wild.at(1, 0) = 1.7;
  save_png(wild, dir / "clamped.png");
  const ImageF clamped = load_png(dir / "clamped.png");
  CHECK(clamped.at(0, 0) == 0.0);
  CHECK(clamped.at(1, 0) == 1.0);
}

TEST_CASE("png errors") {
  oracle::TempDir dir("pngerr");
  CHECK_THROWS_AS(load_png(dir / "missing.png"), IoError);
  write_text_atomic(dir / "garbage.png", "definitely not a png");
  CHECK_THROWS_AS(load_png(dir / "garbage.png"), IoError);
  CHECK_THROWS_AS(encode_png(ImageF(2, 2, 1), 12), ArgumentError);
}

TEST_CASE("bilinear resize") {
  const ImageF flat(7, 5, 3, 0.4);
  CHECK(max_abs_diff(resize_bilinear(flat, 13, 2), ImageF(13, 2, 3, 0.4)) < 1e-15);
  const ImageF img = oracle::random_image(6, 4, 3, 3);
  CHECK(resize_bilinear(img, 6, 4) == img);

  ImageF two(2, 1, 1);
  two.at(1, 0) = 1.0;
  const ImageF three = resize_bilinear(two, 3, 1);
  CHECK(three.at(0, 0) == 0.0);
  CHECK(three.at(1, 0) == 0.5);
  CHECK(three.at(2, 0) == 1.0);
  CHECK_THROWS_AS(resize_bilinear(img, 0, 3), ArgumentError);

  const ImageF wide = resize_cover_crop(oracle::random_image(30, 20, 1, 4), 10);
  CHECK(wide.width() == 10);
  CHECK(wide.height() == 10);
}

TEST_CASE("keyed rng streams") {
  KeyedRng a(7, {1, 2}), b(7, {1, 2}), c(7, {2, 1}), d(8, {1, 2});
  bool differs_c = false, differs_d = false;
  for (int i = 0; i < 16; ++i) {
    const auto va = a.next_u64();
    CHECK(va == b.next_u64());
    differs_c |= va != c.next_u64();
    differs_d |= va != d.next_u64();
  }
  CHECK(differs_c);
  CHECK(differs_d);

  KeyedRng r(1, {});
  std::set<std::uint64_t> seen;
  double sum = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    sum += u;
    const auto k = r.below(7);
    CHECK(k < 7);
    seen.insert(k);
  }
  CHECK(seen.size() == 7);
  CHECK(sum / 20000.0 == doctest::Approx(0.5).epsilon(0.02));
  double m = 0.0, s = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const double z = r.normal();
    m += z;
    s += z * z;
  }
  CHECK(std::abs(m / 20000.0) < 0.03);
  CHECK(s / 20000.0 == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("parallel_for covers every index once and propagates errors") {
  ThreadGuard guard;
  set_thread_count(4);
  std::vector<std::atomic<int>> hits(1000);
  parallel_for(0, 1000, [&](int i) {
    hits[static_cast<std::size_t>(i)]++;
    parallel_for(0, 3, [](int) {});  // nested calls run inline
  });
  for (auto& h : hits) CHECK(h.load() == 1);
  CHECK_THROWS_AS(parallel_for(0, 100,
                               [](int i) {
                                 if (i == 57) throw IoError("boom");
                               }),
                  IoError);
  parallel_for(5, 5, [](int) { FAIL("empty range ran"); });
}

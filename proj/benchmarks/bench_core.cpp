#include <benchmark/benchmark.h>

#include <cmath>

#include "mattefuse/dataset.hpp"
#include "mattefuse/defocus.hpp"
#include "mattefuse/gaussian.hpp"
#include "mattefuse/guidance.hpp"
#include "mattefuse/metrics.hpp"
#include "mattefuse/parallel.hpp"

using namespace mattefuse;

namespace {

ImageF pattern(int size, int channels) {
  ImageF img(size, size, channels);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x)
      for (int c = 0; c < channels; ++c)
        img.at(x, y, c) = 0.5 + 0.4 * std::sin(0.13 * x + 0.7 * c) * std::cos(0.09 * y);
  return img;
}

ImageF disc(int size) {
  ImageF m(size, size, 1, 0.0);
  const double r = size * 0.3;
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) m.at(x, y) = std::hypot(x - size / 2.0, y - size / 2.0) < r ? 1.0 : 0.0;
  return m;
}

void BM_GaussianBlur(benchmark::State& state) {
  set_thread_count(1);
  const ImageF img = pattern(512, 3);
  const double sigma = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(gaussian_blur(img, sigma));
  state.SetItemsProcessed(state.iterations() * 512 * 512);
}
BENCHMARK(BM_GaussianBlur)->Arg(1)->Arg(3)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_RenderAlphaMatte(benchmark::State& state) {
  set_thread_count(1);
  for (auto _ : state) benchmark::DoNotOptimize(render_alpha_matte(make_fig7_scene(2)));
}
BENCHMARK(BM_RenderAlphaMatte)->Unit(benchmark::kMillisecond);

void BM_GeneratePair(benchmark::State& state) {
  set_thread_count(1);
  const ImageF fg = pattern(512, 3);
  const ImageF bg = pattern(512, 3);
  const ImageF matte = disc(512);
  for (auto _ : state) benchmark::DoNotOptimize(generate_pair(fg, matte, bg, PairParams{3.0, 3.0, false}));
}
BENCHMARK(BM_GeneratePair)->Unit(benchmark::kMillisecond);

void BM_Metrics(benchmark::State& state) {
  const ImageF img = pattern(512, 3);
  for (auto _ : state) benchmark::DoNotOptimize(compute_metrics(img, 255.0));
}
BENCHMARK(BM_Metrics)->Unit(benchmark::kMillisecond);

void BM_EstimateGuidance(benchmark::State& state) {
  set_thread_count(1);
  const ImageF sharp = pattern(512, 3);
  const ImageF soft = gaussian_blur(sharp, 3.0);
  for (auto _ : state) benchmark::DoNotOptimize(estimate_guidance(sharp, soft));
}
BENCHMARK(BM_EstimateGuidance)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

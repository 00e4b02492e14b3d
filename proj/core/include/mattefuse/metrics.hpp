#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "mattefuse/image.hpp"

namespace mattefuse {

// No-reference fusion quality metrics on a single-channel image indexed
// I(m, n) with m the row (M = height) and n the column (N = width). The
// gradient-style sums run over m < M-1, n < N-1 with forward differences.

// Linear index of fuzziness, (2/MN) sum min{p, 1-p}, p = sin(pi/2 (1 - I/I_max)).
// I_max is the image's own maximum. Returns 0 when I_max <= 0 (see
// lif_is_degenerate).
double metric_lif(const ImageF& gray);
// Same with a fixed reference maximum (e.g. 1.0 for the nominal white level).
double metric_lif(const ImageF& gray, double i_max);
bool lif_is_degenerate(const ImageF& gray);

// Average gradient, 1/((M-1)(N-1)) sum (1/4) sqrt(dI/dm^2 + dI/dn^2).
double metric_ag(const ImageF& gray);

// 1/((M-1)(N-1)) sqrt(sum (I - mean)^2); the mean is over the whole image.
double metric_msd(const ImageF& gray);

// Gray level difference, 1/((M-1)(N-1)) sum |I(m,n)-I(m+1,n)| + |I(m,n)-I(m,n+1)|.
double metric_gld(const ImageF& gray);

enum class Metric { AG = 0, LIF = 1, MSD = 2, GLD = 3 };
inline constexpr std::array<Metric, 4> kAllMetrics{Metric::AG, Metric::LIF, Metric::MSD, Metric::GLD};
const char* metric_name(Metric m);
// LIF is the only metric where lower is better.
bool higher_is_better(Metric m);

struct MetricValues {
  double ag = 0.0;
  double lif = 0.0;
  double msd = 0.0;
  double gld = 0.0;
  bool lif_degenerate = false;

  double get(Metric m) const;
};

// Channel-mean grayscale, multiplied by intensity_scale, then all four
// metrics.
MetricValues compute_metrics(const ImageF& img, double intensity_scale = 1.0);

struct MetricsRow {
  std::string method;
  std::string image_id;
  MetricValues values;
};

struct MethodSummary {
  std::string method;
  std::size_t images = 0;
  MetricValues mean;
  // Images on which this method is strictly better than every other method,
  // indexed by Metric. Only filled when at least two methods are compared.
  std::array<std::size_t, 4> wins{};
};

struct MetricsReport {
  double intensity_scale = 1.0;
  std::vector<MetricsRow> rows;
  std::vector<MethodSummary> methods;
  std::vector<std::string> errors;
  std::vector<std::string> warnings;

  bool has_errors() const noexcept { return !errors.empty(); }
  std::string to_json() const;
  std::string to_table() const;
};

struct MethodImages {
  std::string label;
  std::vector<std::pair<std::string, ImageF>> images;  // (image id, image)
};

struct MethodInputs {
  std::string label;
  std::vector<std::filesystem::path> images;
};

// Images are matched across methods by id (file stem for the path variant).
MetricsReport evaluate_images(const std::vector<MethodImages>& methods, double intensity_scale = 1.0);
MetricsReport evaluate_batch(const std::vector<MethodInputs>& methods, double intensity_scale = 1.0);

// A directory (all *.png inside, sorted), a glob on the file name
// ("dir/*_fused.png"), or a single file.
std::vector<std::filesystem::path> expand_inputs(const std::string& dir_or_glob);

}  // namespace mattefuse

#include "mattefuse/metrics.hpp"

#include <fnmatch.h>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <numbers>
#include <sstream>

#include "json.hpp"
#include "mattefuse/errors.hpp"
#include "mattefuse/parallel.hpp"
#include "mattefuse/png_io.hpp"

namespace fs = std::filesystem;

namespace mattefuse {

namespace {

void require_metric_input(const ImageF& gray, const char* name) {
  require_single_channel(gray, name);
  if (gray.width() < 2 || gray.height() < 2) {
    throw ArgumentError(std::string(name) + " needs an image of at least 2x2 pixels");
  }
}

double interior_norm(const ImageF& gray) {
  return static_cast<double>(gray.height() - 1) * static_cast<double>(gray.width() - 1);
}

}  // namespace

bool lif_is_degenerate(const ImageF& gray) {
  require_single_channel(gray, "LIF input");
  const auto d = gray.data();
  return *std::max_element(d.begin(), d.end()) <= 0.0;
}

double metric_lif(const ImageF& gray) {
  require_single_channel(gray, "LIF input");
  const auto d = gray.data();
  return metric_lif(gray, *std::max_element(d.begin(), d.end()));
}

double metric_lif(const ImageF& gray, double i_max) {
  require_single_channel(gray, "LIF input");
  if (!std::isfinite(i_max)) throw ArgumentError("LIF reference maximum must be finite");
  if (i_max <= 0.0) return 0.0;
  const auto d = gray.data();
  double sum = 0.0;
  for (double v : d) {
    const double p = std::sin(std::numbers::pi / 2.0 * (1.0 - v / i_max));
    sum += std::min(p, 1.0 - p);
  }
  return 2.0 * sum / static_cast<double>(d.size());
}

double metric_ag(const ImageF& gray) {
  require_metric_input(gray, "AG input");
  double sum = 0.0;
  for (int m = 0; m + 1 < gray.height(); ++m) {
    for (int n = 0; n + 1 < gray.width(); ++n) {
      const double dm = gray.at(n, m + 1) - gray.at(n, m);
      const double dn = gray.at(n + 1, m) - gray.at(n, m);
      sum += 0.25 * std::sqrt(dm * dm + dn * dn);
    }
  }
  return sum / interior_norm(gray);
}

double metric_msd(const ImageF& gray) {
  require_metric_input(gray, "MSD input");
  // Deviations are taken about the first sample so a constant image gives
  // exactly zero instead of the roundoff of its mean.
  const double ref = gray.data()[0];
  double mean = 0.0;
  for (double v : gray.data()) mean += v - ref;
  mean /= static_cast<double>(gray.size());
  double sum = 0.0;
  for (int m = 0; m + 1 < gray.height(); ++m) {
    for (int n = 0; n + 1 < gray.width(); ++n) {
      const double d = (gray.at(n, m) - ref) - mean;
      sum += d * d;
    }
  }
  return std::sqrt(sum) / interior_norm(gray);
}

double metric_gld(const ImageF& gray) {
  require_metric_input(gray, "GLD input");
  double sum = 0.0;
  for (int m = 0; m + 1 < gray.height(); ++m) {
    for (int n = 0; n + 1 < gray.width(); ++n) {
      const double v = gray.at(n, m);
      sum += std::abs(v - gray.at(n, m + 1)) + std::abs(v - gray.at(n + 1, m));
    }
  }
  return sum / interior_norm(gray);
}

const char* metric_name(Metric m) {
  switch (m) {
    case Metric::AG: return "AG";
    case Metric::LIF: return "LIF";
    case Metric::MSD: return "MSD";
    case Metric::GLD: return "GLD";
  }
  return "?";
}

bool higher_is_better(Metric m) { return m != Metric::LIF; }

double MetricValues::get(Metric m) const {
  switch (m) {
    case Metric::AG: return ag;
    case Metric::LIF: return lif;
    case Metric::MSD: return msd;
    case Metric::GLD: return gld;
  }
  return 0.0;
}

MetricValues compute_metrics(const ImageF& img, double intensity_scale) {
  if (!(intensity_scale > 0.0)) throw ArgumentError("intensity scale must be > 0");
  ImageF gray = to_grayscale(img);
  if (intensity_scale != 1.0) {
    for (double& v : gray.data()) v *= intensity_scale;
  }
  MetricValues v;
  v.ag = metric_ag(gray);
  v.lif = metric_lif(gray);
  v.lif_degenerate = lif_is_degenerate(gray);
  v.msd = metric_msd(gray);
  v.gld = metric_gld(gray);
  return v;
}

MetricsReport evaluate_images(const std::vector<MethodImages>& methods, double intensity_scale) {
  MetricsReport report;
  report.intensity_scale = intensity_scale;

  // Flatten for parallel evaluation; aggregation below runs in input order.
  struct Job {
    std::size_t method;
    std::size_t image;
  };
  std::vector<Job> jobs;
  for (std::size_t m = 0; m < methods.size(); ++m) {
    for (std::size_t i = 0; i < methods[m].images.size(); ++i) jobs.push_back({m, i});
  }
  std::vector<MetricValues> values(jobs.size());
  std::vector<std::string> failures(jobs.size());
  parallel_for(0, static_cast<int>(jobs.size()), [&](int j) {
    const Job& job = jobs[static_cast<std::size_t>(j)];
    try {
      values[static_cast<std::size_t>(j)] =
          compute_metrics(methods[job.method].images[job.image].second, intensity_scale);
    } catch (const std::exception& e) {
      failures[static_cast<std::size_t>(j)] = e.what();
    }
  });

  // per-method lookup: id -> values
  std::vector<std::map<std::string, MetricValues>> by_id(methods.size());
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    const auto& method = methods[jobs[j].method];
    const auto& id = method.images[jobs[j].image].first;
    if (!failures[j].empty()) {
      report.errors.push_back(method.label + "/" + id + ": " + failures[j]);
      continue;
    }
    report.rows.push_back({method.label, id, values[j]});
    by_id[jobs[j].method][id] = values[j];
    if (values[j].lif_degenerate) {
      report.warnings.push_back(method.label + "/" + id + ": all-zero image, LIF reported as 0");
    }
  }

  for (std::size_t m = 0; m < methods.size(); ++m) {
    MethodSummary summary;
    summary.method = methods[m].label;
    for (const MetricsRow& row : report.rows) {
      if (row.method != summary.method) continue;
      ++summary.images;
      summary.mean.ag += row.values.ag;
      summary.mean.lif += row.values.lif;
      summary.mean.msd += row.values.msd;
      summary.mean.gld += row.values.gld;
    }
    if (summary.images > 0) {
      const double n = static_cast<double>(summary.images);
      summary.mean.ag /= n;
      summary.mean.lif /= n;
      summary.mean.msd /= n;
      summary.mean.gld /= n;
    }
    report.methods.push_back(summary);
  }

  if (methods.size() >= 2) {
    for (const auto& [id, _] : by_id.front()) {
      bool everywhere = true;
      for (const auto& table : by_id) everywhere = everywhere && table.contains(id);
      if (!everywhere) continue;
      for (Metric metric : kAllMetrics) {
        for (std::size_t m = 0; m < methods.size(); ++m) {
          const double mine = by_id[m].at(id).get(metric);
          bool beats_all = true;
          for (std::size_t o = 0; o < methods.size() && beats_all; ++o) {
            if (o == m) continue;
            const double other = by_id[o].at(id).get(metric);
            beats_all = higher_is_better(metric) ? mine > other : mine < other;
          }
          if (beats_all) ++report.methods[m].wins[static_cast<std::size_t>(metric)];
        }
      }
    }
  }
  return report;
}

MetricsReport evaluate_batch(const std::vector<MethodInputs>& methods, double intensity_scale) {
  std::vector<MethodImages> loaded;
  std::vector<std::string> load_errors;
  for (const MethodInputs& in : methods) {
    MethodImages m;
    m.label = in.label;
    for (const fs::path& p : in.images) {
      try {
        m.images.emplace_back(p.stem().string(), load_png(p));
      } catch (const std::exception& e) {
        load_errors.push_back(in.label + "/" + p.string() + ": " + e.what());
      }
    }
    loaded.push_back(std::move(m));
  }
  MetricsReport report = evaluate_images(loaded, intensity_scale);
  report.errors.insert(report.errors.begin(), load_errors.begin(), load_errors.end());
  return report;
}

std::vector<fs::path> expand_inputs(const std::string& dir_or_glob) {
  const fs::path p(dir_or_glob);
  std::vector<fs::path> out;
  std::error_code ec;
  if (fs::is_directory(p, ec)) {
    for (const auto& entry : fs::directory_iterator(p)) {
      if (entry.is_regular_file() && entry.path().extension() == ".png") out.push_back(entry.path());
    }
  } else if (dir_or_glob.find_first_of("*?[") != std::string::npos) {
    const fs::path dir = p.has_parent_path() ? p.parent_path() : fs::path(".");
    const std::string pattern = p.filename().string();
    if (!fs::is_directory(dir, ec)) throw IoError("no such directory: " + dir.string());
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.is_regular_file() && ::fnmatch(pattern.c_str(), entry.path().filename().c_str(), 0) == 0) {
        out.push_back(entry.path());
      }
    }
  } else {
    out.push_back(p);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string MetricsReport::to_json() const {
  using nlohmann::ordered_json;
  ordered_json doc;
  doc["format"] = "mattefuse-metrics/1";
  doc["intensity_scale"] = intensity_scale;
  ordered_json rows_json = ordered_json::array();
  for (const MetricsRow& r : rows) {
    rows_json.push_back(ordered_json{{"method", r.method},
                                     {"image", r.image_id},
                                     {"AG", r.values.ag},
                                     {"LIF", r.values.lif},
                                     {"MSD", r.values.msd},
                                     {"GLD", r.values.gld}});
  }
  doc["per_image"] = std::move(rows_json);
  ordered_json agg = ordered_json::array();
  for (const MethodSummary& s : methods) {
    ordered_json entry{{"method", s.method},
                       {"images", s.images},
                       {"AG", s.mean.ag},
                       {"LIF", s.mean.lif},
                       {"MSD", s.mean.msd},
                       {"GLD", s.mean.gld}};
    if (methods.size() >= 2) {
      entry["wins"] = ordered_json{{"AG", s.wins[0]}, {"LIF", s.wins[1]}, {"MSD", s.wins[2]}, {"GLD", s.wins[3]}};
    }
    agg.push_back(std::move(entry));
  }
  doc["aggregate"] = std::move(agg);
  doc["warnings"] = warnings;
  doc["errors"] = errors;
  doc["ok"] = errors.empty();
  return doc.dump(2) + "\n";
}

std::string MetricsReport::to_table() const {
  std::ostringstream os;
  const bool wins_shown = methods.size() >= 2;
  os << std::left << std::setw(14) << "method" << std::setw(8) << "images";
  for (Metric m : kAllMetrics) os << std::right << std::setw(wins_shown ? 20 : 14) << metric_name(m);
  os << "\n";
  for (const MethodSummary& s : methods) {
    os << std::left << std::setw(14) << s.method << std::setw(8) << s.images;
    for (Metric m : kAllMetrics) {
      std::ostringstream cell;
      cell << std::fixed << std::setprecision(4) << s.mean.get(m);
      if (wins_shown) cell << " (" << s.wins[static_cast<std::size_t>(m)] << ")";
      os << std::right << std::setw(wins_shown ? 20 : 14) << cell.str();
    }
    os << "\n";
  }
  for (const std::string& w : warnings) os << "warning: " << w << "\n";
  for (const std::string& e : errors) os << "error: " << e << "\n";
  return os.str();
}

}  // namespace mattefuse

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "mattefuse/dataset.hpp"
#include "mattefuse/defocus.hpp"
#include "mattefuse/fusion.hpp"
#include "mattefuse/gaussian.hpp"
#include "mattefuse/guidance.hpp"
#include "mattefuse/losses.hpp"
#include "mattefuse/metrics.hpp"
#include "mattefuse/png_io.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace mattefuse;

namespace {

// Collects failed expectations with a short message each.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok && failures_.size() < 8) failures_.push_back(what);
    if (!ok) ++count_;
  }
  bool ok() const { return count_ == 0; }
  std::string failures() const {
    std::string s;
    for (const std::string& f : failures_) s += (s.empty() ? "" : "; ") + f;
    if (count_ > failures_.size()) s += "; ... " + std::to_string(count_) + " total";
    return s;
  }
  std::string note;

 private:
  std::vector<std::string> failures_;
  std::size_t count_ = 0;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + MATTEFUSE_CLI + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

std::map<std::string, std::vector<std::uint8_t>> tree_bytes(const fs::path& root) {
  std::map<std::string, std::vector<std::uint8_t>> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).generic_string()] = oracle::file_bytes(e.path());
  }
  return out;
}

// ----------------------------------------------------------------------------

void partition_of_unity(Check& c) {
  const auto t0 = Clock::now();
  double worst_sum = 0.0, worst_prefix = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const int fronts = 2 + static_cast<int>(seed % 3);  // 3 to 5 layers with the backdrop
    const Scene scene = oracle::random_scene(fronts, 1000 + seed);
    const MatteRender r = render_alpha_matte(scene);
    const std::size_t n = r.mattes.front().size();
    for (std::size_t p = 0; p < n; ++p) {
      double prefix = 0.0;
      for (const ImageF& a : r.mattes) {
        prefix += a.data()[p];
        worst_prefix = std::max(worst_prefix, prefix - 1.0);
      }
      worst_sum = std::max(worst_sum, std::abs(prefix - 1.0));
    }
  }
  const double secs = seconds_since(t0);
  c.expect(worst_sum <= 1e-6, "max |sum alpha - 1| = " + fmt(worst_sum));
  c.expect(worst_prefix <= 1e-9, "prefix sum exceeds 1 by " + fmt(worst_prefix));
  c.expect(secs < 30.0, "runtime " + fmt(secs) + " s");
  c.note = "max |sum-1| " + fmt(worst_sum) + ", " + fmt(secs) + " s";
}

void occlusion_asymmetry(Check& c) {
  const Scene scene = make_fig7_scene(2);
  const ImageF matte = render_alpha_matte(scene).image;
  const ImageF sharp = render_all_in_focus(scene);
  const double sigma1 = scene.layers[0].sigma;
  const auto regions = oracle::fig7_regions(6, static_cast<int>(std::ceil(3.0 * sigma1)));
  c.expect(!regions.strip.empty() && !regions.near.empty(), "empty test region");
  double strip = 0.0, near = 0.0;
  for (auto [x, y] : regions.strip)
    for (int ch = 0; ch < 3; ++ch) strip = std::max(strip, std::abs(matte.at(x, y, ch) - sharp.at(x, y, ch)));
  for (auto [x, y] : regions.rest)
    for (int ch = 0; ch < 3; ++ch) strip = std::max(strip, std::abs(matte.at(x, y, ch) - sharp.at(x, y, ch)));
  for (auto [x, y] : regions.near)
    for (int ch = 0; ch < 3; ++ch) near = std::max(near, std::abs(matte.at(x, y, ch) - sharp.at(x, y, ch)));
  c.expect(strip <= 1e-9, "object 2 next to object 3 differs by " + fmt(strip));
  c.expect(near > 0.01, "object 1 spread onto object 2 only " + fmt(near));
  c.note = "occluded side " + fmt(strip) + ", spread side " + fmt(near);
}

void cross_model(Check& c) {
  double worst_compose = 0.0, worst_blur = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Scene scene = oracle::random_scene(1, 2000 + seed);
    const ImageF two = compose_two_surface(scene.layers[0], scene.layers[1]);
    worst_compose = std::max(worst_compose, max_abs_diff(two, render_alpha_matte(scene).image));
  }
  const double sigmas[] = {0.0, 0.4, 0.8, 1.0, 1.5, 2.0, 2.7, 3.3, 4.0, 5.0};
  for (std::uint64_t i = 0; i < 10; ++i) {
    const ImageF img = oracle::random_image(16, 16, 1 + 2 * static_cast<int>(i % 2), 3000 + i);
    worst_blur = std::max(worst_blur, max_abs_diff(gaussian_blur(img, sigmas[i]), oracle::dense_blur(img, sigmas[i])));
  }
  c.expect(worst_compose <= 1e-12, "two-surface vs layered " + fmt(worst_compose));
  c.expect(worst_blur <= 1e-10, "separable vs dense " + fmt(worst_blur));
  c.note = "compose " + fmt(worst_compose) + ", blur " + fmt(worst_blur);
}

void dataset_pipeline(Check& c) {
  oracle::TempDir dir("acc_dataset");
  const fs::path catalog_path = oracle::write_desk_assets(dir / "assets", 3, 2, 90, 72, 110, 100, 7);
  const AssetCatalog catalog = AssetCatalog::load(catalog_path);
  GenConfig cfg;
  cfg.out_size = 64;
  cfg.backgrounds_per_fg = 2;
  cfg.seed = 11;
  const Manifest m = generate_dataset(catalog, cfg, dir / "ds");
  c.expect(m.pairs.size() == 6 && m.errors.empty(), "desk run wrote " + std::to_string(m.pairs.size()) + " pairs");

  GenConfig full;
  full.backgrounds_per_fg = 20;
  std::size_t planned = 0;
  try {
    full.validate();
    planned = planned_pair_count(200, 20, full);
  } catch (const std::exception& e) {
    c.expect(false, std::string("full-scale config rejected: ") + e.what());
  }
  c.expect(planned == 4000, "full-scale plan has " + std::to_string(planned) + " pairs");

  std::size_t verified = 0;
  double worst = 0.0;
  for (const PairVerification& v : verify_dataset(dir / "ds")) {
    worst = std::max({worst, v.max_err_a, v.max_err_b, v.max_err_gt, v.max_err_matte});
    c.expect(v.ok(kPng16Tolerance), v.id + " failed re-derivation " + v.error);
    if (v.ok(kPng16Tolerance)) ++verified;
  }
  c.expect(verified == 6, "verified " + std::to_string(verified) + " of 6");

  for (std::size_t f = 0; f < catalog.foregrounds.size(); ++f) {
    const PreparedAssets a = prepare_assets(catalog.foregrounds[f], catalog.backgrounds[f % 2], 64);
    for (bool swap : {false, true}) {
      const FusionPair p = generate_pair(a.fg_color, a.matte, a.background, PairParams{0.0, 0.0, swap});
      c.expect(p.image_a == p.ground_truth && p.image_b == p.ground_truth, "sigma 0 pair differs from GT");
    }
  }
  c.note = std::to_string(m.pairs.size()) + " pairs, " + std::to_string(planned) + " planned at full scale, max err " +
           fmt(worst);
}

void fusion_algebra(Check& c) {
  const ImageF a = oracle::random_image(30, 24, 3, 41);
  const ImageF b = oracle::random_image(30, 24, 3, 42);
  const GuidanceMap ones = GuidanceMap::filled(30, 24, 1.0);
  const ImageF corr = oracle::random_image(30, 24, 3, 43, -1.0, 1.0);
  c.expect(final_fusion(a, b, ones, ZeroCorrection{}) == a, "gmap 1 with zero correction is not A");
  c.expect(final_fusion(a, b, ones, ImageCorrection{corr}) == a, "gmap 1 with a correction is not A");
  c.expect(final_fusion(a, b, GuidanceMap::filled(30, 24, 0.0), ZeroCorrection{}) == b, "gmap 0 is not B");

  // Bmap on a map holding all three levels.
  ImageF levels(30, 24, 1);
  for (int y = 0; y < 24; ++y)
    for (int x = 0; x < 30; ++x) levels.at(x, y) = ((x + 2 * y) % 3) * 0.5;
  const GuidanceMap mixed(levels);
  const ImageF bmap = boundary_map(mixed);
  bool indicator = true;
  for (std::size_t i = 0; i < bmap.size(); ++i) {
    indicator = indicator && bmap.data()[i] == (levels.data()[i] == 0.5 ? 1.0 : 0.0);
  }
  c.expect(indicator, "Bmap is not the 0.5 indicator");

  // Oracle correction on a generated pair.
  const ImageF fg = oracle::textured_image(64, 64, 3, 44);
  const ImageF bg = oracle::textured_image(64, 64, 3, 45);
  const ImageF matte = oracle::ellipse_matte(64, 64, 30, 34, 18, 15);
  const FusionPair pair = generate_pair(fg, matte, bg, PairParams{2.5, 2.5, false});
  const ImageF fused = final_fusion(pair.image_a, pair.image_b, pair.gmap, OracleCorrection{pair.ground_truth});
  double worst = 0.0;
  std::size_t band = 0;
  for (int y = 0; y < 64; ++y) {
    for (int x = 0; x < 64; ++x) {
      if (pair.gmap.image().at(x, y) != GuidanceMap::kBand) continue;
      ++band;
      for (int ch = 0; ch < 3; ++ch) worst = std::max(worst, std::abs(fused.at(x, y, ch) - pair.ground_truth.at(x, y, ch)));
    }
  }
  c.expect(band > 0, "pair has no band");
  c.expect(worst <= 1e-12, "oracle correction off GT by " + fmt(worst));
  c.note = std::to_string(band) + " band pixels, oracle error " + fmt(worst);
}

void losses(Check& c) {
  const auto t0 = Clock::now();
  ImageF m(3, 1, 1);
  m.at(0, 0) = 0.5;
  m.at(1, 0) = 0.0;
  m.at(2, 0) = 1.0;
  const ImageF w = weight_map(m, 5.0);
  c.expect(w.at(0, 0) == 1.0, "W(0.5) = " + fmt(w.at(0, 0)));
  c.expect(w.at(1, 0) == 0.2 && w.at(2, 0) == 0.2, "W(0), W(1) = " + fmt(w.at(1, 0)) + ", " + fmt(w.at(2, 0)));

  double worst_total = 0.0, worst_l1 = 0.0, worst_l2 = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const LossInputs in = random_loss_inputs(6, 3, 100 + seed);
    const LossConfig cfg;
    const GradCheckReport r = check_loss_gradients(in, cfg);
    const LossBreakdown& b = r.breakdown;
    worst_total = std::max(worst_total, std::abs(b.total - (0.2 * b.matte + 0.2 * b.ini + b.weighted)));
    worst_l1 = std::max(worst_l1, r.max_rel_err_matte);
    worst_l2 = std::max({worst_l2, r.max_rel_err_ini, r.max_rel_err_fin});
    c.expect(r.matte_checked > 0, "no matte pixels checked");
  }
  const double secs = seconds_since(t0);
  c.expect(worst_total <= 1e-12, "total identity off by " + fmt(worst_total));
  c.expect(worst_l1 < 1e-4, "matte gradient rel. error " + fmt(worst_l1));
  c.expect(worst_l2 < 1e-6, "L2/weighted gradient rel. error " + fmt(worst_l2));
  c.expect(secs < 10.0, "runtime " + fmt(secs) + " s");
  c.note = "rel. err L1 " + fmt(worst_l1) + ", L2/W " + fmt(worst_l2) + ", " + fmt(secs) + " s";
}

void metrics(Check& c) {
  const ImageF flat(17, 11, 1, 0.37);
  c.expect(metric_ag(flat) == 0.0 && metric_msd(flat) == 0.0 && metric_gld(flat) == 0.0, "constant image");
  c.expect(metric_lif(flat) == 0.0, "all-I_max LIF");
  const double mid = metric_lif(ImageF(17, 11, 1, 0.5), 1.0);
  c.expect(std::abs(mid - 2.0 * (1.0 - std::sqrt(2.0) / 2.0)) <= 1e-12, "mid-gray LIF " + fmt(mid));

  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const ImageF img = oracle::random_image(8, 8, 1, 5000 + seed);
    worst = std::max({worst, std::abs(metric_ag(img) - oracle::ag(img)), std::abs(metric_lif(img) - oracle::lif(img)),
                      std::abs(metric_msd(img) - oracle::msd(img)), std::abs(metric_gld(img) - oracle::gld(img))});
  }
  c.expect(worst <= 1e-12, "scalar reference mismatch " + fmt(worst));

  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const ImageF img = to_grayscale(oracle::textured_image(64, 64, 3, 6000 + seed));
    double ag = INFINITY, gld = INFINITY;
    for (double sigma : {0.0, 1.0, 2.0, 4.0}) {
      const ImageF b = gaussian_blur(img, sigma);
      c.expect(metric_ag(b) <= ag && metric_gld(b) <= gld, "blur raised AG/GLD at sigma " + fmt(sigma));
      ag = metric_ag(b);
      gld = metric_gld(b);
    }
  }
  c.note = "reference mismatch " + fmt(worst);
}

void determinism(Check& c) {
  oracle::TempDir dir("acc_determinism");
  const fs::path catalog = oracle::write_desk_assets(dir / "assets", 3, 2, 90, 72, 110, 100, 8);
  for (const char* threads : {"1", "4"}) {
    const std::string t = threads;
    c.expect(run_cli("--seed 5 --threads " + t + " gen-dataset --size 96 --per-fg 2 --catalog " + q(catalog) +
                     " --out " + q(dir / ("ds" + t))) == 0,
             "gen-dataset with " + t + " threads");
    c.expect(run_cli("--seed 5 --threads " + t + " simulate --fig7 2 --all-layers --out " + q(dir / ("sim" + t))) == 0,
             "simulate with " + t + " threads");
  }
  const auto ds1 = tree_bytes(dir / "ds1");
  const auto sim1 = tree_bytes(dir / "sim1");
  c.expect(ds1.size() == 31, "dataset has " + std::to_string(ds1.size()) + " files");
  c.expect(ds1 == tree_bytes(dir / "ds4"), "gen-dataset output differs between thread counts");
  c.expect(sim1 == tree_bytes(dir / "sim4"), "simulate output differs between thread counts");
  c.note = std::to_string(ds1.size() + sim1.size()) + " files identical";
}

void end_to_end(Check& c) {
  oracle::TempDir dir("acc_e2e");
  const fs::path catalog_path = oracle::write_desk_assets(dir / "assets", 3, 2, 300, 240, 320, 320, 9);
  const AssetCatalog catalog = AssetCatalog::load(catalog_path);
  GenConfig cfg;
  cfg.out_size = 256;
  cfg.backgrounds_per_fg = 2;
  cfg.seed = 12;
  double worst = 1.0;
  for (const PairRecord& rec : plan_pairs(catalog, cfg)) {
    const PreparedAssets a = prepare_assets(catalog.foregrounds[rec.fg_index], catalog.backgrounds[rec.bg_index],
                                            cfg.out_size);
    const FusionPair pair =
        generate_pair(a.fg_color, a.matte, a.background, PairParams{rec.sigma_fg, rec.sigma_bg, rec.swap});
    const GuidanceMap est = estimate_guidance(pair.image_a, pair.image_b);
    std::size_t outside = 0, agree = 0;
    for (std::size_t i = 0; i < est.image().size(); ++i) {
      const double truth = pair.gmap.image().data()[i];
      if (truth == GuidanceMap::kBand) continue;
      ++outside;
      if (est.image().data()[i] == truth) ++agree;
    }
    const double ratio = static_cast<double>(agree) / static_cast<double>(outside);
    worst = std::min(worst, ratio);
    c.expect(ratio >= 0.95, rec.id + " agreement " + fmt(ratio));
  }

  // CLI flow on one generated pair.
  cfg.out_size = 128;
  GenConfig one = cfg;
  one.backgrounds_per_fg = 1;
  const Manifest m = generate_dataset(catalog, one, dir / "ds");
  c.expect(m.errors.empty() && !m.pairs.empty(), "dataset generation failed");
  fs::create_directories(dir / "fused");
  for (const PairRecord& rec : m.pairs) {
    const fs::path p = dir / "ds/pairs" / rec.id;
    c.expect(run_cli("fuse --a " + q(p / "a.png") + " --b " + q(p / "b.png") + " --out " +
                     q(dir / "fused" / (rec.id + ".png"))) == 0,
             "fuse " + rec.id);
  }
  c.expect(run_cli("evaluate --methods fused=" + q(dir / "fused") + " --out " + q(dir / "report.json")) == 0,
           "evaluate exit code");
  try {
    const auto report = nlohmann::json::parse(std::ifstream(dir / "report.json"));
    c.expect(report.at("format") == "mattefuse-metrics/1" && report.at("ok") == true, "report header");
    c.expect(report.at("per_image").size() == m.pairs.size(), "report rows");
    for (const auto& row : report.at("per_image")) {
      for (const char* key : {"AG", "LIF", "MSD", "GLD"}) {
        c.expect(row.at(key).is_number() && std::isfinite(row.at(key).get<double>()), std::string("bad ") + key);
      }
    }
  } catch (const std::exception& e) {
    c.expect(false, std::string("malformed report: ") + e.what());
  }
  c.note = "min agreement " + fmt(worst) + ", " + std::to_string(m.pairs.size()) + " pairs fused and evaluated";
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    void (*run)(Check&);
  };
  const Criterion criteria[] = {
      {"partition of unity", partition_of_unity},
      {"occlusion and spread asymmetry", occlusion_asymmetry},
      {"cross-model oracle", cross_model},
      {"dataset pipeline", dataset_pipeline},
      {"fusion algebra", fusion_algebra},
      {"losses and gradients", losses},
      {"metrics", metrics},
      {"determinism across thread counts", determinism},
      {"end-to-end smoke", end_to_end},
  };
  const auto t0 = Clock::now();
  int failed = 0;
  int index = 0;
  for (const Criterion& cr : criteria) {
    ++index;
    Check c;
    const auto t = Clock::now();
    try {
      cr.run(c);
    } catch (const std::exception& e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    const std::string status = c.ok() ? "PASS" : "FAIL";
    std::cout << status << " " << index << " " << cr.name << " (" << fmt(seconds_since(t)) << " s)";
    if (!c.note.empty()) std::cout << ": " << c.note;
    if (!c.ok()) std::cout << " | " << c.failures();
    std::cout << std::endl;
    if (!c.ok()) ++failed;
  }
  const double total = seconds_since(t0);
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << " in "
            << fmt(total) << " s" << std::endl;
  return failed == 0 && total < 300.0 ? 0 : 1;
}

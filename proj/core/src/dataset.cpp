#include "mattefuse/dataset.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "json.hpp"
#include "mattefuse/errors.hpp"
#include "mattefuse/file_util.hpp"
#include "mattefuse/gaussian.hpp"
#include "mattefuse/parallel.hpp"
#include "mattefuse/png_io.hpp"
#include "mattefuse/resize.hpp"
#include "mattefuse/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace mattefuse {

namespace {

constexpr std::uint64_t kStreamBackgrounds = 0xB6;
constexpr std::uint64_t kStreamPair = 0x5A;
constexpr std::uint64_t kStreamNoise = 0x4E;

const char* const kRoles[] = {"a", "b", "gt", "matte", "gmap"};

std::string pair_id(std::size_t fg, std::size_t pair) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "f%04zu_p%03zu", fg, pair);
  return buf;
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace

AssetCatalog AssetCatalog::load(const fs::path& path) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path.string());
  } catch (const YAML::BadFile&) {
    throw IoError("cannot open catalog " + path.string());
  } catch (const YAML::ParserException& e) {
    throw ParseError(path.string(), e.mark.line + 1, e.msg);
  }
  const fs::path base = path.parent_path();
  AssetCatalog cat;
  try {
    if (!root["foregrounds"] || !root["foregrounds"].IsSequence()) {
      throw ParseError(path.string(), root.Mark().line + 1, "catalog needs a 'foregrounds' list");
    }
    if (!root["backgrounds"] || !root["backgrounds"].IsSequence()) {
      throw ParseError(path.string(), root.Mark().line + 1, "catalog needs a 'backgrounds' list");
    }
    for (const auto& fg : root["foregrounds"]) {
      if (!fg["color"] || !fg["matte"]) {
        throw ParseError(path.string(), fg.Mark().line + 1, "foreground needs 'color' and 'matte'");
      }
      cat.foregrounds.push_back({resolve(base, fg["color"].as<std::string>()),
                                 resolve(base, fg["matte"].as<std::string>())});
    }
    for (const auto& bg : root["backgrounds"]) cat.backgrounds.push_back(resolve(base, bg.as<std::string>()));
  } catch (const YAML::Exception& e) {
    throw ParseError(path.string(), e.mark.line + 1, e.msg);
  }
  cat.validate();
  return cat;
}

void AssetCatalog::validate() const {
  if (foregrounds.empty()) throw ArgumentError("asset catalog has no foregrounds");
  if (backgrounds.empty()) throw ArgumentError("asset catalog has no backgrounds");
}

void GenConfig::validate() const {
  if (out_size < 64) throw ArgumentError("out_size must be >= 64");
  if (backgrounds_per_fg < 1) throw ArgumentError("backgrounds_per_fg must be >= 1");
  if (!(sigma_min >= 0.5)) throw ArgumentError("sigma_min must be >= 0.5");
  if (!(sigma_max <= 10.0)) throw ArgumentError("sigma_max must be <= 10");
  if (!(sigma_min <= sigma_max)) throw ArgumentError("sigma_min must not exceed sigma_max");
  if (!(swap_probability >= 0.0 && swap_probability <= 1.0)) {
    throw ArgumentError("swap_probability must be in [0, 1]");
  }
  if (!(noise_stddev >= 0.0)) throw ArgumentError("noise stddev must be >= 0");
}

std::size_t planned_pair_count(std::size_t foregrounds, std::size_t backgrounds, const GenConfig& cfg) {
  cfg.validate();
  if (foregrounds == 0 || backgrounds == 0) throw ArgumentError("catalog must not be empty");
  if (static_cast<std::size_t>(cfg.backgrounds_per_fg) > backgrounds) {
    throw ArgumentError("backgrounds_per_fg (" + std::to_string(cfg.backgrounds_per_fg) +
                        ") exceeds the number of backgrounds (" + std::to_string(backgrounds) + ")");
  }
  return foregrounds * static_cast<std::size_t>(cfg.backgrounds_per_fg);
}

GuidanceMap make_guidance(const ImageF& matte_blur, FocusSide fg_focused_in, double eps) {
  require_single_channel(matte_blur, "make_guidance matte");
  const double fg_level = fg_focused_in == FocusSide::A ? GuidanceMap::kSourceA : GuidanceMap::kSourceB;
  const double bg_level = 1.0 - fg_level;
  ImageF levels(matte_blur.width(), matte_blur.height(), 1);
  const auto m = matte_blur.data();
  auto out = levels.data();
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (!(m[i] >= -eps && m[i] <= 1.0 + eps)) {
      throw ArgumentError("blurred matte value out of [0,1] at pixel " + std::to_string(i));
    }
    out[i] = m[i] >= 1.0 - eps ? fg_level : m[i] <= eps ? bg_level : GuidanceMap::kBand;
  }
  return GuidanceMap(std::move(levels));
}

FusionPair generate_pair(const ImageF& fg_color, const ImageF& matte_clear, const ImageF& background,
                         const PairParams& params) {
  require_single_channel(matte_clear, "generate_pair matte");
  require_same_size(fg_color, matte_clear, "generate_pair foreground/matte");
  require_same_shape(fg_color, background, "generate_pair foreground/background");
  if (!(params.sigma_fg >= 0.0) || !(params.sigma_bg >= 0.0)) {
    throw ArgumentError("generate_pair sigma must be >= 0");
  }

  const ImageF fg_clear = multiply_by_matte(fg_color, matte_clear);
  const ImageF fg_blur = gaussian_blur(fg_clear, params.sigma_fg);
  const ImageF bg_blur = gaussian_blur(background, params.sigma_bg);
  ImageF matte_blur = gaussian_blur(matte_clear, params.sigma_fg);

  const int w = fg_color.width();
  const int h = fg_color.height();
  const int ch = fg_color.channels();
  ImageF s1(w, h, ch), s2(w, h, ch), gt(w, h, ch);
  const auto ac = matte_clear.data();
  const auto ab = matte_blur.data();
  const auto fc = fg_clear.data();
  const auto fb = fg_blur.data();
  const auto bc = background.data();
  const auto bb = bg_blur.data();
  const auto chs = static_cast<std::size_t>(ch);
  for (std::size_t p = 0; p < ac.size(); ++p) {
    const double behind_clear = 1.0 - ac[p];
    const double behind_blur = 1.0 - ab[p];
    for (std::size_t c = 0; c < chs; ++c) {
      const std::size_t i = p * chs + c;
      s1.data()[i] = fc[i] + behind_clear * bb[i];
      s2.data()[i] = fb[i] + behind_blur * bc[i];
      gt.data()[i] = fc[i] + behind_clear * bc[i];
    }
  }

  FusionPair pair;
  pair.params = params;
  pair.fg_focused_in = params.swap ? FocusSide::B : FocusSide::A;
  pair.gmap = make_guidance(matte_blur, pair.fg_focused_in);
  pair.image_a = params.swap ? std::move(s2) : std::move(s1);
  pair.image_b = params.swap ? std::move(s1) : std::move(s2);
  pair.ground_truth = std::move(gt);
  pair.matte_clear = matte_clear;
  pair.matte_blur = std::move(matte_blur);
  return pair;
}

PreparedAssets prepare_assets(const AssetCatalog::Foreground& fg, const fs::path& background, int out_size) {
  PreparedAssets assets;
  const ImageF color = load_png(fg.color);
  const ImageF matte = load_png(fg.matte);
  if (!color.same_size(matte)) {
    throw ArgumentError("foreground " + fg.color.string() + " and matte " + fg.matte.string() +
                        " differ in size");
  }
  assets.fg_color = resize_cover_crop(color, out_size);
  assets.matte = to_grayscale(resize_cover_crop(matte, out_size));
  clamp01(assets.matte);
  assets.background = resize_bilinear(load_png(background), out_size, out_size);
  const int ch = std::max(assets.fg_color.channels(), assets.background.channels());
  if (assets.fg_color.channels() != ch) assets.fg_color = broadcast_channels(assets.fg_color, ch);
  if (assets.background.channels() != ch) assets.background = broadcast_channels(assets.background, ch);
  return assets;
}

std::vector<PairRecord> plan_pairs(const AssetCatalog& catalog, const GenConfig& cfg) {
  catalog.validate();
  planned_pair_count(catalog.foregrounds.size(), catalog.backgrounds.size(), cfg);
  const std::size_t per_fg = static_cast<std::size_t>(cfg.backgrounds_per_fg);
  std::vector<PairRecord> plan;
  plan.reserve(catalog.foregrounds.size() * per_fg);
  for (std::size_t f = 0; f < catalog.foregrounds.size(); ++f) {
    // Partial Fisher-Yates: the first per_fg entries are a uniform sample.
    std::vector<std::size_t> order(catalog.backgrounds.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    KeyedRng pick(cfg.seed, {f, kStreamBackgrounds});
    for (std::size_t i = 0; i < per_fg; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(pick.below(order.size() - i));
      std::swap(order[i], order[j]);
    }
    for (std::size_t p = 0; p < per_fg; ++p) {
      KeyedRng rng(cfg.seed, {f, p, kStreamPair});
      PairRecord rec;
      rec.id = pair_id(f, p);
      rec.fg_index = f;
      rec.pair_index = p;
      rec.bg_index = order[p];
      rec.fg_color = catalog.foregrounds[f].color.string();
      rec.fg_matte = catalog.foregrounds[f].matte.string();
      rec.background = catalog.backgrounds[order[p]].string();
      rec.sigma_fg = rng.uniform(cfg.sigma_min, cfg.sigma_max);
      const double sigma_bg = rng.uniform(cfg.sigma_min, cfg.sigma_max);
      rec.sigma_bg = cfg.independent_bg_sigma ? sigma_bg : rec.sigma_fg;
      rec.swap = rng.bernoulli(cfg.swap_probability);
      plan.push_back(std::move(rec));
    }
  }
  return plan;
}

namespace {

std::uint64_t noise_seed(const GenConfig& cfg, const PairRecord& rec, std::uint64_t which) {
  KeyedRng rng(cfg.seed, {rec.fg_index, rec.pair_index, kStreamNoise, which});
  return rng.next_u64();
}

void apply_noise(const GenConfig& cfg, const PairRecord& rec, ImageF& a, ImageF& b) {
  if (cfg.noise_stddev <= 0.0) return;
  a = add_gaussian_noise(a, cfg.noise_stddev, noise_seed(cfg, rec, 0));
  b = add_gaussian_noise(b, cfg.noise_stddev, noise_seed(cfg, rec, 1));
}

void write_pair(const FusionPair& pair, const fs::path& out_dir, PairRecord& rec) {
  const fs::path rel_dir = fs::path("pairs") / rec.id;
  std::vector<std::vector<std::uint8_t>> encoded;
  encoded.push_back(encode_png(pair.image_a, 16));
  encoded.push_back(encode_png(pair.image_b, 16));
  encoded.push_back(encode_png(pair.ground_truth, 16));
  encoded.push_back(encode_png(pair.matte_clear, 16));
  encoded.push_back(encode_guidance(pair.gmap));
  std::string digests;
  rec.files.clear();
  rec.file_sha256.clear();
  for (std::size_t i = 0; i < encoded.size(); ++i) {
    const fs::path rel = rel_dir / (std::string(kRoles[i]) + ".png");
    write_file_atomic(out_dir / rel, encoded[i]);
    const std::string digest = sha256_hex(encoded[i]);
    rec.files.emplace_back(kRoles[i], rel.generic_string());
    rec.file_sha256.emplace_back(kRoles[i], digest);
    digests += digest;
  }
  rec.checksum = sha256_hex(std::span(reinterpret_cast<const std::uint8_t*>(digests.data()), digests.size()));
}

ordered_json config_to_json(const GenConfig& cfg) {
  return ordered_json{{"out_size", cfg.out_size},
                      {"backgrounds_per_fg", cfg.backgrounds_per_fg},
                      {"sigma_min", cfg.sigma_min},
                      {"sigma_max", cfg.sigma_max},
                      {"swap_probability", cfg.swap_probability},
                      {"seed", cfg.seed},
                      {"noise_stddev", cfg.noise_stddev},
                      {"independent_bg_sigma", cfg.independent_bg_sigma}};
}

}  // namespace

Manifest generate_dataset(const AssetCatalog& catalog, const GenConfig& cfg, const fs::path& out_dir) {
  Manifest manifest;
  manifest.config = cfg;
  std::vector<PairRecord> plan = plan_pairs(catalog, cfg);
  manifest.planned_pairs = plan.size();

  std::vector<std::string> failures(plan.size());
  // Pairs are independent; blurs inside a pair run inline on the worker.
  parallel_for(0, static_cast<int>(plan.size()), [&](int i) {
    PairRecord& rec = plan[static_cast<std::size_t>(i)];
    try {
      const PreparedAssets assets =
          prepare_assets(catalog.foregrounds[rec.fg_index], catalog.backgrounds[rec.bg_index], cfg.out_size);
      FusionPair pair = generate_pair(assets.fg_color, assets.matte, assets.background,
                                      PairParams{rec.sigma_fg, rec.sigma_bg, rec.swap});
      apply_noise(cfg, rec, pair.image_a, pair.image_b);
      write_pair(pair, out_dir, rec);
    } catch (const std::exception& e) {
      failures[static_cast<std::size_t>(i)] = e.what();
    }
  });

  for (std::size_t i = 0; i < plan.size(); ++i) {
    if (failures[i].empty()) {
      manifest.pairs.push_back(std::move(plan[i]));
    } else {
      manifest.errors.push_back({plan[i].id, failures[i]});
    }
  }
  write_text_atomic(out_dir / "manifest.json", manifest.to_json());
  return manifest;
}

std::string Manifest::to_json() const {
  ordered_json doc;
  doc["format"] = "mattefuse-dataset/1";
  doc["config"] = config_to_json(config);
  doc["planned_pairs"] = planned_pairs;
  doc["pair_count"] = pairs.size();
  ordered_json records = ordered_json::array();
  for (const PairRecord& rec : pairs) {
    ordered_json files = ordered_json::object();
    for (const auto& [role, path] : rec.files) files[role] = path;
    ordered_json sums = ordered_json::object();
    for (const auto& [role, digest] : rec.file_sha256) sums[role] = digest;
    records.push_back(ordered_json{{"id", rec.id},
                                   {"fg_index", rec.fg_index},
                                   {"pair_index", rec.pair_index},
                                   {"bg_index", rec.bg_index},
                                   {"fg_color", rec.fg_color},
                                   {"fg_matte", rec.fg_matte},
                                   {"background", rec.background},
                                   {"sigma_fg", rec.sigma_fg},
                                   {"sigma_bg", rec.sigma_bg},
                                   {"swap", rec.swap},
                                   {"fg_focused_in", rec.swap ? "B" : "A"},
                                   {"files", files},
                                   {"sha256", sums},
                                   {"checksum", rec.checksum}});
  }
  doc["pairs"] = std::move(records);
  ordered_json errs = ordered_json::array();
  for (const PairError& e : errors) errs.push_back(ordered_json{{"id", e.id}, {"message", e.message}});
  doc["errors"] = std::move(errs);
  return doc.dump(2) + "\n";
}

Manifest Manifest::from_json(const std::string& text) {
  Manifest m;
  try {
    const ordered_json doc = ordered_json::parse(text);
    const auto& c = doc.at("config");
    m.config.out_size = c.at("out_size").get<int>();
    m.config.backgrounds_per_fg = c.at("backgrounds_per_fg").get<int>();
    m.config.sigma_min = c.at("sigma_min").get<double>();
    m.config.sigma_max = c.at("sigma_max").get<double>();
    m.config.swap_probability = c.at("swap_probability").get<double>();
    m.config.seed = c.at("seed").get<std::uint64_t>();
    m.config.noise_stddev = c.at("noise_stddev").get<double>();
    m.config.independent_bg_sigma = c.at("independent_bg_sigma").get<bool>();
    m.planned_pairs = doc.at("planned_pairs").get<std::size_t>();
    for (const auto& r : doc.at("pairs")) {
      PairRecord rec;
      rec.id = r.at("id").get<std::string>();
      rec.fg_index = r.at("fg_index").get<std::size_t>();
      rec.pair_index = r.at("pair_index").get<std::size_t>();
      rec.bg_index = r.at("bg_index").get<std::size_t>();
      rec.fg_color = r.at("fg_color").get<std::string>();
      rec.fg_matte = r.at("fg_matte").get<std::string>();
      rec.background = r.at("background").get<std::string>();
      rec.sigma_fg = r.at("sigma_fg").get<double>();
      rec.sigma_bg = r.at("sigma_bg").get<double>();
      rec.swap = r.at("swap").get<bool>();
      for (const auto& [role, path] : r.at("files").items()) rec.files.emplace_back(role, path.get<std::string>());
      for (const auto& [role, sum] : r.at("sha256").items()) rec.file_sha256.emplace_back(role, sum.get<std::string>());
      rec.checksum = r.at("checksum").get<std::string>();
      m.pairs.push_back(std::move(rec));
    }
    for (const auto& e : doc.at("errors")) {
      m.errors.push_back({e.at("id").get<std::string>(), e.at("message").get<std::string>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed manifest: ") + e.what());
  }
  return m;
}

Manifest Manifest::load(const fs::path& path) {
  const auto bytes = read_file_bytes(path);
  return from_json(std::string(bytes.begin(), bytes.end()));
}

namespace {

std::string file_for(const PairRecord& rec, const std::string& role) {
  for (const auto& [r, path] : rec.files) {
    if (r == role) return path;
  }
  throw ValidationError(rec.id + ": manifest lacks the '" + role + "' file");
}

// Direct per-pixel re-derivation, independent of generate_pair's image-level
// arithmetic.
PairVerification verify_pair(const fs::path& out_dir, const GenConfig& cfg, const PairRecord& rec) {
  PairVerification v;
  v.id = rec.id;
  const PreparedAssets assets = prepare_assets({rec.fg_color, rec.fg_matte}, rec.background, cfg.out_size);
  const ImageF& alpha_c = assets.matte;
  const ImageF alpha_b = gaussian_blur(alpha_c, rec.sigma_fg);
  const ImageF fg_b = gaussian_blur(multiply_by_matte(assets.fg_color, alpha_c), rec.sigma_fg);
  const ImageF bg_b = gaussian_blur(assets.background, rec.sigma_bg);

  const int w = alpha_c.width();
  const int h = alpha_c.height();
  const int ch = assets.fg_color.channels();
  ImageF sharp_fg(w, h, ch), blurry_fg(w, h, ch), truth(w, h, ch);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double ac = alpha_c.at(x, y);
      const double ab = alpha_b.at(x, y);
      for (int c = 0; c < ch; ++c) {
        const double fgc = assets.fg_color.at(x, y, c) * ac;
        sharp_fg.at(x, y, c) = fgc + (1.0 - ac) * bg_b.at(x, y, c);
        blurry_fg.at(x, y, c) = fg_b.at(x, y, c) + (1.0 - ab) * assets.background.at(x, y, c);
        truth.at(x, y, c) = fgc + (1.0 - ac) * assets.background.at(x, y, c);
      }
    }
  }
  ImageF expect_a = rec.swap ? blurry_fg : sharp_fg;
  ImageF expect_b = rec.swap ? sharp_fg : blurry_fg;
  apply_noise(cfg, rec, expect_a, expect_b);
  clamp01(expect_a);
  clamp01(expect_b);

  v.max_err_a = max_abs_diff(load_png(out_dir / file_for(rec, "a")), expect_a);
  v.max_err_b = max_abs_diff(load_png(out_dir / file_for(rec, "b")), expect_b);
  v.max_err_gt = max_abs_diff(load_png(out_dir / file_for(rec, "gt")), truth);
  v.max_err_matte = max_abs_diff(load_png(out_dir / file_for(rec, "matte")), alpha_c);

  const GuidanceMap stored = load_guidance(out_dir / file_for(rec, "gmap"));
  const double fg_level = rec.swap ? 0.0 : 1.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double ab = alpha_b.at(x, y);
      double expected = GuidanceMap::kBand;
      if (ab >= 1.0 - 1e-6) expected = fg_level;
      if (ab <= 1e-6) expected = 1.0 - fg_level;
      if (stored.at(x, y) != expected) ++v.gmap_mismatches;
    }
  }
  return v;
}

}  // namespace

std::vector<PairVerification> verify_dataset(const fs::path& out_dir) {
  const Manifest manifest = Manifest::load(out_dir / "manifest.json");
  std::vector<PairVerification> results;
  results.reserve(manifest.pairs.size());
  for (const PairRecord& rec : manifest.pairs) {
    try {
      results.push_back(verify_pair(out_dir, manifest.config, rec));
    } catch (const std::exception& e) {
      PairVerification v;
      v.id = rec.id;
      v.error = e.what();
      results.push_back(std::move(v));
    }
  }
  return results;
}

}  // namespace mattefuse

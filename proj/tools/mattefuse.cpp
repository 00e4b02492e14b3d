// mattefuse: defocus simulation, dataset generation, guided fusion and
// no-reference evaluation from the command line.
//
// Exit codes: 0 ok, 1 bad arguments or input description, 2 I/O failure,
// 3 validation failure.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mattefuse/dataset.hpp"
#include "mattefuse/defocus.hpp"
#include "mattefuse/errors.hpp"
#include "mattefuse/file_util.hpp"
#include "mattefuse/fusion.hpp"
#include "mattefuse/guidance.hpp"
#include "mattefuse/losses.hpp"
#include "mattefuse/metrics.hpp"
#include "mattefuse/parallel.hpp"
#include "mattefuse/png_io.hpp"
#include "mattefuse/scene_file.hpp"

namespace fs = std::filesystem;
using namespace mattefuse;

namespace {

enum Exit { kOk = 0, kArgs = 1, kIo = 2, kValidation = 3 };

struct Globals {
  std::uint64_t seed = 0;
  unsigned threads = 0;
  bool verbose = false;
};

void log(const Globals& g, const std::string& msg) {
  if (g.verbose) std::cerr << "mattefuse: " << msg << "\n";
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  std::optional<fs::path> scene;
  std::optional<int> fig7;
  std::string model;
  fs::path out;
  bool all_layers = false;
  double near_sigma = 4.0;
  double far_sigma = 2.0;
  std::optional<fs::path> image;
  std::optional<double> sigma;
  double noise = 0.0;
};

void add_simulate(CLI::App& app, SimulateArgs& a) {
  auto* cmd = app.add_subcommand("simulate", "Render a defocused image from a scene description");
  auto* scene = cmd->add_option("--scene", a.scene, "YAML scene file (layers and/or boundary)");
  auto* fig7 = cmd->add_option("--fig7", a.fig7, "Built-in three-object fixture focused on object N")->check(CLI::Range(1, 3));
  auto* image = cmd->add_option("--image", a.image, "Single image for the space-invariant model");
  scene->excludes(fig7)->excludes(image);
  fig7->excludes(image);
  cmd->add_option("--model", a.model, "one | two | matte (default: the scene's model, else matte)")
      ->check(CLI::IsMember({"one", "two", "matte"}));
  cmd->add_option("--out", a.out, "Output directory; the render goes to image.png")->required();
  cmd->add_flag("--all-layers", a.all_layers, "Also write per-layer S_n, a0_n, a_n and I_n (matte model)");
  cmd->add_option("--near-sigma", a.near_sigma, "Fixture blur of objects in front of the focused one")
      ->capture_default_str()->check(CLI::NonNegativeNumber);
  cmd->add_option("--far-sigma", a.far_sigma, "Fixture blur of objects behind the focused one")
      ->capture_default_str()->check(CLI::NonNegativeNumber);
  cmd->add_option("--sigma", a.sigma, "Blur sigma for --image")->check(CLI::NonNegativeNumber);
  cmd->add_option("--noise", a.noise, "Additive Gaussian noise stddev for --image (0 = off)")
      ->capture_default_str()->check(CLI::NonNegativeNumber);
}

int run_simulate(const SimulateArgs& a, const Globals& g) {
  const fs::path image_out = a.out / "image.png";
  if (a.image) {
    if (!a.sigma) throw ArgumentError("--image needs --sigma");
    if (!a.model.empty() && a.model != "one") throw ArgumentError("--image only supports --model one");
    save_png(render_one_param(load_png(*a.image), *a.sigma, a.noise, g.seed), image_out);
    log(g, "wrote " + image_out.string());
    return kOk;
  }
  if (!a.scene && !a.fig7) throw ArgumentError("simulate needs --scene, --fig7 or --image");

  SceneDescription desc;
  if (a.scene) {
    desc = load_scene_file(*a.scene);
  } else {
    desc.layered = make_fig7_scene(*a.fig7, Fig7Options{a.near_sigma, a.far_sigma, false});
  }
  std::string model = !a.model.empty() ? a.model : (!desc.model.empty() ? desc.model : "matte");
  if (model != "one" && model != "two" && model != "matte") throw ArgumentError("unknown model '" + model + "'");

  if (model == "two" && desc.boundary) {
    save_png(render_two_param(*desc.boundary), image_out);
  } else {
    if (!desc.layered) throw ArgumentError("model '" + model + "' needs a layered scene");
    const Scene& scene = *desc.layered;
    if (model == "one") {
      save_png(render_one_param_regions(scene), image_out);
    } else if (model == "two") {
      save_png(render_two_param_regions(scene), image_out);
    } else {
      const MatteRender r = render_alpha_matte(scene);
      save_png(r.image, image_out);
      if (a.all_layers) {
        for (std::size_t n = 0; n < r.mattes.size(); ++n) {
          const std::string stem = "layer" + std::to_string(n + 1) + "_";
          save_png(r.blurred_surfaces[n], a.out / (stem + "surface.png"));
          save_png(r.blurred_mattes[n], a.out / (stem + "alpha0.png"));
          save_png(r.mattes[n], a.out / (stem + "alpha.png"));
          save_png(r.layer_images[n], a.out / (stem + "image.png"));
        }
      }
    }
  }
  if (a.all_layers && model != "matte") std::cerr << "mattefuse: --all-layers only applies to --model matte\n";
  log(g, "wrote " + image_out.string() + " (" + model + " model)");
  return kOk;
}

// ------------------------------------------------------------- gen-dataset

struct GenArgs {
  fs::path catalog;
  fs::path out;
  GenConfig cfg;
  bool dry_run = false;
};

void add_gen_dataset(CLI::App& app, GenArgs& a) {
  auto* cmd = app.add_subcommand("gen-dataset", "Generate synthetic multi-focus training pairs");
  cmd->add_option("--catalog", a.catalog, "YAML/JSON asset catalog")->required();
  cmd->add_option("--out", a.out, "Output directory (pairs/ and manifest.json)");
  cmd->add_option("--size", a.cfg.out_size, "Output side length in pixels")->capture_default_str();
  cmd->add_option("--per-fg", a.cfg.backgrounds_per_fg, "Backgrounds sampled per foreground")->capture_default_str();
  cmd->add_option("--sigma-min", a.cfg.sigma_min, "Lower bound of the blur sigma")->capture_default_str();
  cmd->add_option("--sigma-max", a.cfg.sigma_max, "Upper bound of the blur sigma")->capture_default_str();
  cmd->add_option("--swap-prob", a.cfg.swap_probability, "Probability that A and B are swapped")
      ->capture_default_str();
  cmd->add_option("--noise", a.cfg.noise_stddev, "Additive Gaussian noise stddev (0 = off)")->capture_default_str();
  cmd->add_flag("--independent-bg-sigma", a.cfg.independent_bg_sigma,
                "Draw a separate sigma for the background blur");
  cmd->add_flag("--dry-run", a.dry_run, "Validate the configuration and print the planned pair count");
}

int run_gen_dataset(GenArgs a, const Globals& g) {
  a.cfg.seed = g.seed;
  const AssetCatalog catalog = AssetCatalog::load(a.catalog);
  const std::size_t planned =
      planned_pair_count(catalog.foregrounds.size(), catalog.backgrounds.size(), a.cfg);
  if (a.dry_run) {
    std::cout << "planned pairs: " << planned << "\n";
    return kOk;
  }
  if (a.out.empty()) throw ArgumentError("--out is required unless --dry-run is given");
  log(g, "generating " + std::to_string(planned) + " pairs into " + a.out.string());
  const Manifest m = generate_dataset(catalog, a.cfg, a.out);
  std::cout << "pairs written: " << m.pairs.size() << " / " << m.planned_pairs << "\n";
  for (const PairError& e : m.errors) std::cerr << "mattefuse: pair " << e.id << ": " << e.message << "\n";
  return m.errors.empty() ? kOk : kIo;
}

// -------------------------------------------------------------------- fuse

struct FuseArgs {
  FuseRequest req;
  std::optional<fs::path> gmap, corr, oracle, metrics, save_gmap;
};

void add_fuse(CLI::App& app, FuseArgs& a) {
  auto* cmd = app.add_subcommand("fuse", "Fuse two source images with a three-level guidance map");
  cmd->add_option("--a", a.req.image_a, "Source image A")->required();
  cmd->add_option("--b", a.req.image_b, "Source image B")->required();
  cmd->add_option("--gmap", a.gmap, "Guidance map (8-bit, levels 0/128/255); estimated when omitted");
  auto* corr = cmd->add_option("--corr", a.corr, "Boundary correction image, 16-bit storing (c+1)/2");
  auto* oracle = cmd->add_option("--oracle-gt", a.oracle, "Ground truth used as an oracle boundary correction");
  corr->excludes(oracle);
  cmd->add_option("--out", a.req.out, "Fused image (16-bit PNG)")->required();
  cmd->add_option("--metrics", a.metrics, "Write metrics of the fused image as JSON");
  cmd->add_option("--save-gmap", a.save_gmap, "Write the guidance map used");
  cmd->add_option("--window", a.req.estimate.window, "Focus-measure window (estimation)")->capture_default_str();
  cmd->add_option("--band-radius", a.req.estimate.band_radius, "Boundary band radius (estimation)")
      ->capture_default_str();
  cmd->add_option("--majority-radius", a.req.estimate.majority_radius, "Majority filter radius (estimation)")
      ->capture_default_str();
  cmd->add_option("--scale", a.req.metrics_scale, "Intensity scale applied before metrics")->capture_default_str();
}

int run_fuse_cmd(FuseArgs a, const Globals& g) {
  a.req.gmap = a.gmap;
  a.req.correction = a.corr;
  a.req.oracle_gt = a.oracle;
  a.req.metrics_out = a.metrics;
  a.req.gmap_out = a.save_gmap;
  const FuseResult r = run_fuse(a.req);
  log(g, std::string("guidance ") + (r.gmap_estimated ? "estimated" : "loaded") + ", band pixels " +
             std::to_string(r.gmap.count(GuidanceMap::kBand)));
  log(g, "wrote " + a.req.out.string());
  return kOk;
}

// ---------------------------------------------------------------- evaluate

struct EvaluateArgs {
  std::vector<std::string> inputs;
  std::vector<std::string> methods;
  std::optional<fs::path> out;
  double scale = 255.0;
};

void add_evaluate(CLI::App& app, EvaluateArgs& a) {
  auto* cmd = app.add_subcommand("evaluate", "Compute AG, LIF, MSD and GLD for one or more methods");
  cmd->add_option("--inputs", a.inputs, "Directories, globs or files evaluated as a single method");
  cmd->add_option("--methods", a.methods, "label=dir_or_glob entries, compared against each other");
  cmd->add_option("--out", a.out, "JSON report path; a .txt table is written alongside");
  cmd->add_option("--scale", a.scale, "Intensity scale applied before metrics (255 = 8-bit units)")
      ->capture_default_str()->check(CLI::PositiveNumber);
}

int run_evaluate(const EvaluateArgs& a, const Globals& g) {
  std::vector<MethodInputs> methods;
  if (!a.inputs.empty()) {
    MethodInputs m{"inputs", {}};
    for (const std::string& in : a.inputs) {
      for (auto& p : expand_inputs(in)) m.images.push_back(std::move(p));
    }
    methods.push_back(std::move(m));
  }
  for (const std::string& entry : a.methods) {
    const auto eq = entry.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == entry.size()) {
      throw ArgumentError("--methods entries look like label=dir, got '" + entry + "'");
    }
    methods.push_back({entry.substr(0, eq), expand_inputs(entry.substr(eq + 1))});
  }
  if (methods.empty()) throw ArgumentError("evaluate needs --inputs or --methods");
  for (const MethodInputs& m : methods) {
    if (m.images.empty()) throw IoError("no images found for method '" + m.label + "'");
    log(g, m.label + ": " + std::to_string(m.images.size()) + " images");
  }
  const MetricsReport report = evaluate_batch(methods, a.scale);
  std::cout << report.to_table();
  if (a.out) {
    write_text_atomic(*a.out, report.to_json());
    fs::path table = *a.out;
    table.replace_extension(".txt");
    write_text_atomic(table, report.to_table());
  }
  return report.has_errors() ? kIo : kOk;
}

// -------------------------------------------------------------- grad-check

struct GradArgs {
  int size = 6;
  int channels = 3;
  LossConfig cfg;
  double h = 1e-4;
  std::vector<fs::path> supplied;
};

void add_grad_check(CLI::App& app, GradArgs& a) {
  auto* cmd = app.add_subcommand("grad-check", "Check analytic loss gradients against central differences");
  cmd->add_option("--size", a.size, "Side length of the random inputs")->capture_default_str()->check(CLI::Range(1, 64));
  cmd->add_option("--channels", a.channels, "Channels of the fusion images")->capture_default_str()
      ->check(CLI::IsMember({1, 3}));
  cmd->add_option("--lambda1", a.cfg.lambda1, "Matte loss weight")->capture_default_str();
  cmd->add_option("--lambda2", a.cfg.lambda2, "Initial fusion loss weight")->capture_default_str();
  cmd->add_option("--k", a.cfg.k, "Weight contrast")->capture_default_str();
  cmd->add_flag("--gt-weight", a.cfg.weight_from_gt_matte, "Weight with the ground-truth matte");
  cmd->add_option("--step", a.h, "Finite-difference step")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--inputs", a.supplied,
                  "Five PNGs instead of random data: matte_pred matte_gt fusion_ini fusion_fin fusion_gt")
      ->expected(5);
}

int run_grad_check(const GradArgs& a, const Globals& g) {
  LossInputs in;
  if (!a.supplied.empty()) {
    in.matte_pred = to_grayscale(load_png(a.supplied[0]));
    in.matte_gt = to_grayscale(load_png(a.supplied[1]));
    in.fusion_ini = load_png(a.supplied[2]);
    in.fusion_fin = load_png(a.supplied[3]);
    in.fusion_gt = load_png(a.supplied[4]);
  } else {
    in = random_loss_inputs(a.size, a.channels, g.seed);
  }
  const GradCheckReport r = check_loss_gradients(in, a.cfg, a.h);
  const LossBreakdown& b = r.breakdown;
  std::cout.precision(10);
  std::cout << "loss_matte     " << b.matte << "\n"
            << "loss_ini       " << b.ini << "\n"
            << "loss_weighted  " << b.weighted << "\n"
            << "total          " << b.total << "\n";
  std::cout.precision(3);
  std::cout << std::scientific << "rel_err matte  " << r.max_rel_err_matte << "  (" << r.matte_checked
            << " checked, " << r.matte_skipped << " near a kink)\n"
            << "rel_err ini    " << r.max_rel_err_ini << "\n"
            << "rel_err fin    " << r.max_rel_err_fin << "\n"
            << "max rel. error " << r.max_rel_error() << "\n";
  const bool ok = r.max_rel_err_matte < 1e-4 && r.max_rel_err_ini < 1e-6 && r.max_rel_err_fin < 1e-6;
  std::cout << (ok ? "gradients OK" : "gradient mismatch") << "\n";
  return ok ? kOk : kValidation;
}

// ---------------------------------------------------------------- validate

struct ValidateArgs {
  std::optional<fs::path> gmap;
  std::optional<fs::path> dataset;
  int band_radius = 6;
};

void add_validate(CLI::App& app, ValidateArgs& a) {
  auto* cmd = app.add_subcommand("validate", "Check a guidance map or a generated dataset");
  cmd->add_option("--gmap", a.gmap, "Guidance map PNG to check");
  cmd->add_option("--dataset", a.dataset, "Dataset directory to re-derive and compare");
  cmd->add_option("--band-radius", a.band_radius, "Band radius used for the band report")->capture_default_str();
}

int run_validate(const ValidateArgs& a, const Globals& g) {
  if (!a.gmap && !a.dataset) throw ArgumentError("validate needs --gmap or --dataset");
  int code = kOk;
  if (a.gmap) {
    const GuidanceCheck c = validate_guidance_file(*a.gmap, a.band_radius);
    std::cout << a.gmap->string() << ": " << c.summary() << "\n";
    if (!c.levels_ok()) code = kValidation;
  }
  if (a.dataset) {
    const auto results = verify_dataset(*a.dataset);
    std::size_t bad = 0;
    for (const PairVerification& v : results) {
      if (v.ok(kPng16Tolerance)) {
        log(g, v.id + " ok");
        continue;
      }
      ++bad;
      std::cout << v.id << ": ";
      if (!v.error.empty()) {
        std::cout << v.error << "\n";
      } else {
        std::cout << "max err a=" << v.max_err_a << " b=" << v.max_err_b << " gt=" << v.max_err_gt
                  << " matte=" << v.max_err_matte << " gmap mismatches=" << v.gmap_mismatches << "\n";
      }
    }
    std::cout << "pairs verified: " << results.size() - bad << " / " << results.size() << "\n";
    if (bad > 0 || results.empty()) code = kValidation;
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Defocus simulation, multi-focus dataset generation, guided fusion and evaluation"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "TOML/INI file with option defaults (command-line flags win)");

  Globals g;
  app.add_option("--seed", g.seed, "Root seed for every random stream")->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads (0 = all cores)")->capture_default_str();
  app.add_flag("-v,--verbose", g.verbose, "Progress messages on stderr");

  SimulateArgs sim;
  GenArgs gen;
  FuseArgs fuse;
  EvaluateArgs eval;
  GradArgs grad;
  ValidateArgs val;
  add_simulate(app, sim);
  add_gen_dataset(app, gen);
  add_fuse(app, fuse);
  add_evaluate(app, eval);
  add_grad_check(app, grad);
  add_validate(app, val);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kArgs;
  }

  try {
    set_thread_count(g.threads);
    const std::string name = app.get_subcommands().front()->get_name();
    if (name == "simulate") return run_simulate(sim, g);
    if (name == "gen-dataset") return run_gen_dataset(gen, g);
    if (name == "fuse") return run_fuse_cmd(fuse, g);
    if (name == "evaluate") return run_evaluate(eval, g);
    if (name == "grad-check") return run_grad_check(grad, g);
    if (name == "validate") return run_validate(val, g);
  } catch (const ArgumentError& e) {
    std::cerr << "mattefuse: error: " << e.what() << "\n";
    return kArgs;
  } catch (const ValidationError& e) {
    std::cerr << "mattefuse: validation failed: " << e.what() << "\n";
    return kValidation;
  } catch (const IoError& e) {
    std::cerr << "mattefuse: I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "mattefuse: I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "mattefuse: error: " << e.what() << "\n";
    return kIo;
  }
  return kArgs;
}

#pragma once

#include <vector>

#include "mattefuse/image.hpp"

namespace mattefuse {

// One scene surface parallel to the focal plane. `surface` is stored
// premultiplied by `matte` (color x clear matte).
struct Layer {
  ImageF surface;
  ImageF matte;  // single channel, [0,1]
  double sigma = 0.0;

  // Builds a layer from straight (unpremultiplied) color.
  static Layer from_color(const ImageF& color, const ImageF& matte, double sigma);
  // Fully opaque layer (matte == 1).
  static Layer opaque(const ImageF& color, double sigma);

  // Throws ArgumentError on a broken invariant: shape mismatch, matte outside
  // [0,1], negative sigma, or a surface channel exceeding its matte by > 1e-9.
  void validate() const;
};

// Layers ordered front (index 0, nearest the camera) to back.
struct Scene {
  std::vector<Layer> layers;

  int width() const { return layers.empty() ? 0 : layers.front().matte.width(); }
  int height() const { return layers.empty() ? 0 : layers.front().matte.height(); }
  int channels() const { return layers.empty() ? 0 : layers.front().surface.channels(); }
  void validate() const;
};

// Straight boundary a*x + b*y + c = 0 with pixel-center coordinates
// (x = column index, y = row index). The A side is where a*x+b*y+c >= 0.
struct LineCoeffs {
  double a = 1.0;
  double b = 0.0;
  double c = 0.0;

  bool on_a_side(int x, int y) const noexcept { return a * x + b * y + c >= 0.0; }
};

struct BoundaryLineScene {
  ImageF image_a;
  ImageF image_b;
  LineCoeffs line;
  double sigma_a = 0.0;
  double sigma_b = 0.0;

  void validate() const;
};

// Intermediate and final products of the layered matte renderer; vectors are
// indexed like Scene::layers.
struct MatteRender {
  ImageF image;                        // I = sum of layer_images
  std::vector<ImageF> blurred_surfaces;  // S_n  = G(sigma_n) * S_n^c
  std::vector<ImageF> blurred_mattes;    // a0_n = G(sigma_n) * a_n^c
  std::vector<ImageF> mattes;            // a_n  = a0_n * (1 - sum_{t<n} a_t)
  std::vector<ImageF> layer_images;      // I_n  = (1 - sum_{t<n} a_t) * S_n
};

// Space-invariant blur of a single image, plus the optional additive noise
// stage (noise_stddev == 0 disables it).
ImageF render_one_param(const ImageF& img, double sigma, double noise_stddev = 0.0,
                        unsigned long long noise_seed = 0);

// Region-wise one-parameter rendering of a layered scene: the all-in-focus
// composite is blurred with the sigma of whichever layer is visible at each
// pixel. Reblurring happens in place, so no blur crosses a region boundary.
ImageF render_one_param_regions(const Scene& scene);

// Two-sided boundary model:
//   I = (f_A u(ax+by+c)) * G(sigma_A) + (f_B u(-ax-by-c)) * G(sigma_B)
// with u(0) assigned to the A side.
ImageF render_two_param(const BoundaryLineScene& scene);

// Multi-region generalization of the two-sided model for layered scenes:
// the all-in-focus composite is split by visible-layer masks, each part is
// blurred with its own sigma, and the parts are summed.
ImageF render_two_param_regions(const Scene& scene);

// Layered transmission-matte defocus. Layers are blurred independently and
// folded front to back; the fold is sequential.
MatteRender render_alpha_matte(const Scene& scene);

// Two-surface special case: I = S_FG + (1 - a_FG) S_BG.
ImageF compose_two_surface(const Layer& fg, const Layer& bg);

// Hard (sigma-free) composite of the clear surfaces.
ImageF render_all_in_focus(const Scene& scene);

// Index of the front-most layer whose clear matte exceeds 0.5 at each pixel
// (layers.size() when none does).
std::vector<int> visible_layer_labels(const Scene& scene);

// Fixture scene: three flat-colored rectangles at increasing depth over an
// opaque textured backdrop, 256 x 256 RGB.
struct Fig7Geometry {
  // Half-open pixel rectangles [x0, x1) x [y0, y1).
  struct Rect {
    int x0, y0, x1, y1;
    bool contains(int x, int y) const noexcept { return x >= x0 && x < x1 && y >= y0 && y < y1; }
  };
  static constexpr int kSize = 256;
  static constexpr Rect kObject1{150, 140, 236, 236};  // nearest
  static constexpr Rect kObject2{90, 80, 200, 190};
  static constexpr Rect kObject3{30, 30, 140, 130};   // farthest object
};

struct Fig7Options {
  double near_sigma = 4.0;  // layers in front of the focused one
  double far_sigma = 2.0;   // layers behind it, including the backdrop
  bool all_in_focus = false;
};

// focus_layer is 1-based in {1, 2, 3}. Returns layers {object1, object2,
// object3, backdrop}.
Scene make_fig7_scene(int focus_layer, const Fig7Options& opts = {});

}  // namespace mattefuse

#include "mattefuse/defocus.hpp"

#include <cmath>
#include <string>

#include "mattefuse/errors.hpp"
#include "mattefuse/gaussian.hpp"

namespace mattefuse {

namespace {

// Blurred mattes stay in [0,1] in exact arithmetic; clamp away roundoff.
ImageF blur_matte(const ImageF& matte, double sigma) {
  ImageF out = gaussian_blur(matte, sigma);
  clamp01(out);
  return out;
}

}  // namespace

Layer Layer::from_color(const ImageF& color, const ImageF& matte, double sigma) {
  Layer layer{multiply_by_matte(color, matte), matte, sigma};
  layer.validate();
  return layer;
}

Layer Layer::opaque(const ImageF& color, double sigma) {
  return Layer{color, ImageF(color.width(), color.height(), 1, 1.0), sigma};
}

void Layer::validate() const {
  require_single_channel(matte, "layer matte");
  require_same_size(surface, matte, "layer surface/matte");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ArgumentError("layer sigma must be >= 0");
  const auto m = matte.data();
  const auto s = surface.data();
  const auto ch = static_cast<std::size_t>(surface.channels());
  for (std::size_t p = 0; p < m.size(); ++p) {
    if (!(m[p] >= 0.0 && m[p] <= 1.0)) {
      throw ArgumentError("layer matte value out of [0,1] at pixel " + std::to_string(p));
    }
    for (std::size_t c = 0; c < ch; ++c) {
      if (s[p * ch + c] > m[p] + 1e-9) {
        throw ArgumentError("layer surface is not premultiplied at pixel " + std::to_string(p));
      }
    }
  }
}

void Scene::validate() const {
  if (layers.empty()) throw ArgumentError("scene has no layers");
  for (const Layer& layer : layers) {
    layer.validate();
    require_same_shape(layer.surface, layers.front().surface, "scene layers");
  }
}

void BoundaryLineScene::validate() const {
  require_same_shape(image_a, image_b, "boundary scene images");
  if (line.a == 0.0 && line.b == 0.0) throw ArgumentError("boundary line needs (a, b) != (0, 0)");
  if (!(sigma_a >= 0.0) || !(sigma_b >= 0.0)) throw ArgumentError("boundary sigmas must be >= 0");
}

ImageF render_one_param(const ImageF& img, double sigma, double noise_stddev,
                        unsigned long long noise_seed) {
  ImageF out = gaussian_blur(img, sigma);
  if (noise_stddev > 0.0) out = add_gaussian_noise(out, noise_stddev, noise_seed);
  return out;
}

ImageF render_two_param(const BoundaryLineScene& scene) {
  scene.validate();
  ImageF part_a = scene.image_a;
  ImageF part_b = scene.image_b;
  const int ch = part_a.channels();
  for (int y = 0; y < part_a.height(); ++y) {
    for (int x = 0; x < part_a.width(); ++x) {
      ImageF& zeroed = scene.line.on_a_side(x, y) ? part_b : part_a;
      for (int c = 0; c < ch; ++c) zeroed.at(x, y, c) = 0.0;
    }
  }
  ImageF out = gaussian_blur(part_a, scene.sigma_a);
  const ImageF blurred_b = gaussian_blur(part_b, scene.sigma_b);
  auto dst = out.data();
  const auto src = blurred_b.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  return out;
}

MatteRender render_alpha_matte(const Scene& scene) {
  scene.validate();
  const int w = scene.width();
  const int h = scene.height();
  const int ch = scene.channels();
  const std::size_t n_layers = scene.layers.size();

  MatteRender r;
  r.image = ImageF(w, h, ch, 0.0);
  r.blurred_surfaces.reserve(n_layers);
  r.blurred_mattes.reserve(n_layers);
  r.mattes.reserve(n_layers);
  r.layer_images.reserve(n_layers);

  ImageF covered(w, h, 1, 0.0);  // running sum of a_t over layers in front
  for (const Layer& layer : scene.layers) {
    ImageF surface = gaussian_blur(layer.surface, layer.sigma);
    ImageF matte0 = blur_matte(layer.matte, layer.sigma);
    ImageF matte(w, h, 1);
    ImageF contribution(w, h, ch);

    auto cov = covered.data();
    const auto m0 = matte0.data();
    auto m = matte.data();
    const auto s = surface.data();
    auto contrib = contribution.data();
    auto total = r.image.data();
    const auto chs = static_cast<std::size_t>(ch);
    for (std::size_t p = 0; p < cov.size(); ++p) {
      const double visible = 1.0 - cov[p];
      m[p] = m0[p] * visible;
      for (std::size_t c = 0; c < chs; ++c) {
        const double v = visible * s[p * chs + c];
        contrib[p * chs + c] = v;
        total[p * chs + c] += v;
      }
      cov[p] += m[p];
    }

    r.blurred_surfaces.push_back(std::move(surface));
    r.blurred_mattes.push_back(std::move(matte0));
    r.mattes.push_back(std::move(matte));
    r.layer_images.push_back(std::move(contribution));
  }
  return r;
}

ImageF compose_two_surface(const Layer& fg, const Layer& bg) {
  fg.validate();
  bg.validate();
  require_same_shape(fg.surface, bg.surface, "compose_two_surface");
  const ImageF s_fg = gaussian_blur(fg.surface, fg.sigma);
  const ImageF a_fg = blur_matte(fg.matte, fg.sigma);
  const ImageF s_bg = gaussian_blur(bg.surface, bg.sigma);

  ImageF out(s_fg.width(), s_fg.height(), s_fg.channels());
  const auto a = a_fg.data();
  const auto f = s_fg.data();
  const auto b = s_bg.data();
  auto dst = out.data();
  const auto ch = static_cast<std::size_t>(s_fg.channels());
  for (std::size_t p = 0; p < a.size(); ++p) {
    const double behind = 1.0 - a[p];
    for (std::size_t c = 0; c < ch; ++c) dst[p * ch + c] = f[p * ch + c] + behind * b[p * ch + c];
  }
  return out;
}

ImageF render_all_in_focus(const Scene& scene) {
  Scene sharp = scene;
  for (Layer& layer : sharp.layers) layer.sigma = 0.0;
  return render_alpha_matte(sharp).image;
}

std::vector<int> visible_layer_labels(const Scene& scene) {
  scene.validate();
  const std::size_t n = static_cast<std::size_t>(scene.width()) * static_cast<std::size_t>(scene.height());
  const int none = static_cast<int>(scene.layers.size());
  std::vector<int> labels(n, none);
  for (std::size_t p = 0; p < n; ++p) {
    for (int l = 0; l < none; ++l) {
      if (scene.layers[static_cast<std::size_t>(l)].matte.data()[p] > 0.5) {
        labels[p] = l;
        break;
      }
    }
  }
  return labels;
}

namespace {

double layer_sigma(const Scene& scene, int label) {
  return label < static_cast<int>(scene.layers.size()) ? scene.layers[static_cast<std::size_t>(label)].sigma
                                                       : 0.0;
}

}  // namespace

ImageF render_one_param_regions(const Scene& scene) {
  const ImageF sharp = render_all_in_focus(scene);
  const std::vector<int> labels = visible_layer_labels(scene);
  ImageF out = sharp;
  const auto ch = static_cast<std::size_t>(sharp.channels());
  for (int l = 0; l <= static_cast<int>(scene.layers.size()); ++l) {
    const double sigma = layer_sigma(scene, l);
    if (sigma == 0.0) continue;
    const ImageF blurred = gaussian_blur(sharp, sigma);
    for (std::size_t p = 0; p < labels.size(); ++p) {
      if (labels[p] != l) continue;
      for (std::size_t c = 0; c < ch; ++c) out.data()[p * ch + c] = blurred.data()[p * ch + c];
    }
  }
  return out;
}

ImageF render_two_param_regions(const Scene& scene) {
  const ImageF sharp = render_all_in_focus(scene);
  const std::vector<int> labels = visible_layer_labels(scene);
  ImageF out(sharp.width(), sharp.height(), sharp.channels(), 0.0);
  const auto ch = static_cast<std::size_t>(sharp.channels());
  for (int l = 0; l <= static_cast<int>(scene.layers.size()); ++l) {
    ImageF part(sharp.width(), sharp.height(), sharp.channels(), 0.0);
    bool any = false;
    for (std::size_t p = 0; p < labels.size(); ++p) {
      if (labels[p] != l) continue;
      any = true;
      for (std::size_t c = 0; c < ch; ++c) part.data()[p * ch + c] = sharp.data()[p * ch + c];
    }
    if (!any) continue;
    const ImageF blurred = gaussian_blur(part, layer_sigma(scene, l));
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += blurred.data()[i];
  }
  return out;
}

Scene make_fig7_scene(int focus_layer, const Fig7Options& opts) {
  if (focus_layer < 1 || focus_layer > 3) {
    throw ArgumentError("fig7 focus layer must be 1, 2 or 3, got " + std::to_string(focus_layer));
  }
  using G = Fig7Geometry;
  constexpr int n = G::kSize;
  struct Object {
    G::Rect rect;
    double rgb[3];
  };
  static constexpr Object kObjects[3] = {
      {G::kObject1, {0.85, 0.18, 0.12}},  // red
      {G::kObject2, {0.95, 0.82, 0.20}},  // yellow
      {G::kObject3, {0.22, 0.38, 0.86}},  // blue
  };

  auto sigma_for = [&](int index) {  // 1-based depth order, 4 = backdrop
    if (opts.all_in_focus || index == focus_layer) return 0.0;
    return index < focus_layer ? opts.near_sigma : opts.far_sigma;
  };

  Scene scene;
  for (int i = 0; i < 3; ++i) {
    ImageF color(n, n, 3, 0.0);
    ImageF matte(n, n, 1, 0.0);
    for (int y = 0; y < n; ++y) {
      for (int x = 0; x < n; ++x) {
        if (!kObjects[i].rect.contains(x, y)) continue;
        matte.at(x, y) = 1.0;
        for (int c = 0; c < 3; ++c) color.at(x, y, c) = kObjects[i].rgb[c];
      }
    }
    scene.layers.push_back(Layer::from_color(color, matte, sigma_for(i + 1)));
  }

  // Low-contrast sinusoidal backdrop so backdrop defocus is visible.
  ImageF backdrop(n, n, 3);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const double t = 0.5 + 0.25 * std::sin(x * 0.31) * std::cos(y * 0.23);
      backdrop.at(x, y, 0) = 0.30 + 0.20 * t;
      backdrop.at(x, y, 1) = 0.45 + 0.20 * t;
      backdrop.at(x, y, 2) = 0.35 + 0.10 * t;
    }
  }
  scene.layers.push_back(Layer::opaque(backdrop, sigma_for(4)));
  return scene;
}

}  // namespace mattefuse

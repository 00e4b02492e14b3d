#include "mattefuse/losses.hpp"

#include <algorithm>
#include <cmath>

#include "mattefuse/errors.hpp"
#include "mattefuse/rng.hpp"

namespace mattefuse {

void LossConfig::validate() const {
  if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0)) throw ArgumentError("loss weights must be >= 0");
  if (!(k >= 1.0)) throw ArgumentError("weight contrast k must be >= 1");
}

LossValue loss_matte(const ImageF& matte_pred, const ImageF& matte_gt) {
  require_single_channel(matte_pred, "matte prediction");
  require_same_shape(matte_pred, matte_gt, "matte prediction vs matte ground truth");
  const auto p = matte_pred.data();
  const auto g = matte_gt.data();
  const double n = static_cast<double>(p.size());
  LossValue out{0.0, ImageF(matte_pred.width(), matte_pred.height(), 1)};
  auto grad = out.grad.data();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = p[i] - g[i];
    out.value += std::abs(d);
    grad[i] = d > 0.0 ? 1.0 / n : (d < 0.0 ? -1.0 / n : 0.0);
  }
  out.value /= n;
  return out;
}

LossValue loss_ini(const ImageF& fusion_ini, const ImageF& fusion_gt) {
  require_same_shape(fusion_ini, fusion_gt, "initial fusion vs fusion ground truth");
  const auto p = fusion_ini.data();
  const auto g = fusion_gt.data();
  const double n = static_cast<double>(p.size());
  LossValue out{0.0, ImageF(fusion_ini.width(), fusion_ini.height(), fusion_ini.channels())};
  auto grad = out.grad.data();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = p[i] - g[i];
    out.value += d * d;
    grad[i] = 2.0 * d / n;
  }
  out.value /= n;
  return out;
}

ImageF weight_map(const ImageF& matte, double k) {
  require_single_channel(matte, "weight matte");
  if (!(k >= 1.0)) throw ArgumentError("weight contrast k must be >= 1");
  ImageF w(matte.width(), matte.height(), 1);
  const auto m = matte.data();
  auto out = w.data();
  for (std::size_t i = 0; i < m.size(); ++i) {
    out[i] = (1.0 + (k - 1.0) * (1.0 - std::abs(2.0 * m[i] - 1.0))) / k;
  }
  return w;
}

LossValue loss_weighted(const ImageF& fusion_fin, const ImageF& fusion_gt, const ImageF& weight) {
  require_same_shape(fusion_fin, fusion_gt, "final fusion vs fusion ground truth");
  require_single_channel(weight, "weight map");
  require_same_size(fusion_fin, weight, "final fusion vs weight map");
  const auto p = fusion_fin.data();
  const auto g = fusion_gt.data();
  const auto w = weight.data();
  const int ch = fusion_fin.channels();
  const double n = static_cast<double>(p.size());
  LossValue out{0.0, ImageF(fusion_fin.width(), fusion_fin.height(), ch)};
  auto grad = out.grad.data();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double wi = w[i / static_cast<std::size_t>(ch)];
    const double d = p[i] - g[i];
    out.value += wi * d * d;
    grad[i] = 2.0 * wi * d / n;
  }
  out.value /= n;
  return out;
}

LossBreakdown loss_total(const LossInputs& in, const LossConfig& cfg) {
  cfg.validate();
  const LossValue lm = loss_matte(in.matte_pred, in.matte_gt);
  const LossValue li = loss_ini(in.fusion_ini, in.fusion_gt);
  const ImageF& weight_source = cfg.weight_from_gt_matte ? in.matte_gt : in.matte_pred;
  const ImageF w = weight_map(weight_source, cfg.k);
  const LossValue lw = loss_weighted(in.fusion_fin, in.fusion_gt, w);

  LossBreakdown b;
  b.matte = lm.value;
  b.ini = li.value;
  b.weighted = lw.value;
  b.total = cfg.lambda1 * lm.value + cfg.lambda2 * li.value + lw.value;

  b.grad_matte = lm.grad;
  for (double& v : b.grad_matte.data()) v *= cfg.lambda1;
  if (!cfg.weight_from_gt_matte) {
    // dW/dm = -2(k-1)/k * sign(2m - 1), accumulated over channels of the squared error.
    const auto m = in.matte_pred.data();
    const auto p = in.fusion_fin.data();
    const auto g = in.fusion_gt.data();
    const auto ch = static_cast<std::size_t>(in.fusion_fin.channels());
    const double n = static_cast<double>(p.size());
    auto gm = b.grad_matte.data();
    for (std::size_t i = 0; i < m.size(); ++i) {
      const double s = 2.0 * m[i] - 1.0;
      const double sign = s > 0.0 ? 1.0 : (s < 0.0 ? -1.0 : 0.0);
      const double dw = -2.0 * (cfg.k - 1.0) / cfg.k * sign;
      double sq = 0.0;
      for (std::size_t c = 0; c < ch; ++c) {
        const double d = p[i * ch + c] - g[i * ch + c];
        sq += d * d;
      }
      gm[i] += dw * sq / n;
    }
  }
  b.grad_ini = li.grad;
  for (double& v : b.grad_ini.data()) v *= cfg.lambda2;
  b.grad_fin = lw.grad;
  return b;
}

LossInputs random_loss_inputs(int size, int channels, std::uint64_t seed) {
  if (size < 1) throw ArgumentError("grad-check size must be >= 1");
  KeyedRng rng(seed, {0x4c4f5353});
  auto fill = [&](int ch) {
    ImageF img(size, size, ch);
    for (double& v : img.data()) v = rng.uniform();
    return img;
  };
  LossInputs in;
  in.matte_pred = fill(1);
  in.matte_gt = fill(1);
  in.fusion_ini = fill(channels);
  in.fusion_fin = fill(channels);
  in.fusion_gt = fill(channels);
  return in;
}

double GradCheckReport::max_rel_error() const {
  return std::max({max_rel_err_matte, max_rel_err_ini, max_rel_err_fin});
}

namespace {

double rel_err(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-6});
}

// Max relative error over the pixels of `target` accepted by `check`.
template <typename Check>
double probe(LossInputs& in, ImageF& target, const ImageF& grad, const LossConfig& cfg, double h,
             Check&& check) {
  double worst = 0.0;
  auto values = target.data();
  const auto g = grad.data();
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!check(i)) continue;
    const double saved = values[i];
    values[i] = saved + h;
    const double up = loss_total(in, cfg).total;
    values[i] = saved - h;
    const double down = loss_total(in, cfg).total;
    values[i] = saved;
    worst = std::max(worst, rel_err(g[i], (up - down) / (2.0 * h)));
  }
  return worst;
}

}  // namespace

GradCheckReport check_loss_gradients(const LossInputs& in, const LossConfig& cfg, double h, double kink_margin) {
  GradCheckReport r;
  r.breakdown = loss_total(in, cfg);
  LossInputs work = in;
  const auto pred = in.matte_pred.data();
  const auto gt = in.matte_gt.data();
  r.max_rel_err_matte = probe(work, work.matte_pred, r.breakdown.grad_matte, cfg, h, [&](std::size_t i) {
    const bool near_kink = std::abs(pred[i] - gt[i]) <= kink_margin ||
                           (!cfg.weight_from_gt_matte && std::abs(2.0 * pred[i] - 1.0) <= kink_margin);
    near_kink ? ++r.matte_skipped : ++r.matte_checked;
    return !near_kink;
  });
  r.max_rel_err_ini = probe(work, work.fusion_ini, r.breakdown.grad_ini, cfg, h, [](std::size_t) { return true; });
  r.max_rel_err_fin = probe(work, work.fusion_fin, r.breakdown.grad_fin, cfg, h, [](std::size_t) { return true; });
  return r;
}

}  // namespace mattefuse

#pragma once

#include <cstdint>

#include "mattefuse/image.hpp"

namespace mattefuse {

struct LossConfig {
  double lambda1 = 0.2;
  double lambda2 = 0.2;
  double k = 5.0;
  // Ablation switch: weight the final-fusion loss with the ground-truth matte
  // instead of the predicted one.
  bool weight_from_gt_matte = false;

  void validate() const;
};

// A loss value with its gradient with respect to the prediction.
struct LossValue {
  double value = 0.0;
  ImageF grad;
};

// Mean absolute difference. Subgradient 0 where pred == gt.
LossValue loss_matte(const ImageF& matte_pred, const ImageF& matte_gt);

// Mean squared difference over pixels and channels.
LossValue loss_ini(const ImageF& fusion_ini, const ImageF& fusion_gt);

// W = (1 + (k-1)(1 - |2m - 1|)) / k. Peaks at 1 on m = 0.5, floor 1/k.
ImageF weight_map(const ImageF& matte, double k);

// mean(W * (fin - gt)^2), W single-channel and broadcast over channels.
LossValue loss_weighted(const ImageF& fusion_fin, const ImageF& fusion_gt, const ImageF& weight);

struct LossInputs {
  ImageF matte_pred;  // matte_Ini
  ImageF matte_gt;
  ImageF fusion_ini;
  ImageF fusion_fin;
  ImageF fusion_gt;
};

struct LossBreakdown {
  double matte = 0.0;
  double ini = 0.0;
  double weighted = 0.0;
  double total = 0.0;
  // Gradients of total. grad_matte includes the path through W unless the
  // weight comes from the ground-truth matte.
  ImageF grad_matte;
  ImageF grad_ini;
  ImageF grad_fin;
};

LossBreakdown loss_total(const LossInputs& in, const LossConfig& cfg = {});

// Uniform random inputs on a size x size grid: single-channel mattes,
// `channels`-channel fusion images.
LossInputs random_loss_inputs(int size, int channels, std::uint64_t seed);

// Central-difference check of every loss_total gradient. Relative error is
// |analytic - numeric| / max(|analytic|, |numeric|, 1e-6). Matte pixels within
// kink_margin of an L1 or |2m - 1| kink are skipped.
struct GradCheckReport {
  LossBreakdown breakdown;
  double max_rel_err_matte = 0.0;
  double max_rel_err_ini = 0.0;
  double max_rel_err_fin = 0.0;
  std::size_t matte_checked = 0;
  std::size_t matte_skipped = 0;

  double max_rel_error() const;
};
GradCheckReport check_loss_gradients(const LossInputs& in, const LossConfig& cfg = {}, double h = 1e-4,
                                     double kink_margin = 1e-2);

}  // namespace mattefuse

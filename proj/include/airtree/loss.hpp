#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "airtree/types.hpp"

namespace airtree {

struct LossValue {
  double value = 0.0;
  std::string name;
};

/// Rate-of-change curve of a loss under an increasing breakage count k,
/// relative to the unbroken value (r[0] == 0 by construction).
struct SensitivityCurve {
  std::string loss;
  std::vector<int> k;
  std::vector<double> r;
};

/// Breakage-sensitive loss: 1 - sum(p*c) / (sum(c) + epsilon) over all voxels,
/// where c is the centerline extracted from the label. Off-centerline
/// prediction values do not contribute, which makes the loss independent of
/// branch diameters.
LossValue bs_loss(const ScalarVolume& pred, const BinaryMask& centerline,
                  double epsilon = 1e-6);

/// Analytic gradient of bs_loss with respect to the prediction:
/// d/dp_i = -c_i / (sum(c) + epsilon). Zero off the centerline.
ScalarVolume bs_loss_grad(const ScalarVolume& pred, const BinaryMask& centerline,
                          double epsilon = 1e-6);

/// Soft Dice loss: 1 - 2*sum(p*l) / (sum(p) + sum(l) + epsilon).
LossValue dice_loss(const ScalarVolume& pred, const BinaryMask& label);

/// Binary cross-entropy, predictions clamped to [1e-7, 1 - 1e-7].
LossValue ce_loss(const ScalarVolume& pred, const BinaryMask& label);

/// Combined objective: base + w_t * bs.
LossValue total_loss(const LossValue& base, const LossValue& bs,
                     double w_t = 0.5);

/// Any loss usable by the sensitivity harness. Receives the (possibly broken)
/// hard prediction, the intact label, and the label centerline.
using LossFn = std::function<double(const ScalarVolume& pred,
                                    const BinaryMask& label,
                                    const BinaryMask& centerline)>;

struct NamedLoss {
  std::string name;
  LossFn fn;
};

/// The bundled losses by name: "bs", "dice", "ce".
std::vector<NamedLoss> standard_losses(const std::vector<std::string>& names);

/// Injects k = 0..max_breakages distal breakages into a copy of the label
/// (nested gap sets, seeded) and evaluates each loss on the broken masks.
/// Returns one curve per loss with r_k = (l_k - l_0) / max(l_0, 1e-9); the
/// floor keeps ratios finite and meaningful when the unbroken prediction is
/// the label itself and l_0 degenerates to epsilon scale.
std::vector<SensitivityCurve> sensitivity_experiment(
    const BinaryMask& label, const BinaryMask& centerline,
    const std::vector<NamedLoss>& losses, int max_breakages,
    std::uint64_t seed);

}  // namespace airtree

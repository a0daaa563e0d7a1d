#include "airtree/loss.hpp"

#include <algorithm>
#include <cmath>

#include "airtree/phantom.hpp"

namespace airtree {

namespace {

constexpr double kL0Floor = 1e-9;

void validate_pred(const ScalarVolume& pred, const Vec3i& dims,
                   const char* what) {
  require_same_dims(pred.dims, dims, what);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!(pred[i] >= 0.0 && pred[i] <= 1.0)) {
      throw Error(ErrorCode::Domain, std::string(what) +
                                         ": prediction outside [0,1] at index " +
                                         std::to_string(i));
    }
  }
}

}  // namespace

LossValue bs_loss(const ScalarVolume& pred, const BinaryMask& centerline,
                  double epsilon) {
  if (!(epsilon > 0.0)) {
    throw Error(ErrorCode::BadArgs, "bs_loss: epsilon must be positive");
  }
  validate_pred(pred, centerline.dims, "bs_loss");
  double overlap = 0.0, total = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (centerline[i]) {
      overlap += pred[i];
      total += 1.0;
    }
  }
  return LossValue{1.0 - overlap / (total + epsilon), "bs"};
}

ScalarVolume bs_loss_grad(const ScalarVolume& pred, const BinaryMask& centerline,
                          double epsilon) {
  if (!(epsilon > 0.0)) {
    throw Error(ErrorCode::BadArgs, "bs_loss_grad: epsilon must be positive");
  }
  validate_pred(pred, centerline.dims, "bs_loss_grad");
  double total = 0.0;
  for (std::size_t i = 0; i < centerline.size(); ++i) {
    if (centerline[i]) total += 1.0;
  }
  const double g = -1.0 / (total + epsilon);
  ScalarVolume grad(pred.dims, pred.spacing, 0.0);
  for (std::size_t i = 0; i < centerline.size(); ++i) {
    if (centerline[i]) grad[i] = g;
  }
  return grad;
}

LossValue dice_loss(const ScalarVolume& pred, const BinaryMask& label) {
  constexpr double kEps = 1e-6;
  validate_pred(pred, label.dims, "dice_loss");
  double inter = 0.0, sum_p = 0.0, sum_l = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    sum_p += pred[i];
    if (label[i]) {
      inter += pred[i];
      sum_l += 1.0;
    }
  }
  return LossValue{1.0 - 2.0 * inter / (sum_p + sum_l + kEps), "dice"};
}

LossValue ce_loss(const ScalarVolume& pred, const BinaryMask& label) {
  constexpr double kDelta = 1e-7;
  validate_pred(pred, label.dims, "ce_loss");
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double p = std::clamp(pred[i], kDelta, 1.0 - kDelta);
    acc += label[i] ? std::log(p) : std::log(1.0 - p);
  }
  return LossValue{-acc / static_cast<double>(pred.size()), "ce"};
}

LossValue total_loss(const LossValue& base, const LossValue& bs, double w_t) {
  if (!(w_t >= 0.0)) {
    throw Error(ErrorCode::BadArgs, "total_loss: w_t must be non-negative");
  }
  return LossValue{base.value + w_t * bs.value, base.name + "+" +
                                                    std::to_string(w_t) + "*" +
                                                    bs.name};
}

std::vector<NamedLoss> standard_losses(const std::vector<std::string>& names) {
  std::vector<NamedLoss> losses;
  for (const std::string& name : names) {
    if (name == "bs") {
      losses.push_back({"bs", [](const ScalarVolume& p, const BinaryMask&,
                                 const BinaryMask& c) {
                          return bs_loss(p, c).value;
                        }});
    } else if (name == "dice") {
      losses.push_back({"dice", [](const ScalarVolume& p, const BinaryMask& l,
                                   const BinaryMask&) {
                          return dice_loss(p, l).value;
                        }});
    } else if (name == "ce") {
      losses.push_back({"ce", [](const ScalarVolume& p, const BinaryMask& l,
                                 const BinaryMask&) {
                          return ce_loss(p, l).value;
                        }});
    } else {
      throw Error(ErrorCode::BadArgs,
                  "unknown loss '" + name + "' (expected bs|dice|ce)");
    }
  }
  return losses;
}

std::vector<SensitivityCurve> sensitivity_experiment(
    const BinaryMask& label, const BinaryMask& centerline,
    const std::vector<NamedLoss>& losses, int max_breakages,
    std::uint64_t seed) {
  if (max_breakages < 1) {
    throw Error(ErrorCode::BadArgs,
                "sensitivity_experiment: max breakages must be >= 1");
  }
  require_same_dims(label.dims, centerline.dims, "sensitivity_experiment");

  // inject_breakages validates connectivity and yields an ordered gap list;
  // prefix-applying it reproduces the k-breakage prediction for every k.
  const BreakageResult breakage =
      inject_breakages(label, max_breakages, 2, seed);

  ScalarVolume pred(label.dims, label.spacing, 0.0);
  for (std::size_t i = 0; i < label.size(); ++i) {
    pred[i] = label[i] ? 1.0 : 0.0;
  }

  std::vector<SensitivityCurve> curves(losses.size());
  std::vector<double> l0(losses.size());
  for (std::size_t j = 0; j < losses.size(); ++j) {
    curves[j].loss = losses[j].name;
  }

  for (int k = 0; k <= max_breakages; ++k) {
    if (k > 0) {
      for (const std::size_t i : breakage.gaps[static_cast<std::size_t>(k - 1)].removed) {
        pred[i] = 0.0;
      }
    }
    for (std::size_t j = 0; j < losses.size(); ++j) {
      const double l = losses[j].fn(pred, label, centerline);
      if (k == 0) l0[j] = l;
      curves[j].k.push_back(k);
      curves[j].r.push_back((l - l0[j]) / std::max(l0[j], kL0Floor));
    }
  }
  return curves;
}

}  // namespace airtree

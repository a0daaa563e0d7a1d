#include "airtree/metrics.hpp"

#include <cmath>

#include "airtree/skeleton.hpp"
#include "airtree/volume.hpp"

namespace airtree {

EvalResult evaluate(const BinaryMask& pred_in, const BinaryMask& label_in,
                    double branch_threshold, const BinaryMask* exclude) {
  require_same_dims(pred_in.dims, label_in.dims, "evaluate");
  if (!(branch_threshold > 0.0 && branch_threshold <= 1.0)) {
    throw Error(ErrorCode::BadArgs, "evaluate: branch threshold must be in (0,1]");
  }
  BinaryMask pred = pred_in;
  BinaryMask label = label_in;
  if (exclude != nullptr) {
    require_same_dims(exclude->dims, label.dims, "evaluate (exclude mask)");
    for (std::size_t i = 0; i < label.size(); ++i) {
      if ((*exclude)[i]) {
        pred[i] = 0;
        label[i] = 0;
      }
    }
  }
  if (count_foreground(label) == 0) {
    throw Error(ErrorCode::EmptyForeground, "evaluate: empty label");
  }

  EvalResult result;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] && label[i]) ++result.tp;
    else if (pred[i]) ++result.fp;
    else if (label[i]) ++result.fn;
  }
  if (result.tp + result.fp == 0) {
    result.degenerate = true;
    result.precision_pct = 0.0;
  } else {
    result.precision_pct = 100.0 * static_cast<double>(result.tp) /
                           static_cast<double>(result.tp + result.fp);
  }

  const BinaryMask centerline = skeletonize(label);
  const SkeletonGraph graph = decompose(centerline);

  double total_mm = 0.0, covered_mm = 0.0;
  std::size_t centerline_total = 0, centerline_covered = 0;
  for (std::size_t i = 0; i < centerline.size(); ++i) {
    if (centerline[i]) {
      ++centerline_total;
      if (pred[i]) ++centerline_covered;
    }
  }
  for (const auto& chain : graph.branches) {
    for (std::size_t s = 1; s < chain.size(); ++s) {
      const Vec3i a = label.coords(chain[s - 1]);
      const Vec3i b = label.coords(chain[s]);
      const double px = (b.x - a.x) * label.spacing.x;
      const double py = (b.y - a.y) * label.spacing.y;
      const double pz = (b.z - a.z) * label.spacing.z;
      const double step = std::sqrt(px * px + py * py + pz * pz);
      total_mm += step;
      if (pred[chain[s - 1]] && pred[chain[s]]) covered_mm += step;
    }
  }
  result.tree_total_mm = total_mm;
  result.tree_covered_mm = covered_mm;
  if (total_mm > 0.0) {
    result.tree_length_pct = 100.0 * covered_mm / total_mm;
  } else {
    // Degenerate centerline without steps (e.g. one voxel): coverage decides.
    result.tree_length_pct =
        centerline_total > 0 && centerline_covered == centerline_total ? 100.0
                                                                       : 0.0;
  }

  std::size_t detected = 0, detected_any = 0, detected_full = 0;
  for (const auto& chain : graph.branches) {
    std::size_t inside = 0;
    for (const std::size_t i : chain) {
      if (pred[i]) ++inside;
    }
    const double fraction =
        static_cast<double>(inside) / static_cast<double>(chain.size());
    if (fraction >= branch_threshold) ++detected;
    if (inside > 0) ++detected_any;
    if (inside == chain.size()) ++detected_full;
  }
  result.branches_total = graph.branches.size();
  result.branches_detected = detected;
  if (result.branches_total > 0) {
    const double denom = static_cast<double>(result.branches_total);
    result.branch_detected_pct = 100.0 * static_cast<double>(detected) / denom;
    result.branch_any_pct = 100.0 * static_cast<double>(detected_any) / denom;
    result.branch_full_pct = 100.0 * static_cast<double>(detected_full) / denom;
  }
  return result;
}

}  // namespace airtree

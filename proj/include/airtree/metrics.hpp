#pragma once

#include <cstddef>

#include "airtree/types.hpp"

namespace airtree {

/// Voxel precision plus the centerline-based detection rates. The label
/// centerline and its branches come from skeletonize/decompose; tree length is
/// measured in physical millimeters over centerline chain steps whose both
/// endpoints the prediction covers. A branch counts as detected when at least
/// branch_threshold of its centerline voxels are inside the prediction;
/// any-overlap and full-coverage variants bracket that convention.
struct EvalResult {
  double precision_pct = 0.0;
  double tree_length_pct = 0.0;
  double branch_detected_pct = 0.0;
  std::size_t tp = 0, fp = 0, fn = 0;
  std::size_t branches_total = 0, branches_detected = 0;
  double branch_any_pct = 0.0;   // detected under any overlap
  double branch_full_pct = 0.0;  // detected only when fully covered
  double tree_total_mm = 0.0;
  double tree_covered_mm = 0.0;
  bool degenerate = false;  // empty prediction: precision reported as 0
};

/// `exclude` (optional) removes a region from both prediction and label
/// before scoring, e.g. to mask out the trachea.
EvalResult evaluate(const BinaryMask& pred, const BinaryMask& label,
                    double branch_threshold = 0.8,
                    const BinaryMask* exclude = nullptr);

}  // namespace airtree

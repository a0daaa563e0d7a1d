#pragma once

#include "airtree/types.hpp"

namespace airtree {

/// Clamps CT intensities to [lo, hi] and rescales linearly to [0, 255],
/// rounding half away from zero. Output shares dims and spacing.
ScalarVolume normalize_hu(const ScalarVolume& vol, double lo = -1000.0,
                          double hi = 600.0);

/// Thresholds a probability map (values must lie in [0, 1]). A voxel is
/// foreground iff prob >= threshold, so an exact 0.5 is kept at the default.
BinaryMask binarize(const ScalarVolume& prob, double threshold = 0.5);

/// Labels maximal 26-connected foreground components. Components are numbered
/// 1..K by ascending smallest contained linear index, so the labeling is
/// bit-reproducible.
LabelMap connected_components_26(const BinaryMask& mask);

/// Keeps only the 26-connected component with the most voxels; ties go to the
/// component containing the smallest linear index. Empty input is an error.
BinaryMask largest_component(const BinaryMask& mask);

}  // namespace airtree

#pragma once

#include <cstdint>
#include <vector>

#include "airtree/types.hpp"

namespace airtree {

enum class FusionMode {
  G2F,  // geodesic-branch result repairs the fine-tune result
  F2G,  // roles exchanged
  Add,  // plain union of the binarized inputs
};

const char* fusion_mode_name(FusionMode mode);
FusionMode fusion_mode_from_name(const std::string& name);

/// Result of the skeleton-embedding fusion. `fused` always contains the
/// binarized base prediction (the repaired side: p_f for G2F/Add, p_g for
/// F2G); `missing_centerline` is the donor-centerline voxel set V that the
/// base failed to cover.
struct FusionReport {
  BinaryMask fused;
  std::vector<std::size_t> missing_centerline;  // ascending linear indices
  std::size_t embedded_voxels = 0;
  std::size_t components_before = 0;
  std::size_t components_after = 0;
  FusionMode mode = FusionMode::G2F;
  bool degenerate = false;  // donor had no foreground; base returned unchanged
};

/// Fuses two probability maps. For G2F: binarize both, reduce the donor to its
/// largest 26-connected component, skeletonize it to a centerline, collect the
/// centerline voxels missing from the base (V), and embed every donor voxel
/// whose nearest centerline site lies in V. Nearest sites use physical
/// Euclidean distance with smallest-index tie-breaking.
FusionReport embed_fuse(const ScalarVolume& p_f, const ScalarVolume& p_g,
                        double threshold = 0.5,
                        FusionMode mode = FusionMode::G2F);

/// Number of breakages: 26-connected component count minus one, floored at
/// zero (an empty mask has none).
std::size_t count_breakages(const BinaryMask& pred);

}  // namespace airtree

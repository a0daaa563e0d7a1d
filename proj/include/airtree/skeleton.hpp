#pragma once

#include <cstdint>
#include <vector>

#include "airtree/types.hpp"

namespace airtree {

/// A centerline decomposed into branches. Voxels are classified by their
/// 26-neighbor count within the centerline: 1 neighbor -> endpoint,
/// 2 -> interior, >= 3 -> branch point, 0 -> isolated. Each branch is an
/// ordered 26-connected chain bounded by endpoints/branch points; isolated
/// voxels form degenerate one-voxel branches. Branch chains include their
/// bounding terminal voxels, so union(branches) + branch_points covers the
/// whole voxel set.
struct SkeletonGraph {
  Vec3i dims;
  Vec3d spacing{1.0, 1.0, 1.0};
  std::vector<std::size_t> voxels;        // ascending linear indices
  std::vector<std::size_t> endpoints;     // ascending
  std::vector<std::size_t> branch_points; // ascending
  std::vector<std::size_t> isolated;      // ascending
  std::vector<std::vector<std::size_t>> branches;
  // Set when the input contains a 2x2 plaquette of voxels in some axis plane,
  // i.e. it is not 1-voxel thin and classifications are approximate.
  bool plaquette_warning = false;
};

/// Medial-axis thinning to a 1-voxel-wide curve skeleton. Iteratively deletes
/// simple border points in 6 directional sub-iterations (U, D, N, S, E, W),
/// keeping endpoints (voxels with exactly one foreground 26-neighbor), until
/// a full cycle deletes nothing. Deleting only (26,6)-simple points preserves
/// the number of 26-connected foreground components and 6-connected background
/// components. Voxels outside the volume count as background.
BinaryMask skeletonize(const BinaryMask& mask);

/// Decomposes a (nominally 1-voxel-thin) centerline into a SkeletonGraph.
/// Branches are traced deterministically, iterating terminals by ascending
/// linear index and neighbor offsets in fixed order. Direct edges between two
/// branch points are junction-internal and do not form a branch of their own.
SkeletonGraph decompose(const BinaryMask& centerline);

/// Physical length of an ordered chain: the sum of Euclidean step lengths
/// between consecutive voxels, honoring anisotropic spacing. Consecutive
/// entries must be 26-adjacent.
double chain_length_mm(const std::vector<std::size_t>& chain, Vec3i dims,
                       Vec3d spacing);

/// True iff the voxel is (26,6)-simple in the mask: removing it changes
/// neither foreground 26-connectivity nor background 6-connectivity in its
/// neighborhood. Exposed for tests.
bool is_simple_point_26_6(const BinaryMask& mask, int x, int y, int z);

}  // namespace airtree

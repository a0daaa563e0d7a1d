#pragma once

#include <cstdint>
#include <vector>

#include "airtree/skeleton.hpp"
#include "airtree/types.hpp"

namespace airtree {

/// Parameters of a synthetic bifurcating capsule-tree phantom. Geometry is in
/// voxel-index coordinates; spacing is carried through to the output grids.
struct PhantomSpec {
  Vec3i dims{128, 128, 128};
  Vec3d spacing{1.0, 1.0, 1.0};
  int depth = 4;                  // bifurcation generations, >= 1
  double root_radius = 7.0;       // voxels, >= 1
  double radius_decay = 0.4;      // per-generation ratio in (0, 1]
  double segment_length = 24.0;   // voxels per generation
  double branch_angle_deg = 32.0; // child deviation from the parent direction
  std::uint64_t seed = 1;         // drives azimuth/angle jitter
};

/// One straight capsule segment of the tree (cylinder with hemispherical
/// caps), in index coordinates.
struct PhantomSegment {
  Vec3d p0, p1;
  double radius = 1.0;
  int generation = 1;  // 1-based
  int parent = -1;     // index into the segment list, -1 for the root
};

struct PhantomOutput {
  BinaryMask label;          // tube union; a single 26-connected component
  BinaryMask centerline_gt;  // voxelized analytic axes, subset of label
  SkeletonGraph branches_gt; // analytic branch structure (one per segment)
  ScalarVolume hu;           // filled by render(); empty until then
  std::vector<PhantomSegment> segments;
};

struct RenderParams {
  double lumen_hu = -950.0;
  double wall_hu = -200.0;
  double parenchyma_hu = -800.0;
  bool with_vessel = false;
  double vessel_hu = 100.0;
  double wall_thickness = 2.0;  // voxels
  double noise_sigma = 0.0;
  std::uint64_t seed = 1;
};

/// One injected gap: the severed branch (index into the decomposition of the
/// mask's skeleton) and the voxels removed from the mask.
struct GapRecord {
  std::size_t branch_index = 0;
  std::vector<std::size_t> removed;
};

struct BreakageResult {
  BinaryMask mask;
  std::vector<GapRecord> gaps;
};

/// Builds the deterministic capsule tree for the spec. Radii shrink by
/// radius_decay per generation; the tree must fit inside dims with a margin of
/// two voxels, otherwise an error names the offending generation.
PhantomOutput generate(const PhantomSpec& spec);

/// Renders intensities for a generated phantom: lumen inside the tubes, a wall
/// shell around them, parenchyma elsewhere, an optional bright vessel tube
/// touching a branch, and optional additive Gaussian noise. Requires
/// lumen < parenchyma < wall (< vessel when enabled).
ScalarVolume render(const PhantomOutput& out, const RenderParams& params = {});

/// Removes a gap_width-thick slab across k distinct distal branches of a
/// connected mask, preferring the deepest generations and randomizing among
/// equals by seed. Each gap raises the 26-component count by exactly one.
/// The gap list is ordered and prefix-stable: the first j gaps of a k-gap
/// call equal the j-gap call for the same seed.
BreakageResult inject_breakages(const BinaryMask& mask, int k, int gap_width = 2,
                                std::uint64_t seed = 0);

}  // namespace airtree

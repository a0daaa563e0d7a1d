#include <doctest.h>

#include <random>

#include "airtree/fusion.hpp"
#include "airtree/geodesic.hpp"
#include "airtree/phantom.hpp"
#include "airtree/skeleton.hpp"
#include "airtree/volume.hpp"
#include "airtree/volume_io.hpp"
#include "test_helpers.hpp"

using namespace airtree;

namespace {

PhantomOutput small_tree(std::uint64_t seed = 9) {
  PhantomSpec spec;
  spec.dims = Vec3i{64, 64, 64};
  spec.depth = 3;
  spec.root_radius = 4.0;
  spec.radius_decay = 0.6;
  spec.segment_length = 14.0;
  spec.seed = seed;
  return generate(spec);
}

}  // namespace

TEST_CASE("embed_fuse: identical inputs fuse to the binarized input") {
  std::mt19937_64 rng(73);
  const ScalarVolume p = helpers::random_volume(rng, Vec3i{6, 6, 6}, 0.0, 1.0);
  const FusionReport report = embed_fuse(p, p);
  CHECK(report.fused.data == binarize(p).data);
  CHECK(report.missing_centerline.empty());
  CHECK(report.embedded_voxels == 0);
}

TEST_CASE("embed_fuse: add mode on disjoint masks is the set union") {
  ScalarVolume p_f(Vec3i{8, 4, 4}, Vec3d{1, 1, 1}, 0.0);
  ScalarVolume p_g(p_f.dims, p_f.spacing, 0.0);
  p_f.at(1, 1, 1) = 1.0;
  p_f.at(2, 1, 1) = 1.0;
  p_g.at(6, 2, 2) = 1.0;
  const FusionReport report = embed_fuse(p_f, p_g, 0.5, FusionMode::Add);
  CHECK(count_foreground(report.fused) == 3);
  CHECK(report.fused.at(1, 1, 1) == 1);
  CHECK(report.fused.at(6, 2, 2) == 1);
  CHECK(report.embedded_voxels == 1);
}

TEST_CASE("embed_fuse: degenerate empty donor returns the base unchanged") {
  ScalarVolume p_f(Vec3i{4, 4, 4}, Vec3d{1, 1, 1}, 0.0);
  p_f.at(1, 1, 1) = 1.0;
  ScalarVolume p_g(p_f.dims, p_f.spacing, 0.0);
  const FusionReport report = embed_fuse(p_f, p_g);
  CHECK(report.degenerate);
  CHECK(report.fused.data == binarize(p_f).data);
  CHECK(report.missing_centerline.empty());
}

TEST_CASE("embed_fuse: dim mismatch is rejected") {
  ScalarVolume a(Vec3i{3, 3, 3}, Vec3d{1, 1, 1}, 0.0);
  ScalarVolume b(Vec3i{4, 3, 3}, Vec3d{1, 1, 1}, 0.0);
  CHECK_THROWS_AS(embed_fuse(a, b), Error);
}

TEST_CASE("embed_fuse: covered donor centerline embeds nothing") {
  // p_f covers the whole tube; p_g adds extra bulk around it.
  const PhantomOutput phantom = small_tree();
  ScalarVolume p_f = volume_from_mask(phantom.label);
  BinaryMask dilated = phantom.label;
  for (std::size_t i = 0; i < phantom.label.size(); ++i) {
    if (!phantom.label[i]) continue;
    const Vec3i c = phantom.label.coords(i);
    for (const Vec3i& d : kNeighbors26) {
      const int x = c.x + d.x, y = c.y + d.y, z = c.z + d.z;
      if (phantom.label.in_bounds(x, y, z)) dilated.at(x, y, z) = 1;
    }
  }
  const ScalarVolume p_g = volume_from_mask(dilated);
  const FusionReport report = embed_fuse(p_f, p_g);
  CHECK(report.embedded_voxels == 0);
  CHECK(report.missing_centerline.empty());
  CHECK(report.fused.data == binarize(p_f).data);
}

TEST_CASE("embed_fuse repairs an injected gap") {
  const PhantomOutput phantom = small_tree(21);
  const BreakageResult broken = inject_breakages(phantom.label, 1, 2, 17);
  CHECK(count_breakages(broken.mask) == 1);

  const ScalarVolume p_f = volume_from_mask(broken.mask);
  const ScalarVolume p_g = volume_from_mask(phantom.label);
  const FusionReport report = embed_fuse(p_f, p_g);
  CHECK(report.components_before == 2);
  CHECK(report.components_after == 1);
  CHECK(report.embedded_voxels > 0);
  CHECK_FALSE(report.missing_centerline.empty());
  // Fusion never removes base foreground.
  for (std::size_t i = 0; i < broken.mask.size(); ++i) {
    if (broken.mask[i]) CHECK(report.fused[i]);
  }
}

TEST_CASE("embed_fuse: inclusion chain base <= g2f <= add") {
  const PhantomOutput phantom = small_tree(33);
  const BreakageResult broken = inject_breakages(phantom.label, 2, 2, 5);
  const ScalarVolume p_f = volume_from_mask(broken.mask);
  const ScalarVolume p_g = volume_from_mask(phantom.label);

  const BinaryMask base = binarize(p_f);
  const FusionReport g2f = embed_fuse(p_f, p_g, 0.5, FusionMode::G2F);
  const FusionReport add = embed_fuse(p_f, p_g, 0.5, FusionMode::Add);
  for (std::size_t i = 0; i < base.size(); ++i) {
    if (base[i]) CHECK(g2f.fused[i]);
    if (g2f.fused[i]) CHECK(add.fused[i]);
  }
  CHECK(add.embedded_voxels >= g2f.embedded_voxels);
}

TEST_CASE("embed_fuse: every embedded voxel maps to a missing site") {
  const PhantomOutput phantom = small_tree(47);
  const BreakageResult broken = inject_breakages(phantom.label, 2, 2, 3);
  const ScalarVolume p_f = volume_from_mask(broken.mask);
  const ScalarVolume p_g = volume_from_mask(phantom.label);
  const FusionReport report = embed_fuse(p_f, p_g);

  const BinaryMask base = binarize(p_f);
  const BinaryMask donor_trunk = largest_component(binarize(p_g));
  const BinaryMask centerline = skeletonize(donor_trunk);
  const NearestSiteMap assignment = nearest_site_map(centerline);
  for (std::size_t i = 0; i < report.fused.size(); ++i) {
    if (report.fused[i] && !base[i]) {
      const std::size_t site =
          static_cast<std::size_t>(assignment.site_index[i]);
      const bool in_v =
          std::binary_search(report.missing_centerline.begin(),
                             report.missing_centerline.end(), site);
      CHECK(in_v);
    }
  }
}

TEST_CASE("embed_fuse is idempotent against the same donor") {
  const PhantomOutput phantom = small_tree(55);
  const BreakageResult broken = inject_breakages(phantom.label, 3, 2, 7);
  const ScalarVolume p_g = volume_from_mask(phantom.label);
  const FusionReport first = embed_fuse(volume_from_mask(broken.mask), p_g);
  const FusionReport second = embed_fuse(volume_from_mask(first.fused), p_g);
  CHECK(second.fused.data == first.fused.data);
}

TEST_CASE("embed_fuse: f2g swaps the roles") {
  const PhantomOutput phantom = small_tree(61);
  const BreakageResult broken = inject_breakages(phantom.label, 1, 2, 11);
  const ScalarVolume p_f = volume_from_mask(broken.mask);
  const ScalarVolume p_g = volume_from_mask(phantom.label);
  const FusionReport f2g = embed_fuse(p_f, p_g, 0.5, FusionMode::F2G);
  // The base is now p_g (already intact), so nothing is missing.
  CHECK(f2g.missing_centerline.empty());
  CHECK(f2g.fused.data == binarize(p_g).data);
}

TEST_CASE("count_breakages") {
  BinaryMask mask(Vec3i{10, 3, 3}, Vec3d{1, 1, 1});
  CHECK(count_breakages(mask) == 0);  // empty
  helpers::draw_line(mask, Vec3i{0, 1, 1}, Vec3i{1, 0, 0}, 3);
  CHECK(count_breakages(mask) == 0);  // single component
  mask.at(5, 1, 1) = 1;
  mask.at(8, 1, 1) = 1;
  CHECK(count_breakages(mask) == 2);
}

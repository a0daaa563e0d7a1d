#include <doctest.h>

#include <cmath>
#include <random>

#include "airtree/skeleton.hpp"
#include "airtree/volume.hpp"
#include "oracles.hpp"
#include "test_helpers.hpp"

using namespace airtree;

TEST_CASE("skeletonize leaves a 1-voxel line unchanged") {
  BinaryMask mask(Vec3i{12, 3, 3}, Vec3d{1, 1, 1});
  helpers::draw_line(mask, Vec3i{1, 1, 1}, Vec3i{1, 0, 0}, 10);
  const BinaryMask skel = skeletonize(mask);
  CHECK(skel.data == mask.data);
}

TEST_CASE("skeletonize of an empty mask is empty") {
  BinaryMask mask(Vec3i{4, 4, 4}, Vec3d{1, 1, 1});
  CHECK(count_foreground(skeletonize(mask)) == 0);
}

TEST_CASE("skeletonize thins a solid bar to one open chain") {
  BinaryMask mask(Vec3i{9, 9, 24}, Vec3d{1, 1, 1});
  for (int z = 1; z <= 20; ++z)
    for (int y = 2; y <= 6; ++y)
      for (int x = 2; x <= 6; ++x) mask.at(x, y, z) = 1;
  const BinaryMask skel = skeletonize(mask);
  const SkeletonGraph graph = decompose(skel);
  CHECK(graph.endpoints.size() == 2);
  CHECK(graph.branch_points.size() == 0);
  CHECK(graph.isolated.size() == 0);
  CHECK(graph.branches.size() == 1);
  CHECK(oracles::component_count_26(skel) == 1);
}

TEST_CASE("skeletonize preserves foreground and background topology counts") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 60; ++trial) {
    const BinaryMask mask = helpers::random_mask(rng, Vec3i{7, 7, 7}, 0.45);
    const BinaryMask skel = skeletonize(mask);
    for (std::size_t i = 0; i < mask.size(); ++i) {
      if (skel[i]) CHECK(mask[i]);  // subset
    }
    CHECK(oracles::component_count_26(skel) ==
          oracles::component_count_26(mask));
    CHECK(oracles::background_component_count_6(skel) ==
          oracles::background_component_count_6(mask));
  }
}

TEST_CASE("skeletonize is idempotent") {
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 30; ++trial) {
    const BinaryMask mask = helpers::random_mask(rng, Vec3i{6, 6, 6}, 0.5);
    const BinaryMask once = skeletonize(mask);
    const BinaryMask twice = skeletonize(once);
    CHECK(twice.data == once.data);
  }
}

TEST_CASE("is_simple_point_26_6 on hand cases") {
  // Lone voxel: deleting it removes a component.
  BinaryMask lone(Vec3i{3, 3, 3}, Vec3d{1, 1, 1});
  lone.at(1, 1, 1) = 1;
  CHECK_FALSE(is_simple_point_26_6(lone, 1, 1, 1));

  // End of a chain: simple.
  BinaryMask chain(Vec3i{5, 3, 3}, Vec3d{1, 1, 1});
  helpers::draw_line(chain, Vec3i{0, 1, 1}, Vec3i{1, 0, 0}, 4);
  CHECK(is_simple_point_26_6(chain, 3, 1, 1));

  // Middle of a chain: deleting disconnects.
  CHECK_FALSE(is_simple_point_26_6(chain, 2, 1, 1));

  // Center of a solid 3x3x3 block: deleting hollows out a cavity.
  BinaryMask solid(Vec3i{3, 3, 3}, Vec3d{1, 1, 1}, 1);
  CHECK_FALSE(is_simple_point_26_6(solid, 1, 1, 1));

  // Corner of the block: simple.
  CHECK(is_simple_point_26_6(solid, 0, 0, 0));
}

TEST_CASE("decompose classifies a straight chain") {
  BinaryMask mask(Vec3i{12, 3, 3}, Vec3d{1, 1, 1});
  helpers::draw_line(mask, Vec3i{1, 1, 1}, Vec3i{1, 0, 0}, 10);
  const SkeletonGraph graph = decompose(mask);
  CHECK(graph.endpoints.size() == 2);
  CHECK(graph.branch_points.size() == 0);
  REQUIRE(graph.branches.size() == 1);
  CHECK(graph.branches[0].size() == 10);
  CHECK_FALSE(graph.plaquette_warning);
}

TEST_CASE("decompose handles a Y junction") {
  // Three straight arms meeting at (5,5,1).
  BinaryMask mask(Vec3i{11, 11, 3}, Vec3d{1, 1, 1});
  helpers::draw_line(mask, Vec3i{5, 0, 1}, Vec3i{0, 1, 0}, 6);   // up to (5,5)
  helpers::draw_line(mask, Vec3i{6, 6, 1}, Vec3i{1, 1, 0}, 4);   // diagonal
  helpers::draw_line(mask, Vec3i{4, 6, 1}, Vec3i{-1, 1, 0}, 4);  // diagonal
  const SkeletonGraph graph = decompose(mask);
  CHECK(graph.endpoints.size() == 3);
  CHECK(graph.branch_points.size() == 1);
  CHECK(graph.branches.size() == 3);
  CHECK(graph.branch_points[0] == mask.index(5, 5, 1));
}

TEST_CASE("decompose: single voxel is a degenerate branch") {
  BinaryMask mask(Vec3i{3, 3, 3}, Vec3d{1, 1, 1});
  mask.at(1, 1, 1) = 1;
  const SkeletonGraph graph = decompose(mask);
  CHECK(graph.isolated.size() == 1);
  REQUIRE(graph.branches.size() == 1);
  CHECK(graph.branches[0] == std::vector<std::size_t>{mask.index(1, 1, 1)});
}

TEST_CASE("decompose warns on a 2x2 plaquette") {
  BinaryMask mask(Vec3i{4, 4, 1}, Vec3d{1, 1, 1});
  mask.at(1, 1, 0) = mask.at(2, 1, 0) = mask.at(1, 2, 0) = mask.at(2, 2, 0) = 1;
  CHECK(decompose(mask).plaquette_warning);
}

TEST_CASE("decompose reconstructs the input voxel set") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 40; ++trial) {
    const BinaryMask mask = helpers::random_mask(rng, Vec3i{7, 7, 7}, 0.5);
    const BinaryMask skel = skeletonize(mask);
    const SkeletonGraph graph = decompose(skel);
    BinaryMask rebuilt(skel.dims, skel.spacing);
    for (const auto& chain : graph.branches)
      for (const std::size_t i : chain) rebuilt[i] = 1;
    for (const std::size_t i : graph.branch_points) rebuilt[i] = 1;
    CHECK(rebuilt.data == skel.data);
  }
}

TEST_CASE("chain_length_mm handles spacing and diagonals") {
  const Vec3i dims{8, 8, 8};
  Grid3<std::uint8_t> shape(dims, Vec3d{0.5, 1.0, 1.0});

  std::vector<std::size_t> axis_pair{shape.index(1, 1, 1), shape.index(2, 1, 1)};
  CHECK(chain_length_mm(axis_pair, dims, Vec3d{0.5, 1.0, 1.0}) ==
        doctest::Approx(0.5).epsilon(1e-12));

  std::vector<std::size_t> diag_pair{shape.index(1, 1, 1), shape.index(2, 2, 2)};
  CHECK(chain_length_mm(diag_pair, dims, Vec3d{1.0, 1.0, 1.0}) ==
        doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));

  std::vector<std::size_t> gap{shape.index(1, 1, 1), shape.index(4, 1, 1)};
  CHECK_THROWS_AS(chain_length_mm(gap, dims, Vec3d{1, 1, 1}), Error);
}

TEST_CASE("chain_length_mm equals the direct pairwise sum") {
  std::mt19937_64 rng(43);
  const Vec3i dims{16, 16, 16};
  const Vec3d spacing{0.7, 0.9, 1.3};
  Grid3<std::uint8_t> shape(dims, spacing);
  std::uniform_int_distribution<int> step(-1, 1);
  for (int trial = 0; trial < 25; ++trial) {
    Vec3i p{8, 8, 8};
    std::vector<std::size_t> chain{shape.index(p.x, p.y, p.z)};
    double expected = 0.0;
    while (chain.size() < 10) {
      const Vec3i d{step(rng), step(rng), step(rng)};
      if (d.x == 0 && d.y == 0 && d.z == 0) continue;
      p = Vec3i{p.x + d.x, p.y + d.y, p.z + d.z};
      chain.push_back(shape.index(p.x, p.y, p.z));
      expected += std::sqrt(d.x * d.x * spacing.x * spacing.x +
                            d.y * d.y * spacing.y * spacing.y +
                            d.z * d.z * spacing.z * spacing.z);
    }
    CHECK(chain_length_mm(chain, dims, spacing) ==
          doctest::Approx(expected).epsilon(1e-12));
  }
}

// Test-only reference implementations, intentionally independent of the
// library's algorithms: union-find labeling instead of BFS, Floyd-Warshall
// over the explicit graph instead of Dijkstra, linear scans instead of trees.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "airtree/geodesic.hpp"
#include "airtree/types.hpp"

namespace oracles {

using airtree::BinaryMask;
using airtree::ScalarVolume;
using airtree::Vec3i;

struct UnionFind {
  std::vector<std::size_t> parent;

  explicit UnionFind(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }

  std::size_t find(std::size_t a) {
    while (parent[a] != a) {
      parent[a] = parent[parent[a]];
      a = parent[a];
    }
    return a;
  }

  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

// Partition of the foreground into 26-connected components via union-find.
// Returns per-voxel component representatives (the smallest linear index of
// the component), 0-size vector semantics: background voxels get SIZE_MAX.
inline std::vector<std::size_t> components_26(const BinaryMask& mask) {
  UnionFind uf(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) continue;
    const Vec3i c = mask.coords(i);
    for (const Vec3i& d : airtree::kNeighbors26) {
      const int x = c.x + d.x, y = c.y + d.y, z = c.z + d.z;
      if (!mask.in_bounds(x, y, z)) continue;
      const std::size_t j = mask.index(x, y, z);
      if (mask[j]) uf.unite(i, j);
    }
  }
  std::vector<std::size_t> rep(mask.size(), std::numeric_limits<std::size_t>::max());
  std::vector<std::size_t> smallest(mask.size(), std::numeric_limits<std::size_t>::max());
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) {
      const std::size_t r = uf.find(i);
      smallest[r] = std::min(smallest[r], i);
    }
  }
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) rep[i] = smallest[uf.find(i)];
  }
  return rep;
}

inline std::size_t component_count_26(const BinaryMask& mask) {
  const auto rep = components_26(mask);
  std::size_t count = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (rep[i] == i) ++count;
  }
  return count;
}

// 6-connected components of the background under zero-padding semantics:
// the volume is embedded in an infinite background, so the count is taken on
// a one-voxel-padded grid where the pad shell is background.
inline std::size_t background_component_count_6(const BinaryMask& mask) {
  const Vec3i pd{mask.dims.x + 2, mask.dims.y + 2, mask.dims.z + 2};
  BinaryMask padded(pd, mask.spacing, 0);
  for (int z = 0; z < mask.dims.z; ++z)
    for (int y = 0; y < mask.dims.y; ++y)
      for (int x = 0; x < mask.dims.x; ++x)
        padded.at(x + 1, y + 1, z + 1) = mask.at(x, y, z);

  UnionFind uf(padded.size());
  for (std::size_t i = 0; i < padded.size(); ++i) {
    if (padded[i]) continue;
    const Vec3i c = padded.coords(i);
    for (const Vec3i& d : airtree::kNeighbors6) {
      const int x = c.x + d.x, y = c.y + d.y, z = c.z + d.z;
      if (!padded.in_bounds(x, y, z)) continue;
      const std::size_t j = padded.index(x, y, z);
      if (!padded[j]) uf.unite(i, j);
    }
  }
  std::size_t count = 0;
  for (std::size_t i = 0; i < padded.size(); ++i) {
    if (!padded[i] && uf.find(i) == i) ++count;
  }
  return count;
}

// Explicit-graph Floyd-Warshall over the 26-neighbor grid, then the minimum
// over all source voxels per voxel.
inline std::vector<double> geodesic_floyd_warshall(
    const ScalarVolume& gray, const BinaryMask& sources,
    airtree::GeodesicMetric metric) {
  const std::size_t n = gray.size();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(n * n, inf);
  for (std::size_t i = 0; i < n; ++i) dist[i * n + i] = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3i c = gray.coords(i);
    for (const Vec3i& d : airtree::kNeighbors26) {
      const int x = c.x + d.x, y = c.y + d.y, z = c.z + d.z;
      if (!gray.in_bounds(x, y, z)) continue;
      const std::size_t j = gray.index(x, y, z);
      double w = 0.0;
      switch (metric) {
        case airtree::GeodesicMetric::GrayvalueSum:
          w = gray[i] + gray[j];
          break;
        case airtree::GeodesicMetric::Gradient:
          w = std::abs(gray[i] - gray[j]);
          break;
        case airtree::GeodesicMetric::Euclidean: {
          const double px = d.x * gray.spacing.x;
          const double py = d.y * gray.spacing.y;
          const double pz = d.z * gray.spacing.z;
          w = std::sqrt(px * px + py * py + pz * pz);
          break;
        }
      }
      dist[i * n + j] = std::min(dist[i * n + j], w);
    }
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i) {
      const double dik = dist[i * n + k];
      if (dik == inf) continue;
      for (std::size_t j = 0; j < n; ++j) {
        const double cand = dik + dist[k * n + j];
        if (cand < dist[i * n + j]) dist[i * n + j] = cand;
      }
    }
  std::vector<double> result(n, inf);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t s = 0; s < n; ++s) {
      if (sources[s]) result[i] = std::min(result[i], dist[i * n + s]);
    }
  }
  return result;
}

// O(V*S) nearest-site scan with the smallest-index tie rule. The squared
// distance uses the same fixed evaluation form as the library contract.
inline std::vector<std::uint64_t> nearest_sites_bruteforce(
    const BinaryMask& sites) {
  std::vector<std::size_t> site_list;
  for (std::size_t i = 0; i < sites.size(); ++i) {
    if (sites[i]) site_list.push_back(i);
  }
  std::vector<std::uint64_t> out(sites.size(), ~0ull);
  for (std::size_t i = 0; i < sites.size(); ++i) {
    const Vec3i c = sites.coords(i);
    double best = std::numeric_limits<double>::infinity();
    std::uint64_t best_site = ~0ull;
    for (const std::size_t s : site_list) {
      const Vec3i sc = sites.coords(s);
      const double dx = (c.x - sc.x) * sites.spacing.x;
      const double dy = (c.y - sc.y) * sites.spacing.y;
      const double dz = (c.z - sc.z) * sites.spacing.z;
      const double d2 = (dx * dx + dy * dy) + dz * dz;
      if (d2 < best) {  // first hit wins ties: site_list ascends
        best = d2;
        best_site = s;
      }
    }
    out[i] = best_site;
  }
  return out;
}

}  // namespace oracles

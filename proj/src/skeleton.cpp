#include "airtree/skeleton.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace airtree {

namespace {

// Local 3x3x3 neighborhood machinery. Cell index = (dx+1) + 3*(dy+1) + 9*(dz+1),
// center = 13. Tables are built once.
constexpr int kCenterCell = 13;

struct CellTables {
  // 26-adjacency between cells of the cube (center excluded from floods).
  std::array<std::array<int, 26>, 27> adj26{};
  std::array<int, 27> adj26_count{};
  // 6-adjacency restricted to the 18-neighborhood (face + edge cells).
  std::array<std::array<int, 6>, 27> adj6{};
  std::array<int, 27> adj6_count{};
  std::array<bool, 27> in18{};
  std::array<int, 6> face_cells{};
};

CellTables build_cell_tables() {
  CellTables t{};
  auto cell_offset = [](int c) {
    return Vec3i{c % 3 - 1, (c / 3) % 3 - 1, c / 9 - 1};
  };
  int nface = 0;
  for (int c = 0; c < 27; ++c) {
    const Vec3i a = cell_offset(c);
    const int l1 = std::abs(a.x) + std::abs(a.y) + std::abs(a.z);
    t.in18[c] = (c != kCenterCell) && l1 <= 2;
    if (l1 == 1) t.face_cells[nface++] = c;
  }
  for (int c = 0; c < 27; ++c) {
    if (c == kCenterCell) continue;
    const Vec3i a = cell_offset(c);
    for (int d = 0; d < 27; ++d) {
      if (d == c || d == kCenterCell) continue;
      const Vec3i b = cell_offset(d);
      const int cheb = std::max({std::abs(a.x - b.x), std::abs(a.y - b.y),
                                 std::abs(a.z - b.z)});
      const int manh = std::abs(a.x - b.x) + std::abs(a.y - b.y) +
                       std::abs(a.z - b.z);
      if (cheb == 1) t.adj26[c][t.adj26_count[c]++] = d;
      if (manh == 1 && t.in18[c] && t.in18[d])
        t.adj6[c][t.adj6_count[c]++] = d;
    }
  }
  return t;
}

const CellTables& cell_tables() {
  static const CellTables t = build_cell_tables();
  return t;
}

void load_neighborhood(const BinaryMask& mask, int x, int y, int z,
                       bool fg[27]) {
  int c = 0;
  for (int dz = -1; dz <= 1; ++dz)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx, ++c) {
        const int nx = x + dx, ny = y + dy, nz = z + dz;
        fg[c] = mask.in_bounds(nx, ny, nz) && mask[mask.index(nx, ny, nz)] != 0;
      }
}

// Number of 26-connected components of the foreground within the punctured
// neighborhood (center removed). Every such cell touches the center, so no
// adjacency-to-center filter is needed.
int foreground_components_26(const bool fg[27]) {
  const CellTables& t = cell_tables();
  bool visited[27] = {};
  int components = 0;
  int stack[26];
  for (int seed = 0; seed < 27; ++seed) {
    if (seed == kCenterCell || !fg[seed] || visited[seed]) continue;
    ++components;
    int top = 0;
    stack[top++] = seed;
    visited[seed] = true;
    while (top > 0) {
      const int c = stack[--top];
      for (int k = 0; k < t.adj26_count[c]; ++k) {
        const int d = t.adj26[c][k];
        if (fg[d] && !visited[d]) {
          visited[d] = true;
          stack[top++] = d;
        }
      }
    }
  }
  return components;
}

// Number of 6-connected components of the background within the
// 18-neighborhood that contain a face neighbor of the center.
int background_components_6(const bool fg[27]) {
  const CellTables& t = cell_tables();
  bool visited[27] = {};
  int components = 0;
  int stack[18];
  for (int f : t.face_cells) {
    if (fg[f] || visited[f]) continue;
    ++components;
    int top = 0;
    stack[top++] = f;
    visited[f] = true;
    while (top > 0) {
      const int c = stack[--top];
      for (int k = 0; k < t.adj6_count[c]; ++k) {
        const int d = t.adj6[c][k];
        if (!fg[d] && !visited[d]) {
          visited[d] = true;
          stack[top++] = d;
        }
      }
    }
  }
  return components;
}

int count_fg_neighbors_26(const BinaryMask& mask, int x, int y, int z) {
  int n = 0;
  for (const Vec3i& d : kNeighbors26) {
    const int nx = x + d.x, ny = y + d.y, nz = z + d.z;
    if (mask.in_bounds(nx, ny, nz) && mask[mask.index(nx, ny, nz)]) ++n;
  }
  return n;
}

}  // namespace

bool is_simple_point_26_6(const BinaryMask& mask, int x, int y, int z) {
  bool fg[27];
  load_neighborhood(mask, x, y, z, fg);
  if (foreground_components_26(fg) != 1) return false;
  return background_components_6(fg) == 1;
}

BinaryMask skeletonize(const BinaryMask& mask) {
  BinaryMask out(mask.dims, mask.spacing, 0);
  std::vector<std::size_t> fg_list;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) {
      out[i] = 1;
      fg_list.push_back(i);
    }
  }
  if (fg_list.empty()) return out;

  // Directional sub-iterations in fixed order: U, D, N, S, E, W.
  static constexpr std::array<Vec3i, 6> kDirections = {
      Vec3i{0, 0, 1}, Vec3i{0, 0, -1}, Vec3i{0, 1, 0},
      Vec3i{0, -1, 0}, Vec3i{1, 0, 0}, Vec3i{-1, 0, 0}};

  std::vector<std::size_t> candidates;
  bool changed = true;
  while (changed) {
    changed = false;
    for (const Vec3i& dir : kDirections) {
      candidates.clear();
      std::size_t kept = 0;
      for (std::size_t idx = 0; idx < fg_list.size(); ++idx) {
        const std::size_t i = fg_list[idx];
        if (!out[i]) continue;
        fg_list[kept++] = i;
        const Vec3i c = out.coords(i);
        const int bx = c.x + dir.x, by = c.y + dir.y, bz = c.z + dir.z;
        const bool border =
            !out.in_bounds(bx, by, bz) || !out[out.index(bx, by, bz)];
        if (!border) continue;
        const int n26 = count_fg_neighbors_26(out, c.x, c.y, c.z);
        if (n26 <= 1) continue;  // endpoint or isolated voxel: keep
        if (is_simple_point_26_6(out, c.x, c.y, c.z)) candidates.push_back(i);
      }
      fg_list.resize(kept);
      // Parallel candidates are deleted sequentially, rechecking simplicity
      // against deletions made earlier in this sub-iteration.
      for (const std::size_t i : candidates) {
        const Vec3i c = out.coords(i);
        if (is_simple_point_26_6(out, c.x, c.y, c.z)) {
          out[i] = 0;
          changed = true;
        }
      }
    }
  }
  return out;
}

SkeletonGraph decompose(const BinaryMask& centerline) {
  SkeletonGraph graph;
  graph.dims = centerline.dims;
  graph.spacing = centerline.spacing;

  enum class Kind : std::uint8_t { Background, Isolated, Endpoint, Interior, Junction };
  Grid3<std::uint8_t> kind(centerline.dims, centerline.spacing,
                           static_cast<std::uint8_t>(Kind::Background));
  for (std::size_t i = 0; i < centerline.size(); ++i) {
    if (!centerline[i]) continue;
    graph.voxels.push_back(i);
    const Vec3i c = centerline.coords(i);
    const int n = count_fg_neighbors_26(centerline, c.x, c.y, c.z);
    Kind k = Kind::Interior;
    if (n == 0) k = Kind::Isolated;
    else if (n == 1) k = Kind::Endpoint;
    else if (n >= 3) k = Kind::Junction;
    kind[i] = static_cast<std::uint8_t>(k);
    if (k == Kind::Isolated) graph.isolated.push_back(i);
    else if (k == Kind::Endpoint) graph.endpoints.push_back(i);
    else if (k == Kind::Junction) graph.branch_points.push_back(i);
  }

  // Thinness check: any 2x2 plaquette of centerline voxels in an axis plane.
  const Vec3i n = centerline.dims;
  for (std::size_t i = 0; i < centerline.size() && !graph.plaquette_warning; ++i) {
    if (!centerline[i]) continue;
    const Vec3i c = centerline.coords(i);
    auto on = [&](int x, int y, int z) {
      return centerline.in_bounds(x, y, z) && centerline[centerline.index(x, y, z)];
    };
    if ((c.x + 1 < n.x && c.y + 1 < n.y && on(c.x + 1, c.y, c.z) &&
         on(c.x, c.y + 1, c.z) && on(c.x + 1, c.y + 1, c.z)) ||
        (c.x + 1 < n.x && c.z + 1 < n.z && on(c.x + 1, c.y, c.z) &&
         on(c.x, c.y, c.z + 1) && on(c.x + 1, c.y, c.z + 1)) ||
        (c.y + 1 < n.y && c.z + 1 < n.z && on(c.x, c.y + 1, c.z) &&
         on(c.x, c.y, c.z + 1) && on(c.x, c.y + 1, c.z + 1))) {
      graph.plaquette_warning = true;
    }
  }

  auto is_terminal = [&](std::size_t i) {
    const Kind k = static_cast<Kind>(kind[i]);
    return k == Kind::Endpoint || k == Kind::Junction;
  };

  std::vector<std::size_t> terminals;
  terminals.reserve(graph.endpoints.size() + graph.branch_points.size() +
                    graph.isolated.size());
  for (std::size_t i : graph.voxels) {
    const Kind k = static_cast<Kind>(kind[i]);
    if (k != Kind::Interior) terminals.push_back(i);
  }

  Grid3<std::uint8_t> visited(centerline.dims, centerline.spacing, 0);
  std::vector<std::pair<std::size_t, std::size_t>> recorded_pairs;
  auto record_pair = [&](std::size_t a, std::size_t b) {
    const auto key = std::minmax(a, b);
    const std::pair<std::size_t, std::size_t> p{key.first, key.second};
    if (std::find(recorded_pairs.begin(), recorded_pairs.end(), p) !=
        recorded_pairs.end())
      return false;
    recorded_pairs.push_back(p);
    return true;
  };

  auto other_neighbor = [&](std::size_t cur, std::size_t prev) -> std::size_t {
    const Vec3i c = centerline.coords(cur);
    for (const Vec3i& d : kNeighbors26) {
      const int x = c.x + d.x, y = c.y + d.y, z = c.z + d.z;
      if (!centerline.in_bounds(x, y, z)) continue;
      const std::size_t j = centerline.index(x, y, z);
      if (centerline[j] && j != prev) return j;
    }
    return cur;  // unreachable for a well-formed interior voxel
  };

  for (std::size_t t : terminals) {
    if (static_cast<Kind>(kind[t]) == Kind::Isolated) {
      graph.branches.push_back({t});
      continue;
    }
    const Vec3i c = centerline.coords(t);
    for (const Vec3i& d : kNeighbors26) {
      const int x = c.x + d.x, y = c.y + d.y, z = c.z + d.z;
      if (!centerline.in_bounds(x, y, z)) continue;
      const std::size_t nb = centerline.index(x, y, z);
      if (!centerline[nb]) continue;
      if (is_terminal(nb)) {
        // Zero-interior chain; junction-junction edges stay internal.
        const bool both_junctions =
            static_cast<Kind>(kind[t]) == Kind::Junction &&
            static_cast<Kind>(kind[nb]) == Kind::Junction;
        if (!both_junctions && record_pair(t, nb) && t < nb)
          graph.branches.push_back({t, nb});
        continue;
      }
      if (visited[nb]) continue;
      std::vector<std::size_t> chain{t, nb};
      visited[nb] = 1;
      std::size_t prev = t, cur = nb;
      while (static_cast<Kind>(kind[cur]) == Kind::Interior) {
        const std::size_t next = other_neighbor(cur, prev);
        if (next == cur) break;
        chain.push_back(next);
        if (static_cast<Kind>(kind[next]) == Kind::Interior) {
          if (visited[next]) break;
          visited[next] = 1;
        }
        prev = cur;
        cur = next;
      }
      graph.branches.push_back(std::move(chain));
    }
  }

  // Leftover interior voxels belong to pure cycles.
  for (std::size_t i : graph.voxels) {
    if (static_cast<Kind>(kind[i]) != Kind::Interior || visited[i]) continue;
    std::vector<std::size_t> chain{i};
    visited[i] = 1;
    std::size_t prev = i;
    std::size_t cur = other_neighbor(i, i);
    while (cur != i && !visited[cur]) {
      chain.push_back(cur);
      visited[cur] = 1;
      const std::size_t next = other_neighbor(cur, prev);
      prev = cur;
      cur = next;
    }
    graph.branches.push_back(std::move(chain));
  }

  return graph;
}

double chain_length_mm(const std::vector<std::size_t>& chain, Vec3i dims,
                       Vec3d spacing) {
  if (chain.size() < 2) return 0.0;
  Grid3<std::uint8_t> shape(dims, spacing);  // for index math only
  double total = 0.0;
  for (std::size_t k = 1; k < chain.size(); ++k) {
    const Vec3i a = shape.coords(chain[k - 1]);
    const Vec3i b = shape.coords(chain[k]);
    const int dx = b.x - a.x, dy = b.y - a.y, dz = b.z - a.z;
    const int cheb = std::max({std::abs(dx), std::abs(dy), std::abs(dz)});
    if (cheb != 1) {
      throw Error(ErrorCode::Domain,
                  "chain_length_mm: entries " + std::to_string(k - 1) + " and " +
                      std::to_string(k) + " are not 26-adjacent");
    }
    const double px = dx * spacing.x, py = dy * spacing.y, pz = dz * spacing.z;
    total += std::sqrt(px * px + py * py + pz * pz);
  }
  return total;
}

}  // namespace airtree

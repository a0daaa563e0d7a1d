#include "airtree/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include "airtree/volume.hpp"

namespace airtree {

namespace {

// Deterministic across platforms: raw mt19937_64 bits only, no
// distribution objects.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  double uniform() {  // [0, 1)
    return static_cast<double>(state_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::uint64_t below(std::uint64_t n) { return state_() % n; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform(), u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double mag = std::sqrt(-2.0 * std::log(u1));
    const double ang = 2.0 * std::numbers::pi * u2;
    spare_ = mag * std::sin(ang);
    has_spare_ = true;
    return mag * std::cos(ang);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[static_cast<std::size_t>(below(i))]);
    }
  }

private:
  std::mt19937_64 state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

Vec3d operator+(Vec3d a, Vec3d b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
Vec3d operator-(Vec3d a, Vec3d b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
Vec3d operator*(double s, Vec3d a) { return {s * a.x, s * a.y, s * a.z}; }
double dot(Vec3d a, Vec3d b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
double norm(Vec3d a) { return std::sqrt(dot(a, a)); }
Vec3d normalized(Vec3d a) {
  const double n = norm(a);
  return {a.x / n, a.y / n, a.z / n};
}
Vec3d cross(Vec3d a, Vec3d b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

// Any unit vector orthogonal to d, chosen deterministically.
Vec3d perpendicular(Vec3d d) {
  const Vec3d ref = std::abs(d.z) < 0.9 ? Vec3d{0.0, 0.0, 1.0} : Vec3d{1.0, 0.0, 0.0};
  return normalized(cross(d, ref));
}

double point_segment_distance(Vec3d p, Vec3d a, Vec3d b) {
  const Vec3d ab = b - a;
  const double len2 = dot(ab, ab);
  double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const Vec3d closest = a + t * ab;
  return norm(p - closest);
}

Vec3i round_to_voxel(Vec3d p) {
  return Vec3i{static_cast<int>(std::lround(p.x)),
               static_cast<int>(std::lround(p.y)),
               static_cast<int>(std::lround(p.z))};
}

// Iterates the clipped bounding box of a capsule and calls fn(x, y, z, dist)
// for voxels whose center lies within `radius` of the segment.
template <typename Fn>
void for_capsule_voxels(const Vec3i& dims, Vec3d a, Vec3d b, double radius,
                        Fn&& fn) {
  const int x0 = std::max(0, static_cast<int>(std::floor(std::min(a.x, b.x) - radius - 1)));
  const int y0 = std::max(0, static_cast<int>(std::floor(std::min(a.y, b.y) - radius - 1)));
  const int z0 = std::max(0, static_cast<int>(std::floor(std::min(a.z, b.z) - radius - 1)));
  const int x1 = std::min(dims.x - 1, static_cast<int>(std::ceil(std::max(a.x, b.x) + radius + 1)));
  const int y1 = std::min(dims.y - 1, static_cast<int>(std::ceil(std::max(a.y, b.y) + radius + 1)));
  const int z1 = std::min(dims.z - 1, static_cast<int>(std::ceil(std::max(a.z, b.z) + radius + 1)));
  for (int z = z0; z <= z1; ++z)
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) {
        const double d = point_segment_distance(
            Vec3d{static_cast<double>(x), static_cast<double>(y),
                  static_cast<double>(z)},
            a, b);
        if (d <= radius) fn(x, y, z, d);
      }
}

// Voxelizes the straight axis a..b into a 26-connected chain.
std::vector<std::size_t> voxelize_axis(const BinaryMask& shape, Vec3d a,
                                       Vec3d b) {
  std::vector<std::size_t> chain;
  const double len = norm(b - a);
  const int steps = std::max(1, static_cast<int>(std::ceil(len / 0.25)));
  Vec3i prev{-1, -1, -1};
  for (int s = 0; s <= steps; ++s) {
    const double t = static_cast<double>(s) / steps;
    const Vec3i v = round_to_voxel(a + t * (b - a));
    if (s > 0 && v == prev) continue;
    chain.push_back(shape.index(v.x, v.y, v.z));
    prev = v;
  }
  return chain;
}

int local_thickness(const BinaryMask& mask, const Vec3i& c) {
  const int max_rad = std::max({mask.dims.x, mask.dims.y, mask.dims.z});
  for (int rad = 1; rad <= max_rad; ++rad) {
    for (int dz = -rad; dz <= rad; ++dz)
      for (int dy = -rad; dy <= rad; ++dy)
        for (int dx = -rad; dx <= rad; ++dx) {
          if (std::max({std::abs(dx), std::abs(dy), std::abs(dz)}) != rad)
            continue;
          const int x = c.x + dx, y = c.y + dy, z = c.z + dz;
          if (!mask.in_bounds(x, y, z) || !mask[mask.index(x, y, z)])
            return rad;
        }
  }
  return max_rad;
}

}  // namespace

PhantomOutput generate(const PhantomSpec& spec) {
  if (spec.depth < 1) throw Error(ErrorCode::BadArgs, "phantom: depth must be >= 1");
  if (spec.root_radius < 1.0)
    throw Error(ErrorCode::BadArgs, "phantom: root_radius must be >= 1");
  if (!(spec.radius_decay > 0.0 && spec.radius_decay <= 1.0))
    throw Error(ErrorCode::BadArgs, "phantom: radius_decay must be in (0,1]");
  if (spec.segment_length < 4.0)
    throw Error(ErrorCode::BadArgs, "phantom: segment_length must be >= 4");
  if (!(spec.branch_angle_deg > 0.0 && spec.branch_angle_deg < 90.0))
    throw Error(ErrorCode::BadArgs, "phantom: branch_angle must be in (0,90)");
  if (spec.dims.x < 8 || spec.dims.y < 8 || spec.dims.z < 8)
    throw Error(ErrorCode::BadArgs, "phantom: dims must be at least 8^3");
  if (!(spec.spacing.x > 0 && spec.spacing.y > 0 && spec.spacing.z > 0))
    throw Error(ErrorCode::BadArgs, "phantom: spacing must be positive");

  Rng rng(spec.seed);
  PhantomOutput out;
  out.label = BinaryMask(spec.dims, spec.spacing, 0);
  out.centerline_gt = BinaryMask(spec.dims, spec.spacing, 0);

  // Grow the binary tree breadth-first so the RNG consumption order is fixed.
  struct Pending {
    Vec3d p0, dir;
    int generation;
    int parent;
  };
  // The root axis sits on integer grid coordinates: an axis-aligned tube with
  // an even-width cross-section has no middle voxel column and thinning
  // annihilates it symmetrically.
  std::vector<Pending> queue;
  queue.push_back({Vec3d{std::round((spec.dims.x - 1) / 2.0),
                         std::round((spec.dims.y - 1) / 2.0),
                         2.0 + spec.root_radius},
                   Vec3d{0.0, 0.0, 1.0}, 1, -1});

  const double margin = 2.0;
  for (std::size_t qi = 0; qi < queue.size(); ++qi) {
    const Pending item = queue[qi];
    const double radius =
        spec.root_radius * std::pow(spec.radius_decay, item.generation - 1);
    const Vec3d p1 = item.p0 + spec.segment_length * item.dir;

    const double lo_x = std::min(item.p0.x, p1.x) - radius;
    const double hi_x = std::max(item.p0.x, p1.x) + radius;
    const double lo_y = std::min(item.p0.y, p1.y) - radius;
    const double hi_y = std::max(item.p0.y, p1.y) + radius;
    const double lo_z = std::min(item.p0.z, p1.z) - radius;
    const double hi_z = std::max(item.p0.z, p1.z) + radius;
    if (lo_x < margin || lo_y < margin || lo_z < margin ||
        hi_x > spec.dims.x - 1 - margin || hi_y > spec.dims.y - 1 - margin ||
        hi_z > spec.dims.z - 1 - margin) {
      throw Error(ErrorCode::Bounds,
                  "phantom: tree exceeds bounds at generation " +
                      std::to_string(item.generation));
    }

    PhantomSegment seg;
    seg.p0 = item.p0;
    seg.p1 = p1;
    seg.radius = radius;
    seg.generation = item.generation;
    seg.parent = item.parent;
    const int seg_index = static_cast<int>(out.segments.size());
    out.segments.push_back(seg);

    if (item.generation < spec.depth) {
      const Vec3d u = perpendicular(item.dir);
      const Vec3d v = normalized(cross(item.dir, u));
      const double azimuth = rng.uniform(0.0, 2.0 * std::numbers::pi);
      const Vec3d w = std::cos(azimuth) * u + std::sin(azimuth) * v;
      for (const double sign : {1.0, -1.0}) {
        const double jitter = rng.uniform(-0.1, 0.1);
        const double angle = spec.branch_angle_deg * (1.0 + jitter) *
                             std::numbers::pi / 180.0;
        const Vec3d child_dir =
            normalized(std::cos(angle) * item.dir + sign * std::sin(angle) * w);
        queue.push_back({p1, child_dir, item.generation + 1, seg_index});
      }
    }
  }

  for (const PhantomSegment& seg : out.segments) {
    for_capsule_voxels(spec.dims, seg.p0, seg.p1, seg.radius,
                       [&](int x, int y, int z, double) {
                         out.label[out.label.index(x, y, z)] = 1;
                       });
  }

  // Analytic branch structure; junction voxels are shared by construction
  // because a child's axis starts exactly at its parent's end.
  out.branches_gt.dims = spec.dims;
  out.branches_gt.spacing = spec.spacing;
  for (std::size_t si = 0; si < out.segments.size(); ++si) {
    const PhantomSegment& seg = out.segments[si];
    std::vector<std::size_t> chain =
        voxelize_axis(out.centerline_gt, seg.p0, seg.p1);
    for (const std::size_t i : chain) {
      out.centerline_gt[i] = 1;
      out.label[i] = 1;  // thin distal tubes always contain their axis
    }
    if (seg.generation == spec.depth) {
      out.branches_gt.endpoints.push_back(chain.back());
    } else {
      out.branches_gt.branch_points.push_back(chain.back());
    }
    if (seg.parent < 0) out.branches_gt.endpoints.push_back(chain.front());
    out.branches_gt.branches.push_back(std::move(chain));
  }
  for (std::size_t i = 0; i < out.centerline_gt.size(); ++i) {
    if (out.centerline_gt[i]) out.branches_gt.voxels.push_back(i);
  }
  std::sort(out.branches_gt.endpoints.begin(), out.branches_gt.endpoints.end());
  std::sort(out.branches_gt.branch_points.begin(),
            out.branches_gt.branch_points.end());

  return out;
}

ScalarVolume render(const PhantomOutput& out, const RenderParams& params) {
  if (!(params.lumen_hu < params.parenchyma_hu &&
        params.parenchyma_hu < params.wall_hu &&
        (!params.with_vessel || params.wall_hu < params.vessel_hu))) {
    throw Error(ErrorCode::BadArgs,
                "render: intensities must satisfy lumen < parenchyma < wall"
                " < vessel");
  }
  if (params.wall_thickness < 0.0 || params.noise_sigma < 0.0) {
    throw Error(ErrorCode::BadArgs,
                "render: wall_thickness and noise_sigma must be >= 0");
  }
  const Vec3i dims = out.label.dims;
  ScalarVolume hu(dims, out.label.spacing, params.parenchyma_hu);
  BinaryMask lumen(dims, out.label.spacing, 0);

  for (const PhantomSegment& seg : out.segments) {
    for_capsule_voxels(dims, seg.p0, seg.p1, seg.radius + params.wall_thickness,
                       [&](int x, int y, int z, double) {
                         hu.at(x, y, z) = params.wall_hu;
                       });
  }
  for (const PhantomSegment& seg : out.segments) {
    for_capsule_voxels(dims, seg.p0, seg.p1, seg.radius,
                       [&](int x, int y, int z, double) {
                         hu.at(x, y, z) = params.lumen_hu;
                         lumen.at(x, y, z) = 1;
                       });
  }
  // The label can be slightly wider than the analytic tubes on thin branches
  // (the axis chain is always included); keep the lumen consistent with it.
  for (std::size_t i = 0; i < out.label.size(); ++i) {
    if (out.label[i] && !lumen[i]) {
      hu[i] = params.lumen_hu;
      lumen[i] = 1;
    }
  }

  if (params.with_vessel) {
    // A bright tube running parallel to the first post-root branch (or the
    // root itself), touching its outer wall.
    const PhantomSegment* target = &out.segments.front();
    for (const PhantomSegment& seg : out.segments) {
      if (seg.generation == 2) {
        target = &seg;
        break;
      }
    }
    const Vec3d axis = normalized(target->p1 - target->p0);
    const Vec3d offset_dir = perpendicular(axis);
    const double vessel_radius = target->radius;
    const double gap = target->radius + params.wall_thickness + vessel_radius;
    const Vec3d a = target->p0 + gap * offset_dir;
    const Vec3d b = target->p1 + gap * offset_dir;
    for_capsule_voxels(dims, a, b, vessel_radius, [&](int x, int y, int z, double) {
      if (!lumen.at(x, y, z)) hu.at(x, y, z) = params.vessel_hu;
    });
  }

  if (params.noise_sigma > 0.0) {
    Rng rng(params.seed);
    for (std::size_t i = 0; i < hu.size(); ++i) {
      hu[i] += params.noise_sigma * rng.normal();
    }
  }
  return hu;
}

BreakageResult inject_breakages(const BinaryMask& mask, int k, int gap_width,
                                std::uint64_t seed) {
  if (k < 0) throw Error(ErrorCode::BadArgs, "inject_breakages: k must be >= 0");
  if (gap_width < 1)
    throw Error(ErrorCode::BadArgs, "inject_breakages: gap_width must be >= 1");

  BreakageResult result;
  result.mask = mask;
  if (k == 0) return result;

  if (connected_components_26(mask).component_count() != 1) {
    throw Error(ErrorCode::Domain, "inject_breakages: mask is not connected");
  }

  const BinaryMask skeleton = skeletonize(mask);
  const SkeletonGraph graph = decompose(skeleton);
  if (graph.branches.empty()) {
    throw Error(ErrorCode::Domain, "inject_breakages: no branches found");
  }

  // Root terminal: the thickest endpoint (the trunk), ties to the smallest
  // index. Branch depth is then the junction-hop distance from the root
  // branch; deeper means more distal.
  std::size_t root_branch = 0;
  if (!graph.endpoints.empty()) {
    int best_thickness = -1;
    std::size_t best_voxel = 0;
    for (const std::size_t e : graph.endpoints) {
      const int t = local_thickness(mask, mask.coords(e));
      if (t > best_thickness) {
        best_thickness = t;
        best_voxel = e;
      }
    }
    for (std::size_t bi = 0; bi < graph.branches.size(); ++bi) {
      const auto& chain = graph.branches[bi];
      if (chain.front() == best_voxel || chain.back() == best_voxel) {
        root_branch = bi;
        break;
      }
    }
  }

  // Branch adjacency through shared or 26-adjacent terminal voxels
  // (junction clusters).
  std::map<std::size_t, std::vector<std::size_t>> terminal_to_branches;
  for (std::size_t bi = 0; bi < graph.branches.size(); ++bi) {
    terminal_to_branches[graph.branches[bi].front()].push_back(bi);
    terminal_to_branches[graph.branches[bi].back()].push_back(bi);
  }
  std::vector<std::vector<std::size_t>> adjacency(graph.branches.size());
  for (const auto& [voxel, incident] : terminal_to_branches) {
    std::vector<std::size_t> linked = incident;
    const Vec3i c = mask.coords(voxel);
    for (const Vec3i& d : kNeighbors26) {
      const int x = c.x + d.x, y = c.y + d.y, z = c.z + d.z;
      if (!mask.in_bounds(x, y, z)) continue;
      const auto it = terminal_to_branches.find(mask.index(x, y, z));
      if (it != terminal_to_branches.end()) {
        linked.insert(linked.end(), it->second.begin(), it->second.end());
      }
    }
    for (const std::size_t a : linked)
      for (const std::size_t b : linked)
        if (a != b) adjacency[a].push_back(b);
  }

  std::vector<int> depth(graph.branches.size(), -1);
  std::vector<std::size_t> frontier{root_branch};
  depth[root_branch] = 1;
  while (!frontier.empty()) {
    std::vector<std::size_t> next;
    for (const std::size_t bi : frontier) {
      for (const std::size_t nb : adjacency[bi]) {
        if (depth[nb] < 0) {
          depth[nb] = depth[bi] + 1;
          next.push_back(nb);
        }
      }
    }
    frontier = std::move(next);
  }

  const std::size_t min_chain = static_cast<std::size_t>(gap_width) + 4;
  std::vector<std::size_t> eligible;
  for (std::size_t bi = 0; bi < graph.branches.size(); ++bi) {
    if (graph.branches[bi].size() < min_chain) continue;
    if (bi == root_branch && graph.branches.size() > 1) continue;
    if (depth[bi] < 0) continue;
    eligible.push_back(bi);
  }
  if (static_cast<std::size_t>(k) > eligible.size()) {
    throw Error(ErrorCode::BadArgs,
                "inject_breakages: k=" + std::to_string(k) +
                    " exceeds eligible distal branches (" +
                    std::to_string(eligible.size()) + ")");
  }

  // Deepest generations first; seeded shuffle breaks ties within a depth.
  std::stable_sort(eligible.begin(), eligible.end(),
                   [&](std::size_t a, std::size_t b) { return depth[a] > depth[b]; });
  Rng rng(seed);
  std::size_t group_start = 0;
  while (group_start < eligible.size()) {
    std::size_t group_end = group_start + 1;
    while (group_end < eligible.size() &&
           depth[eligible[group_end]] == depth[eligible[group_start]]) {
      ++group_end;
    }
    std::vector<std::size_t> group(eligible.begin() + group_start,
                                   eligible.begin() + group_end);
    rng.shuffle(group);
    std::copy(group.begin(), group.end(), eligible.begin() + group_start);
    group_start = group_end;
  }

  std::size_t components = 1;
  for (const std::size_t bi : eligible) {
    if (result.gaps.size() == static_cast<std::size_t>(k)) break;
    const auto& chain = graph.branches[bi];
    const std::size_t mid = chain.size() / 2;
    const Vec3i ca = mask.coords(chain[mid >= 2 ? mid - 2 : 0]);
    const Vec3i cb = mask.coords(chain[std::min(chain.size() - 1, mid + 2)]);
    const Vec3d axis = normalized(Vec3d{static_cast<double>(cb.x - ca.x),
                                        static_cast<double>(cb.y - ca.y),
                                        static_cast<double>(cb.z - ca.z)});
    const Vec3i center = mask.coords(chain[mid]);
    const int reach = local_thickness(mask, center) + gap_width + 2;
    GapRecord gap;
    gap.branch_index = bi;
    const double half_width = gap_width / 2.0;
    for (int dz = -reach; dz <= reach; ++dz)
      for (int dy = -reach; dy <= reach; ++dy)
        for (int dx = -reach; dx <= reach; ++dx) {
          const int x = center.x + dx, y = center.y + dy, z = center.z + dz;
          if (!result.mask.in_bounds(x, y, z)) continue;
          const std::size_t i = result.mask.index(x, y, z);
          if (!result.mask[i]) continue;
          const Vec3d rel{static_cast<double>(dx), static_cast<double>(dy),
                          static_cast<double>(dz)};
          if (std::abs(dot(rel, axis)) > half_width) continue;
          if (dot(rel, rel) > static_cast<double>(reach) * reach) continue;
          gap.removed.push_back(i);
        }
    for (const std::size_t i : gap.removed) result.mask[i] = 0;
    const std::size_t now =
        connected_components_26(result.mask).component_count();
    if (now == components + 1) {
      components = now;
      result.gaps.push_back(std::move(gap));
    } else {
      for (const std::size_t i : gap.removed) result.mask[i] = 1;  // rollback
    }
  }

  if (result.gaps.size() < static_cast<std::size_t>(k)) {
    throw Error(ErrorCode::Domain,
                "inject_breakages: only " + std::to_string(result.gaps.size()) +
                    " of " + std::to_string(k) + " requested gaps could be cut");
  }
  return result;
}

}  // namespace airtree

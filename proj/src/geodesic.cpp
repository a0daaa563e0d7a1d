#include "airtree/geodesic.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "airtree/skeleton.hpp"
#include "airtree/volume.hpp"

namespace airtree {

const char* metric_name(GeodesicMetric m) {
  switch (m) {
    case GeodesicMetric::GrayvalueSum: return "grayvalue";
    case GeodesicMetric::Gradient: return "gradient";
    case GeodesicMetric::Euclidean: return "euclidean";
  }
  return "unknown";
}

GeodesicMetric metric_from_name(const std::string& name) {
  if (name == "grayvalue") return GeodesicMetric::GrayvalueSum;
  if (name == "gradient") return GeodesicMetric::Gradient;
  if (name == "euclidean") return GeodesicMetric::Euclidean;
  throw Error(ErrorCode::BadArgs,
              "unknown geodesic metric '" + name +
                  "' (expected grayvalue|gradient|euclidean)");
}

namespace {

std::array<double, 26> step_lengths(const Vec3d& spacing) {
  std::array<double, 26> len{};
  for (std::size_t k = 0; k < kNeighbors26.size(); ++k) {
    const Vec3i& d = kNeighbors26[k];
    const double px = d.x * spacing.x, py = d.y * spacing.y,
                 pz = d.z * spacing.z;
    len[k] = std::sqrt(px * px + py * py + pz * pz);
  }
  return len;
}

}  // namespace

GeodesicField geodesic_map(const ScalarVolume& gray, const BinaryMask& sources,
                           GeodesicMetric metric,
                           const GeodesicOptions& options) {
  require_same_dims(gray.dims, sources.dims, "geodesic_map");
  if (metric != GeodesicMetric::Euclidean) {
    for (std::size_t i = 0; i < gray.size(); ++i) {
      if (!(gray[i] >= 0.0)) {
        throw Error(ErrorCode::Domain,
                    "geodesic_map: negative or NaN gray value at index " +
                        std::to_string(i));
      }
    }
  }

  GeodesicField out;
  out.metric = metric;
  out.sources = sources;
  out.distances =
      ScalarVolume(gray.dims, gray.spacing, GeodesicField::kUnreached);

  using Entry = std::pair<double, std::size_t>;  // (distance, voxel)
  std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> queue;
  std::size_t n_sources = 0;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    if (sources[i]) {
      out.distances[i] = 0.0;
      queue.emplace(0.0, i);
      ++n_sources;
    }
  }
  if (n_sources == 0) {
    throw Error(ErrorCode::EmptyForeground, "geodesic_map: empty source set");
  }

  const std::array<double, 26> steps = step_lengths(gray.spacing);
  const bool scale = options.scale_by_step_length;

  while (!queue.empty()) {
    const auto [dist, u] = queue.top();
    queue.pop();
    if (dist != out.distances[u]) continue;  // stale entry
    const Vec3i c = gray.coords(u);
    const double gu = gray[u];
    for (std::size_t k = 0; k < kNeighbors26.size(); ++k) {
      const Vec3i& d = kNeighbors26[k];
      const int x = c.x + d.x, y = c.y + d.y, z = c.z + d.z;
      if (!gray.in_bounds(x, y, z)) continue;
      const std::size_t v = gray.index(x, y, z);
      double w;
      switch (metric) {
        case GeodesicMetric::GrayvalueSum: w = gu + gray[v]; break;
        case GeodesicMetric::Gradient: w = std::abs(gu - gray[v]); break;
        case GeodesicMetric::Euclidean: w = steps[k]; break;
        default: w = 0.0; break;
      }
      if (scale && metric != GeodesicMetric::Euclidean) w *= steps[k];
      const double cand = dist + w;
      if (cand < out.distances[v]) {
        out.distances[v] = cand;
        queue.emplace(cand, v);
      }
    }
  }
  return out;
}

TruncatedGeodesicField truncate(const GeodesicField& field, double th) {
  if (!(th > 0.0)) {
    throw Error(ErrorCode::BadArgs, "truncate: th must be positive");
  }
  TruncatedGeodesicField out;
  out.th = th;
  out.values = ScalarVolume(field.distances.dims, field.distances.spacing);
  for (std::size_t i = 0; i < field.distances.size(); ++i) {
    const double g = field.distances[i];
    out.values[i] = g >= th ? 0.0 : th - g;  // +inf lands in the zero branch
  }
  return out;
}

namespace {

// Exact squared physical distance as a fixed-form function of the integer
// per-axis deltas. All nearest-site comparisons (tree search, pruning, and
// the brute-force oracle) must share this form so ties are reproducible.
struct AxisDistanceTables {
  std::vector<double> sq_x, sq_y, sq_z;

  AxisDistanceTables(const Vec3i& dims, const Vec3d& spacing) {
    auto fill = [](std::vector<double>& t, int n, double s) {
      t.resize(static_cast<std::size_t>(n));
      for (int k = 0; k < n; ++k) {
        const double d = k * s;
        t[static_cast<std::size_t>(k)] = d * d;
      }
    };
    fill(sq_x, dims.x, spacing.x);
    fill(sq_y, dims.y, spacing.y);
    fill(sq_z, dims.z, spacing.z);
  }

  double dist2(const Vec3i& a, const Vec3i& b) const {
    return (sq_x[static_cast<std::size_t>(std::abs(a.x - b.x))] +
            sq_y[static_cast<std::size_t>(std::abs(a.y - b.y))]) +
           sq_z[static_cast<std::size_t>(std::abs(a.z - b.z))];
  }
};

// Static k-d tree over integer site coordinates. Pruning uses the same
// axis-squared tables as point distances; floating-point monotonicity keeps
// the bounding-box lower bound below every contained site distance, so
// pruning with a strict comparison never discards an exact tie.
class SiteTree {
public:
  SiteTree(std::vector<Vec3i> coords, std::vector<std::uint64_t> indices,
           const AxisDistanceTables& tables)
      : coords_(std::move(coords)), site_index_(std::move(indices)),
        tables_(tables) {
    order_.resize(coords_.size());
    for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
    nodes_.reserve(2 * coords_.size());
    root_ = build(0, order_.size());
  }

  void nearest(const Vec3i& q, double& best_d2, std::uint64_t& best_site) const {
    best_d2 = std::numeric_limits<double>::infinity();
    best_site = std::numeric_limits<std::uint64_t>::max();
    search(root_, q, best_d2, best_site);
  }

private:
  struct Node {
    Vec3i lo, hi;  // bounding box of contained sites
    int left = -1, right = -1;
    std::size_t begin = 0, end = 0;  // leaf range into order_
  };

  static constexpr std::size_t kLeafSize = 8;

  int build(std::size_t begin, std::size_t end) {
    Node node;
    node.lo = node.hi = coords_[order_[begin]];
    for (std::size_t i = begin + 1; i < end; ++i) {
      const Vec3i& c = coords_[order_[i]];
      node.lo.x = std::min(node.lo.x, c.x);
      node.lo.y = std::min(node.lo.y, c.y);
      node.lo.z = std::min(node.lo.z, c.z);
      node.hi.x = std::max(node.hi.x, c.x);
      node.hi.y = std::max(node.hi.y, c.y);
      node.hi.z = std::max(node.hi.z, c.z);
    }
    if (end - begin <= kLeafSize) {
      node.begin = begin;
      node.end = end;
      nodes_.push_back(node);
      return static_cast<int>(nodes_.size() - 1);
    }
    const int ex = node.hi.x - node.lo.x;
    const int ey = node.hi.y - node.lo.y;
    const int ez = node.hi.z - node.lo.z;
    int axis = 0;
    if (ey >= ex && ey >= ez) axis = 1;
    else if (ez >= ex && ez >= ey) axis = 2;
    const std::size_t mid = (begin + end) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid,
                     order_.begin() + end, [&](std::size_t a, std::size_t b) {
                       const Vec3i& ca = coords_[a];
                       const Vec3i& cb = coords_[b];
                       const int va = axis == 0 ? ca.x : axis == 1 ? ca.y : ca.z;
                       const int vb = axis == 0 ? cb.x : axis == 1 ? cb.y : cb.z;
                       return va < vb;
                     });
    const int self = static_cast<int>(nodes_.size());
    nodes_.push_back(node);
    const int left = build(begin, mid);
    const int right = build(mid, end);
    nodes_[self].left = left;
    nodes_[self].right = right;
    return self;
  }

  double box_lower_bound(const Node& node, const Vec3i& q) const {
    const int gx = q.x < node.lo.x ? node.lo.x - q.x
                                   : (q.x > node.hi.x ? q.x - node.hi.x : 0);
    const int gy = q.y < node.lo.y ? node.lo.y - q.y
                                   : (q.y > node.hi.y ? q.y - node.hi.y : 0);
    const int gz = q.z < node.lo.z ? node.lo.z - q.z
                                   : (q.z > node.hi.z ? q.z - node.hi.z : 0);
    return (tables_.sq_x[static_cast<std::size_t>(gx)] +
            tables_.sq_y[static_cast<std::size_t>(gy)]) +
           tables_.sq_z[static_cast<std::size_t>(gz)];
  }

  void search(int node_id, const Vec3i& q, double& best_d2,
              std::uint64_t& best_site) const {
    const Node& node = nodes_[static_cast<std::size_t>(node_id)];
    if (box_lower_bound(node, q) > best_d2) return;
    if (node.left < 0) {
      for (std::size_t i = node.begin; i < node.end; ++i) {
        const std::size_t s = order_[i];
        const double d2 = tables_.dist2(q, coords_[s]);
        if (d2 < best_d2 || (d2 == best_d2 && site_index_[s] < best_site)) {
          best_d2 = d2;
          best_site = site_index_[s];
        }
      }
      return;
    }
    const double dl = box_lower_bound(nodes_[static_cast<std::size_t>(node.left)], q);
    const double dr = box_lower_bound(nodes_[static_cast<std::size_t>(node.right)], q);
    if (dl <= dr) {
      search(node.left, q, best_d2, best_site);
      search(node.right, q, best_d2, best_site);
    } else {
      search(node.right, q, best_d2, best_site);
      search(node.left, q, best_d2, best_site);
    }
  }

  std::vector<Vec3i> coords_;
  std::vector<std::uint64_t> site_index_;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
  const AxisDistanceTables& tables_;
  int root_ = -1;
};

}  // namespace

NearestSiteMap nearest_site_map(const BinaryMask& sites) {
  std::vector<Vec3i> coords;
  std::vector<std::uint64_t> indices;
  for (std::size_t i = 0; i < sites.size(); ++i) {
    if (sites[i]) {
      coords.push_back(sites.coords(i));
      indices.push_back(static_cast<std::uint64_t>(i));
    }
  }
  if (coords.empty()) {
    throw Error(ErrorCode::EmptyForeground, "nearest_site_map: empty site set");
  }

  const AxisDistanceTables tables(sites.dims, sites.spacing);
  const SiteTree tree(std::move(coords), std::move(indices), tables);

  NearestSiteMap out;
  out.site_index = Grid3<std::uint64_t>(sites.dims, sites.spacing, 0);
  for (int z = 0; z < sites.dims.z; ++z) {
    for (int y = 0; y < sites.dims.y; ++y) {
      for (int x = 0; x < sites.dims.x; ++x) {
        const std::size_t i = sites.index(x, y, z);
        if (sites[i]) {
          out.site_index[i] = static_cast<std::uint64_t>(i);
          continue;
        }
        double d2;
        std::uint64_t site;
        tree.nearest(Vec3i{x, y, z}, d2, site);
        out.site_index[i] = site;
      }
    }
  }
  return out;
}

GdtFeature gdt_feature(const ScalarVolume& ct_hu, const ScalarVolume& stage1_prob,
                       double th, GeodesicMetric metric,
                       const GeodesicOptions& options) {
  require_same_dims(ct_hu.dims, stage1_prob.dims, "gdt_feature");
  const ScalarVolume mapped = normalize_hu(ct_hu);
  const BinaryMask pred = binarize(stage1_prob, 0.5);
  const BinaryMask trunk = largest_component(pred);
  const BinaryMask centerline = skeletonize(trunk);
  GdtFeature result;
  result.field = geodesic_map(mapped, centerline, metric, options);
  result.feature = truncate(result.field, th);
  return result;
}

}  // namespace airtree

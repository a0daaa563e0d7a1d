#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "airtree/types.hpp"

namespace airtree {

/// Edge-weight metric for the implicit 26-neighbor voxel graph.
enum class GeodesicMetric {
  GrayvalueSum,  // w(u,v) = gray(u) + gray(v)
  Gradient,      // w(u,v) = |gray(u) - gray(v)|
  Euclidean,     // w(u,v) = physical step length
};

const char* metric_name(GeodesicMetric m);
GeodesicMetric metric_from_name(const std::string& name);

/// Per-voxel minimal weighted path cost to a source set. Unreached voxels hold
/// +infinity.
struct GeodesicField {
  ScalarVolume distances;
  GeodesicMetric metric = GeodesicMetric::GrayvalueSum;
  BinaryMask sources;

  static constexpr double kUnreached = std::numeric_limits<double>::infinity();
};

/// Truncated-and-inverted distance field: 0 where the raw distance is >= th,
/// th - g elsewhere, so values live in [0, th] and peak on the sources.
struct TruncatedGeodesicField {
  ScalarVolume values;
  double th = 0.0;
};

/// Per-voxel linear index of the closest site voxel by physical Euclidean
/// distance; ties resolve to the smallest site linear index.
struct NearestSiteMap {
  Grid3<std::uint64_t> site_index;
};

struct GeodesicOptions {
  // Multiplies grayvalue/gradient edge weights by the physical step length.
  // Off by default: the plain metric uses vertex values only.
  bool scale_by_step_length = false;
};

/// Multi-source Dijkstra over the implicit 26-connected grid graph. For the
/// intensity metrics, gray values must be non-negative; spacing is taken from
/// `gray`. Single-threaded and deterministic.
GeodesicField geodesic_map(const ScalarVolume& gray, const BinaryMask& sources,
                           GeodesicMetric metric,
                           const GeodesicOptions& options = {});

TruncatedGeodesicField truncate(const GeodesicField& field, double th);

NearestSiteMap nearest_site_map(const BinaryMask& sites);

/// Raw and truncated geodesic fields produced by the feature pipeline.
struct GdtFeature {
  GeodesicField field;
  TruncatedGeodesicField feature;
};

/// Composes the geodesic feature for a CT scan and a high-recall stage-1
/// probability map: normalize_hu -> binarize(0.5) -> largest_component ->
/// skeletonize -> geodesic_map -> truncate(th).
GdtFeature gdt_feature(const ScalarVolume& ct_hu, const ScalarVolume& stage1_prob,
                       double th,
                       GeodesicMetric metric = GeodesicMetric::GrayvalueSum,
                       const GeodesicOptions& options = {});

}  // namespace airtree

#include "airtree/fusion.hpp"

#include <algorithm>

#include "airtree/geodesic.hpp"
#include "airtree/skeleton.hpp"
#include "airtree/volume.hpp"

namespace airtree {

const char* fusion_mode_name(FusionMode mode) {
  switch (mode) {
    case FusionMode::G2F: return "g2f";
    case FusionMode::F2G: return "f2g";
    case FusionMode::Add: return "add";
  }
  return "unknown";
}

FusionMode fusion_mode_from_name(const std::string& name) {
  if (name == "g2f") return FusionMode::G2F;
  if (name == "f2g") return FusionMode::F2G;
  if (name == "add") return FusionMode::Add;
  throw Error(ErrorCode::BadArgs,
              "unknown fusion mode '" + name + "' (expected g2f|f2g|add)");
}

FusionReport embed_fuse(const ScalarVolume& p_f, const ScalarVolume& p_g,
                        double threshold, FusionMode mode) {
  require_same_dims(p_f.dims, p_g.dims, "embed_fuse");

  const BinaryMask b_f = binarize(p_f, threshold);
  const BinaryMask b_g = binarize(p_g, threshold);

  FusionReport report;
  report.mode = mode;

  if (mode == FusionMode::Add) {
    report.fused = BinaryMask(b_f.dims, b_f.spacing);
    for (std::size_t i = 0; i < b_f.size(); ++i) {
      report.fused[i] = (b_f[i] || b_g[i]) ? 1 : 0;
    }
    report.embedded_voxels =
        count_foreground(report.fused) - count_foreground(b_f);
    report.components_before = connected_components_26(b_f).component_count();
    report.components_after =
        connected_components_26(report.fused).component_count();
    return report;
  }

  const BinaryMask& base = mode == FusionMode::G2F ? b_f : b_g;
  const BinaryMask& donor = mode == FusionMode::G2F ? b_g : b_f;

  report.components_before = connected_components_26(base).component_count();

  if (count_foreground(donor) == 0) {
    report.fused = base;
    report.degenerate = true;
    report.components_after = report.components_before;
    return report;
  }

  const BinaryMask trunk = largest_component(donor);
  const BinaryMask centerline = skeletonize(trunk);

  // V: donor centerline voxels the base misses.
  Grid3<std::uint8_t> in_v(base.dims, base.spacing, 0);
  for (std::size_t i = 0; i < centerline.size(); ++i) {
    if (centerline[i] && !base[i]) {
      in_v[i] = 1;
      report.missing_centerline.push_back(i);
    }
  }

  report.fused = base;
  if (!report.missing_centerline.empty()) {
    const NearestSiteMap assignment = nearest_site_map(centerline);
    for (std::size_t i = 0; i < trunk.size(); ++i) {
      if (!trunk[i] || base[i]) continue;
      if (in_v[static_cast<std::size_t>(assignment.site_index[i])]) {
        report.fused[i] = 1;
        ++report.embedded_voxels;
      }
    }
  }

  report.components_after =
      connected_components_26(report.fused).component_count();
  return report;
}

std::size_t count_breakages(const BinaryMask& pred) {
  const std::size_t components = connected_components_26(pred).component_count();
  return components > 0 ? components - 1 : 0;
}

}  // namespace airtree

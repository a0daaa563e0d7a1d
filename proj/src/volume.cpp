#include "airtree/volume.hpp"

#include <cmath>
#include <limits>

namespace airtree {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::BadArgs: return "BAD_ARGS";
    case ErrorCode::DimMismatch: return "DIM_MISMATCH";
    case ErrorCode::EmptyForeground: return "EMPTY_FOREGROUND";
    case ErrorCode::Domain: return "DOMAIN_ERROR";
    case ErrorCode::Io: return "IO_ERROR";
    case ErrorCode::BadConfig: return "BAD_CONFIG";
    case ErrorCode::Bounds: return "BOUNDS_ERROR";
    case ErrorCode::Internal: return "INTERNAL_ERROR";
  }
  return "UNKNOWN";
}

std::size_t count_foreground(const BinaryMask& mask) {
  std::size_t n = 0;
  for (std::uint8_t v : mask.data) n += (v != 0);
  return n;
}

ScalarVolume normalize_hu(const ScalarVolume& vol, double lo, double hi) {
  if (!(lo < hi)) {
    throw Error(ErrorCode::BadArgs, "normalize_hu: lo must be < hi");
  }
  ScalarVolume out(vol.dims, vol.spacing);
  const double range = hi - lo;
  for (std::size_t i = 0; i < vol.size(); ++i) {
    const double v = vol[i];
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::Domain,
                  "normalize_hu: non-finite value at index " + std::to_string(i));
    }
    const double clamped = v < lo ? lo : (v > hi ? hi : v);
    out[i] = std::round(255.0 * (clamped - lo) / range);
  }
  return out;
}

BinaryMask binarize(const ScalarVolume& prob, double threshold) {
  BinaryMask out(prob.dims, prob.spacing);
  for (std::size_t i = 0; i < prob.size(); ++i) {
    const double p = prob[i];
    if (!(p >= 0.0 && p <= 1.0)) {
      throw Error(ErrorCode::Domain,
                  "binarize: value outside [0,1] at index " + std::to_string(i));
    }
    out[i] = p >= threshold ? 1 : 0;
  }
  return out;
}

LabelMap connected_components_26(const BinaryMask& mask) {
  LabelMap result;
  result.labels = Grid3<std::uint32_t>(mask.dims, mask.spacing, 0);
  result.component_sizes.assign(1, 0);
  if (mask.size() == 0) return result;

  std::vector<std::size_t> stack;
  std::uint32_t next_label = 0;
  for (std::size_t seed = 0; seed < mask.size(); ++seed) {
    if (!mask[seed] || result.labels[seed] != 0) continue;
    ++next_label;
    std::size_t component_size = 0;
    stack.assign(1, seed);
    result.labels[seed] = next_label;
    while (!stack.empty()) {
      const std::size_t cur = stack.back();
      stack.pop_back();
      ++component_size;
      const Vec3i c = mask.coords(cur);
      for (const Vec3i& d : kNeighbors26) {
        const int x = c.x + d.x, y = c.y + d.y, z = c.z + d.z;
        if (!mask.in_bounds(x, y, z)) continue;
        const std::size_t j = mask.index(x, y, z);
        if (mask[j] && result.labels[j] == 0) {
          result.labels[j] = next_label;
          stack.push_back(j);
        }
      }
    }
    result.component_sizes.push_back(component_size);
  }
  return result;
}

BinaryMask largest_component(const BinaryMask& mask) {
  const LabelMap cc = connected_components_26(mask);
  if (cc.component_count() == 0) {
    throw Error(ErrorCode::EmptyForeground, "largest_component: empty foreground");
  }
  // Labels are numbered by ascending smallest linear index, so the first
  // maximal-size label is also the tie-break winner.
  std::uint32_t best = 1;
  for (std::uint32_t k = 2; k <= cc.component_count(); ++k) {
    if (cc.component_sizes[k] > cc.component_sizes[best]) best = k;
  }
  BinaryMask out(mask.dims, mask.spacing, 0);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    out[i] = cc.labels[i] == best ? 1 : 0;
  }
  return out;
}

}  // namespace airtree

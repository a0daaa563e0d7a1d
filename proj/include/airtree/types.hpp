#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace airtree {

/// Error categories shared by the C++ core, the C API status codes, and the
/// CLI exit codes.
enum class ErrorCode : int {
  BadArgs = 1,
  DimMismatch = 2,
  EmptyForeground = 3,
  Domain = 4,
  Io = 5,
  BadConfig = 6,
  Bounds = 7,
  Internal = 8,
};

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

private:
  ErrorCode code_;
};

const char* error_code_name(ErrorCode code);

struct Vec3i {
  int x = 0, y = 0, z = 0;

  friend bool operator==(const Vec3i&, const Vec3i&) = default;
};

struct Vec3d {
  double x = 0.0, y = 0.0, z = 0.0;

  friend bool operator==(const Vec3d&, const Vec3d&) = default;
};

/// Dense 3D grid, x fastest: linear index i = x + nx*(y + ny*z).
/// Spacing is in millimeters per voxel step along each axis.
template <typename T>
struct Grid3 {
  Vec3i dims;
  Vec3d spacing{1.0, 1.0, 1.0};
  std::vector<T> data;

  Grid3() = default;
  Grid3(Vec3i d, Vec3d s, T fill = T{})
      : dims(d), spacing(s),
        data(static_cast<std::size_t>(d.x) * d.y * d.z, fill) {}

  std::size_t size() const { return data.size(); }

  bool empty_dims() const { return dims.x <= 0 || dims.y <= 0 || dims.z <= 0; }

  std::size_t index(int x, int y, int z) const {
    return static_cast<std::size_t>(x) +
           static_cast<std::size_t>(dims.x) *
               (static_cast<std::size_t>(y) +
                static_cast<std::size_t>(dims.y) * static_cast<std::size_t>(z));
  }

  Vec3i coords(std::size_t i) const {
    const auto nx = static_cast<std::size_t>(dims.x);
    const auto ny = static_cast<std::size_t>(dims.y);
    return Vec3i{static_cast<int>(i % nx), static_cast<int>((i / nx) % ny),
                 static_cast<int>(i / (nx * ny))};
  }

  bool in_bounds(int x, int y, int z) const {
    return x >= 0 && x < dims.x && y >= 0 && y < dims.y && z >= 0 && z < dims.z;
  }

  T& at(int x, int y, int z) { return data[index(x, y, z)]; }
  const T& at(int x, int y, int z) const { return data[index(x, y, z)]; }

  T& operator[](std::size_t i) { return data[i]; }
  const T& operator[](std::size_t i) const { return data[i]; }

  template <typename U>
  bool same_dims(const Grid3<U>& other) const {
    return dims == other.dims;
  }
};

using ScalarVolume = Grid3<double>;
using BinaryMask = Grid3<std::uint8_t>;

/// Labeled connected components. Label 0 is background; component labels are
/// contiguous 1..K, numbered by ascending smallest contained linear index.
/// component_sizes is indexed by label (entry 0 unused and zero).
struct LabelMap {
  Grid3<std::uint32_t> labels;
  std::vector<std::size_t> component_sizes;

  std::size_t component_count() const {
    return component_sizes.empty() ? 0 : component_sizes.size() - 1;
  }
};

/// The 26 neighbor offsets in ascending linear-offset order (dz, dy, dx).
inline constexpr std::array<Vec3i, 26> kNeighbors26 = [] {
  std::array<Vec3i, 26> n{};
  int k = 0;
  for (int dz = -1; dz <= 1; ++dz)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx)
        if (dx != 0 || dy != 0 || dz != 0) n[k++] = Vec3i{dx, dy, dz};
  return n;
}();

/// The 6 face-neighbor offsets, same ordering convention.
inline constexpr std::array<Vec3i, 6> kNeighbors6 = {
    Vec3i{0, 0, -1}, Vec3i{0, -1, 0}, Vec3i{-1, 0, 0},
    Vec3i{1, 0, 0},  Vec3i{0, 1, 0},  Vec3i{0, 0, 1}};

std::size_t count_foreground(const BinaryMask& mask);

inline void require_same_dims(const Vec3i& a, const Vec3i& b,
                              const std::string& what) {
  if (!(a == b)) {
    throw Error(ErrorCode::DimMismatch,
                what + ": dims (" + std::to_string(a.x) + "," +
                    std::to_string(a.y) + "," + std::to_string(a.z) +
                    ") vs (" + std::to_string(b.x) + "," + std::to_string(b.y) +
                    "," + std::to_string(b.z) + ")");
  }
}

}  // namespace airtree

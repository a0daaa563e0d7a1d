#pragma once

#include <string>

#include "airtree/types.hpp"

namespace airtree {

/// Payload element types of the volume file format (MetaImage-compatible
/// subset, little-endian only).
enum class ElementType { UInt8, Int16, Float32 };

const char* element_type_name(ElementType t);

struct VolumeFile {
  ScalarVolume volume;
  ElementType element_type = ElementType::Float32;
};

/// Reads a volume from a .mha (inline payload) or .mhd (header + raw sibling)
/// file; a bare .raw path is accepted when a matching .mhd sidecar exists.
/// Reading then writing with the returned element type reproduces the payload
/// bit-exactly.
VolumeFile read_volume(const std::string& path);

/// Writes a volume. ".mha" stores the payload inline; ".mhd" writes a sibling
/// ".raw" file. Integer element types require exactly representable values;
/// Float32 casts (doubles beyond float precision are narrowed).
void write_volume(const ScalarVolume& vol, const std::string& path,
                  ElementType type);

void write_mask(const BinaryMask& mask, const std::string& path);

/// Strict mask view of a read volume: every value must be exactly 0 or 1.
BinaryMask mask_from_volume(const ScalarVolume& vol);

ScalarVolume volume_from_mask(const BinaryMask& mask);

}  // namespace airtree

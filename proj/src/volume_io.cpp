#include "airtree/volume_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace airtree {

namespace {

namespace fs = std::filesystem;

std::size_t element_size(ElementType t) {
  switch (t) {
    case ElementType::UInt8: return 1;
    case ElementType::Int16: return 2;
    case ElementType::Float32: return 4;
  }
  return 0;
}

const char* met_name(ElementType t) {
  switch (t) {
    case ElementType::UInt8: return "MET_UCHAR";
    case ElementType::Int16: return "MET_SHORT";
    case ElementType::Float32: return "MET_FLOAT";
  }
  return "";
}

struct Header {
  Vec3i dims;
  Vec3d spacing{1.0, 1.0, 1.0};
  ElementType type = ElementType::Float32;
  std::string data_file;  // "LOCAL" or a filename
  std::size_t payload_offset = 0;
};

[[noreturn]] void header_error(int line, const std::string& message) {
  throw Error(ErrorCode::Io,
              "malformed volume header (line " + std::to_string(line) +
                  "): " + message);
}

Header parse_header(const std::string& text) {
  Header header;
  bool saw_ndims = false, saw_dims = false, saw_type = false, saw_data = false;
  std::size_t pos = 0;
  int line_no = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    const std::string line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) header_error(line_no, "expected 'Key = Value'");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    if (key == "NDims") {
      if (value != "3") header_error(line_no, "NDims must be 3");
      saw_ndims = true;
    } else if (key == "DimSize") {
      std::istringstream ss(value);
      if (!(ss >> header.dims.x >> header.dims.y >> header.dims.z) ||
          header.dims.x <= 0 || header.dims.y <= 0 || header.dims.z <= 0) {
        header_error(line_no, "DimSize needs three positive integers");
      }
      saw_dims = true;
    } else if (key == "ElementSpacing") {
      std::istringstream ss(value);
      if (!(ss >> header.spacing.x >> header.spacing.y >> header.spacing.z) ||
          !(header.spacing.x > 0 && header.spacing.y > 0 &&
            header.spacing.z > 0)) {
        header_error(line_no, "ElementSpacing needs three positive reals");
      }
    } else if (key == "ElementType") {
      if (value == "MET_UCHAR") header.type = ElementType::UInt8;
      else if (value == "MET_SHORT") header.type = ElementType::Int16;
      else if (value == "MET_FLOAT") header.type = ElementType::Float32;
      else header_error(line_no, "unsupported ElementType '" + value + "'");
      saw_type = true;
    } else if (key == "ElementByteOrderMSB" || key == "BinaryDataByteOrderMSB") {
      if (value != "False")
        header_error(line_no, "only little-endian payloads are supported");
    } else if (key == "CompressedData") {
      if (value != "False")
        header_error(line_no, "compressed payloads are not supported");
    } else if (key == "ElementDataFile") {
      header.data_file = value;
      header.payload_offset = pos;
      saw_data = true;
      break;  // with LOCAL payloads the data follows immediately
    } else if (key == "ObjectType" || key == "BinaryData" ||
               key == "HeaderSize" || key == "Offset" ||
               key == "TransformMatrix" || key == "CenterOfRotation" ||
               key == "AnatomicalOrientation") {
      // tolerated metadata
    } else {
      header_error(line_no, "unknown key '" + key + "'");
    }
  }
  if (!saw_ndims) header_error(line_no, "missing NDims");
  if (!saw_dims) header_error(line_no, "missing DimSize");
  if (!saw_type) header_error(line_no, "missing ElementType");
  if (!saw_data) header_error(line_no, "missing ElementDataFile");
  return header;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ScalarVolume decode_payload(const Header& header, const char* bytes,
                            std::size_t byte_count, const std::string& path) {
  const std::size_t voxels = static_cast<std::size_t>(header.dims.x) *
                             header.dims.y * header.dims.z;
  const std::size_t expected = voxels * element_size(header.type);
  if (byte_count != expected) {
    throw Error(ErrorCode::Io,
                "'" + path + "': payload size mismatch: header implies " +
                    std::to_string(expected) + " bytes, found " +
                    std::to_string(byte_count));
  }
  ScalarVolume vol(header.dims, header.spacing);
  switch (header.type) {
    case ElementType::UInt8:
      for (std::size_t i = 0; i < voxels; ++i) {
        vol[i] = static_cast<double>(static_cast<std::uint8_t>(bytes[i]));
      }
      break;
    case ElementType::Int16:
      for (std::size_t i = 0; i < voxels; ++i) {
        std::int16_t v;
        std::memcpy(&v, bytes + 2 * i, 2);
        vol[i] = static_cast<double>(v);
      }
      break;
    case ElementType::Float32:
      for (std::size_t i = 0; i < voxels; ++i) {
        float v;
        std::memcpy(&v, bytes + 4 * i, 4);
        if (std::isnan(v)) {
          throw Error(ErrorCode::Io, "'" + path + "': NaN in payload");
        }
        vol[i] = static_cast<double>(v);
      }
      break;
  }
  return vol;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

const char* element_type_name(ElementType t) { return met_name(t); }

VolumeFile read_volume(const std::string& path) {
  fs::path header_path(path);
  if (header_path.extension() == ".raw") {
    // raw + sidecar-metadata fallback
    fs::path sidecar = header_path;
    sidecar.replace_extension(".mhd");
    if (!fs::exists(sidecar)) {
      sidecar = fs::path(path + ".mhd");
    }
    if (!fs::exists(sidecar)) {
      throw Error(ErrorCode::Io,
                  "'" + path + "': no .mhd sidecar found for raw volume");
    }
    header_path = sidecar;
  }

  const std::string content = read_file(header_path.string());
  const Header header = parse_header(content);

  VolumeFile result;
  result.element_type = header.type;
  if (header.data_file == "LOCAL") {
    result.volume = decode_payload(header, content.data() + header.payload_offset,
                                   content.size() - header.payload_offset,
                                   header_path.string());
  } else {
    const fs::path data_path = header_path.parent_path() / header.data_file;
    const std::string payload = read_file(data_path.string());
    result.volume =
        decode_payload(header, payload.data(), payload.size(), data_path.string());
  }
  return result;
}

void write_volume(const ScalarVolume& vol, const std::string& path,
                  ElementType type) {
  if (vol.empty_dims()) {
    throw Error(ErrorCode::BadArgs, "write_volume: empty volume");
  }
  const std::size_t voxels = vol.size();
  std::string payload(voxels * element_size(type), '\0');
  switch (type) {
    case ElementType::UInt8:
      for (std::size_t i = 0; i < voxels; ++i) {
        const double v = vol[i];
        if (!(v >= 0 && v <= 255) || v != std::floor(v)) {
          throw Error(ErrorCode::Domain,
                      "write_volume: value " + std::to_string(v) +
                          " not representable as MET_UCHAR");
        }
        payload[i] = static_cast<char>(static_cast<std::uint8_t>(v));
      }
      break;
    case ElementType::Int16:
      for (std::size_t i = 0; i < voxels; ++i) {
        const double v = vol[i];
        if (!(v >= -32768 && v <= 32767) || v != std::floor(v)) {
          throw Error(ErrorCode::Domain,
                      "write_volume: value " + std::to_string(v) +
                          " not representable as MET_SHORT");
        }
        const std::int16_t s = static_cast<std::int16_t>(v);
        std::memcpy(payload.data() + 2 * i, &s, 2);
      }
      break;
    case ElementType::Float32:
      for (std::size_t i = 0; i < voxels; ++i) {
        if (std::isnan(vol[i])) {
          throw Error(ErrorCode::Domain, "write_volume: NaN value");
        }
        const float f = static_cast<float>(vol[i]);
        std::memcpy(payload.data() + 4 * i, &f, 4);
      }
      break;
  }

  const fs::path out_path(path);
  const bool inline_payload = out_path.extension() != ".mhd";
  std::ostringstream header;
  header << "ObjectType = Image\n"
         << "NDims = 3\n"
         << "BinaryData = True\n"
         << "BinaryDataByteOrderMSB = False\n"
         << "CompressedData = False\n"
         << "DimSize = " << vol.dims.x << ' ' << vol.dims.y << ' ' << vol.dims.z
         << '\n'
         << "ElementSpacing = " << format_double(vol.spacing.x) << ' '
         << format_double(vol.spacing.y) << ' ' << format_double(vol.spacing.z)
         << '\n'
         << "ElementType = " << met_name(type) << '\n';

  if (inline_payload) {
    header << "ElementDataFile = LOCAL\n";
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write '" + path + "'");
    out << header.str();
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    if (!out) throw Error(ErrorCode::Io, "write failed for '" + path + "'");
  } else {
    fs::path raw_path = out_path;
    raw_path.replace_extension(".raw");
    header << "ElementDataFile = " << raw_path.filename().string() << '\n';
    std::ofstream hout(path, std::ios::binary | std::ios::trunc);
    if (!hout) throw Error(ErrorCode::Io, "cannot write '" + path + "'");
    hout << header.str();
    if (!hout) throw Error(ErrorCode::Io, "write failed for '" + path + "'");
    std::ofstream dout(raw_path, std::ios::binary | std::ios::trunc);
    if (!dout) {
      throw Error(ErrorCode::Io, "cannot write '" + raw_path.string() + "'");
    }
    dout.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    if (!dout) {
      throw Error(ErrorCode::Io, "write failed for '" + raw_path.string() + "'");
    }
  }
}

void write_mask(const BinaryMask& mask, const std::string& path) {
  write_volume(volume_from_mask(mask), path, ElementType::UInt8);
}

BinaryMask mask_from_volume(const ScalarVolume& vol) {
  BinaryMask mask(vol.dims, vol.spacing);
  for (std::size_t i = 0; i < vol.size(); ++i) {
    if (vol[i] == 0.0) mask[i] = 0;
    else if (vol[i] == 1.0) mask[i] = 1;
    else
      throw Error(ErrorCode::Domain,
                  "mask_from_volume: value " + std::to_string(vol[i]) +
                      " at index " + std::to_string(i) + " is not 0 or 1");
  }
  return mask;
}

ScalarVolume volume_from_mask(const BinaryMask& mask) {
  ScalarVolume vol(mask.dims, mask.spacing);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    vol[i] = mask[i] ? 1.0 : 0.0;
  }
  return vol;
}

}  // namespace airtree

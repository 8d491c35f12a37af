#include "aanet/tensorio.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

#include "aanet/error.hpp"
#include "aanet/vecmath.hpp"

namespace aanet {

namespace {

constexpr double kUnitNormTolerance = 1e-5;
// 1 GiB of payload; anything larger is a corrupt header at desk scale.
constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 28;

bool all_finite(std::span<const float> values) {
  return std::all_of(values.begin(), values.end(), [](float v) { return std::isfinite(v); });
}

void put_u32(std::ostream& out, std::uint32_t v) {
  const char bytes[4] = {static_cast<char>(v & 0xffU), static_cast<char>((v >> 8) & 0xffU),
                         static_cast<char>((v >> 16) & 0xffU),
                         static_cast<char>((v >> 24) & 0xffU)};
  out.write(bytes, 4);
}

std::uint32_t get_u32(const unsigned char* bytes) {
  return static_cast<std::uint32_t>(bytes[0]) | (static_cast<std::uint32_t>(bytes[1]) << 8) |
         (static_cast<std::uint32_t>(bytes[2]) << 16) |
         (static_cast<std::uint32_t>(bytes[3]) << 24);
}

std::uint32_t checked_u32(std::size_t v, const char* what) {
  if (v > std::numeric_limits<std::uint32_t>::max()) {
    throw Error(ErrorCode::kBadDimensions, std::string(what) + " does not fit in u32");
  }
  return static_cast<std::uint32_t>(v);
}

}  // namespace

FeatureMap::FeatureMap(std::size_t width, std::size_t height, std::size_t channels,
                       std::vector<float> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
  if (width_ == 0 || height_ == 0 || channels_ == 0) {
    throw Error(ErrorCode::kBadDimensions, "feature map dimensions must be positive");
  }
  if (data_.size() != width_ * height_ * channels_) {
    throw Error(ErrorCode::kLengthMismatch,
                "feature map holds " + std::to_string(data_.size()) + " values, expected " +
                    std::to_string(width_ * height_ * channels_));
  }
  if (!all_finite(data_)) {
    throw Error(ErrorCode::kNonFinite, "feature map contains NaN or Inf");
  }
}

GlobalDescriptor::GlobalDescriptor(std::vector<float> values) : values_(std::move(values)) {
  if (values_.empty()) throw Error(ErrorCode::kEmptyInput, "empty global descriptor");
  if (!all_finite(values_)) throw Error(ErrorCode::kNonFinite, "global descriptor not finite");
  if (std::abs(l2_norm(values_) - 1.0) > kUnitNormTolerance) {
    throw Error(ErrorCode::kInvalidArgument, "global descriptor is not unit norm");
  }
}

GlobalDescriptor GlobalDescriptor::normalized(std::vector<float> values) {
  normalize_l2(values);
  return GlobalDescriptor(std::move(values));
}

LocalFeatureGrid::LocalFeatureGrid(std::size_t n, std::size_t channels, std::vector<float> cells)
    : n_(n), channels_(channels), cells_(std::move(cells)) {
  if (n_ == 0 || channels_ == 0) {
    throw Error(ErrorCode::kBadDimensions, "grid dimensions must be positive");
  }
  if (cells_.size() != n_ * n_ * channels_) {
    throw Error(ErrorCode::kLengthMismatch, "grid must hold n*n*channels values");
  }
  if (!all_finite(cells_)) throw Error(ErrorCode::kNonFinite, "grid contains NaN or Inf");
  for (std::size_t k = 0; k < n_ * n_; ++k) {
    const double norm = l2_norm(std::span<const float>(cells_).subspan(k * channels_, channels_));
    if (norm != 0.0 && std::abs(norm - 1.0) > kUnitNormTolerance) {
      throw Error(ErrorCode::kInvalidArgument, "grid cell " + std::to_string(k) +
                                                   " is not unit norm");
    }
  }
}

LocalFeatureGrid LocalFeatureGrid::normalized(std::size_t n, std::size_t channels,
                                              std::vector<float> cells) {
  if (channels != 0 && cells.size() % channels == 0) {
    for (std::size_t k = 0; k < cells.size() / channels; ++k) {
      normalize_l2(std::span<float>(cells).subspan(k * channels, channels));
    }
  }
  return LocalFeatureGrid(n, channels, std::move(cells));
}

void write_feature_map(const FeatureMap& map, std::ostream& sink) {
  if (!all_finite(map.data())) {
    throw Error(ErrorCode::kNonFinite, "refusing to write non-finite values");
  }
  sink.write(kAafmMagic, 4);
  put_u32(sink, kAafmVersion);
  put_u32(sink, checked_u32(map.width(), "width"));
  put_u32(sink, checked_u32(map.height(), "height"));
  put_u32(sink, checked_u32(map.channels(), "channels"));

  const auto values = map.data();
  if constexpr (std::endian::native == std::endian::little) {
    sink.write(reinterpret_cast<const char*>(values.data()),
               static_cast<std::streamsize>(values.size_bytes()));
  } else {
    for (float v : values) put_u32(sink, std::bit_cast<std::uint32_t>(v));
  }
  if (!sink) throw Error(ErrorCode::kIo, "write failed");
}

AafmHeader read_aafm_header(std::istream& source) {
  unsigned char header[kAafmHeaderBytes];
  source.read(reinterpret_cast<char*>(header), 4);
  if (source.gcount() != 4 || std::memcmp(header, kAafmMagic, 4) != 0) {
    throw Error(ErrorCode::kBadMagic, "stream does not start with AAFM");
  }
  source.read(reinterpret_cast<char*>(header + 4), kAafmHeaderBytes - 4);
  if (static_cast<std::size_t>(source.gcount()) != kAafmHeaderBytes - 4) {
    throw Error(ErrorCode::kLengthMismatch, "truncated AAFM header");
  }
  AafmHeader h;
  h.version = get_u32(header + 4);
  if (h.version != kAafmVersion) {
    throw Error(ErrorCode::kVersionMismatch,
                "unsupported AAFM version " + std::to_string(h.version));
  }
  h.width = get_u32(header + 8);
  h.height = get_u32(header + 12);
  h.channels = get_u32(header + 16);
  if (h.width == 0 || h.height == 0 || h.channels == 0) {
    throw Error(ErrorCode::kBadDimensions, "AAFM header has a zero dimension");
  }
  const std::uint64_t count =
      std::uint64_t{h.width} * std::uint64_t{h.height} * std::uint64_t{h.channels};
  if (count > kMaxElements) {
    throw Error(ErrorCode::kBadDimensions, "AAFM header dimensions are implausibly large");
  }
  return h;
}

FeatureMap read_feature_map(std::istream& source) {
  const AafmHeader h = read_aafm_header(source);
  const std::size_t count = std::size_t{h.width} * h.height * h.channels;

  std::vector<float> values(count);
  std::vector<unsigned char> raw(count * 4);
  source.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(source.gcount()) != raw.size()) {
    throw Error(ErrorCode::kLengthMismatch, "AAFM payload shorter than W*H*C floats");
  }
  if (source.peek() != std::istream::traits_type::eof()) {
    throw Error(ErrorCode::kLengthMismatch, "trailing bytes after AAFM payload");
  }
  for (std::size_t k = 0; k < count; ++k) {
    values[k] = std::bit_cast<float>(get_u32(raw.data() + 4 * k));
    if (!std::isfinite(values[k])) {
      throw Error(ErrorCode::kNonFinite, "AAFM payload value " + std::to_string(k) +
                                             " is NaN or Inf");
    }
  }
  return FeatureMap(h.width, h.height, h.channels, std::move(values));
}

void save_feature_map(const FeatureMap& map, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  write_feature_map(map, out);
  out.flush();
  if (!out) throw Error(ErrorCode::kIo, "failed writing " + path.string());
}

FeatureMap load_feature_map(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  try {
    return read_feature_map(in);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

}  // namespace aanet

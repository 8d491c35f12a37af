#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace aanet {

/// Dense W x H x C activation grid for one image, stored row-major with h
/// outermost, then w, then c. Immutable after construction; the constructor
/// refuses zero dimensions, size mismatches and non-finite entries.
class FeatureMap {
 public:
  FeatureMap(std::size_t width, std::size_t height, std::size_t channels,
             std::vector<float> data);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t channels() const noexcept { return channels_; }

  std::span<const float> data() const noexcept { return data_; }

  /// Channel vector at column w, row h.
  std::span<const float> at(std::size_t w, std::size_t h) const noexcept {
    return std::span<const float>(data_).subspan((h * width_ + w) * channels_, channels_);
  }

  friend bool operator==(const FeatureMap&, const FeatureMap&) = default;

 private:
  std::size_t width_;
  std::size_t height_;
  std::size_t channels_;
  std::vector<float> data_;
};

/// L2-normalized global feature (GeM output).
class GlobalDescriptor {
 public:
  /// Takes ownership of already-normalized values; throws when the norm is
  /// not 1 within 1e-5.
  explicit GlobalDescriptor(std::vector<float> values);

  /// Normalizes `values` to unit L2 norm first.
  static GlobalDescriptor normalized(std::vector<float> values);

  std::size_t size() const noexcept { return values_.size(); }
  std::span<const float> values() const noexcept { return values_; }

  friend bool operator==(const GlobalDescriptor&, const GlobalDescriptor&) = default;

 private:
  std::vector<float> values_;
};

/// N x N grid of C-dim local features. Cell (i, j) has i on the horizontal
/// axis (column) and j on the vertical axis (row), both 0-based here. Cells
/// are stored column-major so that each column is one contiguous N*C slice.
///
/// Every cell has unit L2 norm, except an all-zero cell which is kept as-is
/// (it has no direction to normalize).
class LocalFeatureGrid {
 public:
  LocalFeatureGrid(std::size_t n, std::size_t channels, std::vector<float> cells);

  /// Builds a grid from raw column-major cells, L2-normalizing each cell.
  static LocalFeatureGrid normalized(std::size_t n, std::size_t channels,
                                     std::vector<float> cells);

  std::size_t n() const noexcept { return n_; }
  std::size_t channels() const noexcept { return channels_; }

  std::span<const float> cell(std::size_t i, std::size_t j) const noexcept {
    return std::span<const float>(cells_).subspan((i * n_ + j) * channels_, channels_);
  }

  /// All N cells of column i, concatenated in row order.
  std::span<const float> column(std::size_t i) const noexcept {
    return std::span<const float>(cells_).subspan(i * n_ * channels_, n_ * channels_);
  }

  std::span<const float> data() const noexcept { return cells_; }

  friend bool operator==(const LocalFeatureGrid&, const LocalFeatureGrid&) = default;

 private:
  std::size_t n_;
  std::size_t channels_;
  std::vector<float> cells_;
};

inline constexpr char kAafmMagic[4] = {'A', 'A', 'F', 'M'};
inline constexpr std::uint32_t kAafmVersion = 1;
inline constexpr std::size_t kAafmHeaderBytes = 20;

/// Serializes `map` in the AAFM format: "AAFM", u32 version, u32 W, H, C,
/// then W*H*C little-endian f32 values in h/w/c order.
void write_feature_map(const FeatureMap& map, std::ostream& sink);

/// Parses one AAFM map and requires the stream to end right after it.
/// Distinct ErrorCodes: kBadMagic, kVersionMismatch, kBadDimensions,
/// kLengthMismatch, kNonFinite, kIo.
FeatureMap read_feature_map(std::istream& source);

void save_feature_map(const FeatureMap& map, const std::filesystem::path& path);
FeatureMap load_feature_map(const std::filesystem::path& path);

struct AafmHeader {
  std::uint32_t version = 0;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint32_t channels = 0;
};

/// Reads and validates only the 20-byte header.
AafmHeader read_aafm_header(std::istream& source);

}  // namespace aanet

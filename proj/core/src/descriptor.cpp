#include "aanet/descriptor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "aanet/error.hpp"
#include "aanet/vecmath.hpp"

namespace aanet {

void validate(const GemParams& params) {
  if (!(params.p >= 1.0) || !std::isfinite(params.p)) {
    throw Error(ErrorCode::kInvalidArgument, "GeM exponent p must be >= 1");
  }
  if (!(params.epsilon > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "GeM epsilon must be > 0");
  }
}

GlobalDescriptor gem_pool(const FeatureMap& map, const GemParams& params) {
  validate(params);
  const std::size_t channels = map.channels();
  const std::size_t positions = map.width() * map.height();
  if (positions == 0 || channels == 0) throw Error(ErrorCode::kEmptyInput, "empty feature map");

  std::vector<double> acc(channels, 0.0);
  const auto data = map.data();
  const bool linear = params.p == 1.0;
  for (std::size_t pos = 0; pos < positions; ++pos) {
    const float* v = data.data() + pos * channels;
    for (std::size_t c = 0; c < channels; ++c) {
      const double x = std::max(static_cast<double>(v[c]), params.epsilon);
      acc[c] += linear ? x : std::pow(x, params.p);
    }
  }

  std::vector<float> pooled(channels);
  for (std::size_t c = 0; c < channels; ++c) {
    const double mean = acc[c] / static_cast<double>(positions);
    pooled[c] = static_cast<float>(linear ? mean : std::pow(mean, 1.0 / params.p));
  }
  return GlobalDescriptor::normalized(std::move(pooled));
}

LocalFeatureGrid downsample_grid(const FeatureMap& map) {
  if (map.width() != map.height()) {
    throw Error(ErrorCode::kBadDimensions, "local grid needs a square feature map, got " +
                                               std::to_string(map.width()) + "x" +
                                               std::to_string(map.height()));
  }
  if (map.width() % kPoolKernel != 0) {
    throw Error(ErrorCode::kBadDimensions,
                "feature map side " + std::to_string(map.width()) + " is not divisible by 3");
  }
  const std::size_t n = map.width() / kPoolKernel;
  const std::size_t channels = map.channels();

  std::vector<float> cells(n * n * channels);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      float* cell = cells.data() + (i * n + j) * channels;
      std::copy_n(map.at(kPoolKernel * i, kPoolKernel * j).data(), channels, cell);
      for (std::size_t dh = 0; dh < kPoolKernel; ++dh) {
        for (std::size_t dw = 0; dw < kPoolKernel; ++dw) {
          const auto src = map.at(kPoolKernel * i + dw, kPoolKernel * j + dh);
          for (std::size_t c = 0; c < channels; ++c) cell[c] = std::max(cell[c], src[c]);
        }
      }
    }
  }
  return LocalFeatureGrid::normalized(n, channels, std::move(cells));
}

RegionalSequence::RegionalSequence(Axis axis, std::size_t n, std::size_t element_dim,
                                   std::vector<float> data)
    : axis_(axis), n_(n), element_dim_(element_dim), data_(std::move(data)) {
  if (n_ == 0 || element_dim_ == 0) {
    throw Error(ErrorCode::kBadDimensions, "regional sequence dimensions must be positive");
  }
  if (data_.size() != n_ * element_dim_) {
    throw Error(ErrorCode::kLengthMismatch, "regional sequence must hold n*element_dim values");
  }
}

RegionalSequence split_regional(const LocalFeatureGrid& grid, Axis axis,
                                const SplitOptions& options) {
  const std::size_t n = grid.n();
  const std::size_t channels = grid.channels();
  const std::size_t dim = n * channels;
  std::vector<float> data(n * dim);
  for (std::size_t e = 0; e < n; ++e) {
    float* out = data.data() + e * dim;
    for (std::size_t k = 0; k < n; ++k) {
      const auto cell = axis == Axis::kHorizontal ? grid.cell(e, k) : grid.cell(k, e);
      std::copy(cell.begin(), cell.end(), out + k * channels);
    }
    if (options.renormalize) normalize_l2(std::span<float>(out, dim));
  }
  return RegionalSequence(axis, n, dim, std::move(data));
}

double global_distance(const GlobalDescriptor& a, const GlobalDescriptor& b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kShapeMismatch, "global descriptors differ in dimension");
  }
  return l2_distance(a.values(), b.values());
}

}  // namespace aanet

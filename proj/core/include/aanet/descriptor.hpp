#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "aanet/tensorio.hpp"

namespace aanet {

/// Generalized-mean pooling parameters. p = 1 is average pooling; activations
/// are clamped to at least `epsilon` before being raised to p.
struct GemParams {
  double p = 3.0;
  double epsilon = 1e-6;
};

void validate(const GemParams& params);

/// GeM over all W*H positions per channel, then L2-normalized.
GlobalDescriptor gem_pool(const FeatureMap& map, const GemParams& params = {});

/// Side of the non-overlapping max-pooling window used to build the grid.
inline constexpr std::size_t kPoolKernel = 3;

/// 3x3 stride-3 per-channel max pooling of a square map whose side is a
/// multiple of 3, followed by per-cell L2 normalization. Cell (i, j) covers
/// source columns 3i..3i+2 and rows 3j..3j+2.
LocalFeatureGrid downsample_grid(const FeatureMap& map);

enum class Axis { kHorizontal, kVertical };

/// N ordered regional vectors of N*C dims each. Horizontal element i is grid
/// column i (cells (i, 0..N-1)), vertical element j is grid row j (cells
/// (0..N-1, j)); elements run left to right / top to bottom.
class RegionalSequence {
 public:
  RegionalSequence(Axis axis, std::size_t n, std::size_t element_dim, std::vector<float> data);

  Axis axis() const noexcept { return axis_; }
  std::size_t size() const noexcept { return n_; }
  std::size_t element_dim() const noexcept { return element_dim_; }

  std::span<const float> element(std::size_t index) const noexcept {
    return std::span<const float>(data_).subspan(index * element_dim_, element_dim_);
  }

 private:
  Axis axis_;
  std::size_t n_;
  std::size_t element_dim_;
  std::vector<float> data_;
};

struct SplitOptions {
  /// Regional vectors are concatenations of already-normalized cells and are
  /// not normalized again unless this is set.
  bool renormalize = false;
};

RegionalSequence split_regional(const LocalFeatureGrid& grid, Axis axis,
                                const SplitOptions& options = {});

/// Euclidean distance between two global descriptors.
double global_distance(const GlobalDescriptor& a, const GlobalDescriptor& b);

}  // namespace aanet

#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace aanet {

/// Squared Euclidean distance with f64 accumulation. Eight interleaved
/// partial sums let the compiler vectorize without reassociating.
inline double squared_l2(std::span<const float> a, std::span<const float> b) noexcept {
  constexpr std::size_t kLanes = 8;
  double lanes[kLanes] = {};
  const std::size_t size = a.size();
  const std::size_t blocked = size - size % kLanes;
  const float* pa = a.data();
  const float* pb = b.data();
  for (std::size_t k = 0; k < blocked; k += kLanes) {
    for (std::size_t l = 0; l < kLanes; ++l) {
      const double diff = static_cast<double>(pa[k + l]) - static_cast<double>(pb[k + l]);
      lanes[l] += diff * diff;
    }
  }
  double acc = 0.0;
  for (std::size_t k = blocked; k < size; ++k) {
    const double diff = static_cast<double>(pa[k]) - static_cast<double>(pb[k]);
    acc += diff * diff;
  }
  for (double lane : lanes) acc += lane;
  return acc;
}

inline double l2_distance(std::span<const float> a, std::span<const float> b) noexcept {
  return std::sqrt(squared_l2(a, b));
}

inline double l2_norm(std::span<const float> a) noexcept {
  double acc = 0.0;
  for (float v : a) acc += static_cast<double>(v) * static_cast<double>(v);
  return std::sqrt(acc);
}

/// Scales `v` to unit norm in place; an all-zero vector is left untouched.
inline void normalize_l2(std::span<float> v) noexcept {
  const double norm = l2_norm(v);
  if (norm == 0.0) return;
  for (float& x : v) x = static_cast<float>(static_cast<double>(x) / norm);
}

}  // namespace aanet

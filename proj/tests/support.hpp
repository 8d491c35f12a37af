#pragma once

#include <cstddef>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "aanet/tensorio.hpp"

namespace testing_support {

inline aanet::FeatureMap random_map(std::size_t w, std::size_t h, std::size_t c,
                                    std::mt19937_64& rng, float lo = -1.0F, float hi = 1.0F) {
  std::uniform_real_distribution<float> u(lo, hi);
  std::vector<float> data(w * h * c);
  for (float& v : data) v = u(rng);
  return aanet::FeatureMap(w, h, c, std::move(data));
}

/// Grid cells as nested vectors [i][j][c] in f64, for oracles.
inline std::vector<std::vector<std::vector<double>>> to_nested(const aanet::LocalFeatureGrid& g) {
  std::vector<std::vector<std::vector<double>>> out(g.n(),
                                                    std::vector<std::vector<double>>(g.n()));
  for (std::size_t i = 0; i < g.n(); ++i) {
    for (std::size_t j = 0; j < g.n(); ++j) {
      const auto cell = g.cell(i, j);
      out[i][j].assign(cell.begin(), cell.end());
    }
  }
  return out;
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("aanet_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testing_support

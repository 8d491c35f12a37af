#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "aanet/evalkit.hpp"
#include "aanet/manifest.hpp"
#include "aanet/tensorio.hpp"

namespace aanet {

enum class SyntheticMode {
  /// Queries are shifted, noisy views of database places; the rest of the
  /// database is independent random places.
  kShift,
  /// Every place also has a decoy whose cells are a spatial permutation of
  /// the place's cells: same global descriptor, different layout.
  kAliasing,
};

struct SyntheticSpec {
  SyntheticMode mode = SyntheticMode::kShift;
  std::size_t n = 8;
  std::size_t channels = 384;
  std::size_t database_size = 50;
  std::size_t query_count = 50;
  /// Inclusive range of planted horizontal (column) shifts.
  std::size_t shift_min = 0;
  std::size_t shift_max = 0;
  /// Inclusive range of planted vertical (row) shifts.
  std::size_t vshift_min = 0;
  std::size_t vshift_max = 0;
  /// Std-dev of Gaussian noise added to every map activation.
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

void validate(const SyntheticSpec& spec);

struct SyntheticQuery {
  std::string id;
  std::string source_id;
  std::size_t shift_x = 0;
  std::size_t shift_y = 0;
};

struct SyntheticItem {
  std::string id;
  Role role = Role::kDatabase;
  Geotag geotag;
  FeatureMap map;
  /// Set for queries only.
  const SyntheticQuery* query = nullptr;
};

/// Generates the set in a fixed order (database, then queries) and hands
/// each item to `sink` without keeping the maps. Places sit 100 m apart on
/// the x axis; a query carries its source's position, a decoy sits 50 m off
/// the line so only the true source is within 25 m.
std::vector<SyntheticQuery> generate_synthetic(const SyntheticSpec& spec,
                                               const std::function<void(SyntheticItem&&)>& sink);

struct SyntheticSet {
  FeatureSetManifest manifest;
  std::vector<FeatureMap> maps;  // parallel to manifest.entries()
  std::vector<SyntheticQuery> queries;
  GroundTruth ground_truth;
};

/// In-memory variant; manifest paths are `<id>.aafm`.
SyntheticSet generate_synthetic(const SyntheticSpec& spec);

/// Writes `<id>.aafm` files plus `manifest.tsv` under `dir` and returns the
/// manifest path.
std::filesystem::path write_synthetic(const SyntheticSpec& spec, const std::filesystem::path& dir);

/// Random non-negative unit-norm cells, the same distribution the generator
/// uses for places.
LocalFeatureGrid random_grid(std::size_t n, std::size_t channels, std::mt19937_64& rng);

/// Expands a grid to a (3N x 3N x C) map where each 3x3 block repeats its
/// cell, plus N(0, sigma) noise on every activation.
FeatureMap grid_to_map(const LocalFeatureGrid& grid, double sigma, std::mt19937_64& rng);

/// Median over reference index i of (i - min X_align[i]).
double median_alignment_offset(const AxisAlignment& alignment);

}  // namespace aanet

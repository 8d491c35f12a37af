#include "aanet/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "aanet/error.hpp"
#include "aanet/vecmath.hpp"

namespace aanet {

namespace {

constexpr double kPlaceSpacingM = 100.0;
constexpr double kDecoyOffsetM = 50.0;

std::string make_id(const char* prefix, std::size_t k, const char* suffix = "") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%05zu%s", prefix, k, suffix);
  return buf;
}

void fill_random_cell(std::span<float> cell, std::mt19937_64& rng) {
  std::normal_distribution<float> normal(0.0F, 1.0F);
  for (float& v : cell) v = std::abs(normal(rng));
  normalize_l2(cell);
}

LocalFeatureGrid shifted(const LocalFeatureGrid& source, std::size_t sx, std::size_t sy,
                         std::mt19937_64& rng) {
  const std::size_t n = source.n();
  const std::size_t c = source.channels();
  std::vector<float> cells(n * n * c);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      std::span<float> out(cells.data() + (i * n + j) * c, c);
      if (i + sx < n && j + sy < n) {
        const auto src = source.cell(i + sx, j + sy);
        std::copy(src.begin(), src.end(), out.begin());
      } else {
        fill_random_cell(out, rng);
      }
    }
  }
  return LocalFeatureGrid(n, c, std::move(cells));
}

LocalFeatureGrid permuted(const LocalFeatureGrid& source, std::mt19937_64& rng) {
  const std::size_t n = source.n();
  const std::size_t c = source.channels();
  std::vector<std::size_t> order(n * n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<float> cells(n * n * c);
  const auto data = source.data();
  for (std::size_t k = 0; k < order.size(); ++k) {
    std::copy_n(data.begin() + static_cast<std::ptrdiff_t>(order[k] * c), c,
                cells.begin() + static_cast<std::ptrdiff_t>(k * c));
  }
  return LocalFeatureGrid(n, c, std::move(cells));
}

}  // namespace

void validate(const SyntheticSpec& spec) {
  if (spec.n == 0 || spec.channels == 0) {
    throw Error(ErrorCode::kInvalidArgument, "synthetic grid side and channels must be positive");
  }
  if (spec.database_size == 0) {
    throw Error(ErrorCode::kInvalidArgument, "synthetic database must be non-empty");
  }
  if (spec.shift_min > spec.shift_max || spec.vshift_min > spec.vshift_max) {
    throw Error(ErrorCode::kInvalidArgument, "shift range is inverted");
  }
  if (spec.shift_max >= spec.n || spec.vshift_max >= spec.n) {
    throw Error(ErrorCode::kInvalidArgument, "shift must be smaller than the grid side");
  }
  if (!(spec.sigma >= 0.0) || !std::isfinite(spec.sigma)) {
    throw Error(ErrorCode::kInvalidArgument, "sigma must be finite and >= 0");
  }
}

LocalFeatureGrid random_grid(std::size_t n, std::size_t channels, std::mt19937_64& rng) {
  std::vector<float> cells(n * n * channels);
  for (std::size_t k = 0; k < n * n; ++k) {
    fill_random_cell(std::span<float>(cells).subspan(k * channels, channels), rng);
  }
  return LocalFeatureGrid(n, channels, std::move(cells));
}

FeatureMap grid_to_map(const LocalFeatureGrid& grid, double sigma, std::mt19937_64& rng) {
  const std::size_t side = grid.n() * kPoolKernel;
  const std::size_t c = grid.channels();
  std::vector<float> data(side * side * c);
  std::normal_distribution<double> noise(0.0, sigma > 0.0 ? sigma : 1.0);
  for (std::size_t h = 0; h < side; ++h) {
    for (std::size_t w = 0; w < side; ++w) {
      const auto cell = grid.cell(w / kPoolKernel, h / kPoolKernel);
      float* out = data.data() + (h * side + w) * c;
      for (std::size_t k = 0; k < c; ++k) {
        out[k] = sigma > 0.0 ? static_cast<float>(cell[k] + noise(rng)) : cell[k];
      }
    }
  }
  return FeatureMap(side, side, c, std::move(data));
}

std::vector<SyntheticQuery> generate_synthetic(const SyntheticSpec& spec,
                                               const std::function<void(SyntheticItem&&)>& sink) {
  validate(spec);
  std::mt19937_64 rng(spec.seed);

  std::vector<LocalFeatureGrid> places;
  places.reserve(spec.database_size);
  for (std::size_t k = 0; k < spec.database_size; ++k) {
    places.push_back(random_grid(spec.n, spec.channels, rng));
    const double x = kPlaceSpacingM * static_cast<double>(k);
    sink({make_id("db", k), Role::kDatabase, PlanarPosition{x, 0.0},
          grid_to_map(places.back(), spec.sigma, rng)});
    if (spec.mode == SyntheticMode::kAliasing) {
      sink({make_id("db", k, "_decoy"), Role::kDatabase, PlanarPosition{x, kDecoyOffsetM},
            grid_to_map(permuted(places.back(), rng), spec.sigma, rng)});
    }
  }

  std::vector<SyntheticQuery> queries;
  queries.reserve(spec.query_count);
  std::uniform_int_distribution<std::size_t> hshift(spec.shift_min, spec.shift_max);
  std::uniform_int_distribution<std::size_t> vshift(spec.vshift_min, spec.vshift_max);
  for (std::size_t q = 0; q < spec.query_count; ++q) {
    const std::size_t source = q % spec.database_size;
    SyntheticQuery meta{make_id("q", q), make_id("db", source), hshift(rng), vshift(rng)};
    queries.push_back(meta);
    const LocalFeatureGrid grid = shifted(places[source], meta.shift_x, meta.shift_y, rng);
    sink({meta.id, Role::kQuery, PlanarPosition{kPlaceSpacingM * static_cast<double>(source), 0.0},
          grid_to_map(grid, spec.sigma, rng), &queries.back()});
  }
  return queries;
}

SyntheticSet generate_synthetic(const SyntheticSpec& spec) {
  SyntheticSet set;
  set.queries = generate_synthetic(spec, [&set](SyntheticItem&& item) {
    set.manifest.add({item.id, item.id + ".aafm", item.role, item.geotag});
    set.maps.push_back(std::move(item.map));
  });
  set.ground_truth = ground_truth_from_manifest(set.manifest);
  return set;
}

std::filesystem::path write_synthetic(const SyntheticSpec& spec, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  FeatureSetManifest manifest;
  generate_synthetic(spec, [&](SyntheticItem&& item) {
    const std::string file = item.id + ".aafm";
    save_feature_map(item.map, dir / file);
    manifest.add({item.id, file, item.role, item.geotag});
  });
  const auto path = dir / "manifest.tsv";
  save_manifest(manifest, path);
  return path;
}

double median_alignment_offset(const AxisAlignment& alignment) {
  std::vector<double> offsets;
  offsets.reserve(alignment.n());
  for (std::size_t i = 1; i <= alignment.n(); ++i) {
    offsets.push_back(static_cast<double>(i) - static_cast<double>(alignment[i].front()));
  }
  std::sort(offsets.begin(), offsets.end());
  const std::size_t mid = offsets.size() / 2;
  return offsets.size() % 2 == 1 ? offsets[mid] : 0.5 * (offsets[mid - 1] + offsets[mid]);
}

}  // namespace aanet

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "aanet/alignment.hpp"
#include "aanet/descriptor.hpp"
#include "aanet/manifest.hpp"
#include "aanet/retrieval.hpp"

namespace aanet {

/// A rank cutoff given either as an absolute count or as a fraction of the
/// number of potential positives.
class Cutoff {
 public:
  static Cutoff count(std::size_t value);
  static Cutoff fraction(double value);

  /// Parses "3", "0.3" or "30%". Integers are counts, anything else a fraction.
  static Cutoff parse(std::string_view text);

  /// Fractions resolve to ceil(fraction * total); the result is at least 1.
  std::size_t resolve(std::size_t total) const;

  bool is_fraction() const noexcept { return is_fraction_; }
  double value() const noexcept { return value_; }

 private:
  Cutoff(double value, bool is_fraction) : value_(value), is_fraction_(is_fraction) {}

  double value_;
  bool is_fraction_;
};

struct MiningConfig {
  Cutoff k = Cutoff::fraction(0.3);
  Cutoff k_prime = Cutoff::fraction(0.3);
  double margin = 0.1;
  double lambda = 1.0;
  std::size_t negatives_per_triplet = 2;
  std::size_t negative_pool = 1000;
  double positive_radius_m = 10.0;
  double negative_radius_m = 25.0;
  std::int64_t positive_frames = 2;
  std::uint64_t seed = 0;
};

void validate(const MiningConfig& cfg);

struct TrainingTuple {
  std::string query;
  std::vector<std::string> positives;
  std::vector<std::string> negatives;
};

/// Potential positives lie within positive_radius_m (or positive_frames) of
/// the query; definite negatives lie beyond negative_radius_m (or beyond
/// positive_frames). Entries without a comparable geotag are ignored.
std::vector<TrainingTuple> build_training_tuples(const FeatureSetManifest& manifest,
                                                 const MiningConfig& cfg);

struct RankPair {
  std::string id;
  std::size_t g_rank = 0;
  std::size_t l_rank = 0;
  friend bool operator==(const RankPair&, const RankPair&) = default;
};

struct NamedImage {
  std::string id;
  PreparedImage image;
};

/// Ranks positives by global and by local distance to the query (1-based,
/// ascending distance, ties by id).
std::vector<RankPair> rank_positives(const PreparedImage& query,
                                     std::span<const NamedImage> positives,
                                     const DalfOptions& dalf = {});

/// Same ranking from precomputed distances.
std::vector<RankPair> rank_from_distances(std::span<const std::string> ids,
                                          std::span<const double> global_distances,
                                          std::span<const double> local_distances);

/// Among pairs with g_rank <= k or l_rank <= k', the one with the largest
/// |g_rank - l_rank|; ties go to the smaller g_rank, then the smaller id.
std::string select_semi_hard_positive(std::span<const RankPair> pairs, const MiningConfig& cfg);

/// Uniform sample (without replacement) of up to `pool_size` ids, in the
/// order they appear in `negatives`.
std::vector<std::string> sample_negative_pool(std::span<const std::string> negatives,
                                              std::size_t pool_size, std::mt19937_64& rng);

/// The `count` pool members closest to the query in global distance.
std::vector<std::string> select_hard_negatives(const GlobalDescriptor& query,
                                               std::span<const NamedImage> pool,
                                               std::size_t count);

/// sum_j max(0, positive + margin - negatives[j])
double hinge_triplet_loss(double positive, std::span<const double> negatives, double margin);

double triplet_loss_global(const GlobalDescriptor& query, const GlobalDescriptor& positive,
                           std::span<const GlobalDescriptor> negatives, double margin);

/// Local distances use the sample as reference and the query as query grid.
double triplet_loss_local(const LocalFeatureGrid& query, const LocalFeatureGrid& positive,
                          std::span<const LocalFeatureGrid> negatives, double margin,
                          const DalfOptions& dalf = {});

double joint_loss(double global_loss, double local_loss, double lambda);

struct MiningRecord {
  std::string query;
  std::string positive;
  std::size_t g_rank = 0;
  std::size_t l_rank = 0;
  std::vector<std::string> negatives;
  double global_loss = 0.0;
  double local_loss = 0.0;
  double loss = 0.0;
};

/// Full mining pass over every usable query tuple in the manifest.
std::vector<MiningRecord> mine(const FeatureSetManifest& manifest, const MiningConfig& cfg,
                               const GemParams& gem = {}, const DalfOptions& dalf = {});

/// One line per record: query, positive, g_rank, l_rank, then negative ids,
/// tab separated.
void write_mining_report(std::span<const MiningRecord> records, std::ostream& out);

}  // namespace aanet

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "aanet/manifest.hpp"
#include "aanet/retrieval.hpp"

namespace aanet {

/// Query id -> ids of database images that count as correct matches.
using GroundTruth = std::map<std::string, std::set<std::string>>;

struct GroundTruthThresholds {
  double radius_m = 25.0;
  std::int64_t frames = 2;
};

/// Database entries within the threshold of each query's geotag. Queries
/// without a geotag get an empty set.
GroundTruth ground_truth_from_manifest(const FeatureSetManifest& manifest,
                                       const GroundTruthThresholds& thresholds = {});

struct RecallPoint {
  std::size_t n = 0;
  double percent = 0.0;
};

/// Percentage of queries with at least one true positive among the first N
/// ids of their final ranking. Queries whose ground-truth set is empty (or
/// missing) are left out of the denominator.
std::vector<RecallPoint> recall_at_n(std::span<const RetrievalRecord> records,
                                     const GroundTruth& gt, std::span<const std::size_t> ns);

struct PrPoint {
  double threshold = 0.0;
  double precision = 1.0;
  double recall = 0.0;
};

/// Distance of the final top-1 result (stage 2 when present, else stage 1).
double top1_distance(const RetrievalRecord& record);

/// Accepts a query when its top-1 distance is <= threshold. Precision is
/// correct/accepted (1.0 when nothing is accepted); recall is
/// correct/eligible, where eligible queries have a non-empty ground truth.
std::vector<PrPoint> pr_curve(std::span<const RetrievalRecord> records, const GroundTruth& gt,
                              std::span<const double> thresholds);

/// Sorted distinct top-1 distances of the eligible queries.
std::vector<double> default_thresholds(std::span<const RetrievalRecord> records,
                                       const GroundTruth& gt);

void write_recall_csv(std::span<const RecallPoint> points, std::ostream& out);
void write_pr_csv(std::span<const PrPoint> points, std::ostream& out);

/// `query_id,stage,rank,id,distance` rows, stage 1 and 2 for every record.
void write_records_csv(std::span<const RetrievalRecord> records, std::ostream& out);
std::vector<RetrievalRecord> read_records_csv(std::istream& in);

struct BenchConfig {
  std::size_t pairs = 1000;
  std::size_t n = 8;
  std::size_t channels = 384;
  std::size_t repetitions = 5;
  std::uint64_t seed = 0;
};

struct BenchResult {
  double dalf_ns_per_pair = 0.0;
  double naive_ns_per_pair = 0.0;
  double ratio = 0.0;
  std::size_t dalf_passes = 0;
  std::size_t naive_passes = 0;
};

/// Times dalf_distance and naive_grid_align over the same random grid pairs
/// on the calling thread. One untimed warm-up sweep, then the median of
/// `repetitions` timed sweeps per method. Pass counts are per pair.
BenchResult bench_alignment(const BenchConfig& cfg);

/// Median wall-clock nanoseconds to re-rank `k_rerank` candidates for one
/// query (N x N x C random grids).
double bench_rerank_latency(std::size_t k_rerank, const BenchConfig& cfg);

}  // namespace aanet

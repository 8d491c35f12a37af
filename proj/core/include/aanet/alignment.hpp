#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "aanet/descriptor.hpp"
#include "aanet/tensorio.hpp"

// All index-bearing types in this header (matrix accessors, path points,
// axis alignments) use 1-based indices, i for the reference sequence and j
// for the query sequence.

namespace aanet {

/// Square matrix of pairwise regional distances, d(i, j) = ||r_i - q_j||.
class DistanceMatrix {
 public:
  DistanceMatrix(std::size_t n, std::vector<double> values);

  std::size_t n() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const noexcept {
    return values_[(i - 1) * n_ + (j - 1)];
  }
  const std::vector<double>& values() const noexcept { return values_; }

 private:
  std::size_t n_;
  std::vector<double> values_;
};

struct PathPoint {
  std::size_t i = 1;
  std::size_t j = 1;
  friend bool operator==(const PathPoint&, const PathPoint&) = default;
};

/// Monotone, continuous path from (1, 1) to (N, N).
struct WarpingPath {
  std::vector<PathPoint> points;
  friend bool operator==(const WarpingPath&, const WarpingPath&) = default;
};

/// True when `path` satisfies boundary, continuity and monotonicity for an
/// N x N matrix and N <= K <= 2N - 1.
bool is_legal_path(const WarpingPath& path, std::size_t n);

/// Predecessor chosen when entering a cell. kUp is (i-1, j), kLeft is (i, j-1).
enum class Step : std::uint8_t { kNone, kDiagonal, kUp, kLeft };

/// Forward-pass state of a DTW run: cumulative cost s, length of the chosen
/// path into each cell, and the predecessor tag used to backtrack.
class CumulativeMatrix {
 public:
  explicit CumulativeMatrix(std::size_t n);

  std::size_t n() const noexcept { return n_; }

  double s(std::size_t i, std::size_t j) const noexcept { return s_[index(i, j)]; }
  std::uint32_t len(std::size_t i, std::size_t j) const noexcept { return len_[index(i, j)]; }
  Step pred(std::size_t i, std::size_t j) const noexcept { return pred_[index(i, j)]; }

  void set(std::size_t i, std::size_t j, double s, std::uint32_t len, Step pred) noexcept {
    const auto k = index(i, j);
    s_[k] = s;
    len_[k] = len;
    pred_[k] = pred;
  }

  /// Walks predecessor tags back from (N, N).
  WarpingPath backtrack() const;

 private:
  std::size_t index(std::size_t i, std::size_t j) const noexcept {
    return (i - 1) * n_ + (j - 1);
  }

  std::size_t n_;
  std::vector<double> s_;
  std::vector<std::uint32_t> len_;
  std::vector<Step> pred_;
};

DistanceMatrix build_distance_matrix(const RegionalSequence& r, const RegionalSequence& q);

struct DtwResult {
  WarpingPath path;
  double total = 0.0;
};

/// Classic DTW: predecessor with the smallest cumulative cost. Ties prefer
/// diagonal, then left, then up.
CumulativeMatrix dtw_forward(const DistanceMatrix& d);
DtwResult dtw_align(const DistanceMatrix& d);

struct NormalizedDtwResult {
  WarpingPath path;
  CumulativeMatrix cumulative;
};

/// DTW whose predecessor choice minimizes s / len (cumulative cost divided
/// by the number of points on the path so far) while s still accumulates raw
/// distances. Same tie-break as dtw_align.
CumulativeMatrix normalized_dtw_forward(const DistanceMatrix& d);
NormalizedDtwResult normalized_dtw_align(const DistanceMatrix& d);

/// For each reference index i, the sorted query indices aligned to it.
class AxisAlignment {
 public:
  explicit AxisAlignment(std::vector<std::vector<std::size_t>> sets);

  std::size_t n() const noexcept { return sets_.size(); }
  const std::vector<std::size_t>& operator[](std::size_t i) const noexcept {
    return sets_[i - 1];
  }
  bool is_identity() const noexcept;

  friend bool operator==(const AxisAlignment&, const AxisAlignment&) = default;

 private:
  std::vector<std::vector<std::size_t>> sets_;
};

AxisAlignment extract_axis_alignment(const WarpingPath& path, std::size_t n);

/// Reference cell (i, j) paired with query cell (qi, qj).
struct CellPair {
  std::size_t i, j, qi, qj;
  friend bool operator==(const CellPair&, const CellPair&) = default;
};

/// Every (i, j) -> (i', j') with i' in x[i] and j' in y[j], in i, j, i', j'
/// order.
std::vector<CellPair> aligned_cell_pairs(const AxisAlignment& x, const AxisAlignment& y);

struct AlignmentResult {
  AxisAlignment x;
  AxisAlignment y;
  double local_distance = 0.0;
  std::size_t pair_count = 0;
};

struct DalfOptions {
  SplitOptions split;
};

/// Aligns columns and rows with one normalized-DTW pass each, pairs r(i, j)
/// with every q(i', j') for i' in x[i], j' in y[j], and averages the L2
/// distances over those pairs.
AlignmentResult dalf_distance(const LocalFeatureGrid& r, const LocalFeatureGrid& q,
                              const DalfOptions& options = {});

struct NaiveAlignment {
  double distance = 0.0;
  std::size_t dtw_pass_count = 0;
};

/// Baseline: one vertical normalized-DTW per (reference column, query column)
/// pair over their cells, giving an N x N regional matrix of mean per-step
/// costs, then one horizontal pass over that matrix. N*N + 1 passes in total.
NaiveAlignment naive_grid_align(const LocalFeatureGrid& r, const LocalFeatureGrid& q);

/// Counts DTW passes executed on the current thread while alive. Counters
/// nest; only the innermost live counter is incremented.
class DtwPassCounter {
 public:
  DtwPassCounter();
  ~DtwPassCounter();
  DtwPassCounter(const DtwPassCounter&) = delete;
  DtwPassCounter& operator=(const DtwPassCounter&) = delete;

  std::size_t vanilla() const noexcept { return vanilla_; }
  std::size_t normalized() const noexcept { return normalized_; }

 private:
  friend void note_dtw_pass(bool normalized) noexcept;

  DtwPassCounter* previous_;
  std::size_t vanilla_ = 0;
  std::size_t normalized_ = 0;
};

void note_dtw_pass(bool normalized) noexcept;

/// Everything computed for one axis, kept for debug dumps.
struct AxisTrace {
  Axis axis = Axis::kHorizontal;
  DistanceMatrix distances;
  CumulativeMatrix cumulative;
  WarpingPath path;
};

struct AlignmentTrace {
  AxisTrace horizontal;
  AxisTrace vertical;
  AlignmentResult result;
};

AlignmentTrace dalf_trace(const LocalFeatureGrid& r, const LocalFeatureGrid& q,
                          const DalfOptions& options = {});

/// Plain-text dump of D, S, len, pred and the path for both axes.
void write_alignment_dump(const AlignmentTrace& trace, std::ostream& out);

}  // namespace aanet

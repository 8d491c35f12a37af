#pragma once

// Test-only reference implementations. They deliberately avoid the library's
// code paths (no vecmath, no alignment internals) so they can check them.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <utility>
#include <vector>

namespace oracle {

using Matrix = std::vector<std::vector<double>>;  // 0-based [i][j]

inline double euclid(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

/// Minimum total over every monotone continuous path (1,1) -> (N,N),
/// enumerated by depth-first search.
inline double brute_force_min_path(const Matrix& d) {
  const std::size_t n = d.size();
  double best = std::numeric_limits<double>::infinity();
  std::function<void(std::size_t, std::size_t, double)> walk = [&](std::size_t i, std::size_t j,
                                                                    double acc) {
    acc += d[i][j];
    if (i == n - 1 && j == n - 1) {
      best = std::min(best, acc);
      return;
    }
    if (i + 1 < n) walk(i + 1, j, acc);
    if (j + 1 < n) walk(i, j + 1, acc);
    if (i + 1 < n && j + 1 < n) walk(i + 1, j + 1, acc);
  };
  walk(0, 0, 0.0);
  return best;
}

/// Number of legal paths for an N x N grid (Delannoy number D(N-1, N-1)).
inline std::uint64_t count_paths(std::size_t n) {
  std::vector<std::vector<std::uint64_t>> c(n, std::vector<std::uint64_t>(n, 0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == 0 || j == 0) {
        c[i][j] = 1;
      } else {
        c[i][j] = c[i - 1][j] + c[i][j - 1] + c[i - 1][j - 1];
      }
    }
  }
  return c[n - 1][n - 1];
}

// 'D' diagonal, 'U' (i-1, j), 'L' (i, j-1), '-' start.
struct NormCell {
  double s = 0.0;
  std::uint32_t len = 0;
  char pred = '-';
};

/// Direct top-down recursion of the normalized recurrence with memoization:
/// s(i,j) = d(i,j) + s(p) where p minimizes s(p)/len(p) over the three
/// predecessors (diagonal first, then left, then up on exact ties); first
/// row and column accumulate along the boundary.
class NormalizedDtwRecursion {
 public:
  explicit NormalizedDtwRecursion(const Matrix& d) : d_(d) {}

  const NormCell& cell(std::size_t i, std::size_t j) {
    const auto key = std::make_pair(i, j);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    NormCell out;
    if (i == 0 && j == 0) {
      out = {d_[0][0], 1, '-'};
    } else if (i == 0) {
      const NormCell prev = cell(0, j - 1);
      out = {d_[0][j] + prev.s, prev.len + 1, 'L'};
    } else if (j == 0) {
      const NormCell prev = cell(i - 1, 0);
      out = {d_[i][0] + prev.s, prev.len + 1, 'U'};
    } else {
      const NormCell diag = cell(i - 1, j - 1);
      const NormCell left = cell(i, j - 1);
      const NormCell up = cell(i - 1, j);
      const double vd = diag.s / diag.len, vl = left.s / left.len, vu = up.s / up.len;
      NormCell chosen = diag;
      char tag = 'D';
      double best = vd;
      if (vl < best) {
        chosen = left;
        tag = 'L';
        best = vl;
      }
      if (vu < best) {
        chosen = up;
        tag = 'U';
      }
      out = {d_[i][j] + chosen.s, chosen.len + 1, tag};
    }
    return memo_.emplace(key, out).first->second;
  }

 private:
  const Matrix& d_;
  std::map<std::pair<std::size_t, std::size_t>, NormCell> memo_;
};

inline Matrix random_matrix(std::size_t n, std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(0.0, scale);
  Matrix m(n, std::vector<double>(n));
  for (auto& row : m) {
    for (auto& v : row) v = u(rng);
  }
  return m;
}

/// Local distance by enumeration: average distance over every (r(i,j), q(i',j'))
/// with i' in x[i], j' in y[j]. cells are [i][j] -> vector, sets 1-based.
struct LocalDistance {
  double mean = 0.0;
  std::size_t pairs = 0;
};

inline LocalDistance enumerate_local_distance(
    const std::vector<std::vector<std::vector<double>>>& r,
    const std::vector<std::vector<std::vector<double>>>& q,
    const std::vector<std::vector<std::size_t>>& x, const std::vector<std::vector<std::size_t>>& y) {
  double sum = 0.0;
  std::size_t pairs = 0;
  const std::size_t n = r.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t xi : x[i]) {
        for (std::size_t yj : y[j]) {
          sum += euclid(r[i][j], q[xi - 1][yj - 1]);
          ++pairs;
        }
      }
    }
  }
  return {sum / static_cast<double>(pairs), pairs};
}

}  // namespace oracle

#include "aanet/alignment.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <string>

#include "aanet/error.hpp"
#include "aanet/textio.hpp"
#include "aanet/vecmath.hpp"

namespace aanet {

namespace {

thread_local DtwPassCounter* active_counter = nullptr;

void require_same_shape(const LocalFeatureGrid& r, const LocalFeatureGrid& q) {
  if (r.n() != q.n() || r.channels() != q.channels()) {
    throw Error(ErrorCode::kShapeMismatch, "grids differ in side or channel count");
  }
}

enum class Selection { kCumulative, kNormalized };

template <Selection kSelection>
CumulativeMatrix forward_pass(const DistanceMatrix& d) {
  const std::size_t n = d.n();
  CumulativeMatrix m(n);
  m.set(1, 1, d(1, 1), 1, Step::kNone);
  for (std::size_t j = 2; j <= n; ++j) {
    m.set(1, j, d(1, j) + m.s(1, j - 1), m.len(1, j - 1) + 1, Step::kLeft);
  }
  for (std::size_t i = 2; i <= n; ++i) {
    m.set(i, 1, d(i, 1) + m.s(i - 1, 1), m.len(i - 1, 1) + 1, Step::kUp);
  }

  const auto score = [&m](std::size_t i, std::size_t j) {
    if constexpr (kSelection == Selection::kNormalized) {
      return m.s(i, j) / static_cast<double>(m.len(i, j));
    } else {
      return m.s(i, j);
    }
  };

  for (std::size_t i = 2; i <= n; ++i) {
    for (std::size_t j = 2; j <= n; ++j) {
      // Candidates in tie-break order; a later one must be strictly better.
      std::size_t pi = i - 1, pj = j - 1;
      Step step = Step::kDiagonal;
      double best = score(i - 1, j - 1);
      if (const double left = score(i, j - 1); left < best) {
        best = left;
        pi = i;
        pj = j - 1;
        step = Step::kLeft;
      }
      if (const double up = score(i - 1, j); up < best) {
        pi = i - 1;
        pj = j;
        step = Step::kUp;
      }
      m.set(i, j, d(i, j) + m.s(pi, pj), m.len(pi, pj) + 1, step);
    }
  }
  return m;
}

}  // namespace

DistanceMatrix::DistanceMatrix(std::size_t n, std::vector<double> values)
    : n_(n), values_(std::move(values)) {
  if (n_ == 0) throw Error(ErrorCode::kBadDimensions, "distance matrix must be non-empty");
  if (values_.size() != n_ * n_) {
    throw Error(ErrorCode::kLengthMismatch, "distance matrix must hold n*n values");
  }
  for (double v : values_) {
    if (!std::isfinite(v) || v < 0.0) {
      throw Error(ErrorCode::kInvalidArgument, "distances must be finite and non-negative");
    }
  }
}

bool is_legal_path(const WarpingPath& path, std::size_t n) {
  const auto& p = path.points;
  if (n == 0 || p.size() < n || p.size() > 2 * n - 1) return false;
  if (p.front() != PathPoint{1, 1} || p.back() != PathPoint{n, n}) return false;
  for (std::size_t k = 1; k < p.size(); ++k) {
    if (p[k].i < p[k - 1].i || p[k].j < p[k - 1].j) return false;
    const std::size_t di = p[k].i - p[k - 1].i;
    const std::size_t dj = p[k].j - p[k - 1].j;
    if (di > 1 || dj > 1 || (di == 0 && dj == 0)) return false;
  }
  return true;
}

CumulativeMatrix::CumulativeMatrix(std::size_t n)
    : n_(n), s_(n * n, 0.0), len_(n * n, 0), pred_(n * n, Step::kNone) {}

WarpingPath CumulativeMatrix::backtrack() const {
  WarpingPath path;
  path.points.reserve(2 * n_);
  std::size_t i = n_, j = n_;
  while (true) {
    path.points.push_back({i, j});
    const Step step = pred(i, j);
    if (step == Step::kNone) break;
    if (step != Step::kLeft) --i;
    if (step != Step::kUp) --j;
  }
  std::reverse(path.points.begin(), path.points.end());
  return path;
}

DistanceMatrix build_distance_matrix(const RegionalSequence& r, const RegionalSequence& q) {
  if (r.axis() != q.axis()) {
    throw Error(ErrorCode::kShapeMismatch, "regional sequences are split along different axes");
  }
  if (r.size() != q.size() || r.element_dim() != q.element_dim()) {
    throw Error(ErrorCode::kShapeMismatch, "regional sequences differ in length or dimension");
  }
  const std::size_t n = r.size();
  std::vector<double> values(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      values[i * n + j] = l2_distance(r.element(i), q.element(j));
    }
  }
  return DistanceMatrix(n, std::move(values));
}

CumulativeMatrix dtw_forward(const DistanceMatrix& d) {
  note_dtw_pass(false);
  return forward_pass<Selection::kCumulative>(d);
}

DtwResult dtw_align(const DistanceMatrix& d) {
  const CumulativeMatrix m = dtw_forward(d);
  return {m.backtrack(), m.s(d.n(), d.n())};
}

CumulativeMatrix normalized_dtw_forward(const DistanceMatrix& d) {
  note_dtw_pass(true);
  return forward_pass<Selection::kNormalized>(d);
}

NormalizedDtwResult normalized_dtw_align(const DistanceMatrix& d) {
  CumulativeMatrix m = normalized_dtw_forward(d);
  WarpingPath path = m.backtrack();
  return {std::move(path), std::move(m)};
}

AxisAlignment::AxisAlignment(std::vector<std::vector<std::size_t>> sets)
    : sets_(std::move(sets)) {}

bool AxisAlignment::is_identity() const noexcept {
  for (std::size_t i = 0; i < sets_.size(); ++i) {
    if (sets_[i].size() != 1 || sets_[i][0] != i + 1) return false;
  }
  return true;
}

AxisAlignment extract_axis_alignment(const WarpingPath& path, std::size_t n) {
  if (!is_legal_path(path, n)) {
    throw Error(ErrorCode::kInvalidArgument, "warping path is not legal for n=" +
                                                 std::to_string(n));
  }
  std::vector<std::vector<std::size_t>> sets(n);
  // Points are monotone, so each set comes out sorted.
  for (const auto& p : path.points) sets[p.i - 1].push_back(p.j);
  return AxisAlignment(std::move(sets));
}

std::vector<CellPair> aligned_cell_pairs(const AxisAlignment& x, const AxisAlignment& y) {
  std::vector<CellPair> pairs;
  for (std::size_t i = 1; i <= x.n(); ++i) {
    for (std::size_t j = 1; j <= y.n(); ++j) {
      for (std::size_t qi : x[i]) {
        for (std::size_t qj : y[j]) pairs.push_back({i, j, qi, qj});
      }
    }
  }
  return pairs;
}

namespace {

AlignmentResult compose(const LocalFeatureGrid& r, const LocalFeatureGrid& q, AxisAlignment x,
                        AxisAlignment y) {
  const auto pairs = aligned_cell_pairs(x, y);
  double sum = 0.0;
  for (const auto& p : pairs) {
    sum += l2_distance(r.cell(p.i - 1, p.j - 1), q.cell(p.qi - 1, p.qj - 1));
  }
  return {std::move(x), std::move(y), sum / static_cast<double>(pairs.size()), pairs.size()};
}

AxisTrace trace_axis(const LocalFeatureGrid& r, const LocalFeatureGrid& q, Axis axis,
                     const SplitOptions& split) {
  DistanceMatrix d =
      build_distance_matrix(split_regional(r, axis, split), split_regional(q, axis, split));
  auto [path, cumulative] = normalized_dtw_align(d);
  return {axis, std::move(d), std::move(cumulative), std::move(path)};
}

}  // namespace

AlignmentResult dalf_distance(const LocalFeatureGrid& r, const LocalFeatureGrid& q,
                              const DalfOptions& options) {
  require_same_shape(r, q);
  const std::size_t n = r.n();
  const auto align_axis = [&](Axis axis) {
    const DistanceMatrix d = build_distance_matrix(split_regional(r, axis, options.split),
                                                   split_regional(q, axis, options.split));
    return extract_axis_alignment(normalized_dtw_align(d).path, n);
  };
  AxisAlignment x = align_axis(Axis::kHorizontal);
  AxisAlignment y = align_axis(Axis::kVertical);
  return compose(r, q, std::move(x), std::move(y));
}

AlignmentTrace dalf_trace(const LocalFeatureGrid& r, const LocalFeatureGrid& q,
                          const DalfOptions& options) {
  require_same_shape(r, q);
  AxisTrace h = trace_axis(r, q, Axis::kHorizontal, options.split);
  AxisTrace v = trace_axis(r, q, Axis::kVertical, options.split);
  AlignmentResult result = compose(r, q, extract_axis_alignment(h.path, r.n()),
                                   extract_axis_alignment(v.path, r.n()));
  return {std::move(h), std::move(v), std::move(result)};
}

NaiveAlignment naive_grid_align(const LocalFeatureGrid& r, const LocalFeatureGrid& q) {
  require_same_shape(r, q);
  const std::size_t n = r.n();
  const auto mean_step_cost = [n](const CumulativeMatrix& m) {
    return m.s(n, n) / static_cast<double>(m.len(n, n));
  };

  NaiveAlignment out;
  std::vector<double> regional(n * n);
  std::vector<double> cells(n * n);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = 0; k < n; ++k) {
          cells[j * n + k] = l2_distance(r.cell(a, j), q.cell(b, k));
        }
      }
      regional[a * n + b] = mean_step_cost(normalized_dtw_forward(DistanceMatrix(n, cells)));
      ++out.dtw_pass_count;
    }
  }
  out.distance = mean_step_cost(normalized_dtw_forward(DistanceMatrix(n, std::move(regional))));
  ++out.dtw_pass_count;
  return out;
}

DtwPassCounter::DtwPassCounter() : previous_(active_counter) { active_counter = this; }

DtwPassCounter::~DtwPassCounter() { active_counter = previous_; }

void note_dtw_pass(bool normalized) noexcept {
  if (active_counter == nullptr) return;
  if (normalized) {
    ++active_counter->normalized_;
  } else {
    ++active_counter->vanilla_;
  }
}

namespace {

char step_tag(Step s) {
  switch (s) {
    case Step::kDiagonal: return 'D';
    case Step::kUp: return 'U';
    case Step::kLeft: return 'L';
    case Step::kNone: break;
  }
  return '-';
}

template <typename Cell>
void dump_matrix(std::ostream& out, const char* name, std::size_t n, Cell cell) {
  out << name << '\n';
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= n; ++j) {
      if (j > 1) out << ' ';
      out << cell(i, j);
    }
    out << '\n';
  }
}

void dump_axis(const AxisTrace& t, std::ostream& out) {
  const std::size_t n = t.distances.n();
  out << "axis " << (t.axis == Axis::kHorizontal ? "horizontal" : "vertical") << '\n';
  dump_matrix(out, "D", n, [&](auto i, auto j) { return format_number(t.distances(i, j)); });
  dump_matrix(out, "S", n, [&](auto i, auto j) { return format_number(t.cumulative.s(i, j)); });
  dump_matrix(out, "len", n, [&](auto i, auto j) { return t.cumulative.len(i, j); });
  dump_matrix(out, "pred", n, [&](auto i, auto j) { return step_tag(t.cumulative.pred(i, j)); });
  out << "path";
  for (const auto& p : t.path.points) out << " (" << p.i << ',' << p.j << ')';
  out << '\n';
}

void dump_alignment(const char* name, const AxisAlignment& a, std::ostream& out) {
  for (std::size_t i = 1; i <= a.n(); ++i) {
    out << name << '[' << i << "]={";
    for (std::size_t k = 0; k < a[i].size(); ++k) out << (k ? "," : "") << a[i][k];
    out << "}\n";
  }
}

}  // namespace

void write_alignment_dump(const AlignmentTrace& trace, std::ostream& out) {
  dump_axis(trace.horizontal, out);
  dump_axis(trace.vertical, out);
  dump_alignment("X_align", trace.result.x, out);
  dump_alignment("Y_align", trace.result.y, out);
  out << "pairs " << trace.result.pair_count << '\n';
  out << "local_distance " << format_number(trace.result.local_distance) << '\n';
}

}  // namespace aanet

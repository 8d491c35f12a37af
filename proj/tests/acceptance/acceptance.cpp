// Acceptance gate. Each criterion prints one PASS/FAIL line; `--only NAME`
// runs a single criterion and `--list` prints the names.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <algorithm>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "aanet/alignment.hpp"
#include "aanet/evalkit.hpp"
#include "aanet/mining.hpp"
#include "aanet/retrieval.hpp"
#include "aanet/synthetic.hpp"
#include "aanet/tensorio.hpp"
#include "oracles/oracles.hpp"
#include "support.hpp"

using namespace aanet;

namespace {

// Pinned tolerances and budgets.
constexpr double kExactTol = 1e-9;
constexpr double kOracleBudgetS = 10.0;
constexpr double kEfficiencyBudgetS = 60.0;
constexpr double kShiftRecoveryMin = 0.90;
constexpr double kStage1Max = 0.60;
constexpr double kCorrectionMinPoints = 20.0;
constexpr double kEfficiencyRatioMin = 10.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  const char* name;
  std::function<Outcome()> run;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

DistanceMatrix to_distance_matrix(const oracle::Matrix& m) {
  std::vector<double> flat;
  for (const auto& row : m) flat.insert(flat.end(), row.begin(), row.end());
  return DistanceMatrix(m.size(), flat);
}

char tag_of(Step s) {
  switch (s) {
    case Step::kDiagonal: return 'D';
    case Step::kUp: return 'U';
    case Step::kLeft: return 'L';
    case Step::kNone: break;
  }
  return '-';
}

// Independent of is_legal_path: checks each property directly.
bool path_is_legal(const WarpingPath& p, std::size_t n) {
  const auto& pts = p.points;
  if (pts.size() < n || pts.size() > 2 * n - 1) return false;
  if (pts.front() != PathPoint{1, 1} || pts.back() != PathPoint{n, n}) return false;
  for (std::size_t k = 1; k < pts.size(); ++k) {
    const long di = long(pts[k].i) - long(pts[k - 1].i);
    const long dj = long(pts[k].j) - long(pts[k - 1].j);
    if (di < 0 || dj < 0 || di > 1 || dj > 1 || di + dj == 0) return false;
  }
  return true;
}

Outcome dtw_bruteforce() {
  std::mt19937_64 rng(101);
  Stopwatch clock;
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 2 + t % 5;
    const auto m = oracle::random_matrix(n, rng);
    const double got = dtw_align(to_distance_matrix(m)).total;
    worst = std::max(worst, std::abs(got - oracle::brute_force_min_path(m)));
  }
  const double s = clock.seconds();
  return {worst <= kExactTol && s < kOracleBudgetS,
          fmt("1000 matrices N=2..6, max |err| %.3g (tol %.0e), %.2f s", worst, kExactTol, s)};
}

Outcome normalized_dtw_recursion() {
  std::mt19937_64 rng(102);
  Stopwatch clock;
  std::size_t mismatched_cells = 0, cells = 0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 2 + t % 7;
    const auto m = oracle::random_matrix(n, rng);
    const auto fwd = normalized_dtw_forward(to_distance_matrix(m));
    oracle::NormalizedDtwRecursion rec(m);
    for (std::size_t i = 1; i <= n; ++i) {
      for (std::size_t j = 1; j <= n; ++j) {
        const auto& want = rec.cell(i - 1, j - 1);
        ++cells;
        if (std::abs(fwd.s(i, j) - want.s) > kExactTol || fwd.len(i, j) != want.len ||
            tag_of(fwd.pred(i, j)) != want.pred) {
          ++mismatched_cells;
        }
      }
    }
  }
  const double s = clock.seconds();
  return {mismatched_cells == 0 && s < kOracleBudgetS,
          fmt("1000 matrices N=2..8, %zu/%zu cells differ in (s, len, pred), %.2f s",
              mismatched_cells, cells, s)};
}

Outcome path_legality() {
  std::mt19937_64 rng(103);
  std::size_t bad = 0;
  for (int t = 0; t < 10000; ++t) {
    const std::size_t n = 1 + t % 12;
    // mix uniform matrices with structured ones that favour long detours
    auto m = oracle::random_matrix(n, rng, t % 3 == 0 ? 1e-3 : 1.0);
    if (t % 4 == 1) {
      for (std::size_t i = 0; i < n; ++i) m[i][i] += 5.0;
    }
    const auto d = to_distance_matrix(m);
    if (!path_is_legal(dtw_align(d).path, n)) ++bad;
    if (!path_is_legal(normalized_dtw_align(d).path, n)) ++bad;
  }
  return {bad == 0, fmt("10000 instances x 2 variants, %zu illegal paths", bad)};
}

Outcome dalf_identity_shift() {
  std::mt19937_64 rng(104);
  double worst_identity = 0.0;
  for (int t = 0; t < 100; ++t) {
    const auto g = random_grid(8, 384, rng);
    worst_identity = std::max(worst_identity, dalf_distance(g, g).local_distance);
  }

  SyntheticSpec spec;
  spec.mode = SyntheticMode::kShift;
  spec.n = 8;
  spec.channels = 384;
  spec.database_size = 200;
  spec.query_count = 200;
  spec.shift_min = 1;
  spec.shift_max = 2;
  spec.sigma = 0.05;
  spec.seed = 104;
  std::vector<LocalFeatureGrid> sources;
  std::size_t recovered = 0, total = 0;
  generate_synthetic(spec, [&](SyntheticItem&& item) {
    if (item.role == Role::kDatabase) {
      sources.push_back(downsample_grid(item.map));
      return;
    }
    const auto& q = *item.query;
    const auto& source = sources[std::stoul(q.source_id.substr(3))];
    const auto result = dalf_distance(source, downsample_grid(item.map));
    ++total;
    if (median_alignment_offset(result.x) == double(q.shift_x)) ++recovered;
  });
  const double rate = double(recovered) / double(total);
  return {worst_identity == 0.0 && rate >= kShiftRecoveryMin,
          fmt("d_L(x,x) max %.3g over 100 grids; shift recovered %zu/%zu = %.1f%% (need >= %.0f%%)",
              worst_identity, recovered, total, 100 * rate, 100 * kShiftRecoveryMin)};
}

Outcome two_stage_correction() {
  SyntheticSpec spec;
  spec.mode = SyntheticMode::kAliasing;
  spec.n = 8;
  spec.channels = 384;
  spec.database_size = 100;
  spec.query_count = 200;
  spec.sigma = 0.05;
  spec.seed = 105;

  DescriptorIndex index;
  std::size_t stage1_hits = 0, stage2_hits = 0, total = 0;
  generate_synthetic(spec, [&](SyntheticItem&& item) {
    if (item.role == Role::kDatabase) {
      index.add(item.id, prepare_image(item.map));
      return;
    }
    const auto rec = retrieve(index, item.id, prepare_image(item.map));
    ++total;
    if (rec.stage1.front().id == item.query->source_id) ++stage1_hits;
    if (rec.stage2.front().id == item.query->source_id) ++stage2_hits;
  });
  const double s1 = 100.0 * double(stage1_hits) / double(total);
  const double s2 = 100.0 * double(stage2_hits) / double(total);
  return {s1 <= 100.0 * kStage1Max && s2 - s1 >= kCorrectionMinPoints,
          fmt("%zu queries: stage-1 top-1 %.1f%% (need <= %.0f%%), stage-2 top-1 %.1f%%, "
              "gain %.1f points (need >= %.0f)",
              total, s1, 100 * kStage1Max, s2, s2 - s1, kCorrectionMinPoints)};
}

Outcome alignment_efficiency() {
  Stopwatch clock;
  BenchConfig cfg;
  cfg.pairs = 1000;
  cfg.n = 8;
  cfg.channels = 384;
  cfg.repetitions = 5;
  cfg.seed = 106;
  const auto r = bench_alignment(cfg);
  const double s = clock.seconds();
  const bool passes_ok = r.dalf_passes == 2 && r.naive_passes == 65;
  return {passes_ok && r.ratio > kEfficiencyRatioMin && s < kEfficiencyBudgetS,
          fmt("passes DALF %zu / naive %zu (want 2 / 65); median %.0f vs %.0f ns/pair, "
              "ratio %.2f (need > %.0f); %.1f s",
              r.dalf_passes, r.naive_passes, r.dalf_ns_per_pair, r.naive_ns_per_pair, r.ratio,
              kEfficiencyRatioMin, s)};
}

Outcome semi_hard_positive() {
  MiningConfig cfg;
  cfg.k = Cutoff::count(2);
  cfg.k_prime = Cutoff::count(2);
  const std::vector<RankPair> example = {{"a", 1, 9}, {"b", 2, 2}, {"c", 8, 1}};
  const std::string picked = select_semi_hard_positive(example, cfg);

  std::mt19937_64 rng(107);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  std::size_t changed = 0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 3 + t % 10;
    std::vector<std::string> ids;
    std::vector<double> g(n), l(n), g2(n), l2(n);
    for (std::size_t k = 0; k < n; ++k) {
      ids.push_back("p" + std::to_string(k));
      g[k] = u(rng);
      l[k] = u(rng);
      g2[k] = std::log1p(g[k]) * 4.0 + 0.5;
      l2[k] = l[k] * l[k] * l[k];
    }
    MiningConfig fc;  // 30% fractions
    const auto a = select_semi_hard_positive(rank_from_distances(ids, g, l), fc);
    const auto b = select_semi_hard_positive(rank_from_distances(ids, g2, l2), fc);
    if (a != b) ++changed;
  }
  return {picked == "a" && changed == 0,
          fmt("example selects '%s' (want 'a'); %zu/100 selections changed under monotone "
              "transforms", picked.c_str(), changed)};
}

Outcome loss_arithmetic() {
  std::mt19937_64 rng(108);
  std::normal_distribution<float> gauss(0, 1);
  std::uniform_real_distribution<double> u(0.0, 0.5);
  const auto descriptor = [&] {
    std::vector<float> v(32);
    for (auto& x : v) x = gauss(rng);
    return GlobalDescriptor::normalized(v);
  };
  const auto as_double = [](const GlobalDescriptor& d) {
    return std::vector<double>(d.values().begin(), d.values().end());
  };
  const auto oracle_local = [](const LocalFeatureGrid& r, const LocalFeatureGrid& q) {
    const auto res = dalf_distance(r, q);
    std::vector<std::vector<std::size_t>> x, y;
    for (std::size_t i = 1; i <= r.n(); ++i) {
      x.push_back(res.x[i]);
      y.push_back(res.y[i]);
    }
    return oracle::enumerate_local_distance(testing_support::to_nested(r),
                                            testing_support::to_nested(q), x, y)
        .mean;
  };
  const auto hinge = [](double p, const std::vector<double>& ns, double m) {
    double s = 0.0;
    for (double n : ns) s += p + m - n > 0.0 ? p + m - n : 0.0;
    return s;
  };

  double worst = 0.0;
  bool lambda_zero_exact = true;
  for (int t = 0; t < 1000; ++t) {
    const double margin = u(rng), lambda = 2 * u(rng);
    const auto gq = descriptor(), gp = descriptor();
    const std::vector<GlobalDescriptor> gn = {descriptor(), descriptor()};
    const auto lq = random_grid(4, 16, rng), lp = random_grid(4, 16, rng);
    const std::vector<LocalFeatureGrid> ln = {random_grid(4, 16, rng), random_grid(4, 16, rng)};

    const double lg = triplet_loss_global(gq, gp, gn, margin);
    const double ll = triplet_loss_local(lq, lp, ln, margin);
    const double lj = joint_loss(lg, ll, lambda);

    const auto q = as_double(gq);
    const double want_g = hinge(oracle::euclid(q, as_double(gp)),
                                {oracle::euclid(q, as_double(gn[0])), oracle::euclid(q, as_double(gn[1]))},
                                margin);
    const double want_l =
        hinge(oracle_local(lp, lq), {oracle_local(ln[0], lq), oracle_local(ln[1], lq)}, margin);
    worst = std::max({worst, std::abs(lg - want_g), std::abs(ll - want_l),
                      std::abs(lj - (want_g + lambda * want_l))});
    if (joint_loss(lg, ll, 0.0) != lg) lambda_zero_exact = false;
  }
  return {worst <= kExactTol && lambda_zero_exact,
          fmt("1000 triplets, max |err| %.3g (tol %.0e); lambda=0 gives L_g exactly: %s", worst,
              kExactTol, lambda_zero_exact ? "yes" : "no")};
}

Outcome recall_at_n_checks() {
  // monotonicity over random rankings
  std::mt19937_64 rng(109);
  bool monotone = true;
  const std::vector<std::size_t> ns = {1, 2, 3, 5, 10, 20};
  for (int t = 0; t < 50; ++t) {
    std::vector<RetrievalRecord> records;
    GroundTruth gt;
    for (int q = 0; q < 20; ++q) {
      RetrievalRecord r;
      r.query_id = "q" + std::to_string(q);
      std::vector<int> order(20);
      std::iota(order.begin(), order.end(), 0);
      std::shuffle(order.begin(), order.end(), rng);
      for (std::size_t k = 0; k < order.size(); ++k) r.stage1.push_back({"d" + std::to_string(order[k]), double(k)});
      records.push_back(r);
      gt[r.query_id] = {"d" + std::to_string(q % 20), "d" + std::to_string((q * 7) % 20)};
    }
    const auto rec = recall_at_n(records, gt, ns);
    for (std::size_t k = 1; k < rec.size(); ++k) monotone = monotone && rec[k].percent >= rec[k - 1].percent;
  }

  // identity database: every query is a database image
  SyntheticSpec spec;
  spec.n = 8;
  spec.channels = 64;
  spec.database_size = 30;
  spec.query_count = 30;
  spec.seed = 109;
  const auto set = generate_synthetic(spec);
  DescriptorIndex index;
  std::vector<RetrievalRecord> id_records;
  const auto& entries = set.manifest.entries();
  for (std::size_t k = 0; k < entries.size(); ++k) {
    if (entries[k].role == Role::kDatabase) index.add(entries[k].id, prepare_image(set.maps[k]));
  }
  for (std::size_t k = 0; k < entries.size(); ++k) {
    if (entries[k].role == Role::kQuery) id_records.push_back(retrieve(index, entries[k].id, set.maps[k]));
  }
  const std::vector<std::size_t> one = {1};
  const double identity_r1 = recall_at_n(id_records, set.ground_truth, one)[0].percent;

  // hand-built fixture: first hit at ranks 1,1,1,1,1,1,1,3,5,7 -> R@1 70, R@5 90, R@10 100
  const std::vector<std::size_t> hit_rank = {1, 1, 1, 1, 1, 1, 1, 3, 5, 7};
  std::vector<RetrievalRecord> fixture;
  GroundTruth fgt;
  for (std::size_t q = 0; q < hit_rank.size(); ++q) {
    RetrievalRecord r;
    r.query_id = "q" + std::to_string(q);
    for (std::size_t k = 1; k <= 10; ++k) {
      r.stage2.push_back({k == hit_rank[q] ? "hit" : "miss" + std::to_string(k), 0.1 * double(k)});
    }
    r.stage1 = r.stage2;
    r.k_rerank = 10;
    fixture.push_back(r);
    fgt[r.query_id] = {"hit"};
  }
  const std::vector<std::size_t> fns = {1, 5, 10};
  const auto f = recall_at_n(fixture, fgt, fns);
  const bool fixture_ok = f[0].percent == 70.0 && f[1].percent == 90.0 && f[2].percent == 100.0;

  return {monotone && identity_r1 == 100.0 && fixture_ok,
          fmt("monotone over 50 random sets: %s; identity R@1 %.1f; fixture R@1/5/10 %.1f/%.1f/%.1f "
              "(want 70/90/100)",
              monotone ? "yes" : "no", identity_r1, f[0].percent, f[1].percent, f[2].percent)};
}

Outcome aafm_round_trip() {
  std::mt19937_64 rng(110);
  std::uniform_int_distribution<std::size_t> dim(1, 24);
  std::size_t mismatches = 0;
  for (int t = 0; t < 100; ++t) {
    const auto map = testing_support::random_map(dim(rng), dim(rng), dim(rng) * 4, rng, -10.0F, 10.0F);
    std::ostringstream first;
    write_feature_map(map, first);
    std::istringstream in(first.str());
    const auto back = read_feature_map(in);
    std::ostringstream second;
    write_feature_map(back, second);
    if (first.str() != second.str() || !(back == map)) ++mismatches;
  }
  return {mismatches == 0, fmt("100 random maps, %zu not byte-identical after re-serialization", mismatches)};
}

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all = {
      {"dtw_bruteforce", dtw_bruteforce},
      {"normalized_dtw_recursion", normalized_dtw_recursion},
      {"path_legality", path_legality},
      {"dalf_identity_shift", dalf_identity_shift},
      {"two_stage_correction", two_stage_correction},
      {"alignment_efficiency", alignment_efficiency},
      {"semi_hard_positive", semi_hard_positive},
      {"loss_arithmetic", loss_arithmetic},
      {"recall_at_n", recall_at_n_checks},
      {"aafm_round_trip", aafm_round_trip},
  };
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  const char* only = nullptr;
  for (int a = 1; a < argc; ++a) {
    if (std::strcmp(argv[a], "--list") == 0) {
      for (const auto& c : criteria()) std::printf("%s\n", c.name);
      return 0;
    }
    if (std::strcmp(argv[a], "--only") == 0 && a + 1 < argc) {
      only = argv[++a];
    } else {
      std::fprintf(stderr, "usage: %s [--list] [--only NAME]\n", argv[0]);
      return 1;
    }
  }

  int failed = 0, ran = 0;
  for (const auto& c : criteria()) {
    if (only != nullptr && std::strcmp(only, c.name) != 0) continue;
    ++ran;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  if (ran == 0) {
    std::fprintf(stderr, "unknown criterion '%s'\n", only);
    return 1;
  }
  return failed == 0 ? 0 : 1;
}

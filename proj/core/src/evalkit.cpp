#include "aanet/evalkit.hpp"

#include <algorithm>
#include <chrono>
#include <istream>
#include <ostream>
#include <random>

#include "aanet/error.hpp"
#include "aanet/synthetic.hpp"
#include "aanet/textio.hpp"

namespace aanet {

GroundTruth ground_truth_from_manifest(const FeatureSetManifest& manifest,
                                       const GroundTruthThresholds& thresholds) {
  GroundTruth gt;
  const auto database = manifest.with_role(Role::kDatabase);
  for (const auto& q : manifest.entries()) {
    if (q.role != Role::kQuery) continue;
    auto& matches = gt[q.id];
    if (!q.geotag) continue;
    for (const auto& db : database) {
      if (!db.geotag) continue;
      if (const auto meters = planar_distance(*q.geotag, *db.geotag)) {
        if (*meters <= thresholds.radius_m) matches.insert(db.id);
      } else if (const auto gap = frame_gap(*q.geotag, *db.geotag)) {
        if (*gap <= thresholds.frames) matches.insert(db.id);
      }
    }
  }
  return gt;
}

namespace {

const std::set<std::string>* positives_for(const GroundTruth& gt, const std::string& query) {
  const auto it = gt.find(query);
  if (it == gt.end() || it->second.empty()) return nullptr;
  return &it->second;
}

}  // namespace

std::vector<RecallPoint> recall_at_n(std::span<const RetrievalRecord> records,
                                     const GroundTruth& gt, std::span<const std::size_t> ns) {
  for (std::size_t n : ns) {
    if (n == 0) throw Error(ErrorCode::kInvalidArgument, "recall cutoff N must be >= 1");
  }
  std::vector<std::size_t> hits(ns.size(), 0);
  std::size_t eligible = 0;
  for (const auto& rec : records) {
    const auto* truth = positives_for(gt, rec.query_id);
    if (truth == nullptr) continue;
    ++eligible;
    const auto ranking = final_ranking(rec);
    // First rank (1-based) holding a true positive.
    std::size_t first = 0;
    for (std::size_t r = 0; r < ranking.size(); ++r) {
      if (truth->count(ranking[r]) != 0) {
        first = r + 1;
        break;
      }
    }
    for (std::size_t k = 0; k < ns.size(); ++k) {
      if (first != 0 && first <= ns[k]) ++hits[k];
    }
  }
  std::vector<RecallPoint> out;
  for (std::size_t k = 0; k < ns.size(); ++k) {
    const double pct =
        eligible == 0 ? 0.0 : 100.0 * static_cast<double>(hits[k]) / static_cast<double>(eligible);
    out.push_back({ns[k], pct});
  }
  return out;
}

double top1_distance(const RetrievalRecord& record) {
  if (!record.stage2.empty()) return record.stage2.front().distance;
  if (!record.stage1.empty()) return record.stage1.front().distance;
  throw Error(ErrorCode::kEmptyInput, "record " + record.query_id + " has no results");
}

namespace {

struct Scored {
  double distance;
  bool correct;
};

std::vector<Scored> score_top1(std::span<const RetrievalRecord> records, const GroundTruth& gt) {
  std::vector<Scored> out;
  for (const auto& rec : records) {
    const auto* truth = positives_for(gt, rec.query_id);
    if (truth == nullptr) continue;
    const auto ranking = final_ranking(rec);
    if (ranking.empty()) continue;
    out.push_back({top1_distance(rec), truth->count(ranking.front()) != 0});
  }
  return out;
}

}  // namespace

std::vector<PrPoint> pr_curve(std::span<const RetrievalRecord> records, const GroundTruth& gt,
                              std::span<const double> thresholds) {
  const auto scored = score_top1(records, gt);
  std::vector<PrPoint> out;
  for (double t : thresholds) {
    std::size_t accepted = 0, correct = 0;
    for (const auto& s : scored) {
      if (s.distance <= t) {
        ++accepted;
        if (s.correct) ++correct;
      }
    }
    PrPoint p;
    p.threshold = t;
    p.precision = accepted == 0 ? 1.0 : static_cast<double>(correct) / static_cast<double>(accepted);
    p.recall = scored.empty() ? 0.0
                              : static_cast<double>(correct) / static_cast<double>(scored.size());
    out.push_back(p);
  }
  return out;
}

std::vector<double> default_thresholds(std::span<const RetrievalRecord> records,
                                       const GroundTruth& gt) {
  std::vector<double> t;
  for (const auto& s : score_top1(records, gt)) t.push_back(s.distance);
  std::sort(t.begin(), t.end());
  t.erase(std::unique(t.begin(), t.end()), t.end());
  return t;
}

void write_recall_csv(std::span<const RecallPoint> points, std::ostream& out) {
  out << "metric,N,value\n";
  for (const auto& p : points) out << "recall," << p.n << ',' << format_number(p.percent) << '\n';
}

void write_pr_csv(std::span<const PrPoint> points, std::ostream& out) {
  out << "threshold,precision,recall\n";
  for (const auto& p : points) {
    out << format_number(p.threshold) << ',' << format_number(p.precision) << ','
        << format_number(p.recall) << '\n';
  }
}

void write_records_csv(std::span<const RetrievalRecord> records, std::ostream& out) {
  out << "query_id,stage,rank,id,distance\n";
  for (const auto& rec : records) {
    const auto emit = [&](int stage, const std::vector<RankedCandidate>& list) {
      for (std::size_t r = 0; r < list.size(); ++r) {
        out << rec.query_id << ',' << stage << ',' << (r + 1) << ',' << list[r].id << ','
            << format_number(list[r].distance) << '\n';
      }
    };
    emit(1, rec.stage1);
    emit(2, rec.stage2);
  }
}

std::vector<RetrievalRecord> read_records_csv(std::istream& in) {
  std::vector<RetrievalRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || (line_no == 1 && line.rfind("query_id,", 0) == 0)) continue;
    const auto fields = split(line, ',');
    int stage = 0;
    std::size_t rank = 0;
    double distance = 0.0;
    if (fields.size() != 5 || !parse_number(fields[1], stage) || (stage != 1 && stage != 2) ||
        !parse_number(fields[2], rank) || !parse_number(fields[4], distance)) {
      throw Error(ErrorCode::kParse, "records line " + std::to_string(line_no) + " is malformed");
    }
    const std::string query(fields[0]);
    if (records.empty() || records.back().query_id != query) {
      records.push_back({});
      records.back().query_id = query;
    }
    auto& list = stage == 1 ? records.back().stage1 : records.back().stage2;
    if (rank != list.size() + 1) {
      throw Error(ErrorCode::kParse, "records line " + std::to_string(line_no) +
                                         ": ranks must be consecutive");
    }
    list.push_back({std::string(fields[3]), distance});
  }
  for (auto& rec : records) rec.k_rerank = rec.stage2.size();
  return records;
}

namespace {

using Clock = std::chrono::steady_clock;

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

template <typename Fn>
double median_sweep_ns(std::size_t repetitions, std::size_t items, Fn&& sweep) {
  sweep();  // warm-up
  std::vector<double> samples;
  for (std::size_t r = 0; r < std::max<std::size_t>(repetitions, 1); ++r) {
    const auto start = Clock::now();
    sweep();
    const auto elapsed = std::chrono::duration<double, std::nano>(Clock::now() - start).count();
    samples.push_back(elapsed / static_cast<double>(std::max<std::size_t>(items, 1)));
  }
  return median(std::move(samples));
}

// Keeps results observable so the timed work cannot be elided.
volatile double bench_sink = 0.0;

}  // namespace

BenchResult bench_alignment(const BenchConfig& cfg) {
  if (cfg.pairs == 0 || cfg.n == 0 || cfg.channels == 0) {
    throw Error(ErrorCode::kInvalidArgument, "benchmark sizes must be positive");
  }
  std::mt19937_64 rng(cfg.seed);
  std::vector<LocalFeatureGrid> refs, queries;
  for (std::size_t k = 0; k < cfg.pairs; ++k) {
    refs.push_back(random_grid(cfg.n, cfg.channels, rng));
    queries.push_back(random_grid(cfg.n, cfg.channels, rng));
  }

  BenchResult out;
  {
    DtwPassCounter counter;
    bench_sink = bench_sink + dalf_distance(refs[0], queries[0]).local_distance;
    out.dalf_passes = counter.normalized();
  }
  {
    DtwPassCounter counter;
    bench_sink = bench_sink + naive_grid_align(refs[0], queries[0]).distance;
    out.naive_passes = counter.normalized();
  }

  out.dalf_ns_per_pair = median_sweep_ns(cfg.repetitions, cfg.pairs, [&]() {
    double acc = 0.0;
    for (std::size_t k = 0; k < cfg.pairs; ++k) {
      acc += dalf_distance(refs[k], queries[k]).local_distance;
    }
    bench_sink = bench_sink + acc;
  });
  out.naive_ns_per_pair = median_sweep_ns(cfg.repetitions, cfg.pairs, [&]() {
    double acc = 0.0;
    for (std::size_t k = 0; k < cfg.pairs; ++k) acc += naive_grid_align(refs[k], queries[k]).distance;
    bench_sink = bench_sink + acc;
  });
  out.ratio = out.dalf_ns_per_pair > 0.0 ? out.naive_ns_per_pair / out.dalf_ns_per_pair : 0.0;
  return out;
}

double bench_rerank_latency(std::size_t k_rerank, const BenchConfig& cfg) {
  if (k_rerank == 0) throw Error(ErrorCode::kInvalidArgument, "k_rerank must be >= 1");
  std::mt19937_64 rng(cfg.seed);
  DescriptorIndex index;
  std::vector<std::string> ids;
  for (std::size_t k = 0; k < k_rerank; ++k) {
    LocalFeatureGrid g = random_grid(cfg.n, cfg.channels, rng);
    std::vector<float> desc(g.data().begin(), g.data().begin() + static_cast<std::ptrdiff_t>(cfg.channels));
    ids.push_back("c" + std::to_string(k));
    index.add(ids.back(), {GlobalDescriptor::normalized(std::move(desc)), std::move(g)});
  }
  const LocalFeatureGrid query = random_grid(cfg.n, cfg.channels, rng);
  return median_sweep_ns(cfg.repetitions, 1, [&]() {
    bench_sink = bench_sink + rerank(index, query, ids).front().distance;
  });
}

}  // namespace aanet

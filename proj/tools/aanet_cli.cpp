#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "aanet/alignment.hpp"
#include "aanet/error.hpp"
#include "aanet/evalkit.hpp"
#include "aanet/manifest.hpp"
#include "aanet/mining.hpp"
#include "aanet/retrieval.hpp"
#include "aanet/synthetic.hpp"
#include "aanet/tensorio.hpp"
#include "aanet/textio.hpp"

namespace fs = std::filesystem;
using namespace aanet;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

int verbosity = 0;

void log(int level, const std::string& msg) {
  if (verbosity >= level) std::cerr << msg << '\n';
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  return out;
}

/// "a:b" or "a" into an inclusive range.
std::pair<std::size_t, std::size_t> parse_range(const std::string& text) {
  const auto parts = split(text, ':');
  std::size_t lo = 0, hi = 0;
  if (parts.size() == 1 && parse_number(parts[0], lo)) return {lo, lo};
  if (parts.size() == 2 && parse_number(parts[0], lo) && parse_number(parts[1], hi) && lo <= hi) {
    return {lo, hi};
  }
  throw Error(ErrorCode::kInvalidArgument, "bad range '" + text + "', expected A or A:B");
}

const std::vector<std::size_t> kRecallNs = {1, 5, 10, 20};

void write_reports(std::span<const RetrievalRecord> records, const GroundTruth& gt,
                   const fs::path& out_dir) {
  const auto recall = recall_at_n(records, gt, kRecallNs);
  auto recall_out = open_out(out_dir / "recall.csv");
  write_recall_csv(recall, recall_out);
  auto pr_out = open_out(out_dir / "pr.csv");
  write_pr_csv(pr_curve(records, gt, default_thresholds(records, gt)), pr_out);
  for (const auto& p : recall) std::cout << "R@" << p.n << ' ' << format_number(p.percent) << '\n';
}

struct RetrieveArgs {
  std::string manifest;
  std::string out = "aanet_out";
  std::size_t k_rerank = kDefaultRerankDepth;
  double gem_p = 3.0;
  bool renormalize = false;
  bool lazy = false;
  std::size_t workers = std::max(1U, std::thread::hardware_concurrency());
};

int cmd_retrieve(const RetrieveArgs& a) {
  const auto manifest = load_manifest(a.manifest);
  const GemParams gem{a.gem_p, 1e-6};
  const auto t0 = std::chrono::steady_clock::now();
  const auto index = build_index(manifest, gem, {a.lazy});
  log(1, "indexed " + std::to_string(index.size()) + " database images");

  RetrieveOptions options;
  options.k_rerank = a.k_rerank;
  options.gem = gem;
  options.dalf.split.renormalize = a.renormalize;
  const auto records = retrieve_all(index, manifest, options, a.workers);
  const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0);
  log(1, "retrieved " + std::to_string(records.size()) + " queries in " + format_number(ms.count()) + " ms");

  const fs::path out_dir = a.out;
  auto rec_out = open_out(out_dir / "records.csv");
  write_records_csv(records, rec_out);
  write_reports(records, ground_truth_from_manifest(manifest), out_dir);
  return kExitOk;
}

struct EvalArgs {
  std::string records;
  std::string manifest;
  std::string out = "aanet_out";
  double radius_m = 25.0;
  std::int64_t frames = 2;
};

int cmd_eval(const EvalArgs& a) {
  std::ifstream in(a.records);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + a.records);
  const auto records = read_records_csv(in);
  const auto gt = ground_truth_from_manifest(load_manifest(a.manifest), {a.radius_m, a.frames});
  write_reports(records, gt, a.out);
  return kExitOk;
}

struct MineArgs {
  std::string manifest;
  std::string out = "mining.tsv";
  std::string k = "30%";
  std::string k_prime = "30%";
  MiningConfig cfg;
  double gem_p = 3.0;
};

int cmd_mine(MineArgs a) {
  a.cfg.k = Cutoff::parse(a.k);
  a.cfg.k_prime = Cutoff::parse(a.k_prime);
  const auto records = mine(load_manifest(a.manifest), a.cfg, {a.gem_p, 1e-6});
  auto out = open_out(a.out);
  write_mining_report(records, out);
  double total = 0.0;
  for (const auto& r : records) total += r.loss;
  std::cout << "tuples " << records.size() << "\nmean_loss "
            << format_number(records.empty() ? 0.0 : total / double(records.size())) << '\n';
  return kExitOk;
}

struct GenArgs {
  std::string out = "synthetic";
  std::string mode = "shift";
  std::string shift = "0";
  std::string vshift = "0";
  SyntheticSpec spec;
};

int cmd_gen(GenArgs a) {
  a.spec.mode = a.mode == "aliasing" ? SyntheticMode::kAliasing : SyntheticMode::kShift;
  std::tie(a.spec.shift_min, a.spec.shift_max) = parse_range(a.shift);
  std::tie(a.spec.vshift_min, a.spec.vshift_max) = parse_range(a.vshift);
  std::cout << write_synthetic(a.spec, a.out).string() << '\n';
  return kExitOk;
}

struct BenchArgs {
  BenchConfig cfg;
  std::size_t k_rerank = kDefaultRerankDepth;
  std::string out;
};

int cmd_bench(const BenchArgs& a) {
  const auto r = bench_alignment(a.cfg);
  BenchConfig one = a.cfg;
  one.pairs = 1;
  const double rerank_ns = bench_rerank_latency(a.k_rerank, one);

  std::ofstream file;
  if (!a.out.empty()) file = open_out(a.out);
  std::ostream& out = a.out.empty() ? std::cout : file;
  out << "stage,ns_per_item,passes\n";
  out << "dalf_pair," << format_number(r.dalf_ns_per_pair) << ',' << r.dalf_passes << '\n';
  out << "naive_pair," << format_number(r.naive_ns_per_pair) << ',' << r.naive_passes << '\n';
  out << "rerank_query_k" << a.k_rerank << ',' << format_number(rerank_ns) << ','
      << r.dalf_passes * a.k_rerank << '\n';
  std::cerr << "naive/dalf ratio " << format_number(r.ratio) << '\n';
  return kExitOk;
}

struct InspectArgs {
  std::vector<std::string> files;
  bool align = false;
  bool renormalize = false;
};

int cmd_inspect(const InspectArgs& a) {
  for (const auto& f : a.files) {
    std::ifstream in(f, std::ios::binary);
    if (!in) throw Error(ErrorCode::kIo, "cannot open " + f);
    const auto h = read_aafm_header(in);
    std::cout << f << ": AAFM v" << h.version << ' ' << h.width << 'x' << h.height << 'x'
              << h.channels << '\n';
  }
  if (a.align) {
    if (a.files.size() != 2) throw Error(ErrorCode::kInvalidArgument, "--align needs exactly two files");
    const auto r = downsample_grid(load_feature_map(a.files[0]));
    const auto q = downsample_grid(load_feature_map(a.files[1]));
    DalfOptions options;
    options.split.renormalize = a.renormalize;
    write_alignment_dump(dalf_trace(r, q, options), std::cout);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-stage place recognition: global retrieval with aligned local re-ranking"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "key=value file; command-line flags take precedence");
  app.add_flag("-v,--verbose", verbosity, "More logging on stderr (repeatable)");
  std::uint64_t seed = 0;
  app.add_option("--seed", seed, "Seed for every random choice")->capture_default_str();

  RetrieveArgs ra;
  auto* retrieve = app.add_subcommand("retrieve", "Rank database images for every query");
  retrieve->add_option("-m,--manifest", ra.manifest, "Feature-set manifest")->required();
  retrieve->add_option("-o,--out", ra.out, "Output directory")->capture_default_str();
  retrieve->add_option("--k-rerank", ra.k_rerank, "Candidates re-ranked by local alignment")
      ->check(CLI::PositiveNumber)->capture_default_str();
  retrieve->add_option("--gem-p", ra.gem_p, "GeM exponent")->check(CLI::Range(1.0, 1e6))->capture_default_str();
  retrieve->add_flag("--renormalize", ra.renormalize, "L2-normalize regional elements before alignment");
  retrieve->add_flag("--lazy", ra.lazy, "Reload database grids from disk at re-rank time");
  retrieve->add_option("-j,--workers", ra.workers, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "Recall@N and PR curve from a records CSV");
  eval->add_option("-r,--records", ea.records, "records.csv from retrieve")->required();
  eval->add_option("-m,--manifest", ea.manifest, "Manifest holding the geotags")->required();
  eval->add_option("-o,--out", ea.out, "Output directory")->capture_default_str();
  eval->add_option("--radius", ea.radius_m, "Ground-truth radius in meters")->capture_default_str();
  eval->add_option("--frames", ea.frames, "Ground-truth frame tolerance")->capture_default_str();

  MineArgs ma;
  auto* minecmd = app.add_subcommand("mine", "Semi-hard positives, hard negatives and losses");
  minecmd->add_option("-m,--manifest", ma.manifest, "Feature-set manifest")->required();
  minecmd->add_option("-o,--out", ma.out, "Report file")->capture_default_str();
  minecmd->add_option("--k", ma.k, "Global rank cutoff (count, fraction or percent)")->capture_default_str();
  minecmd->add_option("--k-prime", ma.k_prime, "Local rank cutoff")->capture_default_str();
  minecmd->add_option("--margin", ma.cfg.margin, "Triplet margin")->capture_default_str();
  minecmd->add_option("--lambda", ma.cfg.lambda, "Local loss weight")->capture_default_str();
  minecmd->add_option("--negatives", ma.cfg.negatives_per_triplet, "Hard negatives per tuple")->capture_default_str();
  minecmd->add_option("--pool", ma.cfg.negative_pool, "Random negatives to choose from")->capture_default_str();
  minecmd->add_option("--positive-radius", ma.cfg.positive_radius_m, "Meters")->capture_default_str();
  minecmd->add_option("--negative-radius", ma.cfg.negative_radius_m, "Meters")->capture_default_str();
  minecmd->add_option("--positive-frames", ma.cfg.positive_frames, "Frame tolerance")->capture_default_str();
  minecmd->add_option("--gem-p", ma.gem_p, "GeM exponent")->capture_default_str();

  GenArgs ga;
  auto* gen = app.add_subcommand("gen", "Write a synthetic feature set");
  gen->add_option("-o,--out", ga.out, "Output directory")->capture_default_str();
  gen->add_option("--mode", ga.mode, "shift or aliasing")->check(CLI::IsMember({"shift", "aliasing"}))->capture_default_str();
  gen->add_option("--n", ga.spec.n, "Grid side")->check(CLI::PositiveNumber)->capture_default_str();
  gen->add_option("--channels", ga.spec.channels, "Channels")->check(CLI::PositiveNumber)->capture_default_str();
  gen->add_option("--db", ga.spec.database_size, "Database places")->check(CLI::PositiveNumber)->capture_default_str();
  gen->add_option("--queries", ga.spec.query_count, "Queries")->capture_default_str();
  gen->add_option("--shift", ga.shift, "Column shift, A or A:B")->capture_default_str();
  gen->add_option("--vshift", ga.vshift, "Row shift, A or A:B")->capture_default_str();
  gen->add_option("--sigma", ga.spec.sigma, "Noise std-dev")->capture_default_str();

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench", "Time aligned vs naive grid matching");
  bench->add_option("--pairs", ba.cfg.pairs, "Grid pairs")->check(CLI::PositiveNumber)->capture_default_str();
  bench->add_option("--n", ba.cfg.n, "Grid side")->check(CLI::PositiveNumber)->capture_default_str();
  bench->add_option("--channels", ba.cfg.channels, "Channels")->check(CLI::PositiveNumber)->capture_default_str();
  bench->add_option("--reps", ba.cfg.repetitions, "Timed repetitions")->check(CLI::PositiveNumber)->capture_default_str();
  bench->add_option("--k-rerank", ba.k_rerank, "Candidates per query")->check(CLI::PositiveNumber)->capture_default_str();
  bench->add_option("-o,--out", ba.out, "CSV file (stdout when omitted)");

  InspectArgs ia;
  auto* inspect = app.add_subcommand("inspect", "Print AAFM headers and alignment dumps");
  inspect->add_option("files", ia.files, "AAFM files")->required()->check(CLI::ExistingFile);
  inspect->add_flag("--align", ia.align, "Dump the alignment of FILE1 (reference) against FILE2 (query)");
  inspect->add_flag("--renormalize", ia.renormalize, "L2-normalize regional elements");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  ma.cfg.seed = seed;
  ga.spec.seed = seed;
  ba.cfg.seed = seed;
  try {
    if (*retrieve) return cmd_retrieve(ra);
    if (*eval) return cmd_eval(ea);
    if (*minecmd) return cmd_mine(ma);
    if (*gen) return cmd_gen(ga);
    if (*bench) return cmd_bench(ba);
    if (*inspect) return cmd_inspect(ia);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

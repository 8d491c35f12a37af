#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "aanet/alignment.hpp"
#include "aanet/retrieval.hpp"
#include "aanet/synthetic.hpp"

using namespace aanet;

namespace {

struct GridPairs {
  std::vector<LocalFeatureGrid> refs, queries;
};

GridPairs make_pairs(std::size_t n, std::size_t c, std::size_t count) {
  std::mt19937_64 rng(42);
  GridPairs p;
  for (std::size_t k = 0; k < count; ++k) {
    p.refs.push_back(random_grid(n, c, rng));
    p.queries.push_back(random_grid(n, c, rng));
  }
  return p;
}

void BM_DalfDistance(benchmark::State& state) {
  const auto pairs = make_pairs(state.range(0), state.range(1), 16);
  std::size_t k = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(dalf_distance(pairs.refs[k], pairs.queries[k]).local_distance);
    k = (k + 1) % pairs.refs.size();
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_DalfDistance)->Args({8, 384})->Args({4, 384})->Args({8, 64})->Unit(benchmark::kMicrosecond);

void BM_NaiveGridAlign(benchmark::State& state) {
  const auto pairs = make_pairs(state.range(0), state.range(1), 16);
  std::size_t k = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(naive_grid_align(pairs.refs[k], pairs.queries[k]).distance);
    k = (k + 1) % pairs.refs.size();
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_NaiveGridAlign)->Args({8, 384})->Args({4, 384})->Args({8, 64})->Unit(benchmark::kMicrosecond);

void BM_Rerank20(benchmark::State& state) {
  std::mt19937_64 rng(7);
  DescriptorIndex index;
  std::vector<std::string> ids;
  for (int k = 0; k < 20; ++k) {
    auto grid = random_grid(8, 384, rng);
    std::vector<float> g(384, 1.0F);
    ids.push_back("c" + std::to_string(k));
    index.add(ids.back(), {GlobalDescriptor::normalized(g), std::move(grid)});
  }
  const auto query = random_grid(8, 384, rng);
  for (auto _ : state) benchmark::DoNotOptimize(rerank(index, query, ids));
}
BENCHMARK(BM_Rerank20)->Unit(benchmark::kMillisecond);

void BM_NormalizedDtw(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> values(n * n);
  for (auto& v : values) v = u(rng);
  const DistanceMatrix d(n, values);
  for (auto _ : state) benchmark::DoNotOptimize(normalized_dtw_align(d).path.points.size());
}
BENCHMARK(BM_NormalizedDtw)->Arg(8)->Arg(32)->Arg(128);

}  // namespace

BENCHMARK_MAIN();

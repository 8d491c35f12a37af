#include "aanet/retrieval.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>
#include <unordered_set>

#include "aanet/error.hpp"

namespace aanet {

PreparedImage prepare_image(const FeatureMap& map, const GemParams& gem) {
  return {gem_pool(map, gem), downsample_grid(map)};
}

void DescriptorIndex::check_shape(std::size_t n, std::size_t channels) {
  if (ids_.empty()) {
    grid_side_ = n;
    channels_ = channels;
    return;
  }
  if (n != grid_side_ || channels != channels_) {
    throw Error(ErrorCode::kShapeMismatch,
                "index holds " + std::to_string(grid_side_) + "x" + std::to_string(grid_side_) +
                    "x" + std::to_string(channels_) + " grids, got " + std::to_string(n) + "x" +
                    std::to_string(n) + "x" + std::to_string(channels));
  }
}

void DescriptorIndex::add(std::string id, PreparedImage image) {
  if (by_id_.count(id) != 0) throw Error(ErrorCode::kInvalidArgument, "duplicate id " + id);
  check_shape(image.grid.n(), image.grid.channels());
  by_id_.emplace(id, ids_.size());
  ids_.push_back(std::move(id));
  descriptors_.push_back(std::move(image.global));
  grids_.push_back(std::make_shared<const LocalFeatureGrid>(std::move(image.grid)));
  sources_.emplace_back();
}

void DescriptorIndex::add_lazy(std::string id, GlobalDescriptor global,
                               std::filesystem::path source, std::size_t grid_side) {
  if (by_id_.count(id) != 0) throw Error(ErrorCode::kInvalidArgument, "duplicate id " + id);
  check_shape(grid_side, global.size());
  by_id_.emplace(id, ids_.size());
  ids_.push_back(std::move(id));
  descriptors_.push_back(std::move(global));
  grids_.emplace_back();
  sources_.push_back(std::move(source));
}

std::optional<std::size_t> DescriptorIndex::find(const std::string& id) const {
  const auto it = by_id_.find(id);
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

std::shared_ptr<const LocalFeatureGrid> DescriptorIndex::grid(std::size_t index) const {
  if (index >= grids_.size()) throw Error(ErrorCode::kNotFound, "grid index out of range");
  if (grids_[index]) return grids_[index];
  auto g = std::make_shared<const LocalFeatureGrid>(
      downsample_grid(load_feature_map(sources_[index])));
  if (g->n() != grid_side_ || g->channels() != channels_) {
    throw Error(ErrorCode::kShapeMismatch, "lazily loaded grid for " + ids_[index] +
                                               " has a different side");
  }
  return g;
}

DescriptorIndex build_index(const FeatureSetManifest& manifest, const GemParams& gem,
                            const IndexOptions& options) {
  validate(gem);
  DescriptorIndex index;
  std::string failures;
  std::size_t failed = 0;
  for (const auto& entry : manifest.entries()) {
    if (entry.role != Role::kDatabase) continue;
    try {
      const FeatureMap map = load_feature_map(entry.path);
      if (options.lazy_grids) {
        const std::size_t side = downsample_grid(map).n();
        index.add_lazy(entry.id, gem_pool(map, gem), entry.path, side);
      } else {
        index.add(entry.id, prepare_image(map, gem));
      }
    } catch (const Error& e) {
      ++failed;
      failures += "\n  " + entry.id + ": " + e.what();
    }
  }
  if (failed != 0) {
    throw Error(ErrorCode::kIo,
                std::to_string(failed) + " database entries could not be indexed:" + failures);
  }
  return index;
}

std::vector<RankedCandidate> query_topk(const DescriptorIndex& index, const GlobalDescriptor& query,
                                        std::size_t k) {
  if (index.empty()) throw Error(ErrorCode::kEmptyInput, "query against an empty index");
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");

  std::vector<RankedCandidate> all;
  all.reserve(index.size());
  for (std::size_t e = 0; e < index.size(); ++e) {
    all.push_back({index.ids()[e], global_distance(query, index.descriptor(e))});
  }
  const auto before = [](const RankedCandidate& a, const RankedCandidate& b) {
    return a.distance < b.distance || (a.distance == b.distance && a.id < b.id);
  };
  const std::size_t keep = std::min(k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(keep), all.end(),
                    before);
  all.resize(keep);
  return all;
}

std::vector<RankedCandidate> rerank(const DescriptorIndex& index, const LocalFeatureGrid& query,
                                    const std::vector<std::string>& candidates,
                                    const DalfOptions& dalf) {
  std::vector<RankedCandidate> out;
  out.reserve(candidates.size());
  for (const auto& id : candidates) {
    const auto slot = index.find(id);
    if (!slot) throw Error(ErrorCode::kNotFound, "candidate " + id + " is not in the index");
    out.push_back({id, dalf_distance(*index.grid(*slot), query, dalf).local_distance});
  }
  std::stable_sort(out.begin(), out.end(), [](const RankedCandidate& a, const RankedCandidate& b) {
    return a.distance < b.distance;
  });
  return out;
}

RetrievalRecord retrieve(const DescriptorIndex& index, const std::string& query_id,
                         const PreparedImage& query, const RetrieveOptions& options) {
  if (options.k_rerank == 0) throw Error(ErrorCode::kInvalidArgument, "k_rerank must be >= 1");
  const std::size_t depth =
      options.stage1_depth == 0 ? std::max<std::size_t>(options.k_rerank, 100)
                                : std::max(options.stage1_depth, options.k_rerank);
  RetrievalRecord record;
  record.query_id = query_id;
  record.k_rerank = options.k_rerank;
  record.stage1 = query_topk(index, query.global, depth);

  std::vector<std::string> head;
  for (std::size_t r = 0; r < std::min(options.k_rerank, record.stage1.size()); ++r) {
    head.push_back(record.stage1[r].id);
  }
  record.stage2 = rerank(index, query.grid, head, options.dalf);
  return record;
}

RetrievalRecord retrieve(const DescriptorIndex& index, const std::string& query_id,
                         const FeatureMap& query, const RetrieveOptions& options) {
  return retrieve(index, query_id, prepare_image(query, options.gem), options);
}

std::vector<std::string> final_ranking(const RetrievalRecord& record) {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const auto& c : record.stage2) {
    out.push_back(c.id);
    seen.insert(c.id);
  }
  for (const auto& c : record.stage1) {
    if (seen.count(c.id) == 0) out.push_back(c.id);
  }
  return out;
}

void parallel_for(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t)>& task) {
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1) {
    for (std::size_t k = 0; k < count; ++k) task(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (std::size_t k = next++; k < count; k = next++) {
        try {
          task(k);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::vector<RetrievalRecord> retrieve_all(const DescriptorIndex& index,
                                          const FeatureSetManifest& manifest,
                                          const RetrieveOptions& options, std::size_t workers) {
  const auto queries = manifest.with_role(Role::kQuery);
  std::vector<RetrievalRecord> records(queries.size());
  parallel_for(queries.size(), workers, [&](std::size_t k) {
    records[k] = retrieve(index, queries[k].id, load_feature_map(queries[k].path), options);
  });
  return records;
}

}  // namespace aanet

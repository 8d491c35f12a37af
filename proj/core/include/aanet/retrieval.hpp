#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "aanet/alignment.hpp"
#include "aanet/descriptor.hpp"
#include "aanet/manifest.hpp"
#include "aanet/tensorio.hpp"

namespace aanet {

/// Both representations derived from one feature map.
struct PreparedImage {
  GlobalDescriptor global;
  LocalFeatureGrid grid;
};

PreparedImage prepare_image(const FeatureMap& map, const GemParams& gem = {});

struct IndexOptions {
  /// Keep only file paths for grids and recompute them at re-rank time.
  bool lazy_grids = false;
};

/// Database side of the two-stage search: ids, global descriptors, and the
/// local grids (or the paths to reload them from). Immutable once built.
class DescriptorIndex {
 public:
  DescriptorIndex() = default;

  void add(std::string id, PreparedImage image);
  /// Records only where the grid comes from; `grid_side` is the side the
  /// grid will have once downsampled.
  void add_lazy(std::string id, GlobalDescriptor global, std::filesystem::path source,
                std::size_t grid_side);

  std::size_t size() const noexcept { return ids_.size(); }
  bool empty() const noexcept { return ids_.empty(); }
  const std::vector<std::string>& ids() const noexcept { return ids_; }
  const GlobalDescriptor& descriptor(std::size_t index) const { return descriptors_.at(index); }
  std::optional<std::size_t> find(const std::string& id) const;

  /// Eager grids are returned as stored; lazy ones are reloaded and
  /// downsampled from their source file.
  std::shared_ptr<const LocalFeatureGrid> grid(std::size_t index) const;

  std::size_t grid_side() const noexcept { return grid_side_; }
  std::size_t channels() const noexcept { return channels_; }

 private:
  void check_shape(std::size_t n, std::size_t channels);

  std::vector<std::string> ids_;
  std::vector<GlobalDescriptor> descriptors_;
  std::vector<std::shared_ptr<const LocalFeatureGrid>> grids_;
  std::vector<std::filesystem::path> sources_;
  std::unordered_map<std::string, std::size_t> by_id_;
  std::size_t grid_side_ = 0;
  std::size_t channels_ = 0;
};

/// Loads every database entry of the manifest. Per-file failures are
/// collected and reported together in one Error listing the ids.
DescriptorIndex build_index(const FeatureSetManifest& manifest, const GemParams& gem = {},
                            const IndexOptions& options = {});

struct RankedCandidate {
  std::string id;
  double distance = 0.0;
  friend bool operator==(const RankedCandidate&, const RankedCandidate&) = default;
};

/// The k entries with the smallest global distance, ascending; equal
/// distances are ordered by id.
std::vector<RankedCandidate> query_topk(const DescriptorIndex& index, const GlobalDescriptor& query,
                                        std::size_t k);

/// Local distance to each candidate, ascending; ties keep the input order.
std::vector<RankedCandidate> rerank(const DescriptorIndex& index, const LocalFeatureGrid& query,
                                    const std::vector<std::string>& candidates,
                                    const DalfOptions& dalf = {});

inline constexpr std::size_t kDefaultRerankDepth = 20;

struct RetrieveOptions {
  std::size_t k_rerank = kDefaultRerankDepth;
  /// How much of the global ranking to keep; 0 keeps max(k_rerank, 100).
  std::size_t stage1_depth = 0;
  GemParams gem;
  DalfOptions dalf;
};

struct RetrievalRecord {
  std::string query_id;
  std::vector<RankedCandidate> stage1;
  std::vector<RankedCandidate> stage2;
  std::size_t k_rerank = 0;
};

RetrievalRecord retrieve(const DescriptorIndex& index, const std::string& query_id,
                         const FeatureMap& query, const RetrieveOptions& options = {});
RetrievalRecord retrieve(const DescriptorIndex& index, const std::string& query_id,
                         const PreparedImage& query, const RetrieveOptions& options = {});

/// Stage-2 order followed by the rest of the stage-1 list.
std::vector<std::string> final_ranking(const RetrievalRecord& record);

/// Runs every query role entry of `manifest` against `index` on `workers`
/// threads. Output order follows the manifest.
std::vector<RetrievalRecord> retrieve_all(const DescriptorIndex& index,
                                          const FeatureSetManifest& manifest,
                                          const RetrieveOptions& options = {},
                                          std::size_t workers = 1);

/// Calls `task(k)` for k in [0, count) on up to `workers` threads; the first
/// exception is rethrown after all threads join.
void parallel_for(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t)>& task);

}  // namespace aanet

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

namespace aanet {

enum class Role { kDatabase, kQuery };

/// Geotag position in meters.
struct PlanarPosition {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const PlanarPosition&, const PlanarPosition&) = default;
};

/// Geotag for frame-indexed sequences (GP, Nordland style).
struct FrameIndex {
  std::int64_t index = 0;
  friend bool operator==(const FrameIndex&, const FrameIndex&) = default;
};

using Geotag = std::variant<PlanarPosition, FrameIndex>;

struct ManifestEntry {
  std::string id;
  std::filesystem::path path;
  Role role = Role::kDatabase;
  std::optional<Geotag> geotag;
  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

/// Ordered list of feature files. Lines are `id<TAB>path<TAB>role[<TAB>x,y]`
/// or `...<TAB>frame,<index>`; lines starting with `#` are comments. Ids are
/// unique.
class FeatureSetManifest {
 public:
  FeatureSetManifest() = default;
  explicit FeatureSetManifest(std::vector<ManifestEntry> entries);

  const std::vector<ManifestEntry>& entries() const noexcept { return entries_; }
  std::vector<ManifestEntry> with_role(Role role) const;
  const ManifestEntry* find(const std::string& id) const;

  void add(ManifestEntry entry);

  friend bool operator==(const FeatureSetManifest& a, const FeatureSetManifest& b) {
    return a.entries_ == b.entries_;
  }

 private:
  std::vector<ManifestEntry> entries_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

/// Relative paths are resolved against `base_dir`.
FeatureSetManifest parse_manifest(std::istream& in, const std::filesystem::path& base_dir = {});
FeatureSetManifest load_manifest(const std::filesystem::path& path);

void write_manifest(const FeatureSetManifest& manifest, std::ostream& out);
void save_manifest(const FeatureSetManifest& manifest, const std::filesystem::path& path);

std::string_view to_string(Role role);

/// Euclidean distance in meters when both tags are planar positions.
std::optional<double> planar_distance(const Geotag& a, const Geotag& b);

/// Absolute frame difference when both tags are frame indices.
std::optional<std::int64_t> frame_gap(const Geotag& a, const Geotag& b);

}  // namespace aanet

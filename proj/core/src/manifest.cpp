#include "aanet/manifest.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include "aanet/error.hpp"
#include "aanet/textio.hpp"

namespace aanet {

namespace {

Role parse_role(std::string_view text, std::size_t line_no) {
  if (text == "database" || text == "db") return Role::kDatabase;
  if (text == "query") return Role::kQuery;
  throw Error(ErrorCode::kParse, "manifest line " + std::to_string(line_no) +
                                     ": unknown role '" + std::string(text) + "'");
}

Geotag parse_geotag(std::string_view text, std::size_t line_no) {
  const auto comma = text.find(',');
  const auto fail = [&]() {
    return Error(ErrorCode::kParse, "manifest line " + std::to_string(line_no) +
                                        ": malformed geotag '" + std::string(text) + "'");
  };
  if (comma == std::string_view::npos) throw fail();
  const auto head = text.substr(0, comma);
  const auto tail = text.substr(comma + 1);
  if (head == "frame") {
    std::int64_t index = 0;
    if (!parse_number(tail, index)) throw fail();
    return FrameIndex{index};
  }
  PlanarPosition p;
  if (!parse_number(head, p.x) || !parse_number(tail, p.y)) throw fail();
  return p;
}

}  // namespace

FeatureSetManifest::FeatureSetManifest(std::vector<ManifestEntry> entries) {
  entries_.reserve(entries.size());
  for (auto& e : entries) add(std::move(e));
}

void FeatureSetManifest::add(ManifestEntry entry) {
  if (entry.id.empty()) throw Error(ErrorCode::kInvalidArgument, "empty image id");
  if (entry.id.find_first_of("\t\n") != std::string::npos) {
    throw Error(ErrorCode::kInvalidArgument, "image id contains tab or newline");
  }
  if (!by_id_.emplace(entry.id, entries_.size()).second) {
    throw Error(ErrorCode::kInvalidArgument, "duplicate image id '" + entry.id + "'");
  }
  entries_.push_back(std::move(entry));
}

std::vector<ManifestEntry> FeatureSetManifest::with_role(Role role) const {
  std::vector<ManifestEntry> out;
  for (const auto& e : entries_) {
    if (e.role == role) out.push_back(e);
  }
  return out;
}

const ManifestEntry* FeatureSetManifest::find(const std::string& id) const {
  const auto it = by_id_.find(id);
  return it == by_id_.end() ? nullptr : &entries_[it->second];
}

std::string_view to_string(Role role) {
  return role == Role::kQuery ? "query" : "database";
}

std::optional<double> planar_distance(const Geotag& a, const Geotag& b) {
  const auto* pa = std::get_if<PlanarPosition>(&a);
  const auto* pb = std::get_if<PlanarPosition>(&b);
  if (pa == nullptr || pb == nullptr) return std::nullopt;
  return std::hypot(pa->x - pb->x, pa->y - pb->y);
}

std::optional<std::int64_t> frame_gap(const Geotag& a, const Geotag& b) {
  const auto* fa = std::get_if<FrameIndex>(&a);
  const auto* fb = std::get_if<FrameIndex>(&b);
  if (fa == nullptr || fb == nullptr) return std::nullopt;
  return fa->index > fb->index ? fa->index - fb->index : fb->index - fa->index;
}

FeatureSetManifest parse_manifest(std::istream& in, const std::filesystem::path& base_dir) {
  FeatureSetManifest manifest;
  std::string line;
  std::size_t line_no = 0;
  std::unordered_set<std::string> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split(line, '\t');
    if (fields.size() < 3 || fields.size() > 4) {
      throw Error(ErrorCode::kParse, "manifest line " + std::to_string(line_no) +
                                         ": expected 3 or 4 tab-separated fields");
    }
    ManifestEntry entry;
    entry.id = std::string(fields[0]);
    if (!seen.insert(entry.id).second) {
      throw Error(ErrorCode::kParse, "manifest line " + std::to_string(line_no) +
                                         ": duplicate id '" + entry.id + "'");
    }
    std::filesystem::path p{std::string(fields[1])};
    entry.path = (p.is_relative() && !base_dir.empty()) ? base_dir / p : p;
    entry.role = parse_role(fields[2], line_no);
    if (fields.size() == 4) entry.geotag = parse_geotag(fields[3], line_no);
    manifest.add(std::move(entry));
  }
  return manifest;
}

FeatureSetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open manifest " + path.string());
  return parse_manifest(in, path.parent_path());
}

void write_manifest(const FeatureSetManifest& manifest, std::ostream& out) {
  for (const auto& e : manifest.entries()) {
    out << e.id << '\t' << e.path.generic_string() << '\t' << to_string(e.role);
    if (e.geotag) {
      out << '\t';
      if (const auto* pos = std::get_if<PlanarPosition>(&*e.geotag)) {
        out << format_number(pos->x) << ',' << format_number(pos->y);
      } else {
        out << "frame," << std::get<FrameIndex>(*e.geotag).index;
      }
    }
    out << '\n';
  }
}

void save_manifest(const FeatureSetManifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  write_manifest(manifest, out);
  if (!out) throw Error(ErrorCode::kIo, "failed writing " + path.string());
}

}  // namespace aanet

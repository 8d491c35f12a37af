#include "aanet/mining.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <iterator>
#include <map>
#include <numeric>
#include <ostream>

#include "aanet/error.hpp"
#include "aanet/textio.hpp"

namespace aanet {

Cutoff Cutoff::count(std::size_t value) { return Cutoff(static_cast<double>(value), false); }

Cutoff Cutoff::fraction(double value) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw Error(ErrorCode::kInvalidArgument, "cutoff fraction must be positive");
  }
  return Cutoff(value, true);
}

Cutoff Cutoff::parse(std::string_view text) {
  if (!text.empty() && text.back() == '%') {
    double percent = 0.0;
    if (!parse_number(text.substr(0, text.size() - 1), percent)) {
      throw Error(ErrorCode::kParse, "bad cutoff '" + std::string(text) + "'");
    }
    return fraction(percent / 100.0);
  }
  std::size_t n = 0;
  if (parse_number(text, n)) return count(n);
  double f = 0.0;
  if (!parse_number(text, f)) throw Error(ErrorCode::kParse, "bad cutoff '" + std::string(text) + "'");
  return fraction(f);
}

std::size_t Cutoff::resolve(std::size_t total) const {
  if (!is_fraction_) return std::max<std::size_t>(1, static_cast<std::size_t>(value_));
  const double scaled = std::ceil(value_ * static_cast<double>(total));
  return std::max<std::size_t>(1, static_cast<std::size_t>(scaled));
}

void validate(const MiningConfig& cfg) {
  if (!(cfg.margin > 0.0)) throw Error(ErrorCode::kInvalidArgument, "margin must be > 0");
  if (!(cfg.lambda >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "lambda must be >= 0");
  if (cfg.negatives_per_triplet == 0 || cfg.negative_pool == 0) {
    throw Error(ErrorCode::kInvalidArgument, "negative counts must be >= 1");
  }
  if (!(cfg.negative_radius_m >= cfg.positive_radius_m)) {
    throw Error(ErrorCode::kInvalidArgument, "negative radius must not be below positive radius");
  }
}

std::vector<TrainingTuple> build_training_tuples(const FeatureSetManifest& manifest,
                                                 const MiningConfig& cfg) {
  std::vector<TrainingTuple> tuples;
  const auto database = manifest.with_role(Role::kDatabase);
  for (const auto& q : manifest.entries()) {
    if (q.role != Role::kQuery || !q.geotag) continue;
    TrainingTuple t;
    t.query = q.id;
    for (const auto& db : database) {
      if (!db.geotag) continue;
      if (const auto meters = planar_distance(*q.geotag, *db.geotag)) {
        if (*meters <= cfg.positive_radius_m) t.positives.push_back(db.id);
        if (*meters > cfg.negative_radius_m) t.negatives.push_back(db.id);
      } else if (const auto gap = frame_gap(*q.geotag, *db.geotag)) {
        if (*gap <= cfg.positive_frames) {
          t.positives.push_back(db.id);
        } else {
          t.negatives.push_back(db.id);
        }
      }
    }
    tuples.push_back(std::move(t));
  }
  return tuples;
}

namespace {

std::vector<std::size_t> ranks_by(std::span<const std::string> ids,
                                  std::span<const double> distances) {
  std::vector<std::size_t> order(ids.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return distances[a] < distances[b] || (distances[a] == distances[b] && ids[a] < ids[b]);
  });
  std::vector<std::size_t> rank(ids.size());
  for (std::size_t r = 0; r < order.size(); ++r) rank[order[r]] = r + 1;
  return rank;
}

std::size_t rank_gap(const RankPair& p) {
  return p.g_rank > p.l_rank ? p.g_rank - p.l_rank : p.l_rank - p.g_rank;
}

}  // namespace

std::vector<RankPair> rank_from_distances(std::span<const std::string> ids,
                                          std::span<const double> global_distances,
                                          std::span<const double> local_distances) {
  if (ids.size() != global_distances.size() || ids.size() != local_distances.size()) {
    throw Error(ErrorCode::kShapeMismatch, "ids and distance lists differ in length");
  }
  if (ids.empty()) throw Error(ErrorCode::kEmptyInput, "no positives to rank");
  const auto g = ranks_by(ids, global_distances);
  const auto l = ranks_by(ids, local_distances);
  std::vector<RankPair> out;
  out.reserve(ids.size());
  for (std::size_t k = 0; k < ids.size(); ++k) out.push_back({ids[k], g[k], l[k]});
  return out;
}

std::vector<RankPair> rank_positives(const PreparedImage& query,
                                     std::span<const NamedImage> positives,
                                     const DalfOptions& dalf) {
  std::vector<std::string> ids;
  std::vector<double> dg, dl;
  for (const auto& p : positives) {
    ids.push_back(p.id);
    dg.push_back(global_distance(query.global, p.image.global));
    dl.push_back(dalf_distance(p.image.grid, query.grid, dalf).local_distance);
  }
  return rank_from_distances(ids, dg, dl);
}

std::string select_semi_hard_positive(std::span<const RankPair> pairs, const MiningConfig& cfg) {
  const std::size_t k = cfg.k.resolve(pairs.size());
  const std::size_t k_prime = cfg.k_prime.resolve(pairs.size());
  const RankPair* best = nullptr;
  for (const auto& p : pairs) {
    if (p.g_rank > k && p.l_rank > k_prime) continue;
    if (best == nullptr) {
      best = &p;
      continue;
    }
    const auto gap = rank_gap(p), best_gap = rank_gap(*best);
    if (gap > best_gap || (gap == best_gap && (p.g_rank < best->g_rank ||
                                               (p.g_rank == best->g_rank && p.id < best->id)))) {
      best = &p;
    }
  }
  if (best == nullptr) {
    throw Error(ErrorCode::kNotFound, "no positive satisfies the rank cutoffs");
  }
  return best->id;
}

std::vector<std::string> sample_negative_pool(std::span<const std::string> negatives,
                                              std::size_t pool_size, std::mt19937_64& rng) {
  std::vector<std::string> pool;
  pool.reserve(std::min(pool_size, negatives.size()));
  std::sample(negatives.begin(), negatives.end(), std::back_inserter(pool), pool_size, rng);
  return pool;
}

std::vector<std::string> select_hard_negatives(const GlobalDescriptor& query,
                                               std::span<const NamedImage> pool,
                                               std::size_t count) {
  std::vector<std::pair<double, const std::string*>> scored;
  scored.reserve(pool.size());
  for (const auto& n : pool) scored.emplace_back(global_distance(query, n.image.global), &n.id);
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    return a.first < b.first || (a.first == b.first && *a.second < *b.second);
  });
  std::vector<std::string> out;
  for (std::size_t k = 0; k < std::min(count, scored.size()); ++k) out.push_back(*scored[k].second);
  return out;
}

double hinge_triplet_loss(double positive, std::span<const double> negatives, double margin) {
  double loss = 0.0;
  for (double n : negatives) loss += std::max(0.0, positive + margin - n);
  return loss;
}

double triplet_loss_global(const GlobalDescriptor& query, const GlobalDescriptor& positive,
                           std::span<const GlobalDescriptor> negatives, double margin) {
  std::vector<double> dn;
  for (const auto& n : negatives) dn.push_back(global_distance(query, n));
  return hinge_triplet_loss(global_distance(query, positive), dn, margin);
}

double triplet_loss_local(const LocalFeatureGrid& query, const LocalFeatureGrid& positive,
                          std::span<const LocalFeatureGrid> negatives, double margin,
                          const DalfOptions& dalf) {
  std::vector<double> dn;
  for (const auto& n : negatives) dn.push_back(dalf_distance(n, query, dalf).local_distance);
  return hinge_triplet_loss(dalf_distance(positive, query, dalf).local_distance, dn, margin);
}

double joint_loss(double global_loss, double local_loss, double lambda) {
  return global_loss + lambda * local_loss;
}

std::vector<MiningRecord> mine(const FeatureSetManifest& manifest, const MiningConfig& cfg,
                               const GemParams& gem, const DalfOptions& dalf) {
  validate(cfg);
  std::map<std::string, PreparedImage> cache;
  const auto load = [&](const std::string& id) -> const PreparedImage& {
    auto it = cache.find(id);
    if (it == cache.end()) {
      const ManifestEntry* e = manifest.find(id);
      if (e == nullptr) throw Error(ErrorCode::kNotFound, "unknown id " + id);
      it = cache.emplace(id, prepare_image(load_feature_map(e->path), gem)).first;
    }
    return it->second;
  };
  const auto named = [&](const std::vector<std::string>& ids) {
    std::vector<NamedImage> out;
    for (const auto& id : ids) out.push_back({id, load(id)});
    return out;
  };

  std::mt19937_64 rng(cfg.seed);
  std::vector<MiningRecord> records;
  for (const auto& tuple : build_training_tuples(manifest, cfg)) {
    if (tuple.positives.empty() || tuple.negatives.empty()) continue;
    const PreparedImage& query = load(tuple.query);
    const auto positives = named(tuple.positives);
    const auto pairs = rank_positives(query, positives, dalf);
    MiningRecord rec;
    rec.query = tuple.query;
    rec.positive = select_semi_hard_positive(pairs, cfg);
    for (const auto& p : pairs) {
      if (p.id == rec.positive) {
        rec.g_rank = p.g_rank;
        rec.l_rank = p.l_rank;
      }
    }
    const auto pool = named(sample_negative_pool(tuple.negatives, cfg.negative_pool, rng));
    rec.negatives = select_hard_negatives(query.global, pool, cfg.negatives_per_triplet);

    const PreparedImage& positive = load(rec.positive);
    std::vector<GlobalDescriptor> neg_global;
    std::vector<LocalFeatureGrid> neg_local;
    for (const auto& id : rec.negatives) {
      neg_global.push_back(load(id).global);
      neg_local.push_back(load(id).grid);
    }
    rec.global_loss = triplet_loss_global(query.global, positive.global, neg_global, cfg.margin);
    rec.local_loss = triplet_loss_local(query.grid, positive.grid, neg_local, cfg.margin, dalf);
    rec.loss = joint_loss(rec.global_loss, rec.local_loss, cfg.lambda);
    records.push_back(std::move(rec));
  }
  return records;
}

void write_mining_report(std::span<const MiningRecord> records, std::ostream& out) {
  for (const auto& r : records) {
    out << r.query << '\t' << r.positive << '\t' << r.g_rank << '\t' << r.l_rank;
    for (const auto& n : r.negatives) out << '\t' << n;
    out << '\n';
  }
}

}  // namespace aanet

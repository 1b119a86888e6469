// Copyright 2026 The CCL Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Weak-label pair mining from a clustering partition plus same-frame
// co-occurrence.
//
//   PosC      pairs inside one cluster (y = 0)
//   PosCNear  small clusters only: a member with a member of a nearby cluster (y = 0)
//   NegC      a member with a member of a far cluster (y = 1)
//   NVid      two faces seen in the same frame (y = 1)

#include "ccl/common.hpp"
#include "ccl/data_model.hpp"

#include <optional>
#include <set>
#include <string_view>
#include <unordered_set>

namespace ccl {

enum class PairSource : std::uint8_t { PosC, PosCNear, NegC, NVid };

inline std::string_view to_string(PairSource s) {
  switch (s) {
    case PairSource::PosC: return "PosC";
    case PairSource::PosCNear: return "PosC-near";
    case PairSource::NegC: return "NegC";
    case PairSource::NVid: return "NVid";
  }
  return "?";
}

inline PairSource parse_pair_source(std::string_view s) {
  if (s == "PosC") return PairSource::PosC;
  if (s == "PosC-near") return PairSource::PosCNear;
  if (s == "NegC") return PairSource::NegC;
  if (s == "NVid") return PairSource::NVid;
  throw FormatError("unknown pair source '" + std::string(s) + "'");
}

/// y follows the contrastive-loss convention: 0 = same identity, 1 = different.
struct Pair {
  int a = 0;
  int b = 0;
  int y = 0;
  PairSource source = PairSource::PosC;

  friend bool operator==(const Pair&, const Pair&) = default;
};

struct PairBatch {
  std::vector<Pair> pairs;
  std::vector<int> clusters;  // clusters the batch was drawn from

  std::size_t positives() const {
    return static_cast<std::size_t>(std::count_if(pairs.begin(), pairs.end(), [](const Pair& p) { return p.y == 0; }));
  }
  std::size_t negatives() const { return pairs.size() - positives(); }
};

struct MiningConfig {
  int z_near = 25;
  int z_far = 25;
  int small_cluster_threshold = 10;
  int clusters_per_batch = 5;
  int pos_per_cluster = 25;
  int neg_per_cluster = 25;
  std::uint64_t seed = 0;
  /// Add near-cluster positives for every cluster, not only small ones.
  bool near_positives_for_all = false;
  bool use_posc = true;
  bool use_negc = true;
  bool use_nvid = true;

  void validate() const {
    if (z_near < 1 || z_far < 1 || small_cluster_threshold < 1 || clusters_per_batch < 1 || pos_per_cluster < 1 ||
        neg_per_cluster < 1)
      throw ConfigError("mining: z_near, z_far, small_cluster_threshold, clusters_per_batch, pos_per_cluster and "
                        "neg_per_cluster must all be positive");
    if (pos_per_cluster != neg_per_cluster)
      throw ConfigError("mining: pos_per_cluster (" + std::to_string(pos_per_cluster) + ") must equal neg_per_cluster (" +
                        std::to_string(neg_per_cluster) + ")");
    if (!use_posc && !use_negc && !use_nvid) throw ConfigError("mining: every pair source is disabled");
  }
};

/// Per cluster, the closest and farthest other clusters by distance between
/// normalized means, ties to the lower index.
struct ClusterRanking {
  std::vector<std::vector<int>> nearest;
  std::vector<std::vector<int>> farthest;

  std::size_t size() const { return nearest.size(); }
};

template <typename Derived>
ClusterRanking rank_clusters(const Eigen::MatrixBase<Derived>& means, int z_near, int z_far) {
  const auto m = static_cast<std::size_t>(means.rows());
  if (m < 2) throw Error("rank_clusters: need at least 2 clusters, got " + std::to_string(m));
  if (z_near < 0 || z_far < 0) throw Error("rank_clusters: negative list length");
  MatrixD unit = means.template cast<double>();
  for (Eigen::Index r = 0; r < unit.rows(); ++r) {
    const double norm = unit.row(r).norm();
    if (norm > 0.0) unit.row(r) /= norm;
  }
  ClusterRanking ranks;
  ranks.nearest.resize(m);
  ranks.farthest.resize(m);
  std::vector<std::pair<double, int>> dist;
  for (std::size_t c = 0; c < m; ++c) {
    dist.clear();
    for (std::size_t o = 0; o < m; ++o) {
      if (o == c) continue;
      dist.emplace_back((unit.row(static_cast<Eigen::Index>(c)) - unit.row(static_cast<Eigen::Index>(o))).norm(), static_cast<int>(o));
    }
    const auto nn = std::min<std::size_t>(dist.size(), static_cast<std::size_t>(z_near));
    const auto nf = std::min<std::size_t>(dist.size(), static_cast<std::size_t>(z_far));
    auto near_cmp = [](const auto& x, const auto& y) { return x.first < y.first || (x.first == y.first && x.second < y.second); };
    auto far_cmp = [](const auto& x, const auto& y) { return x.first > y.first || (x.first == y.first && x.second < y.second); };
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(nn), dist.end(), near_cmp);
    for (std::size_t i = 0; i < nn; ++i) ranks.nearest[c].push_back(dist[i].second);
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(nf), dist.end(), far_cmp);
    for (std::size_t i = 0; i < nf; ++i) ranks.farthest[c].push_back(dist[i].second);
  }
  return ranks;
}

/// Splits clusters that contain both faces of a same-frame pair. Within a
/// cluster, violating pairs are visited in ascending order; the face nearer
/// the cluster mean stays and the other is rejected (ties keep the lower
/// index). All faces rejected from one cluster form one new cluster, which
/// is checked in turn, until no cluster holds a co-occurring pair.
/// Original cluster ids are kept; new clusters get ids M, M+1, ...
template <typename Derived>
Labels apply_video_correction(const Labels& partition, const CooccurrenceSet& cooc, const Eigen::MatrixBase<Derived>& points) {
  if (static_cast<Eigen::Index>(partition.size()) != points.rows())
    throw Error("apply_video_correction: partition size does not match feature rows");
  Labels labels = partition;
  if (cooc.empty()) return labels;
  const auto n = partition.size();
  std::vector<std::vector<int>> partners(n);
  for (const auto& [a, b] : cooc.pairs) {
    if (a < 0 || b < 0 || static_cast<std::size_t>(a) >= n || static_cast<std::size_t>(b) >= n)
      throw Error("apply_video_correction: co-occurrence index out of range");
    partners[static_cast<std::size_t>(a)].push_back(b);
    partners[static_cast<std::size_t>(b)].push_back(a);
  }
  for (auto& p : partners) std::sort(p.begin(), p.end());

  std::vector<std::vector<int>> members = cluster_members(labels);
  for (std::size_t c = 0; c < members.size(); ++c) {
    // members[c] may reallocate below, so work on a copy
    const std::vector<int> current = members[c];
    if (current.size() < 2) continue;
    const int cid = static_cast<int>(c);
    std::vector<std::pair<int, int>> violations;
    for (int a : current)
      for (int b : partners[static_cast<std::size_t>(a)])
        if (b > a && labels[static_cast<std::size_t>(b)] == cid) violations.emplace_back(a, b);
    if (violations.empty()) continue;
    std::sort(violations.begin(), violations.end());

    RowVectorX<double> mean = RowVectorX<double>::Zero(points.cols());
    for (int i : current) mean += points.row(i).template cast<double>();
    mean /= static_cast<double>(current.size());
    auto dist = [&](int i) { return (points.row(i).template cast<double>() - mean).squaredNorm(); };

    std::set<int> rejected;
    for (const auto& [a, b] : violations) {
      if (rejected.count(a) || rejected.count(b)) continue;
      rejected.insert(dist(b) < dist(a) ? a : b);
    }
    const int new_id = static_cast<int>(members.size());
    std::vector<int> kept, moved;
    for (int i : current) (rejected.count(i) ? moved : kept).push_back(i);
    for (int i : moved) labels[static_cast<std::size_t>(i)] = new_id;
    members[c] = std::move(kept);
    members.push_back(std::move(moved));
  }
  return labels;
}

namespace detail {

/// Decodes u in [0, n(n-1)/2) to the u-th pair (i < j) in row-major order.
inline std::pair<std::size_t, std::size_t> triangular_pair(std::uint64_t u, std::uint64_t n) {
  // Row i starts at offset i*n - i*(i+1)/2 - ... ; invert with a float
  // estimate and fix it up.
  auto row_start = [n](std::uint64_t i) { return i * (2 * n - i - 1) / 2; };
  const double nn = static_cast<double>(n);
  auto i = static_cast<std::uint64_t>(std::max(0.0, std::floor(((2 * nn - 1) - std::sqrt((2 * nn - 1) * (2 * nn - 1) - 8.0 * static_cast<double>(u))) / 2)));
  if (i > n - 2) i = n - 2;
  while (i > 0 && row_start(i) > u) --i;
  while (i + 1 < n - 1 && row_start(i + 1) <= u) ++i;
  const std::uint64_t j = i + 1 + (u - row_start(i));
  return {static_cast<std::size_t>(i), static_cast<std::size_t>(j)};
}

/// Draws k indices from [0, total): without replacement when total >= k,
/// otherwise every index once followed by uniform draws with replacement.
inline std::vector<std::uint64_t> subsample_indices(std::uint64_t total, std::size_t k, Rng& rng) {
  std::vector<std::uint64_t> out;
  if (total == 0) return out;
  out.reserve(k);
  if (total < k) {
    for (std::uint64_t i = 0; i < total; ++i) out.push_back(i);
    while (out.size() < k) out.push_back(uniform_index(rng, total));
    return out;
  }
  if (total <= 4 * static_cast<std::uint64_t>(k)) {
    std::vector<std::uint64_t> pool(static_cast<std::size_t>(total));
    std::iota(pool.begin(), pool.end(), std::uint64_t{0});
    for (std::size_t i = 0; i < k; ++i) {
      const auto j = i + static_cast<std::size_t>(uniform_index(rng, total - i));
      std::swap(pool[i], pool[j]);
      out.push_back(pool[i]);
    }
    return out;
  }
  std::unordered_set<std::uint64_t> seen;
  while (out.size() < k) {
    const auto u = uniform_index(rng, total);
    if (seen.insert(u).second) out.push_back(u);
  }
  return out;
}

}  // namespace detail

/// Seeded, single-threaded pair generator over a fixed partition. Each call
/// to next_epoch() visits every cluster once in shuffled order, five (by
/// default) clusters per batch. The final batch is topped up with clusters
/// from the start of the epoch order so every batch has the same shape.
class PairMiner {
 public:
  PairMiner(Labels partition, ClusterRanking ranks, const CooccurrenceSet& cooc, MiningConfig cfg)
      : labels_(std::move(partition)), ranks_(std::move(ranks)), cfg_(cfg), rng_(cfg.seed) {
    cfg_.validate();
    members_ = cluster_members(labels_);
    if (members_.size() < 2) throw Error("mine_batches: partition has a single cluster, cannot mine negative pairs");
    if (ranks_.size() != members_.size())
      throw Error("mine_batches: ranking covers " + std::to_string(ranks_.size()) + " clusters but partition has " +
                  std::to_string(members_.size()));
    partners_.resize(labels_.size());
    for (const auto& [a, b] : cooc.pairs) {
      if (a < 0 || b < 0 || static_cast<std::size_t>(a) >= labels_.size() || static_cast<std::size_t>(b) >= labels_.size())
        throw Error("mine_batches: co-occurrence index out of range");
      partners_[static_cast<std::size_t>(a)].push_back(b);
      partners_[static_cast<std::size_t>(b)].push_back(a);
    }
    for (auto& p : partners_) std::sort(p.begin(), p.end());
  }

  std::size_t num_clusters() const { return members_.size(); }
  std::size_t batches_per_epoch() const {
    const auto cpb = static_cast<std::size_t>(cfg_.clusters_per_batch);
    return (members_.size() + cpb - 1) / cpb;
  }
  const MiningConfig& config() const { return cfg_; }
  const Labels& partition() const { return labels_; }

  std::vector<PairBatch> next_epoch() {
    std::vector<int> order(members_.size());
    std::iota(order.begin(), order.end(), 0);
    shuffle(order, rng_);
    const auto cpb = static_cast<std::size_t>(cfg_.clusters_per_batch);
    std::vector<PairBatch> batches;
    for (std::size_t start = 0; start < order.size(); start += cpb) {
      PairBatch batch;
      for (std::size_t k = 0; k < cpb; ++k) {
        const int c = order[(start + k) % order.size()];
        batch.clusters.push_back(c);
        mine_cluster(c, batch.pairs);
      }
      batches.push_back(std::move(batch));
    }
    return batches;
  }

 private:
  bool cooccur(int a, int b) const {
    const auto& p = partners_[static_cast<std::size_t>(a)];
    return std::binary_search(p.begin(), p.end(), b);
  }

  int random_member_of_one(const std::vector<int>& clusters) {
    const int other = clusters[static_cast<std::size_t>(uniform_index(rng_, clusters.size()))];
    const auto& mem = members_[static_cast<std::size_t>(other)];
    return mem[static_cast<std::size_t>(uniform_index(rng_, mem.size()))];
  }

  void mine_cluster(int c, std::vector<Pair>& out) {
    const auto& mem = members_[static_cast<std::size_t>(c)];
    const auto n = static_cast<std::uint64_t>(mem.size());

    if (cfg_.use_posc) {
      std::vector<Pair> near;
      const auto& nearest = ranks_.nearest[static_cast<std::size_t>(c)];
      if (!nearest.empty() && (static_cast<int>(n) < cfg_.small_cluster_threshold || cfg_.near_positives_for_all)) {
        for (int a : mem) {
          const int b = random_member_of_one(nearest);
          if (!cooccur(a, b)) near.push_back({a, b, 0, PairSource::PosCNear});
        }
      }
      // Within-cluster pairs are indexed implicitly; pairs that co-occur in
      // a frame (only possible without correction) are replaced by redraws.
      const std::uint64_t within = n * (n - 1) / 2;
      auto within_pair = [&](std::uint64_t u) {
        const auto [i, j] = detail::triangular_pair(u, n);
        return Pair{mem[i], mem[j], 0, PairSource::PosC};
      };
      std::vector<Pair> valid_within;
      const bool enumerate = within <= 4096;
      if (enumerate) {
        for (std::uint64_t u = 0; u < within; ++u) {
          const Pair p = within_pair(u);
          if (!cooccur(p.a, p.b)) valid_within.push_back(p);
        }
      }
      const std::uint64_t w = enumerate ? valid_within.size() : within;
      const auto total = w + near.size();
      const auto k = static_cast<std::size_t>(cfg_.pos_per_cluster);
      std::unordered_set<std::uint64_t> drawn;
      for (std::uint64_t u : detail::subsample_indices(total, k, rng_)) {
        if (u >= w) {
          out.push_back(near[static_cast<std::size_t>(u - w)]);
        } else if (enumerate) {
          out.push_back(valid_within[static_cast<std::size_t>(u)]);
        } else {
          Pair p = within_pair(u);
          while (cooccur(p.a, p.b) || !drawn.insert(u).second) {
            u = uniform_index(rng_, within);
            p = within_pair(u);
          }
          out.push_back(p);
        }
      }
    }

    std::vector<Pair> negatives;
    const auto& farthest = ranks_.farthest[static_cast<std::size_t>(c)];
    if (cfg_.use_negc && !farthest.empty()) {
      for (int a : mem)
        for (int rep = 0; rep < 2; ++rep) negatives.push_back({a, random_member_of_one(farthest), 1, PairSource::NegC});
    }
    if (cfg_.use_nvid) {
      for (int a : mem)
        for (int b : partners_[static_cast<std::size_t>(a)])
          if (labels_[static_cast<std::size_t>(b)] != c || a < b) negatives.push_back({a, b, 1, PairSource::NVid});
    }
    for (std::uint64_t u : detail::subsample_indices(negatives.size(), static_cast<std::size_t>(cfg_.neg_per_cluster), rng_))
      out.push_back(negatives[static_cast<std::size_t>(u)]);
  }

  Labels labels_;
  ClusterRanking ranks_;
  MiningConfig cfg_;
  Rng rng_;
  std::vector<std::vector<int>> members_;
  std::vector<std::vector<int>> partners_;
};

inline PairMiner mine_batches(Labels partition, ClusterRanking ranks, const CooccurrenceSet& cooc, const MiningConfig& cfg) {
  return PairMiner(std::move(partition), std::move(ranks), cooc, cfg);
}

/// Pair audit CSV: a,b,y,source. One row per pair, batches in order.
inline void write_pairs_csv(std::ostream& out, const std::vector<PairBatch>& batches) {
  out << "a,b,y,source\n";
  for (const auto& batch : batches)
    for (const auto& p : batch.pairs) out << p.a << ',' << p.b << ',' << p.y << ',' << to_string(p.source) << '\n';
}

}  // namespace ccl

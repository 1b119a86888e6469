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

// Ward-linkage agglomerative clustering.
//
// Distances live in a condensed N(N-1)/2 matrix of squared Euclidean
// distances and are updated with the Lance-Williams recurrence. Merges are
// found with the nearest-neighbor chain, which yields the same dendrogram
// as greedy merging for a reducible linkage such as Ward, in a different
// order; sorting the merges by height restores the greedy order before the
// tree is cut at the requested cluster count.

#include "ccl/common.hpp"
#include "ccl/finch.hpp"

namespace ccl {

struct WardMerge {
  int cluster_a = 0;  // ids 0..N-1 are samples; merge k creates id N+k
  int cluster_b = 0;
  double ward_cost = 0.0;  // merge height sqrt(2 * increase in within-cluster SSE)
  int size = 0;            // size of the merged cluster
};

struct HacResult {
  Labels labels;                 // exactly `num_clusters` distinct ids, by first occurrence
  std::vector<WardMerge> merges; // the N - c merges applied, non-decreasing cost
};

namespace detail {

class CondensedMatrix {
 public:
  explicit CondensedMatrix(std::size_t n) : n_(n), data_(n * (n - 1) / 2) {}

  double& operator()(std::size_t i, std::size_t j) { return data_[index(i, j)]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[index(i, j)]; }

 private:
  std::size_t index(std::size_t i, std::size_t j) const {
    if (i > j) std::swap(i, j);
    return n_ * i - i * (i + 1) / 2 + (j - i - 1);
  }
  std::size_t n_;
  std::vector<double> data_;
};

struct RawMerge {
  int a, b;
  double dist2;
};

}  // namespace detail

/// Ward clustering stopped at `num_clusters` clusters. Ties in the
/// neighbor search go to the lowest index, except that the chain's previous
/// element wins a tie (the rule that guarantees the chain terminates).
template <typename Derived>
HacResult ward_hac(const Eigen::MatrixBase<Derived>& points, int num_clusters) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (num_clusters < 1) throw Error("ward_hac: number of clusters must be >= 1");
  if (static_cast<std::size_t>(num_clusters) > n)
    throw Error("ward_hac: requested " + std::to_string(num_clusters) + " clusters from only " + std::to_string(n) + " points");
  HacResult result;
  if (static_cast<std::size_t>(num_clusters) == n) {
    result.labels.resize(n);
    std::iota(result.labels.begin(), result.labels.end(), 0);
    return result;
  }

  const MatrixD x = points.template cast<double>();
  detail::CondensedMatrix dist(n);
  detail::parallel_chunks(n, 64, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        dist(i, j) = (x.row(static_cast<Eigen::Index>(i)) - x.row(static_cast<Eigen::Index>(j))).squaredNorm();
  });

  std::vector<int> size(n, 1);
  std::vector<int> active(n);
  std::iota(active.begin(), active.end(), 0);
  std::vector<detail::RawMerge> raw;
  raw.reserve(n - 1);
  std::vector<int> chain;
  chain.reserve(n);

  while (active.size() > 1) {
    if (chain.empty()) chain.push_back(active.front());
    const int a = chain.back();
    const int prev = chain.size() >= 2 ? chain[chain.size() - 2] : -1;
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (int k : active) {
      if (k == a) continue;
      const double d = dist(static_cast<std::size_t>(a), static_cast<std::size_t>(k));
      if (d < best_d) {
        best_d = d;
        best = k;
      }
    }
    if (prev >= 0 && dist(static_cast<std::size_t>(a), static_cast<std::size_t>(prev)) <= best_d) best = prev;
    if (best != prev) {
      chain.push_back(best);
      continue;
    }
    chain.pop_back();
    chain.pop_back();
    const int lo = std::min(a, best), hi = std::max(a, best);
    const double d_ab = dist(static_cast<std::size_t>(lo), static_cast<std::size_t>(hi));
    raw.push_back({lo, hi, d_ab});
    const double na = size[static_cast<std::size_t>(lo)], nb = size[static_cast<std::size_t>(hi)];
    for (int k : active) {
      if (k == lo || k == hi) continue;
      const double nk = size[static_cast<std::size_t>(k)];
      auto& slot = dist(static_cast<std::size_t>(lo), static_cast<std::size_t>(k));
      slot = ((na + nk) * slot + (nb + nk) * dist(static_cast<std::size_t>(hi), static_cast<std::size_t>(k)) - nk * d_ab) /
             (na + nb + nk);
    }
    size[static_cast<std::size_t>(lo)] += size[static_cast<std::size_t>(hi)];
    active.erase(std::lower_bound(active.begin(), active.end(), hi));
  }

  std::stable_sort(raw.begin(), raw.end(), [](const auto& l, const auto& r) { return l.dist2 < r.dist2; });

  // Replay the sorted merges on sample ids to name clusters and cut.
  const std::size_t to_apply = n - static_cast<std::size_t>(num_clusters);
  detail::DisjointSets sets(n);
  std::vector<int> cluster_id(n);
  std::vector<int> cluster_size(n, 1);
  std::iota(cluster_id.begin(), cluster_id.end(), 0);
  for (std::size_t m = 0; m < to_apply; ++m) {
    const auto ra = sets.find(static_cast<std::size_t>(raw[m].a));
    const auto rb = sets.find(static_cast<std::size_t>(raw[m].b));
    WardMerge merge;
    merge.cluster_a = std::min(cluster_id[ra], cluster_id[rb]);
    merge.cluster_b = std::max(cluster_id[ra], cluster_id[rb]);
    merge.ward_cost = std::sqrt(std::max(0.0, raw[m].dist2));
    merge.size = cluster_size[ra] + cluster_size[rb];
    sets.unite(ra, rb);
    const auto root = sets.find(ra);
    cluster_id[root] = static_cast<int>(n + m);
    cluster_size[root] = merge.size;
    result.merges.push_back(merge);
  }
  Labels roots(n);
  for (std::size_t i = 0; i < n; ++i) roots[i] = static_cast<int>(sets.find(i));
  result.labels = relabel_contiguous(roots);
  return result;
}

}  // namespace ccl

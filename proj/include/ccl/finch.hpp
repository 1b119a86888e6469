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

// First-neighbor clustering (FINCH).
//
// Every item is linked to its nearest other item; connected components of
// that graph form one partition. The next partition repeats the step on
// the cluster means, so each level coarsens the one before it.

#include "ccl/common.hpp"
#include "ccl/metrics.hpp"

namespace ccl {

/// kappa[i] is the index of the nearest other item to item i.
struct FirstNeighborMap {
  std::vector<int> kappa;

  std::size_t size() const { return kappa.size(); }
};

struct PartitionHierarchy {
  std::vector<Labels> partitions;    // finest first
  std::vector<int> cluster_counts;   // strictly decreasing
  std::vector<MatrixF> means;        // per partition, l2-normalized cluster means

  std::size_t num_partitions() const { return partitions.size(); }

  /// 1-based, matching the usual "partition 1, partition 2" naming.
  const Labels& partition(std::size_t level) const {
    if (level < 1 || level > partitions.size())
      throw Error("partition " + std::to_string(level) + " requested but the hierarchy has L=" +
                  std::to_string(partitions.size()) + " partitions");
    return partitions[level - 1];
  }
};

struct FinchOptions {
  /// Rows per similarity block; bounds scratch memory at chunk x M doubles.
  std::size_t chunk_rows = 256;
  bool parallel = true;
};

namespace detail {

template <typename Derived>
MatrixD normalized_rows(const Eigen::MatrixBase<Derived>& points) {
  MatrixD out = points.template cast<double>();
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    const double norm = out.row(r).norm();
    if (norm > 0.0) out.row(r) /= norm;
  }
  return out;
}

}  // namespace detail

/// Nearest neighbor under cosine distance, ties to the lowest index. The
/// search is exact and runs over row blocks; blocks are independent, so the
/// parallel and serial paths give identical answers.
template <typename Derived>
FirstNeighborMap first_neighbors(const Eigen::MatrixBase<Derived>& points, const FinchOptions& opts = {}) {
  const auto m = static_cast<std::size_t>(points.rows());
  if (m < 2) throw Error("first_neighbors: need at least 2 items, got " + std::to_string(m));
  for (Eigen::Index r = 0; r < points.rows(); ++r)
    if (!points.row(r).allFinite()) throw Error("first_neighbors: row " + std::to_string(r) + " is not finite");

  const MatrixD unit = detail::normalized_rows(points);
  FirstNeighborMap out;
  out.kappa.assign(m, -1);
  const std::size_t chunk = std::max<std::size_t>(1, opts.chunk_rows);

  auto work = [&](std::size_t begin, std::size_t end) {
    const auto rows = static_cast<Eigen::Index>(end - begin);
    MatrixD sim(rows, static_cast<Eigen::Index>(m));
    sim.noalias() = unit.middleRows(static_cast<Eigen::Index>(begin), rows) * unit.transpose();
    for (Eigen::Index r = 0; r < rows; ++r) {
      const auto i = static_cast<Eigen::Index>(begin) + r;
      int best = -1;
      double best_sim = -std::numeric_limits<double>::infinity();
      for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(m); ++j) {
        if (j == i) continue;
        if (sim(r, j) > best_sim) {
          best_sim = sim(r, j);
          best = static_cast<int>(j);
        }
      }
      out.kappa[static_cast<std::size_t>(i)] = best;
    }
  };
  if (opts.parallel) {
    detail::parallel_chunks(m, chunk, work);
  } else {
    for (std::size_t b = 0; b < m; b += chunk) work(b, std::min(m, b + chunk));
  }
  return out;
}

namespace detail {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n), rank_(n, 0) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<int> rank_;
};

}  // namespace detail

/// Connected components of the graph with an edge (i, kappa[i]) per item.
/// The shared-neighbor links (kappa[i] == kappa[j]) are implied by those
/// edges. Components are numbered by first occurrence.
inline Labels link_components(const FirstNeighborMap& neighbors) {
  const auto n = neighbors.size();
  detail::DisjointSets sets(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int k = neighbors.kappa[i];
    if (k < 0 || static_cast<std::size_t>(k) >= n || static_cast<std::size_t>(k) == i)
      throw Error("link_components: invalid neighbor " + std::to_string(k) + " for item " + std::to_string(i));
    sets.unite(i, static_cast<std::size_t>(k));
  }
  Labels roots(n);
  for (std::size_t i = 0; i < n; ++i) roots[i] = static_cast<int>(sets.find(i));
  return relabel_contiguous(roots);
}

/// Mean of the rows in each cluster, l2-normalized. A mean that cancels to
/// exactly zero is left as the zero vector.
template <typename Derived>
MatrixD cluster_means(const Eigen::MatrixBase<Derived>& points, const Labels& labels) {
  if (static_cast<Eigen::Index>(labels.size()) != points.rows())
    throw Error("cluster_means: " + std::to_string(labels.size()) + " labels for " + std::to_string(points.rows()) + " rows");
  const int k = count_clusters(labels);
  MatrixD sums = MatrixD::Zero(k, points.cols());
  std::vector<long long> counts(static_cast<std::size_t>(k), 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0) throw Error("cluster_means: negative label at row " + std::to_string(i));
    sums.row(labels[i]) += points.row(static_cast<Eigen::Index>(i)).template cast<double>();
    ++counts[static_cast<std::size_t>(labels[i])];
  }
  for (int c = 0; c < k; ++c) {
    if (counts[static_cast<std::size_t>(c)] == 0) throw Error("cluster_means: cluster " + std::to_string(c) + " is empty");
    sums.row(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);
    const double norm = sums.row(c).norm();
    if (norm > 0.0) sums.row(c) /= norm;
  }
  return sums;
}

/// Builds the partition hierarchy. Level 1 links samples; each further
/// level links the previous level's clusters through the means of their
/// member samples. Stops before a level would collapse to one cluster.
template <typename Derived>
PartitionHierarchy finch_hierarchy(const Eigen::MatrixBase<Derived>& points, const FinchOptions& opts = {}) {
  if (points.rows() < 2) throw Error("finch_hierarchy: need at least 2 samples");
  PartitionHierarchy h;
  Labels current = link_components(first_neighbors(points, opts));
  int count = count_clusters(current);
  for (;;) {
    MatrixD means = cluster_means(points, current);
    h.partitions.push_back(current);
    h.cluster_counts.push_back(count);
    h.means.push_back(means.cast<float>());
    if (count < 2) break;

    const Labels merged = link_components(first_neighbors(means, opts));
    Labels next(current.size());
    for (std::size_t i = 0; i < current.size(); ++i) next[i] = merged[static_cast<std::size_t>(current[i])];
    next = relabel_contiguous(next);
    const int next_count = count_clusters(next);
    if (next_count <= 1 || next_count >= count) break;
    current = std::move(next);
    count = next_count;
  }
  return h;
}

/// Purity of a partition against ground truth (the ACC of wcp).
inline double partition_purity(const Labels& labels, const Labels& gt) { return wcp(labels, gt).acc; }

}  // namespace ccl

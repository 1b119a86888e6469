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

// Mini-batch K-means (Sculley 2010) used as an alternative weak-label
// source next to FINCH.

#include "ccl/common.hpp"

namespace ccl {

struct KMeansConfig {
  int k = 8;
  int batch_size = 1024;
  int max_iters = 100;
  std::uint64_t seed = 0;
  /// k-means++ seeding runs on a random subsample of this many points per center.
  int init_subsample_factor = 10;

  void validate(std::size_t n) const {
    if (k < 1) throw ConfigError("kmeans: k must be >= 1");
    if (static_cast<std::size_t>(k) > n)
      throw ConfigError("kmeans: k=" + std::to_string(k) + " exceeds the number of points N=" + std::to_string(n));
    if (batch_size < 1) throw ConfigError("kmeans: batch_size must be >= 1");
    if (max_iters < 0) throw ConfigError("kmeans: max_iters must be >= 0");
    if (init_subsample_factor < 1) throw ConfigError("kmeans: init_subsample_factor must be >= 1");
  }
};

struct KMeansResult {
  Labels labels;
  MatrixD centers;          // one row per non-empty cluster, matching labels
  int requested_k = 0;
  int effective_k = 0;      // < requested_k when clusters ended up empty
  double cost = 0.0;        // sum of squared distances to assigned center
  std::vector<double> cost_trace;  // full-data cost after each iteration, if requested
};

namespace detail {

inline int nearest_center(const MatrixD& centers, const RowVectorX<double>& x, double* dist_out = nullptr) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (Eigen::Index c = 0; c < centers.rows(); ++c) {
    const double d = (centers.row(c) - x).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  if (dist_out) *dist_out = best_d;
  return best;
}

inline double quantization_cost(const MatrixD& data, const MatrixD& centers, Labels* assign = nullptr) {
  double cost = 0.0;
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    double d = 0.0;
    const int c = nearest_center(centers, data.row(i), &d);
    if (assign) (*assign)[static_cast<std::size_t>(i)] = c;
    cost += d;
  }
  return cost;
}

/// k-means++ over a subsample of the rows.
inline MatrixD kmeanspp_seed(const MatrixD& data, int k, std::size_t subsample, Rng& rng) {
  const auto n = static_cast<std::size_t>(data.rows());
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), 0);
  const std::size_t s = std::min(n, std::max<std::size_t>(subsample, static_cast<std::size_t>(k)));
  for (std::size_t i = 0; i < s; ++i) {
    const auto j = i + static_cast<std::size_t>(uniform_index(rng, n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(s);

  MatrixD centers(k, data.cols());
  std::vector<bool> taken(s, false);
  std::size_t first = static_cast<std::size_t>(uniform_index(rng, s));
  centers.row(0) = data.row(static_cast<Eigen::Index>(pool[first]));
  taken[first] = true;
  std::vector<double> d2(s);
  for (std::size_t i = 0; i < s; ++i) d2[i] = (data.row(static_cast<Eigen::Index>(pool[i])) - centers.row(0)).squaredNorm();

  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (std::size_t i = 0; i < s; ++i) total += taken[i] ? 0.0 : d2[i];
    std::size_t pick = s;
    if (total > 0.0) {
      double target = uniform_real(rng) * total;
      for (std::size_t i = 0; i < s; ++i) {
        if (taken[i] || d2[i] <= 0.0) continue;
        pick = i;
        target -= d2[i];
        if (target < 0.0) break;
      }
    }
    if (pick == s) {
      // every remaining candidate coincides with a center
      std::vector<std::size_t> free;
      for (std::size_t i = 0; i < s; ++i)
        if (!taken[i]) free.push_back(i);
      pick = free[static_cast<std::size_t>(uniform_index(rng, free.size()))];
    }
    taken[pick] = true;
    centers.row(c) = data.row(static_cast<Eigen::Index>(pool[pick]));
    for (std::size_t i = 0; i < s; ++i)
      d2[i] = std::min(d2[i], (data.row(static_cast<Eigen::Index>(pool[i])) - centers.row(c)).squaredNorm());
  }
  return centers;
}

}  // namespace detail

/// Mini-batch K-means with per-center learning rate 1/count and a fixed
/// iteration budget. Deterministic for a given seed. Clusters left empty
/// after the final assignment are dropped and labels renumbered.
template <typename Derived>
KMeansResult minibatch_kmeans(const Eigen::MatrixBase<Derived>& points, const KMeansConfig& cfg, bool trace_cost = false) {
  const auto n = static_cast<std::size_t>(points.rows());
  cfg.validate(n);
  if (!points.allFinite()) throw Error("minibatch_kmeans: input contains non-finite values");
  const MatrixD data = points.template cast<double>();
  Rng rng(cfg.seed);

  MatrixD centers =
      detail::kmeanspp_seed(data, cfg.k, static_cast<std::size_t>(cfg.init_subsample_factor) * static_cast<std::size_t>(cfg.k), rng);
  std::vector<long long> counts(static_cast<std::size_t>(cfg.k), 0);
  std::vector<std::size_t> batch(static_cast<std::size_t>(cfg.batch_size));
  std::vector<int> cached(batch.size());

  KMeansResult result;
  result.requested_k = cfg.k;
  for (int it = 0; it < cfg.max_iters; ++it) {
    for (auto& b : batch) b = static_cast<std::size_t>(uniform_index(rng, n));
    for (std::size_t b = 0; b < batch.size(); ++b)
      cached[b] = detail::nearest_center(centers, data.row(static_cast<Eigen::Index>(batch[b])));
    for (std::size_t b = 0; b < batch.size(); ++b) {
      const auto c = static_cast<std::size_t>(cached[b]);
      const double eta = 1.0 / static_cast<double>(++counts[c]);
      centers.row(static_cast<Eigen::Index>(c)) =
          (1.0 - eta) * centers.row(static_cast<Eigen::Index>(c)) + eta * data.row(static_cast<Eigen::Index>(batch[b]));
    }
    if (trace_cost) result.cost_trace.push_back(detail::quantization_cost(data, centers));
  }

  Labels assign(n);
  result.cost = detail::quantization_cost(data, centers, &assign);
  std::vector<int> remap(static_cast<std::size_t>(cfg.k), -1);
  for (int a : assign) remap[static_cast<std::size_t>(a)] = 0;
  int next = 0;
  for (auto& r : remap)
    if (r == 0) r = next++;
  result.effective_k = next;
  result.centers.resize(next, data.cols());
  for (int c = 0; c < cfg.k; ++c)
    if (remap[static_cast<std::size_t>(c)] >= 0) result.centers.row(remap[static_cast<std::size_t>(c)]) = centers.row(c);
  result.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) result.labels[i] = remap[static_cast<std::size_t>(assign[i])];
  return result;
}

}  // namespace ccl

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

// Slow reference implementations written straight from the definitions.
// Nothing here includes the library, so a library bug cannot leak into
// its own oracle.

#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <queue>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Mat = Eigen::MatrixXd;
using Labels = std::vector<int>;

/// Renames labels to 0,1,2,... in order of first appearance.
inline Labels canonical(const Labels& labels) {
  std::map<int, int> seen;
  Labels out;
  out.reserve(labels.size());
  for (int l : labels) {
    auto it = seen.find(l);
    if (it == seen.end()) it = seen.emplace(l, static_cast<int>(seen.size())).first;
    out.push_back(it->second);
  }
  return out;
}

inline int num_distinct(const Labels& labels) {
  std::map<int, int> seen;
  for (int l : labels) seen[l] = 1;
  return static_cast<int>(seen.size());
}

/// Nearest neighbor by cosine similarity, smallest index among equals.
inline std::vector<int> first_neighbor(const Mat& x) {
  const auto n = x.rows();
  std::vector<int> kappa(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    double best = -std::numeric_limits<double>::infinity();
    int arg = -1;
    const double ni = x.row(i).norm();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      const double s = x.row(i).dot(x.row(j)) / (ni * x.row(j).norm());
      if (s > best) {
        best = s;
        arg = static_cast<int>(j);
      }
    }
    kappa[static_cast<std::size_t>(i)] = arg;
  }
  return kappa;
}

/// Builds the full 0/1 adjacency A(i,j) = [j = k_i or k_j = i or k_i = k_j]
/// and labels its connected components by breadth-first search.
inline Labels adjacency_components(const std::vector<int>& kappa) {
  const auto n = kappa.size();
  std::vector<std::vector<char>> adj(n, std::vector<char>(n, 0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && (kappa[i] == static_cast<int>(j) || kappa[j] == static_cast<int>(i) || kappa[i] == kappa[j])) adj[i][j] = 1;
  Labels label(n, -1);
  int next = 0;
  for (std::size_t s = 0; s < n; ++s) {
    if (label[s] >= 0) continue;
    std::queue<std::size_t> q;
    q.push(s);
    label[s] = next;
    while (!q.empty()) {
      const auto u = q.front();
      q.pop();
      for (std::size_t v = 0; v < n; ++v)
        if (adj[u][v] && label[v] < 0) {
          label[v] = next;
          q.push(v);
        }
    }
    ++next;
  }
  return label;
}

/// Full FINCH hierarchy: recurse on the means of the original samples, stop
/// before a single cluster or when a round merges nothing.
inline std::vector<Labels> finch(const Mat& x) {
  std::vector<Labels> parts;
  Labels current = adjacency_components(first_neighbor(x));
  int count = num_distinct(current);
  for (;;) {
    parts.push_back(current);
    if (count < 2) break;
    Mat means = Mat::Zero(count, x.cols());
    std::vector<int> sizes(static_cast<std::size_t>(count), 0);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      means.row(current[static_cast<std::size_t>(i)]) += x.row(i);
      ++sizes[static_cast<std::size_t>(current[static_cast<std::size_t>(i)])];
    }
    for (int c = 0; c < count; ++c) means.row(c) /= sizes[static_cast<std::size_t>(c)];
    const Labels merged = adjacency_components(first_neighbor(means));
    Labels next(current.size());
    for (std::size_t i = 0; i < current.size(); ++i) next[i] = merged[static_cast<std::size_t>(current[i])];
    next = canonical(next);
    const int next_count = num_distinct(next);
    if (next_count <= 1 || next_count >= count) break;
    current = next;
    count = next_count;
  }
  return parts;
}

/// Ward by recomputing every pairwise merge cost from cluster centroids
/// at every step: cost(A,B) = |A||B|/(|A|+|B|) * ||mu_A - mu_B||^2.
inline Labels ward(const Mat& x, int c) {
  const auto n = static_cast<int>(x.rows());
  std::vector<std::vector<int>> clusters(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) clusters[static_cast<std::size_t>(i)] = {i};
  auto centroid = [&](const std::vector<int>& m) {
    Eigen::RowVectorXd mu = Eigen::RowVectorXd::Zero(x.cols());
    for (int i : m) mu += x.row(i);
    return Eigen::RowVectorXd(mu / static_cast<double>(m.size()));
  };
  while (static_cast<int>(clusters.size()) > c) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t ba = 0, bb = 1;
    for (std::size_t a = 0; a < clusters.size(); ++a)
      for (std::size_t b = a + 1; b < clusters.size(); ++b) {
        const double na = static_cast<double>(clusters[a].size()), nb = static_cast<double>(clusters[b].size());
        const double cost = na * nb / (na + nb) * (centroid(clusters[a]) - centroid(clusters[b])).squaredNorm();
        if (cost < best) {
          best = cost;
          ba = a;
          bb = b;
        }
      }
    clusters[ba].insert(clusters[ba].end(), clusters[bb].begin(), clusters[bb].end());
    clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(bb));
  }
  Labels out(static_cast<std::size_t>(n));
  for (std::size_t k = 0; k < clusters.size(); ++k)
    for (int i : clusters[k]) out[static_cast<std::size_t>(i)] = static_cast<int>(k);
  return canonical(out);
}

struct BCubed {
  double p, r, f;
};

/// Item-by-item definition, pairs counted directly.
inline BCubed bcubed(const Labels& pred, const Labels& gt) {
  const auto n = pred.size();
  double p = 0.0, r = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double both = 0, same_cluster = 0, same_class = 0;
    for (std::size_t j = 0; j < n; ++j) {
      const bool sc = pred[j] == pred[i], sk = gt[j] == gt[i];
      same_cluster += sc;
      same_class += sk;
      both += sc && sk;
    }
    p += both / same_cluster;
    r += both / same_class;
  }
  p /= static_cast<double>(n);
  r /= static_cast<double>(n);
  return {p, r, 2.0 * p * r / (p + r)};
}

/// Majority-label purity, weighted by cluster size.
inline double wcp(const Labels& pred, const Labels& gt) {
  std::map<int, std::map<int, int>> table;
  for (std::size_t i = 0; i < pred.size(); ++i) ++table[pred[i]][gt[i]];
  double correct = 0;
  for (const auto& [c, row] : table) {
    int best = 0;
    for (const auto& [k, v] : row) best = std::max(best, v);
    correct += best;
  }
  return correct / static_cast<double>(pred.size());
}

inline Mat gaussian(int n, int d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Mat x(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) x(i, j) = g(rng);
  return x;
}

}  // namespace oracle

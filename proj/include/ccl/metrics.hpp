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

// Clustering quality: weighted clustering purity (ACC) and B-Cubed.

#include "ccl/common.hpp"

#include <map>

namespace ccl {

struct ClusteringReport {
  double acc = 0.0;
  double bcubed_p = 0.0;
  double bcubed_r = 0.0;
  double bcubed_f = 0.0;
  int num_clusters = 0;
  std::vector<int> cluster_sizes;    // n_c, in order of first appearance in pred
  std::vector<double> purities;      // p_c
  long long correct = 0;             // sum of majority counts (L+)
  long long wrong = 0;               // N - correct (L-)
};

struct BCubed {
  double precision = 0.0;
  double recall = 0.0;
  double f = 0.0;
};

namespace detail {

inline void check_metric_inputs(const Labels& pred, const Labels& gt, const char* who) {
  if (pred.size() != gt.size())
    throw Error(std::string(who) + ": prediction has " + std::to_string(pred.size()) + " labels but ground truth has " +
                std::to_string(gt.size()));
  if (pred.empty()) throw Error(std::string(who) + ": empty label vectors");
  for (std::size_t i = 0; i < gt.size(); ++i)
    if (gt[i] < 0) throw Error(std::string(who) + ": ground-truth label missing at row " + std::to_string(i));
}

/// Contingency counts keyed by (contiguous pred id, contiguous gt id).
struct Contingency {
  Labels pred, gt;
  std::vector<long long> pred_sizes, gt_sizes;
  std::map<std::pair<int, int>, long long> joint;

  Contingency(const Labels& p, const Labels& g) : pred(relabel_contiguous(p)), gt(relabel_contiguous(g)) {
    pred_sizes.assign(static_cast<std::size_t>(count_clusters(pred)), 0);
    gt_sizes.assign(static_cast<std::size_t>(count_clusters(gt)), 0);
    for (std::size_t i = 0; i < pred.size(); ++i) {
      ++pred_sizes[static_cast<std::size_t>(pred[i])];
      ++gt_sizes[static_cast<std::size_t>(gt[i])];
      ++joint[{pred[i], gt[i]}];
    }
  }
};

}  // namespace detail

/// Weighted clustering purity: each cluster is credited with its most common
/// ground-truth label, ACC = (1/N) sum_c n_c * p_c.
inline ClusteringReport wcp(const Labels& pred, const Labels& gt) {
  detail::check_metric_inputs(pred, gt, "wcp");
  const detail::Contingency table(pred, gt);
  const auto k = table.pred_sizes.size();
  std::vector<long long> majority(k, 0);
  for (const auto& [key, count] : table.joint) {
    auto& m = majority[static_cast<std::size_t>(key.first)];
    m = std::max(m, count);
  }
  ClusteringReport report;
  report.num_clusters = static_cast<int>(k);
  for (std::size_t c = 0; c < k; ++c) {
    report.cluster_sizes.push_back(static_cast<int>(table.pred_sizes[c]));
    report.purities.push_back(static_cast<double>(majority[c]) / static_cast<double>(table.pred_sizes[c]));
    report.correct += majority[c];
  }
  const auto n = static_cast<long long>(pred.size());
  report.wrong = n - report.correct;
  report.acc = static_cast<double>(report.correct) / static_cast<double>(n);
  return report;
}

/// Item-averaged B-Cubed precision and recall; F from the averaged P and R.
inline BCubed bcubed(const Labels& pred, const Labels& gt) {
  detail::check_metric_inputs(pred, gt, "bcubed");
  const detail::Contingency table(pred, gt);
  // Every item in cell (c, g) has precision n_cg / n_c and recall n_cg / n_g.
  double p = 0.0, r = 0.0;
  for (const auto& [key, count] : table.joint) {
    const auto cnt = static_cast<double>(count);
    p += cnt * cnt / static_cast<double>(table.pred_sizes[static_cast<std::size_t>(key.first)]);
    r += cnt * cnt / static_cast<double>(table.gt_sizes[static_cast<std::size_t>(key.second)]);
  }
  const auto n = static_cast<double>(pred.size());
  BCubed out;
  out.precision = p / n;
  out.recall = r / n;
  out.f = (out.precision + out.recall) > 0.0 ? 2.0 * out.precision * out.recall / (out.precision + out.recall) : 0.0;
  return out;
}

inline ClusteringReport evaluate(const Labels& pred, const Labels& gt) {
  ClusteringReport report = wcp(pred, gt);
  const BCubed b = bcubed(pred, gt);
  report.bcubed_p = b.precision;
  report.bcubed_r = b.recall;
  report.bcubed_f = b.f;
  return report;
}

}  // namespace ccl

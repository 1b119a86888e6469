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

// Synthetic face-track datasets with known identities, for testing the
// pipeline end to end without video data.

#include "ccl/common.hpp"
#include "ccl/data_model.hpp"

namespace ccl {

struct SynthConfig {
  int num_classes = 5;
  int per_class = 200;
  int dim = 32;
  double noise = 0.1;          // per-coordinate standard deviation
  int frames_per_track = 10;   // consecutive samples of a class share a track
  double cooc_rate = 0.2;      // chance a sample is paired into a frame with another identity
  std::uint64_t seed = 0;
  double min_center_angle_deg = 60.0;
  /// Optional per-track nuisance, off by default: an isotropic Gaussian
  /// offset (track_noise per coordinate) plus a Gaussian amplitude
  /// (nuisance_strength) along each of nuisance_dims directions shared by
  /// all identities, like pose or lighting.
  double track_noise = 0.0;
  int nuisance_dims = 0;
  double nuisance_strength = 0.0;
  /// Centers and nuisance directions drawn as one random orthonormal set,
  /// so every seed sees the same geometry up to rotation.
  bool orthogonal_layout = false;

  void validate() const {
    if (num_classes < 1 || per_class < 1 || dim < 1 || frames_per_track < 1)
      throw ConfigError("synth: num_classes, per_class, dim and frames_per_track must be positive");
    if (!(noise >= 0.0)) throw ConfigError("synth: noise must be >= 0");
    if (!(cooc_rate >= 0.0 && cooc_rate <= 1.0)) throw ConfigError("synth: cooc_rate must lie in [0, 1]");
    if (!(track_noise >= 0.0) || nuisance_dims < 0 || !(nuisance_strength >= 0.0))
      throw ConfigError("synth: track_noise, nuisance_dims and nuisance_strength must be >= 0");
    if (orthogonal_layout && num_classes + nuisance_dims > dim)
      throw ConfigError("synth: orthogonal_layout needs dim >= num_classes + nuisance_dims");
  }
};

/// Unit-norm class centers, pairwise angle at least min_center_angle_deg,
/// by rejection sampling.
inline MatrixD synth_centers(const SynthConfig& cfg, Rng& rng) {
  const double max_cos = std::cos(cfg.min_center_angle_deg * 3.14159265358979323846 / 180.0);
  MatrixD centers(cfg.num_classes, cfg.dim);
  constexpr int kAttempts = 20000;
  for (int c = 0; c < cfg.num_classes; ++c) {
    bool placed = false;
    for (int attempt = 0; attempt < kAttempts && !placed; ++attempt) {
      RowVectorX<double> v(cfg.dim);
      for (int d = 0; d < cfg.dim; ++d) v(d) = standard_normal(rng);
      const double norm = v.norm();
      if (!(norm > 0.0)) continue;
      v /= norm;
      placed = true;
      for (int o = 0; o < c && placed; ++o) placed = centers.row(o).dot(v) <= max_cos;
      if (placed) centers.row(c) = v;
    }
    if (!placed)
      throw ConfigError("synth: cannot place " + std::to_string(cfg.num_classes) + " centers " +
                        std::to_string(cfg.min_center_angle_deg) + " degrees apart in " + std::to_string(cfg.dim) + " dimensions");
  }
  return centers;
}

/// Rows are grouped by class; each row is its class center plus Gaussian
/// noise (plus the optional track offsets), l2-normalized. Frames
/// hold one face, or two faces of different identities, so same-frame pairs
/// are always true negatives.
inline FeatureSet synth_generate(const SynthConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  MatrixD centers;
  MatrixD nuisance(cfg.nuisance_dims, cfg.dim);
  if (cfg.orthogonal_layout) {
    const int m = cfg.num_classes + cfg.nuisance_dims;
    Eigen::MatrixXd g(cfg.dim, m);
    for (int j = 0; j < m; ++j)
      for (int d = 0; d < cfg.dim; ++d) g(d, j) = standard_normal(rng);
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ() * Eigen::MatrixXd::Identity(cfg.dim, m);
    centers = q.leftCols(cfg.num_classes).transpose();
    nuisance = q.rightCols(cfg.nuisance_dims).transpose();
  } else {
    centers = synth_centers(cfg, rng);
    for (int k = 0; k < cfg.nuisance_dims; ++k) {
      for (int d = 0; d < cfg.dim; ++d) nuisance(k, d) = standard_normal(rng);
      nuisance.row(k).normalize();
    }
  }
  const auto n = static_cast<std::size_t>(cfg.num_classes) * static_cast<std::size_t>(cfg.per_class);

  FeatureSet fs;
  fs.features.resize(static_cast<Eigen::Index>(n), cfg.dim);
  fs.label.resize(n);
  fs.track_id.resize(n);
  fs.frame_id.assign(n, -1);
  std::int64_t track = 0;
  std::size_t row = 0;
  RowVectorX<double> track_offset = RowVectorX<double>::Zero(cfg.dim);
  for (int c = 0; c < cfg.num_classes; ++c) {
    for (int k = 0; k < cfg.per_class; ++k, ++row) {
      if (k % cfg.frames_per_track == 0) {
        if (k > 0) ++track;
        for (int d = 0; d < cfg.dim; ++d) track_offset(d) = cfg.track_noise * standard_normal(rng);
        for (int k = 0; k < cfg.nuisance_dims; ++k) track_offset += cfg.nuisance_strength * standard_normal(rng) * nuisance.row(k);
      }
      RowVectorX<double> v = centers.row(c) + track_offset;
      for (int d = 0; d < cfg.dim; ++d) v(d) += cfg.noise * standard_normal(rng);
      double norm = v.norm();
      while (!(norm > 0.0)) {  // measure-zero, but keep rows valid
        v = centers.row(c) + track_offset;
        for (int d = 0; d < cfg.dim; ++d) v(d) += cfg.noise * standard_normal(rng);
        norm = v.norm();
      }
      fs.features.row(static_cast<Eigen::Index>(row)) = (v / norm).cast<float>();
      fs.label[row] = c;
      fs.track_id[row] = track;
    }
    ++track;
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  shuffle(order, rng);
  std::int64_t frame = 0;
  std::vector<std::size_t> pool;
  for (std::size_t i : order) {
    if (fs.frame_id[i] >= 0) continue;
    fs.frame_id[i] = frame;
    if (cfg.cooc_rate > 0.0 && uniform_real(rng) < cfg.cooc_rate) {
      pool.clear();
      for (std::size_t j = 0; j < n; ++j)
        if (fs.frame_id[j] < 0 && fs.label[j] != fs.label[i]) pool.push_back(j);
      if (!pool.empty()) fs.frame_id[pool[static_cast<std::size_t>(uniform_index(rng, pool.size()))]] = frame;
    }
    ++frame;
  }
  return fs;
}

}  // namespace ccl

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

#include <algorithm>
#include <cmath>
#include <string>

#include "ccl/siamese.hpp"

namespace gradcheck {

struct Worst {
  double rel_error = 0.0;
  std::string tensor;
  long index = -1;
};

// The analytic gradient comes from the double model. The reference is a
// central difference evaluated on a long double copy, so its rounding noise
// stays far below the comparison floor even where the true gradient is zero
// (the encoder bias under batch norm, for one). The relative error uses
// max(|fd|, |analytic|, floor) as denominator.
inline Worst compare(const ccl::SiameseModel<double>& model, const ccl::MatrixD& xa, const ccl::MatrixD& xb, const std::vector<int>& y,
                     double h = 1e-5, double floor = 1e-6) {
  using LD = long double;
  const auto analytic = ccl::loss_and_gradients(model, xa, xb, y).grads;
  ccl::SiameseModel<LD> wide;
  wide.margin = model.margin;
  wide.bn_eps = model.bn_eps;
  wide.bn_momentum = model.bn_momentum;
  wide.use_batchnorm = model.use_batchnorm;
  wide.distance = model.distance;
  wide.running_mean = model.running_mean.cast<LD>();
  wide.running_var = model.running_var.cast<LD>();
  const auto narrow_params = model.params.tensors();
  auto params = wide.params.tensors();
  for (std::size_t k = 0; k < params.size(); ++k) *params[k] = narrow_params[k]->cast<LD>();
  const Eigen::Matrix<LD, Eigen::Dynamic, Eigen::Dynamic> wa = xa.cast<LD>(), wb = xb.cast<LD>();
  const auto grads = analytic.tensors();
  Worst worst;
  for (std::size_t k = 0; k < params.size(); ++k) {
    for (Eigen::Index i = 0; i < params[k]->size(); ++i) {
      LD& w = params[k]->data()[i];
      const LD orig = w;
      w = orig + h;
      const LD up = ccl::loss_and_gradients(wide, wa, wb, y).loss;
      w = orig - h;
      const LD down = ccl::loss_and_gradients(wide, wa, wb, y).loss;
      w = orig;
      const double fd = static_cast<double>((up - down) / (2.0L * h));
      const double an = grads[k]->data()[i];
      const double rel = std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), floor});
      if (rel > worst.rel_error) worst = {rel, ccl::SiameseParams<double>::kNames[k], static_cast<long>(i)};
    }
  }
  return worst;
}

// A random model with every parameter perturbed away from its initial
// value, so BN scale/shift and biases have non-trivial gradients.
inline ccl::SiameseModel<double> random_model(int d, int h, int out, std::uint64_t seed, double margin = 1.5) {
  auto model = ccl::SiameseModel<double>::initialize(d, h, out, seed);
  model.margin = margin;
  ccl::Rng rng(seed + 1000);
  for (auto* t : model.params.tensors())
    for (Eigen::Index i = 0; i < t->size(); ++i) t->data()[i] += 0.3 * ccl::standard_normal(rng);
  return model;
}

inline void random_batch(int pairs, int d, std::uint64_t seed, ccl::MatrixD& xa, ccl::MatrixD& xb, std::vector<int>& y) {
  ccl::Rng rng(seed);
  xa.resize(pairs, d);
  xb.resize(pairs, d);
  y.resize(static_cast<std::size_t>(pairs));
  for (int i = 0; i < pairs; ++i) {
    for (int j = 0; j < d; ++j) {
      xa(i, j) = ccl::standard_normal(rng);
      xb(i, j) = ccl::standard_normal(rng);
    }
    y[static_cast<std::size_t>(i)] = static_cast<int>(ccl::uniform_index(rng, 2));
  }
}

}  // namespace gradcheck

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

// Siamese refinement network.
//
//   x (D) -> linear -> batch norm -> h (H)    encoder, the embedding used for clustering
//   h (H) -> linear -> p (d)                  projection seen only by the loss
//
// Trained with the contrastive loss
//   L = 1/2 * ((1 - y) * dist^2 + y * max(0, margin - dist)^2)
// where y = 0 marks a positive pair. Gradients are derived by hand and
// checked against finite differences in the tests.

#include "ccl/common.hpp"
#include "ccl/data_model.hpp"
#include "ccl/pair_mining.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <functional>

namespace ccl {

enum class ForwardMode { Train, Eval };

/// How the pair distance entering the loss is measured. Euclidean is the
/// plain norm of the projection difference; Squared uses its square.
enum class DistanceMode { Euclidean, Squared };

class TrainingError : public Error {
 public:
  using Error::Error;
};

/// Trainable tensors. Vectors are stored as 1 x n row matrices so every
/// tensor can be visited uniformly (optimizer, gradient check, checkpoint).
template <typename T>
struct SiameseParams {
  MatrixX<T> enc_w;    // D x H
  MatrixX<T> enc_b;    // 1 x H
  MatrixX<T> bn_gamma; // 1 x H
  MatrixX<T> bn_beta;  // 1 x H
  MatrixX<T> proj_w;   // H x d
  MatrixX<T> proj_b;   // 1 x d

  static constexpr std::array<const char*, 6> kNames = {"enc_w", "enc_b", "bn_gamma", "bn_beta", "proj_w", "proj_b"};

  std::array<MatrixX<T>*, 6> tensors() { return {&enc_w, &enc_b, &bn_gamma, &bn_beta, &proj_w, &proj_b}; }
  std::array<const MatrixX<T>*, 6> tensors() const { return {&enc_w, &enc_b, &bn_gamma, &bn_beta, &proj_w, &proj_b}; }

  /// Same shapes, all zeros.
  SiameseParams zeros_like() const {
    SiameseParams z;
    auto dst = z.tensors();
    auto src = tensors();
    for (std::size_t i = 0; i < src.size(); ++i) *dst[i] = MatrixX<T>::Zero(src[i]->rows(), src[i]->cols());
    return z;
  }
};

template <typename T>
struct SiameseModel {
  SiameseParams<T> params;
  MatrixX<T> running_mean;  // 1 x H
  MatrixX<T> running_var;   // 1 x H
  T margin = T(1);
  T bn_eps = T(1e-5);
  T bn_momentum = T(0.1);
  bool use_batchnorm = true;
  DistanceMode distance = DistanceMode::Euclidean;

  Eigen::Index input_dim() const { return params.enc_w.rows(); }
  Eigen::Index hidden_dim() const { return params.enc_w.cols(); }
  Eigen::Index output_dim() const { return params.proj_w.cols(); }

  /// Encoder and projection weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)),
  /// biases 0, BN scale 1 and shift 0, running variance 1.
  static SiameseModel initialize(Eigen::Index input_dim, Eigen::Index hidden_dim, Eigen::Index output_dim, std::uint64_t seed) {
    if (input_dim < 1 || hidden_dim < 1 || output_dim < 1) throw Error("SiameseModel: dimensions must be positive");
    Rng rng(seed);
    auto uniform_fill = [&rng](MatrixX<T>& m, double bound) {
      for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<T>((2.0 * uniform_real(rng) - 1.0) * bound);
    };
    SiameseModel model;
    model.params.enc_w.resize(input_dim, hidden_dim);
    uniform_fill(model.params.enc_w, 1.0 / std::sqrt(static_cast<double>(input_dim)));
    model.params.enc_b = MatrixX<T>::Zero(1, hidden_dim);
    model.params.bn_gamma = MatrixX<T>::Ones(1, hidden_dim);
    model.params.bn_beta = MatrixX<T>::Zero(1, hidden_dim);
    model.params.proj_w.resize(hidden_dim, output_dim);
    uniform_fill(model.params.proj_w, 1.0 / std::sqrt(static_cast<double>(hidden_dim)));
    model.params.proj_b = MatrixX<T>::Zero(1, output_dim);
    model.running_mean = MatrixX<T>::Zero(1, hidden_dim);
    model.running_var = MatrixX<T>::Ones(1, hidden_dim);
    return model;
  }

  template <typename U>
  SiameseModel<U> cast() const {
    SiameseModel<U> out;
    auto dst = out.params.tensors();
    auto src = params.tensors();
    for (std::size_t i = 0; i < src.size(); ++i) *dst[i] = src[i]->template cast<U>();
    out.running_mean = running_mean.template cast<U>();
    out.running_var = running_var.template cast<U>();
    out.margin = static_cast<U>(margin);
    out.bn_eps = static_cast<U>(bn_eps);
    out.bn_momentum = static_cast<U>(bn_momentum);
    out.use_batchnorm = use_batchnorm;
    out.distance = distance;
    return out;
  }

  bool all_finite() const {
    for (const auto* t : params.tensors())
      if (!t->allFinite()) return false;
    return running_mean.allFinite() && running_var.allFinite();
  }
};

/// Intermediate values of one forward pass, kept for backprop.
template <typename T>
struct ForwardCache {
  MatrixX<T> input;     // B x D
  MatrixX<T> pre_norm;  // B x H
  MatrixX<T> xhat;      // B x H, normalized pre-activations
  MatrixX<T> inv_std;   // 1 x H
  MatrixX<T> batch_mean;
  MatrixX<T> batch_var; // biased
  MatrixX<T> hidden;    // B x H
  MatrixX<T> output;    // B x d
};

/// Forward pass over a batch of rows. Train mode normalizes with the batch
/// statistics, eval mode with the running ones. Running statistics are not
/// touched here.
template <typename T, typename Derived>
ForwardCache<T> forward(const SiameseModel<T>& model, const Eigen::MatrixBase<Derived>& x, ForwardMode mode) {
  if (x.cols() != model.input_dim())
    throw Error("forward: input has " + std::to_string(x.cols()) + " columns, model expects " + std::to_string(model.input_dim()));
  const auto& p = model.params;
  ForwardCache<T> c;
  c.input = x.template cast<T>();
  c.pre_norm = c.input * p.enc_w;
  c.pre_norm.rowwise() += p.enc_b.row(0);
  const auto rows = static_cast<T>(c.input.rows());
  if (!model.use_batchnorm) {
    c.xhat = c.pre_norm;
    c.inv_std = MatrixX<T>::Ones(1, model.hidden_dim());
    c.hidden = c.pre_norm;
  } else {
    if (mode == ForwardMode::Train) {
      c.batch_mean = c.pre_norm.colwise().sum() / rows;
      MatrixX<T> centered = c.pre_norm.rowwise() - c.batch_mean.row(0);
      c.batch_var = centered.array().square().colwise().sum() / rows;
      c.inv_std = (c.batch_var.array() + model.bn_eps).rsqrt();
      c.xhat = centered.array().rowwise() * c.inv_std.row(0).array();
    } else {
      c.inv_std = (model.running_var.array() + model.bn_eps).rsqrt();
      c.xhat = (c.pre_norm.rowwise() - model.running_mean.row(0)).array().rowwise() * c.inv_std.row(0).array();
    }
    c.hidden = c.xhat.array().rowwise() * p.bn_gamma.row(0).array();
    c.hidden.rowwise() += p.bn_beta.row(0);
  }
  c.output = c.hidden * p.proj_w;
  c.output.rowwise() += p.proj_b.row(0);
  return c;
}

/// Pair distance entering the loss.
template <typename T>
T pair_distance(const RowVectorX<T>& p1, const RowVectorX<T>& p2, DistanceMode mode) {
  const T sq = (p1 - p2).squaredNorm();
  return mode == DistanceMode::Euclidean ? std::sqrt(sq) : sq;
}

/// Contrastive loss of one pair; y = 0 positive, y = 1 negative.
template <typename T>
T contrastive_loss(const RowVectorX<T>& p1, const RowVectorX<T>& p2, int y, T margin,
                   DistanceMode mode = DistanceMode::Euclidean) {
  const T d = pair_distance(p1, p2, mode);
  if (y == 0) return T(0.5) * d * d;
  const T hinge = std::max(T(0), margin - d);
  return T(0.5) * hinge * hinge;
}

/// dL/dp1 for one pair; dL/dp2 is its negation. At the hinge boundary and
/// for coincident negatives the zero subgradient is used.
template <typename T>
RowVectorX<T> contrastive_grad(const RowVectorX<T>& p1, const RowVectorX<T>& p2, int y, T margin, DistanceMode mode) {
  const RowVectorX<T> diff = p1 - p2;
  const T sq = diff.squaredNorm();
  if (mode == DistanceMode::Euclidean) {
    if (y == 0) return diff;
    const T d = std::sqrt(sq);
    if (d >= margin || d == T(0)) return RowVectorX<T>::Zero(diff.size());
    return diff * (-(margin - d) / d);
  }
  if (y == 0) return diff * (T(2) * sq);
  if (sq >= margin) return RowVectorX<T>::Zero(diff.size());
  return diff * (-T(2) * (margin - sq));
}

/// Backprop of an upstream gradient on the projection output through the
/// whole network. Rows of the cache may come from both branches; their
/// contributions add up in the shared parameters.
template <typename T>
SiameseParams<T> backward(const SiameseModel<T>& model, const ForwardCache<T>& c, const MatrixX<T>& grad_output) {
  const auto& p = model.params;
  SiameseParams<T> g;
  g.proj_w = c.hidden.transpose() * grad_output;
  g.proj_b = grad_output.colwise().sum();
  const MatrixX<T> grad_hidden = grad_output * p.proj_w.transpose();
  MatrixX<T> grad_pre;
  if (model.use_batchnorm) {
    g.bn_gamma = (grad_hidden.array() * c.xhat.array()).colwise().sum();
    g.bn_beta = grad_hidden.colwise().sum();
    const MatrixX<T> grad_xhat = grad_hidden.array().rowwise() * p.bn_gamma.row(0).array();
    const auto rows = static_cast<T>(c.input.rows());
    const MatrixX<T> mean_g = grad_xhat.colwise().sum() / rows;
    const MatrixX<T> mean_gx = (grad_xhat.array() * c.xhat.array()).colwise().sum() / rows;
    MatrixX<T> centered = grad_xhat.rowwise() - mean_g.row(0);
    centered.array() -= c.xhat.array().rowwise() * mean_gx.row(0).array();
    grad_pre = centered.array().rowwise() * c.inv_std.row(0).array();
  } else {
    g.bn_gamma = MatrixX<T>::Zero(1, model.hidden_dim());
    g.bn_beta = MatrixX<T>::Zero(1, model.hidden_dim());
    grad_pre = grad_hidden;
  }
  g.enc_w = c.input.transpose() * grad_pre;
  g.enc_b = grad_pre.colwise().sum();
  return g;
}

template <typename T>
struct BatchStep {
  double loss = 0.0;            // mean pair loss
  SiameseParams<T> grads;
  ForwardCache<T> cache;
};

/// Mean contrastive loss of a batch of pairs and its gradient. Both sides of
/// every pair go through one train-mode forward pass (rows [a...; b...]), so
/// batch-norm statistics are shared across the two branches.
template <typename T, typename DerivedA, typename DerivedB>
BatchStep<T> loss_and_gradients(const SiameseModel<T>& model, const Eigen::MatrixBase<DerivedA>& xa,
                                 const Eigen::MatrixBase<DerivedB>& xb, const std::vector<int>& y,
                                 ForwardMode mode = ForwardMode::Train) {
  const auto b = xa.rows();
  if (b == 0) throw Error("loss_and_gradients: empty batch");
  if (xb.rows() != b || static_cast<Eigen::Index>(y.size()) != b) throw Error("loss_and_gradients: batch size mismatch");
  MatrixX<T> stacked(2 * b, xa.cols());
  stacked.topRows(b) = xa.template cast<T>();
  stacked.bottomRows(b) = xb.template cast<T>();
  BatchStep<T> step;
  step.cache = forward(model, stacked, mode);
  const auto& out = step.cache.output;
  MatrixX<T> grad_out(2 * b, out.cols());
  double total = 0.0;
  const T scale = T(1) / static_cast<T>(b);
  for (Eigen::Index i = 0; i < b; ++i) {
    const RowVectorX<T> p1 = out.row(i);
    const RowVectorX<T> p2 = out.row(b + i);
    total += static_cast<double>(contrastive_loss<T>(p1, p2, y[static_cast<std::size_t>(i)], model.margin, model.distance));
    const RowVectorX<T> g = contrastive_grad<T>(p1, p2, y[static_cast<std::size_t>(i)], model.margin, model.distance) * scale;
    grad_out.row(i) = g;
    grad_out.row(b + i) = -g;
  }
  step.loss = total / static_cast<double>(b);
  step.grads = backward(model, step.cache, grad_out);
  return step;
}

// ---------------------------------------------------------------------------
// Training

struct TrainConfig {
  int epochs = 20;
  double lr = 1e-5;
  int lr_drop_epoch = 15;
  double lr_drop_factor = 10.0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;
  int hidden_dim = 256;
  int output_dim = 2;
  double margin = 1.0;
  bool use_batchnorm = true;
  DistanceMode distance = DistanceMode::Euclidean;

  void validate() const {
    if (epochs < 0) throw ConfigError("train: epochs must be >= 0");
    if (!(lr > 0.0)) throw ConfigError("train: lr must be > 0");
    if (!(lr_drop_factor > 0.0)) throw ConfigError("train: lr_drop_factor must be > 0");
    if (hidden_dim < 1 || output_dim < 1) throw ConfigError("train: hidden_dim and output_dim must be >= 1");
    if (!(margin > 0.0)) throw ConfigError("train: margin must be > 0");
  }

  double learning_rate(int epoch) const { return epoch >= lr_drop_epoch ? lr / lr_drop_factor : lr; }
};

template <typename T>
class AdamOptimizer {
 public:
  AdamOptimizer(const SiameseParams<T>& like, double beta1, double beta2, double eps)
      : m_(like.zeros_like()), v_(like.zeros_like()), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(SiameseParams<T>& params, const SiameseParams<T>& grads, double lr) {
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    const T step_size = static_cast<T>(lr / c1);
    const T b1 = static_cast<T>(beta1_), b2 = static_cast<T>(beta2_);
    const T sqrt_c2 = static_cast<T>(std::sqrt(c2));
    const T eps = static_cast<T>(eps_);
    auto p = params.tensors();
    auto g = grads.tensors();
    auto m = m_.tensors();
    auto v = v_.tensors();
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i]->array() = b1 * m[i]->array() + (T(1) - b1) * g[i]->array();
      v[i]->array() = b2 * v[i]->array() + (T(1) - b2) * g[i]->array().square();
      p[i]->array() -= step_size * m[i]->array() / (v[i]->array().sqrt() / sqrt_c2 + eps);
    }
  }

  long long steps() const { return t_; }

 private:
  SiameseParams<T> m_, v_;
  double beta1_, beta2_, eps_;
  long long t_ = 0;
};

/// Produces the batches of one epoch; called once per epoch with its index.
using EpochSource = std::function<std::vector<PairBatch>(int epoch)>;

struct TrainResult {
  SiameseModel<float> model;
  std::vector<double> epoch_loss;  // mean batch loss per epoch
  long long steps = 0;
};

/// Updates running batch-norm statistics from one train-mode pass.
template <typename T>
void update_running_stats(SiameseModel<T>& model, const ForwardCache<T>& c) {
  if (!model.use_batchnorm) return;
  const auto rows = static_cast<T>(c.input.rows());
  const T unbias = rows > T(1) ? rows / (rows - T(1)) : T(1);
  const T mom = model.bn_momentum;
  model.running_mean = (T(1) - mom) * model.running_mean + mom * c.batch_mean;
  model.running_var = (T(1) - mom) * model.running_var + mom * unbias * c.batch_var;
}

/// Adam on mined batches over cfg.epochs epochs; the learning rate drops by
/// lr_drop_factor from epoch lr_drop_epoch (0-based) on. Single-threaded and
/// deterministic for a fixed seed and epoch source.
inline TrainResult train(const FeatureSet& fs, const EpochSource& epochs, const TrainConfig& cfg,
                         const std::function<void(int, double)>& on_epoch = {}) {
  cfg.validate();
  TrainResult result;
  result.model = SiameseModel<float>::initialize(fs.features.cols(), cfg.hidden_dim, cfg.output_dim, cfg.seed);
  auto& model = result.model;
  model.margin = static_cast<float>(cfg.margin);
  model.use_batchnorm = cfg.use_batchnorm;
  model.distance = cfg.distance;
  AdamOptimizer<float> adam(model.params, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps);

  MatrixF xa, xb;
  std::vector<int> y;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = cfg.learning_rate(epoch);
    const std::vector<PairBatch> batches = epochs(epoch);
    double loss_sum = 0.0;
    std::size_t counted = 0;
    for (std::size_t bi = 0; bi < batches.size(); ++bi) {
      const auto& pairs = batches[bi].pairs;
      if (pairs.empty()) continue;
      const auto b = static_cast<Eigen::Index>(pairs.size());
      xa.resize(b, fs.features.cols());
      xb.resize(b, fs.features.cols());
      y.resize(pairs.size());
      for (Eigen::Index i = 0; i < b; ++i) {
        const auto& p = pairs[static_cast<std::size_t>(i)];
        if (p.a < 0 || p.b < 0 || static_cast<std::size_t>(p.a) >= fs.size() || static_cast<std::size_t>(p.b) >= fs.size())
          throw TrainingError("train: pair (" + std::to_string(p.a) + ", " + std::to_string(p.b) + ") out of range");
        xa.row(i) = fs.features.row(p.a);
        xb.row(i) = fs.features.row(p.b);
        y[static_cast<std::size_t>(i)] = p.y;
      }
      BatchStep<float> step = loss_and_gradients(model, xa, xb, y);
      if (!std::isfinite(step.loss))
        throw TrainingError("train: non-finite loss at epoch " + std::to_string(epoch + 1) + ", batch " + std::to_string(bi) +
                            " (" + std::to_string(pairs.size()) + " pairs, lr " + std::to_string(lr) + ")");
      adam.step(model.params, step.grads, lr);
      update_running_stats(model, step.cache);
      if (!model.all_finite())
        throw TrainingError("train: parameters became non-finite at epoch " + std::to_string(epoch + 1) + ", batch " +
                            std::to_string(bi));
      loss_sum += step.loss;
      ++counted;
    }
    const double mean_loss = counted ? loss_sum / static_cast<double>(counted) : 0.0;
    result.epoch_loss.push_back(mean_loss);
    if (on_epoch) on_epoch(epoch, mean_loss);
  }
  result.steps = adam.steps();
  return result;
}

/// Eval-mode encoder output for every row, l2-normalized. Index arrays are
/// carried over unchanged.
inline FeatureSet embed(const SiameseModel<float>& model, const FeatureSet& fs) {
  if (static_cast<Eigen::Index>(fs.dim()) != model.input_dim())
    throw Error("embed: features have D=" + std::to_string(fs.dim()) + " but the model expects " + std::to_string(model.input_dim()));
  FeatureSet out;
  out.frame_id = fs.frame_id;
  out.track_id = fs.track_id;
  out.label = fs.label;
  out.features.resize(fs.features.rows(), model.hidden_dim());
  detail::parallel_chunks(fs.size(), 1024, [&](std::size_t begin, std::size_t end) {
    const auto rows = static_cast<Eigen::Index>(end - begin);
    const ForwardCache<float> c = forward(model, fs.features.middleRows(static_cast<Eigen::Index>(begin), rows), ForwardMode::Eval);
    for (Eigen::Index r = 0; r < rows; ++r) {
      const RowVectorX<double> h = c.hidden.row(r).cast<double>();
      const double norm = h.norm();
      out.features.row(static_cast<Eigen::Index>(begin) + r) = (norm > 0.0 ? RowVectorX<double>(h / norm) : h).cast<float>();
    }
  });
  return out;
}

// ---------------------------------------------------------------------------
// Checkpoint
//
//   "CCLM" | u32 version=1 | u64 D | u64 H | u64 d | f32 margin | f32 bn_eps |
//   f32 bn_momentum | u8 use_batchnorm | u8 distance | tensors as f32:
//   enc_w, enc_b, bn_gamma, bn_beta, running_mean, running_var, proj_w, proj_b

inline constexpr char kModelMagic[4] = {'C', 'C', 'L', 'M'};
inline constexpr std::uint32_t kModelVersion = 1;

inline void save_model(std::ostream& out, const SiameseModel<float>& model) {
  out.write(kModelMagic, 4);
  detail::write_le<std::uint32_t>(out, kModelVersion);
  detail::write_le<std::uint64_t>(out, static_cast<std::uint64_t>(model.input_dim()));
  detail::write_le<std::uint64_t>(out, static_cast<std::uint64_t>(model.hidden_dim()));
  detail::write_le<std::uint64_t>(out, static_cast<std::uint64_t>(model.output_dim()));
  detail::write_le<float>(out, model.margin);
  detail::write_le<float>(out, model.bn_eps);
  detail::write_le<float>(out, model.bn_momentum);
  detail::write_le<std::uint8_t>(out, model.use_batchnorm ? 1 : 0);
  detail::write_le<std::uint8_t>(out, model.distance == DistanceMode::Squared ? 1 : 0);
  const auto& p = model.params;
  for (const MatrixF* t : {&p.enc_w, &p.enc_b, &p.bn_gamma, &p.bn_beta, &model.running_mean, &model.running_var, &p.proj_w, &p.proj_b})
    detail::write_le_array(out, t->data(), static_cast<std::size_t>(t->size()));
  if (!out) throw Error("failed writing model checkpoint");
}

inline void save_model(const std::string& path, const SiameseModel<float>& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  save_model(out, model);
}

inline SiameseModel<float> load_model(std::istream& in) {
  char magic[4] = {};
  in.read(magic, 4);
  if (in.gcount() != 4 || std::memcmp(magic, kModelMagic, 4) != 0) throw FormatError("bad magic: not a CCLM checkpoint");
  std::uint32_t version = 0;
  std::uint64_t d_in = 0, hidden = 0, d_out = 0;
  SiameseModel<float> model;
  std::uint8_t bn = 0, dist = 0;
  if (!detail::read_le(in, version)) throw FormatError("truncated checkpoint header");
  if (version != kModelVersion) throw FormatError("unsupported checkpoint version " + std::to_string(version));
  if (!detail::read_le(in, d_in) || !detail::read_le(in, hidden) || !detail::read_le(in, d_out) ||
      !detail::read_le(in, model.margin) || !detail::read_le(in, model.bn_eps) || !detail::read_le(in, model.bn_momentum) ||
      !detail::read_le(in, bn) || !detail::read_le(in, dist))
    throw FormatError("truncated checkpoint header");
  constexpr std::uint64_t kMax = std::uint64_t{1} << 24;
  if (d_in == 0 || hidden == 0 || d_out == 0 || d_in > kMax || hidden > kMax || d_out > kMax)
    throw FormatError("invalid checkpoint dimensions");
  if (bn > 1 || dist > 1) throw FormatError("invalid checkpoint flags");
  model.use_batchnorm = bn == 1;
  model.distance = dist == 1 ? DistanceMode::Squared : DistanceMode::Euclidean;
  const auto D = static_cast<Eigen::Index>(d_in), H = static_cast<Eigen::Index>(hidden), O = static_cast<Eigen::Index>(d_out);
  auto& p = model.params;
  p.enc_w.resize(D, H);
  p.enc_b.resize(1, H);
  p.bn_gamma.resize(1, H);
  p.bn_beta.resize(1, H);
  model.running_mean.resize(1, H);
  model.running_var.resize(1, H);
  p.proj_w.resize(H, O);
  p.proj_b.resize(1, O);
  for (MatrixF* t : {&p.enc_w, &p.enc_b, &p.bn_gamma, &p.bn_beta, &model.running_mean, &model.running_var, &p.proj_w, &p.proj_b})
    if (!detail::read_le_array(in, t->data(), static_cast<std::size_t>(t->size()))) throw FormatError("truncated checkpoint tensors");
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError("trailing bytes after checkpoint");
  if (!model.all_finite()) throw FormatError("checkpoint contains non-finite parameters");
  return model;
}

inline SiameseModel<float> load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model checkpoint '" + path + "'");
  return load_model(in);
}

}  // namespace ccl

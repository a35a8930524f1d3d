// Copyright 2026 The snk Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "snk/dataset.hpp"
#include "snk/error.hpp"
#include "snk/nn/network.hpp"
#include "snk/rng.hpp"
#include "snk/train/adam.hpp"
#include "snk/train/backward.hpp"

namespace snk::train {

struct TrainConfig {
  int epochs = 200;
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-7;
  int batch_size = 32;
  std::uint64_t seed = 0;
  double test_fraction = 0.25;
  // Off unless set: rescale each batch gradient to this global L2 norm.
  std::optional<double> clip_norm;

  void validate() const {
    if (epochs < 1) throw Error(ErrorCode::kConfig, "epochs must be >= 1");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
      throw Error(ErrorCode::kConfig, "learning rate must be positive");
    }
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw Error(ErrorCode::kConfig, "test fraction must lie in (0, 1)");
    if (batch_size < 1) throw Error(ErrorCode::kConfig, "batch size must be >= 1");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
      throw Error(ErrorCode::kConfig, "Adam betas must lie in [0, 1)");
    }
    if (!(epsilon > 0.0)) throw Error(ErrorCode::kConfig, "Adam epsilon must be positive");
    if (clip_norm && !(*clip_norm > 0.0)) throw Error(ErrorCode::kConfig, "clip norm must be positive");
  }

  AdamConfig adam() const { return {learning_rate, beta1, beta2, epsilon}; }
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  std::optional<double> val_loss;
  std::optional<double> val_accuracy;

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct LearningCurve {
  std::vector<EpochRecord> epochs;

  /// `epoch,train_loss,train_acc,val_loss,val_acc`, reals to 6 significant
  /// digits, empty cells where no validation set was used.
  std::string to_csv() const {
    std::string out = "epoch,train_loss,train_acc,val_loss,val_acc\n";
    char buf[64];
    auto real = [&buf](std::optional<double> v) -> std::string {
      if (!v) return "";
      std::snprintf(buf, sizeof buf, "%.6g", *v);
      return buf;
    };
    for (const auto& r : epochs) {
      out += std::to_string(r.epoch) + "," + real(r.train_loss) + "," + real(r.train_accuracy) + "," +
             real(r.val_loss) + "," + real(r.val_accuracy) + "\n";
    }
    return out;
  }

  friend bool operator==(const LearningCurve&, const LearningCurve&) = default;
};

/// A training sample in network layout: input_dim x steps, one column per frame.
template <typename T>
struct Sample {
  Matrix<T> frames;
  std::size_t label = 0;
};

template <typename T>
std::vector<Sample<T>> to_samples(const LabeledDataset& ds) {
  std::vector<Sample<T>> out;
  out.reserve(ds.size());
  for (const auto& s : ds.sequences) {
    Eigen::Map<const Eigen::MatrixXf> m(s.values.data(), static_cast<Index>(kFeatureDim), static_cast<Index>(kWindowLength));
    out.push_back({m.cast<T>(), s.label.index()});
  }
  return out;
}

/// Packs the selected samples step-major (column t * batch + b) and builds one-hot targets.
template <typename T>
void pack_batch(const std::vector<Sample<T>>& samples, std::span<const std::size_t> indices, Index num_classes,
                Matrix<T>& x, Matrix<T>& targets) {
  const Index batch = static_cast<Index>(indices.size());
  const Index d = samples[indices[0]].frames.rows();
  const Index steps = samples[indices[0]].frames.cols();
  x.resize(d, steps * batch);
  targets = Matrix<T>::Zero(num_classes, batch);
  for (Index b = 0; b < batch; ++b) {
    const auto& s = samples[indices[static_cast<std::size_t>(b)]];
    if (s.frames.rows() != d || s.frames.cols() != steps) throw Error(ErrorCode::kShape, "samples differ in shape");
    if (static_cast<Index>(s.label) >= num_classes) throw Error(ErrorCode::kLabel, "sample label exceeds class count");
    for (Index t = 0; t < steps; ++t) x.col(t * batch + b) = s.frames.col(t);
    targets(static_cast<Index>(s.label), b) = T(1);
  }
}

template <typename T>
std::size_t argmax(const Eigen::Ref<const Vector<T>>& v) {
  Index best = 0;
  v.maxCoeff(&best);
  return static_cast<std::size_t>(best);
}

struct Evaluation {
  double mean_loss = 0.0;
  double accuracy = 0.0;
  std::vector<std::size_t> predictions;
};

/// Mean loss, accuracy and argmax predictions over `samples`, batched for speed.
template <typename T>
Evaluation evaluate(const Network<T>& net, const std::vector<Sample<T>>& samples, std::size_t batch_size = 64) {
  Evaluation ev;
  if (samples.empty()) return ev;
  std::vector<std::size_t> idx(samples.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  double loss = 0.0;
  std::size_t correct = 0;
  Matrix<T> x, targets;
  for (std::size_t start = 0; start < idx.size(); start += batch_size) {
    const std::size_t n = std::min(batch_size, idx.size() - start);
    std::span<const std::size_t> chunk(idx.data() + start, n);
    pack_batch(samples, chunk, net.num_classes(), x, targets);
    const Matrix<T> probs = nn::forward_batch<T>(net, x, samples[0].frames.cols());
    loss += cross_entropy_sum<T>(probs, targets);
    for (Index b = 0; b < probs.cols(); ++b) {
      const std::size_t pred = argmax<T>(probs.col(b));
      ev.predictions.push_back(pred);
      if (pred == samples[chunk[static_cast<std::size_t>(b)]].label) ++correct;
    }
  }
  ev.mean_loss = loss / static_cast<double>(samples.size());
  ev.accuracy = static_cast<double>(correct) / static_cast<double>(samples.size());
  return ev;
}

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Mini-batch Adam over `train_set`, starting from `net`. Each epoch reshuffles
/// with a generator seeded from `cfg.seed`; the recorded training loss and
/// accuracy are the means over the batches as they were seen during the
/// epoch. Validation metrics are computed after the epoch's last update.
template <typename T>
LearningCurve fit(Network<T>& net, const std::vector<Sample<T>>& train_set, const std::vector<Sample<T>>& val_set,
                  const TrainConfig& cfg, const EpochCallback& on_epoch = {}) {
  cfg.validate();
  net.validate();
  if (train_set.empty()) throw Error(ErrorCode::kInsufficientData, "training set is empty");
  const Index steps = train_set[0].frames.cols();
  AdamState<T> adam = AdamState<T>::for_network(net);
  const AdamConfig adam_cfg = cfg.adam();
  Rng rng(derive_seed(cfg.seed, 0x5407f1e));
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  LearningCurve curve;
  Matrix<T> x, targets;
  nn::ForwardTrace<T> trace;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t n = std::min(static_cast<std::size_t>(cfg.batch_size), order.size() - start);
      std::span<const std::size_t> chunk(order.data() + start, n);
      pack_batch(train_set, chunk, net.num_classes(), x, targets);
      const Matrix<T> probs = nn::forward_batch<T>(net, x, steps, &trace);
      const double batch_loss = cross_entropy_sum<T>(probs, targets);
      if (!std::isfinite(batch_loss)) {
        throw Error(ErrorCode::kDivergence, "non-finite loss in epoch " + std::to_string(epoch));
      }
      loss_sum += batch_loss;
      for (Index b = 0; b < probs.cols(); ++b) {
        if (argmax<T>(probs.col(b)) == train_set[chunk[static_cast<std::size_t>(b)]].label) ++correct;
      }
      Network<T> grad = backward<T>(net, trace, targets);
      if (cfg.clip_norm) clip_global_norm(grad, *cfg.clip_norm);
      adam_step(net, grad, adam, adam_cfg);
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(train_set.size());
    rec.train_accuracy = static_cast<double>(correct) / static_cast<double>(train_set.size());
    if (!val_set.empty()) {
      const Evaluation ev = evaluate(net, val_set);
      if (!std::isfinite(ev.mean_loss)) {
        throw Error(ErrorCode::kDivergence, "non-finite validation loss in epoch " + std::to_string(epoch));
      }
      rec.val_loss = ev.mean_loss;
      rec.val_accuracy = ev.accuracy;
    }
    curve.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  return curve;
}

struct TrainResult {
  Network<float> net;
  LearningCurve curve;
  DatasetSplit split;
};

/// Split, initialise the reference network from `cfg.seed`, and fit.
inline TrainResult train(const LabeledDataset& dataset, const TrainConfig& cfg, const EpochCallback& on_epoch = {}) {
  cfg.validate();
  TrainResult result{nn::init_params<float>(cfg.seed), {}, split(dataset, cfg.test_fraction, cfg.seed)};
  const auto train_samples = to_samples<float>(result.split.train);
  const auto test_samples = to_samples<float>(result.split.test);
  result.curve = fit(result.net, train_samples, test_samples, cfg, on_epoch);
  return result;
}

}  // namespace snk::train

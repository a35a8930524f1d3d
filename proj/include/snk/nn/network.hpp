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
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "snk/error.hpp"
#include "snk/frame.hpp"
#include "snk/labels.hpp"
#include "snk/rng.hpp"

namespace snk::nn {

using Index = Eigen::Index;

template <typename T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <typename T>
using Vector = Eigen::Matrix<T, Eigen::Dynamic, 1>;

enum class Activation : std::uint8_t { kIdentity = 0, kRelu = 1, kSoftmax = 2 };

inline std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::kIdentity: return "identity";
    case Activation::kRelu: return "relu";
    case Activation::kSoftmax: return "softmax";
  }
  return "?";
}

/// Standard LSTM cell weights. Gate row blocks are ordered [input, forget,
/// candidate, output], each `units` rows tall.
template <typename T>
struct LstmLayer {
  Matrix<T> kernel;     // 4h x d
  Matrix<T> recurrent;  // 4h x h
  Vector<T> bias;       // 4h
  bool return_sequences = true;

  static LstmLayer zeros(Index input_dim, Index units, bool return_sequences) {
    return {Matrix<T>::Zero(4 * units, input_dim), Matrix<T>::Zero(4 * units, units),
            Vector<T>::Zero(4 * units), return_sequences};
  }

  Index input_dim() const { return kernel.cols(); }
  Index units() const { return recurrent.cols(); }
  std::size_t param_count() const {
    return static_cast<std::size_t>(4 * units() * (input_dim() + units() + 1));
  }

  friend bool operator==(const LstmLayer& a, const LstmLayer& b) {
    return a.return_sequences == b.return_sequences && a.kernel == b.kernel &&
           a.recurrent == b.recurrent && a.bias == b.bias;
  }
};

template <typename T>
struct DenseLayer {
  Matrix<T> kernel;  // out x in
  Vector<T> bias;    // out
  Activation activation = Activation::kIdentity;

  static DenseLayer zeros(Index input_dim, Index units, Activation activation) {
    return {Matrix<T>::Zero(units, input_dim), Vector<T>::Zero(units), activation};
  }

  Index input_dim() const { return kernel.cols(); }
  Index units() const { return kernel.rows(); }
  std::size_t param_count() const { return static_cast<std::size_t>(units() * (input_dim() + 1)); }

  friend bool operator==(const DenseLayer& a, const DenseLayer& b) {
    return a.activation == b.activation && a.kernel == b.kernel && a.bias == b.bias;
  }
};

/// Layer sizes of a stacked-LSTM classifier: LSTM layers (all but the last
/// return the full sequence), then dense layers (rectifier between, softmax on
/// the last).
struct Architecture {
  Index input_dim = 0;
  std::vector<Index> lstm_units;
  std::vector<Index> dense_units;

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

/// LSTM 64 -> LSTM 128 -> LSTM 64 -> Dense 64 -> Dense 32 -> Dense 8 on 1662 features.
inline Architecture canonical_architecture() {
  return {static_cast<Index>(kFeatureDim), {64, 128, 64}, {64, 32, static_cast<Index>(kNumClasses)}};
}

inline constexpr std::size_t kCanonicalTotalParams = 596840;

/// All trainable tensors of the classifier. Also used as the container for
/// gradients and optimizer moments, which share its shape.
template <typename T>
struct Network {
  std::vector<LstmLayer<T>> lstm;
  std::vector<DenseLayer<T>> dense;

  Index input_dim() const { return lstm.empty() ? 0 : lstm.front().input_dim(); }
  Index num_classes() const { return dense.empty() ? 0 : dense.back().units(); }

  Architecture architecture() const {
    Architecture a{input_dim(), {}, {}};
    for (const auto& l : lstm) a.lstm_units.push_back(l.units());
    for (const auto& l : dense) a.dense_units.push_back(l.units());
    return a;
  }

  /// Same shapes and flags, every value zero.
  Network zeros_like() const {
    Network z;
    for (const auto& l : lstm) z.lstm.push_back(LstmLayer<T>::zeros(l.input_dim(), l.units(), l.return_sequences));
    for (const auto& l : dense) z.dense.push_back(DenseLayer<T>::zeros(l.input_dim(), l.units(), l.activation));
    return z;
  }

  template <typename U>
  Network<U> cast() const {
    Network<U> out;
    for (const auto& l : lstm) {
      out.lstm.push_back({l.kernel.template cast<U>(), l.recurrent.template cast<U>(),
                          l.bias.template cast<U>(), l.return_sequences});
    }
    for (const auto& l : dense) {
      out.dense.push_back({l.kernel.template cast<U>(), l.bias.template cast<U>(), l.activation});
    }
    return out;
  }

  /// Throws kShape if the layers do not chain or break the stack layout.
  void validate() const {
    if (lstm.empty() || dense.empty()) {
      throw Error(ErrorCode::kShape, "network needs at least one LSTM and one dense layer");
    }
    Index prev = input_dim();
    for (std::size_t i = 0; i < lstm.size(); ++i) {
      const auto& l = lstm[i];
      const Index h = l.recurrent.cols();
      if (l.kernel.cols() != prev || l.kernel.rows() != 4 * h || l.recurrent.rows() != 4 * h ||
          l.bias.size() != 4 * h || h == 0) {
        throw Error(ErrorCode::kShape, "LSTM layer " + std::to_string(i) + " shapes are inconsistent");
      }
      if (l.return_sequences != (i + 1 < lstm.size())) {
        throw Error(ErrorCode::kShape, "only the last LSTM layer may drop the sequence dimension");
      }
      prev = h;
    }
    for (std::size_t i = 0; i < dense.size(); ++i) {
      const auto& l = dense[i];
      if (l.kernel.cols() != prev || l.bias.size() != l.kernel.rows() || l.kernel.rows() == 0) {
        throw Error(ErrorCode::kShape, "dense layer " + std::to_string(i) + " shapes are inconsistent");
      }
      const bool last = i + 1 == dense.size();
      if ((l.activation == Activation::kSoftmax) != last) {
        throw Error(ErrorCode::kShape, "softmax is required on, and only on, the last dense layer");
      }
      prev = l.kernel.rows();
    }
  }

  friend bool operator==(const Network&, const Network&) = default;
};

/// Applies `f` to corresponding tensors of each network, in declaration order
/// (per LSTM layer: kernel, recurrent, bias; per dense layer: kernel, bias).
template <typename F, typename First, typename... Rest>
void for_each_tensor(F&& f, First& first, Rest&... rest) {
  for (std::size_t i = 0; i < first.lstm.size(); ++i) {
    f(first.lstm[i].kernel, rest.lstm[i].kernel...);
    f(first.lstm[i].recurrent, rest.lstm[i].recurrent...);
    f(first.lstm[i].bias, rest.lstm[i].bias...);
  }
  for (std::size_t i = 0; i < first.dense.size(); ++i) {
    f(first.dense[i].kernel, rest.dense[i].kernel...);
    f(first.dense[i].bias, rest.dense[i].bias...);
  }
}

template <typename T>
Network<T> make_network(const Architecture& arch) {
  if (arch.input_dim <= 0 || arch.lstm_units.empty() || arch.dense_units.empty()) {
    throw Error(ErrorCode::kShape, "architecture needs an input dimension, LSTM and dense layers");
  }
  Network<T> net;
  Index prev = arch.input_dim;
  for (std::size_t i = 0; i < arch.lstm_units.size(); ++i) {
    net.lstm.push_back(LstmLayer<T>::zeros(prev, arch.lstm_units[i], i + 1 < arch.lstm_units.size()));
    prev = arch.lstm_units[i];
  }
  for (std::size_t i = 0; i < arch.dense_units.size(); ++i) {
    const bool last = i + 1 == arch.dense_units.size();
    net.dense.push_back(DenseLayer<T>::zeros(prev, arch.dense_units[i], last ? Activation::kSoftmax : Activation::kRelu));
    prev = arch.dense_units[i];
  }
  return net;
}

// ---------------------------------------------------------------------------
// Parameter counting

struct ParamCounts {
  std::vector<std::size_t> per_layer;  // LSTM layers first, then dense
  std::size_t total = 0;
};

template <typename T>
ParamCounts param_count(const Network<T>& net) {
  ParamCounts c;
  for (const auto& l : net.lstm) c.per_layer.push_back(l.param_count());
  for (const auto& l : net.dense) c.per_layer.push_back(l.param_count());
  for (auto n : c.per_layer) c.total += n;
  return c;
}

/// True iff the network has exactly the reference layer stack.
template <typename T>
bool is_canonical(const Network<T>& net) {
  try {
    net.validate();
  } catch (const Error&) {
    return false;
  }
  return net.architecture() == canonical_architecture() && param_count(net).total == kCanonicalTotalParams;
}

// ---------------------------------------------------------------------------
// Initialization

/// Glorot-uniform kernels and recurrent matrices, zero biases except the LSTM
/// forget-gate block which starts at 1. Values are drawn layer by layer,
/// row-major within each matrix.
template <typename T>
Network<T> init_params(const Architecture& arch, std::uint64_t seed) {
  Network<T> net = make_network<T>(arch);
  Rng rng(derive_seed(seed, 0x1417));
  auto glorot = [&rng](Matrix<T>& m, Index fan_in, Index fan_out) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (Index r = 0; r < m.rows(); ++r)
      for (Index c = 0; c < m.cols(); ++c) m(r, c) = static_cast<T>(rng.uniform(-limit, limit));
  };
  for (auto& l : net.lstm) {
    const Index h = l.units();
    glorot(l.kernel, l.input_dim(), 4 * h);
    glorot(l.recurrent, h, 4 * h);
    l.bias.segment(h, h).setConstant(T(1));
  }
  for (auto& l : net.dense) glorot(l.kernel, l.input_dim(), l.units());
  return net;
}

template <typename T>
Network<T> init_params(std::uint64_t seed) {
  return init_params<T>(canonical_architecture(), seed);
}

// ---------------------------------------------------------------------------
// Forward pass

template <typename T>
void sigmoid_inplace(Eigen::Ref<Matrix<T>> z) {
  z = (T(1) + (-z.array()).exp()).inverse().matrix();
}

/// Turns gate pre-activations `z` (4h x B, rows [i, f, g, o]) into
/// activations in place, then computes the new cell and hidden state.
template <typename T>
void lstm_gates(Eigen::Ref<Matrix<T>> z, const Eigen::Ref<const Matrix<T>>& c_prev, Eigen::Ref<Matrix<T>> c,
                Eigen::Ref<Matrix<T>> c_tanh, Eigen::Ref<Matrix<T>> h_out) {
  const Index h = c_prev.rows();
  sigmoid_inplace<T>(z.topRows(2 * h));
  z.middleRows(2 * h, h) = z.middleRows(2 * h, h).array().tanh().matrix();
  sigmoid_inplace<T>(z.bottomRows(h));
  c = (z.middleRows(h, h).array() * c_prev.array() + z.topRows(h).array() * z.middleRows(2 * h, h).array()).matrix();
  c_tanh = c.array().tanh().matrix();
  h_out = (z.bottomRows(h).array() * c_tanh.array()).matrix();
}

template <typename T>
struct CellOutput {
  Vector<T> h;
  Vector<T> c;
};

/// One LSTM time step for a single input vector.
template <typename T>
CellOutput<T> lstm_cell_step(const LstmLayer<T>& layer, const std::type_identity_t<Vector<T>>& x,
                             const std::type_identity_t<Vector<T>>& h_prev,
                             const std::type_identity_t<Vector<T>>& c_prev) {
  const Index h = layer.units();
  if (x.size() != layer.input_dim() || h_prev.size() != h || c_prev.size() != h) {
    throw Error(ErrorCode::kShape, "lstm_cell_step: input or state size does not match the layer");
  }
  Matrix<T> z = layer.kernel * x + layer.recurrent * h_prev + layer.bias;
  Matrix<T> c(h, 1), c_tanh(h, 1), h_out(h, 1);
  lstm_gates<T>(z, c_prev, c, c_tanh, h_out);
  return {h_out.col(0), c.col(0)};
}

/// Intermediate values kept by a forward pass for backpropagation. Columns of
/// every sequence matrix are step-major: column t * batch + b.
template <typename T>
struct LstmTrace {
  Matrix<T> input;      // d x TB
  Matrix<T> gates;      // 4h x TB, activated [i, f, g, o]
  Matrix<T> cell;       // h x TB
  Matrix<T> cell_tanh;  // h x TB
  Matrix<T> hidden;     // h x TB
};

template <typename T>
struct DenseTrace {
  Matrix<T> input;   // in x B
  Matrix<T> output;  // out x B, after activation
};

template <typename T>
struct ForwardTrace {
  Index steps = 0;
  Index batch = 0;
  std::vector<LstmTrace<T>> lstm;
  std::vector<DenseTrace<T>> dense;
};

template <typename T>
void softmax_columns_inplace(Matrix<T>& m) {
  for (Index j = 0; j < m.cols(); ++j) {
    auto col = m.col(j);
    col.array() -= col.maxCoeff();
    col = col.array().exp().matrix();
    col /= col.sum();
  }
}

template <typename T>
void apply_activation(Matrix<T>& m, Activation a) {
  switch (a) {
    case Activation::kIdentity: break;
    case Activation::kRelu: m = m.cwiseMax(T(0)); break;
    case Activation::kSoftmax: softmax_columns_inplace(m); break;
  }
}

/// Runs a batch of sequences through the network.
///
/// `x` holds `steps * batch` columns of `input_dim` features, step-major
/// (column t * batch + b is step t of sequence b). Every LSTM layer starts
/// from zero hidden and cell state. Returns class probabilities, one column
/// per sequence. When `trace` is non-null it receives what `backward` needs.
template <typename T>
Matrix<T> forward_batch(const Network<T>& net, const Eigen::Ref<const Matrix<T>>& x, Index steps,
                        ForwardTrace<T>* trace = nullptr) {
  if (x.rows() != net.input_dim()) {
    throw Error(ErrorCode::kShape, "input has " + std::to_string(x.rows()) + " features, network expects " +
                                       std::to_string(net.input_dim()));
  }
  if (steps <= 0 || x.cols() == 0 || x.cols() % steps != 0) {
    throw Error(ErrorCode::kShape, "input column count is not a positive multiple of the step count");
  }
  const Index batch = x.cols() / steps;
  if (trace) {
    trace->steps = steps;
    trace->batch = batch;
    trace->lstm.assign(net.lstm.size(), {});
    trace->dense.assign(net.dense.size(), {});
  }

  Matrix<T> seq = x;
  for (std::size_t li = 0; li < net.lstm.size(); ++li) {
    const auto& layer = net.lstm[li];
    const Index h = layer.units();
    Matrix<T> z = layer.kernel * seq;
    z.colwise() += layer.bias;
    Matrix<T> cell(h, steps * batch), cell_tanh(h, steps * batch), hidden(h, steps * batch);
    Matrix<T> zero_state = Matrix<T>::Zero(h, batch);
    for (Index t = 0; t < steps; ++t) {
      const Index col = t * batch;
      if (t > 0) z.middleCols(col, batch).noalias() += layer.recurrent * hidden.middleCols(col - batch, batch);
      if (t > 0) {
        lstm_gates<T>(z.middleCols(col, batch), cell.middleCols(col - batch, batch), cell.middleCols(col, batch),
                      cell_tanh.middleCols(col, batch), hidden.middleCols(col, batch));
      } else {
        lstm_gates<T>(z.middleCols(0, batch), zero_state, cell.middleCols(0, batch), cell_tanh.middleCols(0, batch),
                      hidden.middleCols(0, batch));
      }
    }
    if (trace) {
      auto& tr = trace->lstm[li];
      tr.input = std::move(seq);
      tr.gates = std::move(z);
      tr.cell = std::move(cell);
      tr.cell_tanh = std::move(cell_tanh);
      tr.hidden = hidden;
    }
    seq = layer.return_sequences ? std::move(hidden) : Matrix<T>(hidden.rightCols(batch));
  }

  for (std::size_t li = 0; li < net.dense.size(); ++li) {
    const auto& layer = net.dense[li];
    Matrix<T> y = layer.kernel * seq;
    y.colwise() += layer.bias;
    apply_activation(y, layer.activation);
    if (trace) {
      trace->dense[li].input = std::move(seq);
      trace->dense[li].output = y;
    }
    seq = std::move(y);
  }
  return seq;
}

/// Probabilities for one sequence given as `input_dim x steps` (one column per frame).
template <typename T>
Vector<T> forward_sequence(const Network<T>& net, const Eigen::Ref<const Matrix<T>>& sequence) {
  return forward_batch<T>(net, sequence, sequence.cols()).col(0);
}

/// Probabilities for one window of `steps` frames stored frame-major.
template <typename T>
Vector<T> forward(const Network<T>& net, std::span<const float> window, Index steps = kWindowLength) {
  const Index d = net.input_dim();
  if (static_cast<Index>(window.size()) != steps * d) {
    throw Error(ErrorCode::kShape, "window holds " + std::to_string(window.size()) + " values, expected " +
                                       std::to_string(steps) + " frames of " + std::to_string(d));
  }
  Eigen::Map<const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic>> frames(window.data(), d, steps);
  return forward_sequence<T>(net, frames.template cast<T>());
}

}  // namespace snk::nn

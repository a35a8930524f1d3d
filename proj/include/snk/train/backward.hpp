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

#include <algorithm>
#include <cmath>
#include <span>
#include <string>

#include "snk/error.hpp"
#include "snk/nn/network.hpp"

namespace snk::train {

using nn::Index;
using nn::Matrix;
using nn::Network;
using nn::Vector;

inline constexpr double kProbabilityClip = 1e-7;

/// Categorical cross-entropy, -sum y log(clip(p, 1e-7, 1 - 1e-7)).
template <typename T>
double cross_entropy(std::span<const T> probabilities, std::span<const T> target) {
  if (probabilities.size() != target.size()) {
    throw Error(ErrorCode::kShape, "cross_entropy: probabilities and target differ in length");
  }
  double loss = 0.0;
  for (std::size_t k = 0; k < target.size(); ++k) {
    if (target[k] == T(0)) continue;
    const double p = std::clamp(static_cast<double>(probabilities[k]), kProbabilityClip, 1.0 - kProbabilityClip);
    loss -= static_cast<double>(target[k]) * std::log(p);
  }
  return loss;
}

template <typename T>
double cross_entropy(const Vector<T>& probabilities, const Vector<T>& target) {
  return cross_entropy<T>(std::span<const T>(probabilities.data(), static_cast<std::size_t>(probabilities.size())),
                          std::span<const T>(target.data(), static_cast<std::size_t>(target.size())));
}

/// Sum over columns of the per-sequence cross-entropy.
template <typename T>
double cross_entropy_sum(const Matrix<T>& probabilities, const Matrix<T>& targets) {
  if (probabilities.rows() != targets.rows() || probabilities.cols() != targets.cols()) {
    throw Error(ErrorCode::kShape, "cross_entropy: probabilities and targets differ in shape");
  }
  double total = 0.0;
  for (Index j = 0; j < probabilities.cols(); ++j) {
    total += cross_entropy<T>(std::span<const T>(probabilities.col(j).data(), static_cast<std::size_t>(probabilities.rows())),
                              std::span<const T>(targets.col(j).data(), static_cast<std::size_t>(targets.rows())));
  }
  return total;
}

namespace detail {

/// Backpropagates one LSTM layer through all steps. `d_hidden` is h x TB with
/// the loss gradient w.r.t. every emitted hidden state (zero where a state
/// feeds nothing downstream). Writes parameter gradients into `grad` and,
/// when `d_input` is non-null, the gradient w.r.t. the layer input.
template <typename T>
void lstm_backward(const nn::LstmLayer<T>& layer, const nn::LstmTrace<T>& tr, Index steps, Index batch,
                   const Matrix<T>& d_hidden, nn::LstmLayer<T>& grad, Matrix<T>* d_input) {
  const Index h = layer.units();
  Matrix<T> d_z(4 * h, steps * batch);
  Matrix<T> dh_next = Matrix<T>::Zero(h, batch);
  Matrix<T> dc_next = Matrix<T>::Zero(h, batch);
  for (Index t = steps - 1; t >= 0; --t) {
    const Index col = t * batch;
    const auto gates = tr.gates.middleCols(col, batch);
    const auto i = gates.topRows(h).array();
    const auto f = gates.middleRows(h, h).array();
    const auto g = gates.middleRows(2 * h, h).array();
    const auto o = gates.bottomRows(h).array();
    const auto tc = tr.cell_tanh.middleCols(col, batch).array();

    const Matrix<T> dh = d_hidden.middleCols(col, batch) + dh_next;
    const Matrix<T> dc = (dc_next.array() + dh.array() * o * (T(1) - tc.square())).matrix();

    auto dz = d_z.middleCols(col, batch);
    dz.topRows(h) = (dc.array() * g * i * (T(1) - i)).matrix();
    if (t > 0) {
      dz.middleRows(h, h) = (dc.array() * tr.cell.middleCols(col - batch, batch).array() * f * (T(1) - f)).matrix();
    } else {
      dz.middleRows(h, h).setZero();
    }
    dz.middleRows(2 * h, h) = (dc.array() * i * (T(1) - g.square())).matrix();
    dz.bottomRows(h) = (dh.array() * tc * o * (T(1) - o)).matrix();

    dc_next = (dc.array() * f).matrix();
    dh_next.noalias() = layer.recurrent.transpose() * dz;
  }
  grad.kernel.noalias() = d_z * tr.input.transpose();
  if (steps > 1) {
    grad.recurrent.noalias() = d_z.rightCols((steps - 1) * batch) * tr.hidden.leftCols((steps - 1) * batch).transpose();
  } else {
    grad.recurrent.setZero();
  }
  grad.bias = d_z.rowwise().sum();
  if (d_input) d_input->noalias() = layer.kernel.transpose() * d_z;
}

}  // namespace detail

/// Exact gradients of the mean batch cross-entropy with respect to every
/// parameter, given the trace of `forward_batch` and one-hot `targets`
/// (classes x batch). Softmax and cross-entropy are differentiated together,
/// so the logit gradient is (p - y) / batch.
template <typename T>
Network<T> backward(const Network<T>& net, const nn::ForwardTrace<T>& trace, const Matrix<T>& targets) {
  const Index batch = trace.batch;
  const Index steps = trace.steps;
  if (trace.dense.size() != net.dense.size() || trace.lstm.size() != net.lstm.size()) {
    throw Error(ErrorCode::kShape, "backward: trace does not belong to this network");
  }
  const Matrix<T>& probs = trace.dense.back().output;
  if (targets.rows() != probs.rows() || targets.cols() != batch) {
    throw Error(ErrorCode::kShape, "backward: targets must be classes x batch");
  }
  Network<T> grad = net.zeros_like();

  Matrix<T> d_out = (probs - targets) / static_cast<T>(batch);
  for (std::size_t li = net.dense.size(); li-- > 0;) {
    const auto& layer = net.dense[li];
    const auto& tr = trace.dense[li];
    Matrix<T> d_z;
    if (layer.activation == nn::Activation::kRelu) {
      d_z = (d_out.array() * (tr.output.array() > T(0)).template cast<T>()).matrix();
    } else {
      // Identity, or the softmax head whose combined gradient is already in d_out.
      d_z = std::move(d_out);
    }
    grad.dense[li].kernel.noalias() = d_z * tr.input.transpose();
    grad.dense[li].bias = d_z.rowwise().sum();
    d_out.noalias() = layer.kernel.transpose() * d_z;
  }

  // d_out is now the gradient w.r.t. the last LSTM layer's final hidden state.
  Matrix<T> d_hidden;
  for (std::size_t li = net.lstm.size(); li-- > 0;) {
    const auto& layer = net.lstm[li];
    if (!layer.return_sequences) {
      d_hidden = Matrix<T>::Zero(layer.units(), steps * batch);
      d_hidden.rightCols(batch) = d_out;
    } else {
      d_hidden = std::move(d_out);
    }
    Matrix<T> d_input;
    detail::lstm_backward<T>(layer, trace.lstm[li], steps, batch, d_hidden, grad.lstm[li], li > 0 ? &d_input : nullptr);
    d_out = std::move(d_input);
  }
  return grad;
}

/// Gradients for a single window (`input_dim x steps`) and one-hot target.
template <typename T>
Network<T> backward(const Network<T>& net, const Eigen::Ref<const Matrix<T>>& window, const Vector<T>& target) {
  nn::ForwardTrace<T> trace;
  nn::forward_batch<T>(net, window, window.cols(), &trace);
  return backward<T>(net, trace, Matrix<T>(target));
}

/// Logit gradient p - y for a single window; exposed for inspection.
template <typename T>
Vector<T> logit_gradient(const Vector<T>& probabilities, const Vector<T>& target) {
  return probabilities - target;
}

}  // namespace snk::train

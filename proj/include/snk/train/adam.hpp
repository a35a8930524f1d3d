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

#include "snk/error.hpp"
#include "snk/nn/network.hpp"

namespace snk::train {

struct AdamConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-7;
};

template <typename T>
struct AdamState {
  nn::Network<T> first_moment;
  nn::Network<T> second_moment;
  std::uint64_t step = 0;

  static AdamState for_network(const nn::Network<T>& net) { return {net.zeros_like(), net.zeros_like(), 0}; }
};

namespace detail {

template <typename T>
bool same_shapes(const nn::Network<T>& a, const nn::Network<T>& b) {
  if (a.lstm.size() != b.lstm.size() || a.dense.size() != b.dense.size()) return false;
  bool ok = true;
  for_each_tensor([&ok](const auto& x, const auto& y) { ok = ok && x.rows() == y.rows() && x.cols() == y.cols(); },
                  a, b);
  return ok;
}

}  // namespace detail

/// One bias-corrected Adam update, in place:
///   m <- b1 m + (1 - b1) g,   v <- b2 v + (1 - b2) g^2,   t <- t + 1
///   p <- p - lr * m_hat / (sqrt(v_hat) + eps)
template <typename T>
void adam_step(nn::Network<T>& net, const nn::Network<T>& grad, AdamState<T>& state, const AdamConfig& cfg) {
  if (!detail::same_shapes(net, grad) || !detail::same_shapes(net, state.first_moment) ||
      !detail::same_shapes(net, state.second_moment)) {
    throw Error(ErrorCode::kShape, "adam_step: gradient or state shape differs from the parameters");
  }
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const T b1 = static_cast<T>(cfg.beta1);
  const T b2 = static_cast<T>(cfg.beta2);
  const T c1 = static_cast<T>(1.0 / (1.0 - std::pow(cfg.beta1, t)));
  const T c2 = static_cast<T>(1.0 / (1.0 - std::pow(cfg.beta2, t)));
  const T lr = static_cast<T>(cfg.learning_rate);
  const T eps = static_cast<T>(cfg.epsilon);
  for_each_tensor(
      [&](auto& p, const auto& g, auto& m, auto& v) {
        m = b1 * m + (T(1) - b1) * g;
        v = (b2 * v.array() + (T(1) - b2) * g.array().square()).matrix();
        p.array() -= lr * (m.array() * c1) / ((v.array() * c2).sqrt() + eps);
      },
      net, grad, state.first_moment, state.second_moment);
}

/// Global L2 norm over every gradient tensor.
template <typename T>
double global_norm(const nn::Network<T>& grad) {
  double sq = 0.0;
  for_each_tensor([&sq](const auto& g) { sq += static_cast<double>(g.squaredNorm()); }, grad);
  return std::sqrt(sq);
}

/// Rescales `grad` so its global norm is at most `max_norm`.
template <typename T>
void clip_global_norm(nn::Network<T>& grad, double max_norm) {
  const double norm = global_norm(grad);
  if (norm > max_norm && norm > 0.0) {
    const T scale = static_cast<T>(max_norm / norm);
    for_each_tensor([scale](auto& g) { g *= scale; }, grad);
  }
}

}  // namespace snk::train

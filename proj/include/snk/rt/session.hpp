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
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "snk/error.hpp"
#include "snk/frame.hpp"
#include "snk/labels.hpp"
#include "snk/nn/network.hpp"
#include "snk/rt/cycle.hpp"

namespace snk::rt {

/// A prediction is stable once the last `window_count` predictions agree on
/// the top class, each with probability at least `threshold`.
struct StabilityConfig {
  double threshold = 0.7;
  std::size_t window_count = 5;

  void validate() const {
    if (!(threshold >= 0.0 && threshold <= 1.0)) throw Error(ErrorCode::kConfig, "stability threshold must lie in [0, 1]");
    if (window_count < 1) throw Error(ErrorCode::kConfig, "stability window count must be >= 1");
  }
};

struct Prediction {
  std::int64_t timestamp_ms = 0;
  std::array<float, kNumClasses> probabilities{};
  ClassLabel top_class;
  bool stable = false;

  float top_probability() const { return probabilities[top_class.index()]; }
  friend bool operator==(const Prediction&, const Prediction&) = default;
};

/// Debounces the prediction stream.
class StabilityFilter {
 public:
  explicit StabilityFilter(StabilityConfig cfg = {}) : cfg_(cfg) { cfg_.validate(); }

  bool push(ClassLabel top, float probability) {
    votes_.emplace_back(top, probability);
    if (votes_.size() > cfg_.window_count) votes_.pop_front();
    if (votes_.size() < cfg_.window_count) return false;
    return std::all_of(votes_.begin(), votes_.end(), [&](const auto& v) {
      return v.first == top && static_cast<double>(v.second) >= cfg_.threshold;
    });
  }

  std::size_t size() const { return votes_.size(); }
  const StabilityConfig& config() const { return cfg_; }

 private:
  StabilityConfig cfg_;
  std::deque<std::pair<ClassLabel, float>> votes_;
};

/// Per-connection inference state: the sliding window, the stability vote
/// buffer and the cycle tracker. The network is borrowed and never modified.
class Session {
 public:
  struct Step {
    std::optional<Prediction> prediction;
    std::optional<CycleEvent> cycle;
  };

  Session(const nn::Network<float>& net, StabilityConfig stability = {},
          std::vector<ClassLabel> cycle_order = canonical_cycle())
      : net_(&net), stability_(stability), tracker_(std::move(cycle_order)) {
    if (net.input_dim() != static_cast<nn::Index>(kFeatureDim) ||
        net.num_classes() != static_cast<nn::Index>(kNumClasses)) {
      throw Error(ErrorCode::kShape, "serving needs a network with " + std::to_string(kFeatureDim) + " inputs and " +
                                         std::to_string(kNumClasses) + " classes");
    }
  }

  /// Pushes the frame; once the window is full, classifies it.
  std::optional<Prediction> ingest_frame(KeypointFrame frame) {
    validate_frame(frame);
    if (last_timestamp_ && frame.timestamp_ms < *last_timestamp_) {
      throw Error(ErrorCode::kOrdering, "timestamp " + std::to_string(frame.timestamp_ms) + " precedes " +
                                            std::to_string(*last_timestamp_));
    }
    last_timestamp_ = frame.timestamp_ms;
    const std::int64_t ts = frame.timestamp_ms;
    window_.push(std::move(frame));
    if (!window_.ready()) return std::nullopt;

    const std::vector<float> flat = window_.flatten();
    const nn::Vector<float> probs = nn::forward<float>(*net_, flat);
    Prediction p;
    p.timestamp_ms = ts;
    std::copy(probs.data(), probs.data() + kNumClasses, p.probabilities.begin());
    nn::Index best = 0;
    probs.maxCoeff(&best);
    p.top_class = ClassLabel::from_index(static_cast<std::size_t>(best));
    p.stable = stability_.push(p.top_class, p.top_probability());
    return p;
  }

  /// `ingest_frame`, then feeds the tracker whenever a stable prediction names
  /// a different class than the last one fed. After a completed round the
  /// memory is cleared, so a held closing pose also opens the next round.
  Step process(KeypointFrame frame) {
    Step step;
    step.prediction = ingest_frame(std::move(frame));
    if (step.prediction && step.prediction->stable && step.prediction->top_class != last_fed_) {
      last_fed_ = step.prediction->top_class;
      step.cycle = tracker_.advance(step.prediction->top_class);
      if (step.cycle->kind == CycleEventKind::kCycleComplete) last_fed_.reset();
    }
    return step;
  }

  const SequenceWindow& window() const { return window_; }
  const CycleTracker& tracker() const { return tracker_; }
  const StabilityFilter& stability() const { return stability_; }

 private:
  const nn::Network<float>* net_;
  SequenceWindow window_;
  StabilityFilter stability_;
  CycleTracker tracker_;
  std::optional<std::int64_t> last_timestamp_;
  std::optional<ClassLabel> last_fed_;
};

}  // namespace snk::rt

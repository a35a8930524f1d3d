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

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "snk/error.hpp"
#include "snk/labels.hpp"

namespace snk::rt {

/// The twelve positions of one round: the first eight asanas in order, then
/// Ashwa Sanchalanasana, Hasta Padasana, Hasta Uttanasana and Pranamasana again.
inline std::vector<ClassLabel> canonical_cycle() {
  std::vector<ClassLabel> order;
  for (std::size_t c : {0, 1, 2, 3, 4, 5, 6, 7, 3, 2, 1, 0}) order.push_back(ClassLabel::from_index(c));
  return order;
}

enum class CycleEventKind : std::uint8_t {
  kAdvance = 0,
  kHold = 1,
  kOutOfOrder = 2,
  kCycleComplete = 3,
};

inline std::string_view to_string(CycleEventKind k) {
  switch (k) {
    case CycleEventKind::kAdvance: return "Advance";
    case CycleEventKind::kHold: return "Hold";
    case CycleEventKind::kOutOfOrder: return "OutOfOrder";
    case CycleEventKind::kCycleComplete: return "CycleComplete";
  }
  return "?";
}

struct CycleEvent {
  CycleEventKind kind = CycleEventKind::kAdvance;
  std::size_t step_index = 0;  // tracker position after the event
  ClassLabel expected;         // what the tracker was waiting for
  ClassLabel observed;

  std::string describe() const {
    std::string s(to_string(kind));
    if (kind == CycleEventKind::kOutOfOrder) {
      s += ": expected " + std::string(expected.name()) + ", observed " + std::string(observed.name());
    }
    return s;
  }

  friend bool operator==(const CycleEvent&, const CycleEvent&) = default;
};

/// Position within the asana sequence. Fed one stable class at a time.
class CycleTracker {
 public:
  explicit CycleTracker(std::vector<ClassLabel> order = canonical_cycle()) : order_(std::move(order)) {
    if (order_.size() < 2 || order_.size() > 255) {
      throw Error(ErrorCode::kConfig, "cycle order must have between 2 and 255 steps");
    }
  }

  /// Matches the expected pose: move on (completing the round on wrap).
  /// Matches the previous pose: Hold. Anything else: OutOfOrder, no move.
  CycleEvent advance(ClassLabel stable_class) {
    const ClassLabel expected = order_[step_];
    const ClassLabel previous = order_[(step_ + order_.size() - 1) % order_.size()];
    if (stable_class == expected) {
      step_ = (step_ + 1) % order_.size();
      if (step_ == 0) {
        ++completed_;
        return {CycleEventKind::kCycleComplete, step_, expected, stable_class};
      }
      return {CycleEventKind::kAdvance, step_, expected, stable_class};
    }
    if (stable_class == previous) return {CycleEventKind::kHold, step_, expected, stable_class};
    return {CycleEventKind::kOutOfOrder, step_, expected, stable_class};
  }

  std::size_t step_index() const { return step_; }
  std::size_t completed_cycles() const { return completed_; }
  ClassLabel expected() const { return order_[step_]; }
  const std::vector<ClassLabel>& order() const { return order_; }

 private:
  std::vector<ClassLabel> order_;
  std::size_t step_ = 0;
  std::size_t completed_ = 0;
};

}  // namespace snk::rt

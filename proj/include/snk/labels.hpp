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

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "snk/error.hpp"

namespace snk {

inline constexpr std::size_t kNumClasses = 8;

// Canonical order follows the order the asanas first appear in one cycle.
inline constexpr std::array<std::string_view, kNumClasses> kClassNames = {
    "Pranamasana",       "Hasta Uttanasana",   "Hasta Padasana", "Ashwa Sanchalanasana",
    "Dandasana",         "Ashtanga Namaskara", "Bhujangasana",   "Svanasana",
};

/// One of the eight asana classes. Index and name are a bijection.
class ClassLabel {
 public:
  constexpr ClassLabel() = default;

  static ClassLabel from_index(std::size_t index) {
    if (index >= kNumClasses) {
      throw Error(ErrorCode::kLabel, "class index " + std::to_string(index) + " out of range [0, " +
                                         std::to_string(kNumClasses) + ")");
    }
    return ClassLabel(static_cast<std::uint8_t>(index));
  }

  static std::optional<ClassLabel> find(std::string_view name) {
    for (std::size_t i = 0; i < kNumClasses; ++i) {
      if (kClassNames[i] == name) return ClassLabel(static_cast<std::uint8_t>(i));
    }
    return std::nullopt;
  }

  static ClassLabel from_name(std::string_view name) {
    if (auto label = find(name)) return *label;
    throw Error(ErrorCode::kUnknownClass, "unknown class name '" + std::string(name) + "'");
  }

  constexpr std::size_t index() const { return index_; }
  constexpr std::string_view name() const { return kClassNames[index_]; }

  friend constexpr bool operator==(ClassLabel, ClassLabel) = default;
  friend constexpr auto operator<=>(ClassLabel, ClassLabel) = default;

 private:
  constexpr explicit ClassLabel(std::uint8_t index) : index_(index) {}
  std::uint8_t index_ = 0;
};

/// 1.0 at the label index, 0.0 elsewhere.
inline std::vector<double> one_hot(std::size_t label_index, std::size_t num_classes = kNumClasses) {
  if (label_index >= num_classes) {
    throw Error(ErrorCode::kLabel, "label " + std::to_string(label_index) +
                                       " out of range for " + std::to_string(num_classes) +
                                       " classes");
  }
  std::vector<double> v(num_classes, 0.0);
  v[label_index] = 1.0;
  return v;
}

inline std::vector<double> one_hot(ClassLabel label, std::size_t num_classes = kNumClasses) {
  return one_hot(label.index(), num_classes);
}

}  // namespace snk

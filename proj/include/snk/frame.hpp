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
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "snk/error.hpp"

namespace snk {

// Holistic landmark layout: pose (x, y, z, visibility), then face, left hand
// and right hand (x, y, z each).
inline constexpr std::size_t kPoseLandmarks = 33;
inline constexpr std::size_t kFaceLandmarks = 468;
inline constexpr std::size_t kHandLandmarks = 21;

inline constexpr std::size_t kPoseValues = kPoseLandmarks * 4;  // 132
inline constexpr std::size_t kFaceValues = kFaceLandmarks * 3;  // 1404
inline constexpr std::size_t kHandValues = kHandLandmarks * 3;  // 63

inline constexpr std::size_t kPoseOffset = 0;
inline constexpr std::size_t kFaceOffset = kPoseOffset + kPoseValues;       // 132
inline constexpr std::size_t kLeftHandOffset = kFaceOffset + kFaceValues;   // 1536
inline constexpr std::size_t kRightHandOffset = kLeftHandOffset + kHandValues;  // 1599
inline constexpr std::size_t kFeatureDim = kRightHandOffset + kHandValues;  // 1662

inline constexpr std::size_t kWindowLength = 10;

static_assert(kFeatureDim == 1662);
// First LSTM layer of the reference stack: 4 * 64 * (64 + 1662 + 1) weights.
static_assert(4 * 64 * (64 + kFeatureDim + 1) == 442112);

struct PoseLandmark {
  float x = 0, y = 0, z = 0, visibility = 0;
};

struct Landmark {
  float x = 0, y = 0, z = 0;
};

/// One holistic landmark snapshot. `values` is kFeatureDim finite floats once
/// validated; frames decoded off the wire may carry other sizes until
/// `validate_frame` rejects them.
struct KeypointFrame {
  std::int64_t timestamp_ms = 0;
  std::vector<float> values;
};

inline void validate_values(std::span<const float> values, std::size_t expected_dim) {
  if (values.size() != expected_dim) {
    throw Error(ErrorCode::kShape, "frame has " + std::to_string(values.size()) +
                                       " values, expected " + std::to_string(expected_dim));
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw Error(ErrorCode::kInvalidValue, "non-finite value at index " + std::to_string(i));
    }
  }
}

inline void validate_frame(const KeypointFrame& frame) { validate_values(frame.values, kFeatureDim); }

namespace detail {

inline void check_finite(float v, const char* block) {
  if (!std::isfinite(v)) {
    throw Error(ErrorCode::kInvalidValue, std::string("non-finite coordinate in ") + block + " block");
  }
}

template <typename L>
void check_block(std::span<const L> block, std::size_t expected, const char* name) {
  if (block.size() != expected) {
    throw Error(ErrorCode::kBlockShape, std::string(name) + " block has " +
                                            std::to_string(block.size()) + " landmarks, expected " +
                                            std::to_string(expected));
  }
}

inline void put_xyz(std::span<const Landmark> block, float* out, const char* name) {
  for (const Landmark& l : block) {
    check_finite(l.x, name);
    check_finite(l.y, name);
    check_finite(l.z, name);
    *out++ = l.x;
    *out++ = l.y;
    *out++ = l.z;
  }
}

}  // namespace detail

/// Flattens the detected blocks into the fixed 1662-value layout. Absent
/// blocks stay all-zero. All blocks are validated before any value is written.
inline KeypointFrame assemble_frame(std::optional<std::span<const PoseLandmark>> pose,
                                    std::optional<std::span<const Landmark>> face,
                                    std::optional<std::span<const Landmark>> left_hand,
                                    std::optional<std::span<const Landmark>> right_hand,
                                    std::int64_t timestamp_ms) {
  if (pose) detail::check_block(*pose, kPoseLandmarks, "pose");
  if (face) detail::check_block(*face, kFaceLandmarks, "face");
  if (left_hand) detail::check_block(*left_hand, kHandLandmarks, "left-hand");
  if (right_hand) detail::check_block(*right_hand, kHandLandmarks, "right-hand");

  KeypointFrame frame{timestamp_ms, std::vector<float>(kFeatureDim, 0.0f)};
  float* out = frame.values.data();
  if (pose) {
    float* p = out + kPoseOffset;
    for (const PoseLandmark& l : *pose) {
      for (float v : {l.x, l.y, l.z, l.visibility}) {
        detail::check_finite(v, "pose");
        *p++ = v;
      }
    }
  }
  if (face) detail::put_xyz(*face, out + kFaceOffset, "face");
  if (left_hand) detail::put_xyz(*left_hand, out + kLeftHandOffset, "left-hand");
  if (right_hand) detail::put_xyz(*right_hand, out + kRightHandOffset, "right-hand");
  return frame;
}

/// FIFO of the most recent frames, oldest first.
class SequenceWindow {
 public:
  explicit SequenceWindow(std::size_t capacity = kWindowLength) : capacity_(capacity) {}

  void push(KeypointFrame frame) {
    frames_.push_back(std::move(frame));
    if (frames_.size() > capacity_) frames_.pop_front();
  }

  bool ready() const { return frames_.size() == capacity_; }
  std::size_t size() const { return frames_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return frames_.empty(); }
  const KeypointFrame& operator[](std::size_t i) const { return frames_[i]; }
  const KeypointFrame& back() const { return frames_.back(); }
  auto begin() const { return frames_.begin(); }
  auto end() const { return frames_.end(); }

  /// Frames concatenated oldest first (frame-major), `size() * dim` floats.
  std::vector<float> flatten() const {
    std::vector<float> out;
    if (frames_.empty()) return out;
    out.reserve(frames_.size() * frames_.front().values.size());
    for (const auto& f : frames_) out.insert(out.end(), f.values.begin(), f.values.end());
    return out;
  }

 private:
  std::size_t capacity_;
  std::deque<KeypointFrame> frames_;
};

}  // namespace snk

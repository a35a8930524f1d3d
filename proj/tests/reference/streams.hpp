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

// Frame streams for the streaming tests: a hand-built network whose output
// class is chosen by the newest frame, and the 120-frame replay fixture.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "snk/dataset.hpp"
#include "snk/nn/network.hpp"
#include "snk/rt/cycle.hpp"
#include "snk/rt/protocol.hpp"
#include "snk/sequence_io.hpp"

namespace snk::testing {

/// 1662 -> LSTM(8) -> Dense(8, softmax). Input and output gates saturate
/// open, the forget gate shut, so h_j = tanh(tanh(x_j)) of the newest frame.
/// A frame with feature c set to 3 and features 0..7 otherwise zero is
/// classified as c with probability above 0.99.
inline nn::Network<float> indicator_network() {
  nn::Network<float> net = nn::make_network<float>({static_cast<nn::Index>(kFeatureDim), {8}, {8}});
  auto& l = net.lstm[0];
  l.bias.segment(0, 8).setConstant(20.0f);
  l.bias.segment(8, 8).setConstant(-20.0f);
  l.bias.segment(24, 8).setConstant(20.0f);
  for (int j = 0; j < 8; ++j) l.kernel(16 + j, j) = 1.0f;
  net.dense[0].kernel = nn::Matrix<float>::Identity(8, 8) * 50.0f;
  return net;
}

inline std::vector<float> pose_frame(std::size_t cls, float strength = 3.0f) {
  std::vector<float> v(kFeatureDim, 0.0f);
  v[cls] = strength;
  return v;
}

inline std::int64_t frame_time_ms(std::size_t i) {
  return static_cast<std::int64_t>(std::llround(static_cast<double>(i) * 1000.0 / 60.0));
}

/// Twelve synthetic sequences (seed 7, noise 0.05) laid end to end in cycle
/// order: 120 frames at 60 fps.
inline FrameStream replay_fixture() {
  const LabeledDataset ds = gen_synthetic(2, 0.05, 7);
  FrameStream fs;
  fs.dim = static_cast<std::uint16_t>(kFeatureDim);
  fs.fps = 60.0f;
  fs.label = ClassLabel::from_index(0);
  for (ClassLabel c : rt::canonical_cycle()) {
    const auto& v = ds.sequences[2 * c.index()].values;
    fs.values.insert(fs.values.end(), v.begin(), v.end());
    fs.frame_count += static_cast<std::uint32_t>(kWindowLength);
  }
  return fs;
}

/// HELLO followed by one FRAME per fixture frame, as one byte string.
inline std::vector<std::uint8_t> client_bytes(const FrameStream& fs) {
  std::vector<std::uint8_t> out = rt::encode(rt::Hello{rt::kProtocolVersion, fs.dim});
  for (std::size_t i = 0; i < fs.frame_count; ++i) {
    const auto f = fs.frame(i);
    const auto msg = rt::encode(rt::FrameMsg{static_cast<std::uint64_t>(frame_time_ms(i)), {f.begin(), f.end()}});
    out.insert(out.end(), msg.begin(), msg.end());
  }
  return out;
}

inline std::vector<rt::Message> decode_all(std::span<const std::uint8_t> bytes) {
  rt::StreamDecoder d;
  d.feed(bytes);
  std::vector<rt::Message> out;
  while (auto m = d.next()) out.push_back(std::move(*m));
  return out;
}

}  // namespace snk::testing

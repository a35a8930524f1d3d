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

#include <cstdint>
#include <vector>

#include <gtest/gtest.h>

#include "snk/rt/protocol.hpp"

namespace snk::rt {
namespace {

using Bytes = std::vector<std::uint8_t>;

WireError wire_code_of(const Bytes& bytes) {
  try {
    decode(bytes);
  } catch (const ProtocolError& e) {
    return e.wire_code();
  }
  ADD_FAILURE() << "decode accepted the bytes";
  return WireError::kInternal;
}

void expect_golden(const Message& m, const Bytes& want) {
  EXPECT_EQ(encode(m), want);
  EXPECT_EQ(decode(want), m);
  EXPECT_EQ(encode(decode(want)), want);
}

TEST(Wire, HelloGolden) { expect_golden(Hello{1, 1662}, {0x04, 0, 0, 0, 0x01, 0x01, 0x00, 0x7e, 0x06}); }

TEST(Wire, HelloAckGolden) {
  expect_golden(HelloAck{{"A", "BC"}}, {0x06, 0, 0, 0, 0x02, 0x02, 0x01, 'A', 0x02, 'B', 'C'});
}

TEST(Wire, HelloAckWithCanonicalNames) {
  const HelloAck ack{{kClassNames.begin(), kClassNames.end()}};
  std::size_t payload = 1;
  for (auto n : kClassNames) payload += 1 + n.size();
  const Bytes bytes = encode(ack);
  EXPECT_EQ(bytes.size(), 5 + payload);
  EXPECT_EQ(bytes[5], 8);
  EXPECT_EQ(bytes[6], 11);  // "Pranamasana"
  EXPECT_EQ(decode(bytes), Message(ack));
}

TEST(Wire, FrameGolden) {
  expect_golden(FrameMsg{1, {1.0f, -2.0f}}, {0x12, 0, 0, 0, 0x10, 0x01, 0, 0, 0, 0, 0, 0, 0, 0x02, 0x00,
                                             0x00, 0x00, 0x80, 0x3f, 0x00, 0x00, 0x00, 0xc0});
}

TEST(Wire, FullFrameIs6663Bytes) {
  const Bytes bytes = encode(FrameMsg{123456789, std::vector<float>(1662, 0.5f)});
  EXPECT_EQ(bytes.size(), 6663u);
  EXPECT_EQ(bytes.size(), 5u + 8u + 2u + 1662u * 4u);
  EXPECT_EQ(Bytes(bytes.begin(), bytes.begin() + 5), (Bytes{0x02, 0x1a, 0x00, 0x00, 0x10}));
  EXPECT_EQ(bytes[13], 0x7e);
  EXPECT_EQ(bytes[14], 0x06);
}

TEST(Wire, PredictionGolden) {
  PredictionMsg m;
  m.timestamp_ms = 0x0102;
  m.class_index = 3;
  m.probabilities.fill(0.125f);
  m.flags = PredictionMsg::kStableFlag;
  Bytes want = {0x2a, 0, 0, 0, 0x20, 0x02, 0x01, 0, 0, 0, 0, 0, 0, 0x03};
  for (int k = 0; k < 8; ++k) want.insert(want.end(), {0x00, 0x00, 0x00, 0x3e});
  want.push_back(0x01);
  EXPECT_EQ(want.size(), 47u);
  expect_golden(m, want);
  EXPECT_TRUE(std::get<PredictionMsg>(decode(want)).stable());
}

TEST(Wire, CycleGolden) {
  expect_golden(CycleMsg{3, 0, 0, 0}, {0x04, 0, 0, 0, 0x21, 0x03, 0x00, 0x00, 0x00});
  expect_golden(CycleMsg{2, 4, 4, 7}, {0x04, 0, 0, 0, 0x21, 0x02, 0x04, 0x04, 0x07});
}

TEST(Wire, ErrorGolden) {
  expect_golden(ErrorMsg{WireError::kBadDim, "bad"}, {0x05, 0, 0, 0, 0x7f, 0x02, 0x03, 'b', 'a', 'd'});
}

TEST(Wire, LengthMismatchIsMalformed) {
  Bytes bytes = encode(Hello{1, 1662});
  bytes.push_back(0);
  EXPECT_EQ(wire_code_of(bytes), WireError::kMalformed);
  bytes = encode(Hello{1, 1662});
  bytes[0] = 3;
  bytes.pop_back();
  EXPECT_EQ(wire_code_of(bytes), WireError::kMalformed);
}

TEST(Wire, FrameDimDisagreeingWithPayloadIsMalformed) {
  Bytes bytes = encode(FrameMsg{0, {1.0f, 2.0f, 3.0f}});
  bytes[13] = 4;
  EXPECT_EQ(wire_code_of(bytes), WireError::kMalformed);
}

TEST(Wire, UnknownTypeIsMalformed) {
  EXPECT_EQ(wire_code_of({0x00, 0, 0, 0, 0x55}), WireError::kMalformed);
  EXPECT_EQ(wire_code_of({0x00, 0, 0}), WireError::kMalformed);
}

TEST(StreamDecoder, ReassemblesByteByByte) {
  const std::vector<Message> msgs = {Hello{1, 1662}, FrameMsg{5, {0.25f, 0.5f}}, CycleMsg{0, 1, 0, 0},
                                     ErrorMsg{WireError::kTooLarge, ""}};
  Bytes stream;
  for (const auto& m : msgs) {
    const Bytes b = encode(m);
    stream.insert(stream.end(), b.begin(), b.end());
  }
  StreamDecoder d;
  std::vector<Message> got;
  for (std::uint8_t byte : stream) {
    d.feed(std::span<const std::uint8_t>(&byte, 1));
    while (auto m = d.next()) got.push_back(*m);
  }
  EXPECT_EQ(got, msgs);
  EXPECT_EQ(d.buffered(), 0u);
}

TEST(StreamDecoder, OversizedLengthIsTooLarge) {
  StreamDecoder d;
  const Bytes header = {0x01, 0x00, 0x10, 0x00, 0x10};  // 1 MiB + 1
  d.feed(header);
  try {
    d.next();
    FAIL();
  } catch (const ProtocolError& e) {
    EXPECT_EQ(e.wire_code(), WireError::kTooLarge);
    EXPECT_EQ(e.code(), ErrorCode::kProtocol);
  }
}

TEST(StreamDecoder, WaitsForCompleteMessage) {
  const Bytes b = encode(Hello{1, 2});
  StreamDecoder d;
  d.feed(std::span<const std::uint8_t>(b).first(b.size() - 1));
  EXPECT_FALSE(d.next().has_value());
  d.feed(std::span<const std::uint8_t>(b).last(1));
  EXPECT_EQ(d.next(), Message(Hello{1, 2}));
}

}  // namespace
}  // namespace snk::rt

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

#include <cstring>
#include <filesystem>
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "snk/rng.hpp"
#include "snk/sequence_io.hpp"

namespace snk {
namespace {

Sequence random_sequence(std::uint64_t seed, std::size_t label) {
  Rng rng(seed);
  Sequence s{std::vector<float>(kSequenceValues), ClassLabel::from_index(label), 30.0f};
  for (float& v : s.values) v = static_cast<float>(rng.uniform(-2, 2));
  // Values whose bit patterns must survive unchanged.
  s.values[0] = -0.0f;
  s.values[1] = std::numeric_limits<float>::denorm_min();
  s.values[2] = std::numeric_limits<float>::max();
  return s;
}

ErrorCode code_of(const std::vector<std::uint8_t>& bytes) {
  try {
    decode_sequence(bytes);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "decode accepted the bytes";
  return ErrorCode::kIo;
}

TEST(Snk1, HeaderGoldenBytes) {
  Sequence s{std::vector<float>(kSequenceValues, 0.0f), ClassLabel::from_index(5), 60.0f};
  s.values[0] = 1.0f;
  const auto bytes = encode_sequence(s);
  ASSERT_EQ(bytes.size(), 17u + 4u * 16620u);
  const std::vector<std::uint8_t> header = {'S', 'N', 'K', '1', 0x01, 0x00, 0x05, 0x00, 0x00, 0x70, 0x42,
                                            0x0a, 0x00, 0x00, 0x00, 0x7e, 0x06};
  EXPECT_EQ(std::vector<std::uint8_t>(bytes.begin(), bytes.begin() + 17), header);
  // 1.0f little-endian.
  EXPECT_EQ(std::vector<std::uint8_t>(bytes.begin() + 17, bytes.begin() + 21),
            (std::vector<std::uint8_t>{0x00, 0x00, 0x80, 0x3f}));
}

TEST(Snk1, RoundTripIsBitExact) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Sequence s = random_sequence(seed, seed % 8);
    const Sequence back = decode_sequence(encode_sequence(s));
    EXPECT_EQ(back.label, s.label);
    EXPECT_EQ(back.fps, s.fps);
    ASSERT_EQ(back.values.size(), s.values.size());
    EXPECT_EQ(0, std::memcmp(back.values.data(), s.values.data(), s.values.size() * sizeof(float)));
    EXPECT_EQ(encode_sequence(back), encode_sequence(s));
  }
}

TEST(Snk1, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "snk_seqio_roundtrip.snk";
  const Sequence s = random_sequence(9, 2);
  write_sequence(path, s);
  const Sequence back = read_sequence(path);
  EXPECT_EQ(0, std::memcmp(back.values.data(), s.values.data(), s.values.size() * sizeof(float)));
  std::filesystem::remove(path);
}

TEST(Snk1, FrameStreamOfAnyLength) {
  FrameStream fs{3, 4, {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11}, ClassLabel::from_index(1), 25.0f};
  const FrameStream back = decode_snk1(encode_snk1(fs));
  EXPECT_EQ(back.frame_count, 3u);
  EXPECT_EQ(back.dim, 4u);
  EXPECT_EQ(back.values, fs.values);
  EXPECT_EQ(back.frame(2)[0], 8.0f);
  // A valid stream that is not one window is rejected as a sequence.
  EXPECT_EQ(code_of(encode_snk1(fs)), ErrorCode::kShape);
}

TEST(Snk1, AlteredMagicIsFormatError) {
  auto bytes = encode_sequence(random_sequence(1, 0));
  bytes[0] = 'X';
  EXPECT_EQ(code_of(bytes), ErrorCode::kFormat);
}

TEST(Snk1, UnknownVersionIsFormatError) {
  auto bytes = encode_sequence(random_sequence(1, 0));
  bytes[4] = 2;
  EXPECT_EQ(code_of(bytes), ErrorCode::kFormat);
}

TEST(Snk1, TruncatedPayloadIsCorruptFile) {
  auto bytes = encode_sequence(random_sequence(1, 0));
  bytes.pop_back();
  EXPECT_EQ(code_of(bytes), ErrorCode::kCorruptFile);
  bytes.resize(12);
  EXPECT_EQ(code_of(bytes), ErrorCode::kCorruptFile);
}

TEST(Snk1, TrailingBytesAreCorruptFile) {
  auto bytes = encode_sequence(random_sequence(1, 0));
  bytes.push_back(0);
  EXPECT_EQ(code_of(bytes), ErrorCode::kCorruptFile);
}

TEST(Snk1, NonFinitePayloadIsInvalidValue) {
  auto bytes = encode_sequence(random_sequence(1, 0));
  const float nan = std::numeric_limits<float>::quiet_NaN();
  std::memcpy(bytes.data() + 17 + 4 * 1000, &nan, 4);
  EXPECT_EQ(code_of(bytes), ErrorCode::kInvalidValue);
}

TEST(Snk1, BadLabelIsLabelError) {
  auto bytes = encode_sequence(random_sequence(1, 0));
  bytes[6] = 8;
  EXPECT_EQ(code_of(bytes), ErrorCode::kLabel);
}

TEST(Snk1, EncodeRejectsWrongShape) {
  Sequence s{std::vector<float>(kSequenceValues - 1), ClassLabel::from_index(0), 60.0f};
  EXPECT_THROW(encode_sequence(s), Error);
}

TEST(Snk1, ReadErrorsCarryThePath) {
  const auto path = std::filesystem::temp_directory_path() / "snk_seqio_bad.snk";
  auto bytes = encode_sequence(random_sequence(3, 0));
  bytes[1] = '?';
  write_file_bytes(path, bytes);
  try {
    read_sequence(path);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kFormat);
    EXPECT_NE(std::string(e.what()).find("snk_seqio_bad.snk"), std::string::npos);
  }
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace snk

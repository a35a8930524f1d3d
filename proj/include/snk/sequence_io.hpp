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

// SNK1 sequence files: one labeled block of frames per file.
//
//   offset  size  field
//   0       4     magic "SNK1"
//   4       2     version (1)
//   6       1     label index
//   7       4     fps (f32)
//   11      4     frame_count
//   15      2     dim
//   17      ...   frame_count * dim f32 values, frame-major
//
// All integers and floats are little-endian.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "snk/binary_io.hpp"
#include "snk/error.hpp"
#include "snk/frame.hpp"
#include "snk/labels.hpp"

namespace snk {

inline constexpr std::string_view kSequenceMagic = "SNK1";
inline constexpr std::uint16_t kSequenceVersion = 1;
inline constexpr std::size_t kSequenceHeaderSize = 17;
inline constexpr std::size_t kSequenceValues = kWindowLength * kFeatureDim;

/// A labeled training sample: kWindowLength frames of kFeatureDim values.
struct Sequence {
  std::vector<float> values;  // frame-major, kSequenceValues entries
  ClassLabel label;
  float fps = 60.0f;

  friend bool operator==(const Sequence&, const Sequence&) = default;
};

/// Any number of frames in the SNK1 container. Used for replay fixtures,
/// which are longer than one window.
struct FrameStream {
  std::uint32_t frame_count = 0;
  std::uint16_t dim = 0;
  std::vector<float> values;
  ClassLabel label;
  float fps = 60.0f;

  std::span<const float> frame(std::size_t i) const {
    return std::span<const float>(values).subspan(i * dim, dim);
  }
};

inline std::vector<std::uint8_t> encode_snk1(const FrameStream& s) {
  if (s.values.size() != std::size_t{s.frame_count} * s.dim) {
    throw Error(ErrorCode::kShape, "frame stream holds " + std::to_string(s.values.size()) +
                                       " values, header declares " +
                                       std::to_string(std::size_t{s.frame_count} * s.dim));
  }
  if (!std::isfinite(s.fps) || s.fps <= 0.0f) {
    throw Error(ErrorCode::kInvalidValue, "fps must be finite and positive");
  }
  for (float v : s.values) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kInvalidValue, "non-finite sequence value");
  }
  ByteWriter w;
  w.raw(kSequenceMagic);
  w.u16(kSequenceVersion);
  w.u8(static_cast<std::uint8_t>(s.label.index()));
  w.f32(s.fps);
  w.u32(s.frame_count);
  w.u16(s.dim);
  w.f32s(s.values);
  return std::move(w).bytes();
}

inline FrameStream decode_snk1(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, ErrorCode::kCorruptFile);
  if (bytes.size() < kSequenceMagic.size() || r.raw(kSequenceMagic.size()) != kSequenceMagic) {
    throw Error(ErrorCode::kFormat, "bad magic, not an SNK1 file");
  }
  if (bytes.size() < kSequenceHeaderSize) {
    throw Error(ErrorCode::kCorruptFile, "truncated header");
  }
  const auto version = r.u16();
  if (version != kSequenceVersion) {
    throw Error(ErrorCode::kFormat, "unsupported SNK1 version " + std::to_string(version));
  }
  FrameStream s;
  s.label = ClassLabel::from_index(r.u8());
  s.fps = r.f32();
  s.frame_count = r.u32();
  s.dim = r.u16();
  const std::size_t declared = std::size_t{s.frame_count} * s.dim * 4;
  if (r.remaining() != declared) {
    throw Error(ErrorCode::kCorruptFile, "header declares " + std::to_string(s.frame_count) +
                                             " frames of dim " + std::to_string(s.dim) + " (" +
                                             std::to_string(declared) + " payload bytes), found " +
                                             std::to_string(r.remaining()));
  }
  if (!std::isfinite(s.fps) || s.fps <= 0.0f) {
    throw Error(ErrorCode::kInvalidValue, "fps must be finite and positive");
  }
  s.values.resize(std::size_t{s.frame_count} * s.dim);
  r.f32s(s.values);
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    if (!std::isfinite(s.values[i])) {
      throw Error(ErrorCode::kInvalidValue, "non-finite payload value at index " + std::to_string(i));
    }
  }
  return s;
}

inline std::vector<std::uint8_t> encode_sequence(const Sequence& seq) {
  if (seq.values.size() != kSequenceValues) {
    throw Error(ErrorCode::kShape, "sequence must hold " + std::to_string(kWindowLength) + "x" +
                                       std::to_string(kFeatureDim) + " values, got " +
                                       std::to_string(seq.values.size()));
  }
  return encode_snk1(FrameStream{static_cast<std::uint32_t>(kWindowLength),
                                 static_cast<std::uint16_t>(kFeatureDim), seq.values, seq.label,
                                 seq.fps});
}

inline Sequence decode_sequence(std::span<const std::uint8_t> bytes) {
  FrameStream s = decode_snk1(bytes);
  if (s.frame_count != kWindowLength || s.dim != kFeatureDim) {
    throw Error(ErrorCode::kShape, "expected " + std::to_string(kWindowLength) + " frames of dim " +
                                       std::to_string(kFeatureDim) + ", file holds " +
                                       std::to_string(s.frame_count) + " of dim " +
                                       std::to_string(s.dim));
  }
  return Sequence{std::move(s.values), s.label, s.fps};
}

inline void write_sequence(const std::filesystem::path& path, const Sequence& seq) {
  write_file_bytes(path, encode_sequence(seq));
}

inline Sequence read_sequence(const std::filesystem::path& path) {
  try {
    return decode_sequence(read_file_bytes(path));
  } catch (const Error& e) {
    throw e.with_context(path.string());
  }
}

inline void write_frame_stream(const std::filesystem::path& path, const FrameStream& s) {
  write_file_bytes(path, encode_snk1(s));
}

inline FrameStream read_frame_stream(const std::filesystem::path& path) {
  try {
    return decode_snk1(read_file_bytes(path));
  } catch (const Error& e) {
    throw e.with_context(path.string());
  }
}

}  // namespace snk

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

// Length-prefixed binary messages between a landmark client and the engine.
//
// Every message is `u32 payload_length | u8 type | payload`, little-endian;
// payload_length counts the payload only.
//
//   0x01 HELLO       u16 version, u16 dim
//   0x02 HELLO_ACK   u8 num_classes, per class: u8 name_len, UTF-8 name
//   0x10 FRAME       u64 timestamp_ms, u16 dim, dim x f32
//   0x20 PREDICTION  u64 timestamp_ms, u8 class_index, 8 x f32 probabilities, u8 flags (bit0 stable)
//   0x21 CYCLE       u8 event_code, u8 step_index, u8 expected_class, u8 observed_class
//   0x7F ERROR       u8 code, u8 msg_len, UTF-8 message

#include <array>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "snk/binary_io.hpp"
#include "snk/error.hpp"
#include "snk/labels.hpp"

namespace snk::rt {

inline constexpr std::uint16_t kProtocolVersion = 1;
inline constexpr std::size_t kHeaderSize = 5;
inline constexpr std::uint32_t kMaxPayload = 1u << 20;

enum class MessageType : std::uint8_t {
  kHello = 0x01,
  kHelloAck = 0x02,
  kFrame = 0x10,
  kPrediction = 0x20,
  kCycle = 0x21,
  kError = 0x7F,
};

/// Codes carried by ERROR messages.
enum class WireError : std::uint8_t {
  kBadVersion = 1,
  kBadDim = 2,
  kMalformed = 3,
  kUnexpectedMessage = 4,
  kOutOfOrder = 5,
  kInvalidValue = 6,
  kTooLarge = 7,
  kInternal = 8,
};

inline std::string_view to_string(WireError e) {
  switch (e) {
    case WireError::kBadVersion: return "BAD_VERSION";
    case WireError::kBadDim: return "BAD_DIM";
    case WireError::kMalformed: return "MALFORMED";
    case WireError::kUnexpectedMessage: return "UNEXPECTED_MESSAGE";
    case WireError::kOutOfOrder: return "OUT_OF_ORDER";
    case WireError::kInvalidValue: return "INVALID_VALUE";
    case WireError::kTooLarge: return "TOO_LARGE";
    case WireError::kInternal: return "INTERNAL";
  }
  return "UNKNOWN";
}

struct Hello {
  std::uint16_t version = kProtocolVersion;
  std::uint16_t dim = 0;
  friend bool operator==(const Hello&, const Hello&) = default;
};

struct HelloAck {
  std::vector<std::string> class_names;
  friend bool operator==(const HelloAck&, const HelloAck&) = default;
};

struct FrameMsg {
  std::uint64_t timestamp_ms = 0;
  std::vector<float> values;  // dim = values.size()
  friend bool operator==(const FrameMsg&, const FrameMsg&) = default;
};

struct PredictionMsg {
  static constexpr std::uint8_t kStableFlag = 0x01;
  std::uint64_t timestamp_ms = 0;
  std::uint8_t class_index = 0;
  std::array<float, kNumClasses> probabilities{};
  std::uint8_t flags = 0;
  bool stable() const { return flags & kStableFlag; }
  friend bool operator==(const PredictionMsg&, const PredictionMsg&) = default;
};

struct CycleMsg {
  std::uint8_t event_code = 0;
  std::uint8_t step_index = 0;
  std::uint8_t expected_class = 0;
  std::uint8_t observed_class = 0;
  friend bool operator==(const CycleMsg&, const CycleMsg&) = default;
};

struct ErrorMsg {
  WireError code = WireError::kInternal;
  std::string message;
  friend bool operator==(const ErrorMsg&, const ErrorMsg&) = default;
};

using Message = std::variant<Hello, HelloAck, FrameMsg, PredictionMsg, CycleMsg, ErrorMsg>;

/// A peer broke the protocol. `wire_code` is what goes back in the ERROR message.
class ProtocolError : public Error {
 public:
  ProtocolError(WireError wire_code, const std::string& message)
      : Error(ErrorCode::kProtocol, std::string(to_string(wire_code)) + ": " + message), wire_code_(wire_code) {}
  WireError wire_code() const noexcept { return wire_code_; }

 private:
  WireError wire_code_;
};

namespace detail {

inline std::uint8_t short_length(std::size_t n, const char* what) {
  if (n > 255) throw Error(ErrorCode::kInput, std::string(what) + " longer than 255 bytes");
  return static_cast<std::uint8_t>(n);
}

inline void encode_payload(ByteWriter& w, const Hello& m) {
  w.u16(m.version);
  w.u16(m.dim);
}
inline void encode_payload(ByteWriter& w, const HelloAck& m) {
  w.u8(short_length(m.class_names.size(), "class list"));
  for (const auto& name : m.class_names) {
    w.u8(short_length(name.size(), "class name"));
    w.raw(name);
  }
}
inline void encode_payload(ByteWriter& w, const FrameMsg& m) {
  if (m.values.size() > 0xFFFF) throw Error(ErrorCode::kInput, "frame dimension exceeds 65535");
  w.u64(m.timestamp_ms);
  w.u16(static_cast<std::uint16_t>(m.values.size()));
  w.f32s(m.values);
}
inline void encode_payload(ByteWriter& w, const PredictionMsg& m) {
  w.u64(m.timestamp_ms);
  w.u8(m.class_index);
  w.f32s(m.probabilities);
  w.u8(m.flags);
}
inline void encode_payload(ByteWriter& w, const CycleMsg& m) {
  w.u8(m.event_code);
  w.u8(m.step_index);
  w.u8(m.expected_class);
  w.u8(m.observed_class);
}
inline void encode_payload(ByteWriter& w, const ErrorMsg& m) {
  w.u8(static_cast<std::uint8_t>(m.code));
  w.u8(short_length(m.message.size(), "error message"));
  w.raw(m.message);
}

inline MessageType type_of(const Message& m) {
  static constexpr MessageType kTypes[] = {MessageType::kHello,      MessageType::kHelloAck, MessageType::kFrame,
                                           MessageType::kPrediction, MessageType::kCycle,    MessageType::kError};
  return kTypes[m.index()];
}

}  // namespace detail

inline std::vector<std::uint8_t> encode(const Message& msg) {
  ByteWriter payload;
  std::visit([&payload](const auto& m) { detail::encode_payload(payload, m); }, msg);
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(payload.size()));
  w.u8(static_cast<std::uint8_t>(detail::type_of(msg)));
  std::vector<std::uint8_t> out = std::move(w).bytes();
  const auto& body = payload.bytes();
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

/// Decodes one payload of the given type. The payload must be consumed exactly.
inline Message decode_payload(std::uint8_t type, std::span<const std::uint8_t> payload) {
  try {
    ByteReader r(payload, ErrorCode::kProtocol);
    Message out;
    switch (static_cast<MessageType>(type)) {
      case MessageType::kHello: {
        Hello m;
        m.version = r.u16();
        m.dim = r.u16();
        out = m;
        break;
      }
      case MessageType::kHelloAck: {
        HelloAck m;
        const auto n = r.u8();
        for (int i = 0; i < n; ++i) m.class_names.push_back(r.raw(r.u8()));
        out = std::move(m);
        break;
      }
      case MessageType::kFrame: {
        FrameMsg m;
        m.timestamp_ms = r.u64();
        const auto dim = r.u16();
        if (r.remaining() != std::size_t{dim} * 4) {
          throw ProtocolError(WireError::kMalformed, "FRAME declares dim " + std::to_string(dim) + " but carries " +
                                                         std::to_string(r.remaining()) + " value bytes");
        }
        m.values.resize(dim);
        r.f32s(m.values);
        out = std::move(m);
        break;
      }
      case MessageType::kPrediction: {
        PredictionMsg m;
        m.timestamp_ms = r.u64();
        m.class_index = r.u8();
        r.f32s(m.probabilities);
        m.flags = r.u8();
        out = m;
        break;
      }
      case MessageType::kCycle: {
        CycleMsg m;
        m.event_code = r.u8();
        m.step_index = r.u8();
        m.expected_class = r.u8();
        m.observed_class = r.u8();
        out = m;
        break;
      }
      case MessageType::kError: {
        ErrorMsg m;
        m.code = static_cast<WireError>(r.u8());
        m.message = r.raw(r.u8());
        out = std::move(m);
        break;
      }
      default:
        throw ProtocolError(WireError::kMalformed, "unknown message type " + std::to_string(type));
    }
    if (r.remaining() != 0) {
      throw ProtocolError(WireError::kMalformed, std::to_string(r.remaining()) + " trailing payload bytes");
    }
    return out;
  } catch (const ProtocolError&) {
    throw;
  } catch (const Error& e) {
    throw ProtocolError(WireError::kMalformed, e.detail());
  }
}

/// Decodes exactly one complete message (header included).
inline Message decode(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderSize) throw ProtocolError(WireError::kMalformed, "message shorter than its header");
  ByteReader r(bytes, ErrorCode::kProtocol);
  const auto length = r.u32();
  const auto type = r.u8();
  if (length != bytes.size() - kHeaderSize) {
    throw ProtocolError(WireError::kMalformed, "length prefix does not match message size");
  }
  return decode_payload(type, bytes.subspan(kHeaderSize));
}

/// Reassembles messages from an arbitrary chunking of the byte stream.
class StreamDecoder {
 public:
  void feed(std::span<const std::uint8_t> bytes) { buffer_.insert(buffer_.end(), bytes.begin(), bytes.end()); }

  /// Next complete message, or nothing if more bytes are needed. Throws
  /// ProtocolError on a malformed or oversized message.
  std::optional<Message> next() {
    if (buffer_.size() - pos_ < kHeaderSize) return std::nullopt;
    const std::uint8_t* p = buffer_.data() + pos_;
    const std::uint32_t length = std::uint32_t{p[0]} | std::uint32_t{p[1]} << 8 | std::uint32_t{p[2]} << 16 |
                                 std::uint32_t{p[3]} << 24;
    if (length > kMaxPayload) {
      throw ProtocolError(WireError::kTooLarge, "payload of " + std::to_string(length) + " bytes exceeds limit");
    }
    if (buffer_.size() - pos_ < kHeaderSize + length) return std::nullopt;
    const std::uint8_t type = p[4];
    Message m = decode_payload(type, {p + kHeaderSize, length});
    pos_ += kHeaderSize + length;
    if (pos_ == buffer_.size()) {
      buffer_.clear();
      pos_ = 0;
    } else if (pos_ > (1u << 16)) {
      buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(pos_));
      pos_ = 0;
    }
    return m;
  }

  std::size_t buffered() const { return buffer_.size() - pos_; }

 private:
  std::vector<std::uint8_t> buffer_;
  std::size_t pos_ = 0;
};

}  // namespace snk::rt

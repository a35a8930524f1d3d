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

// SNKM model files.
//
//   magic "SNKM" | u16 version (1) | u16 layer_count
//   layer_count x { u8 type (0 LSTM, 1 dense) | u8 mode | u32 input_dim | u32 units }
//   payload: per layer in table order, f32 values
//     LSTM : kernel (4h x d, row-major), recurrent (4h x h, row-major), bias (4h)
//     dense: kernel (out x in, row-major), bias (out)
//
// `mode` is 1 for an LSTM that emits every step and 0 for one that emits only
// the last; for dense layers it is the activation code (0 identity, 1 relu,
// 2 softmax). Everything is little-endian.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "snk/binary_io.hpp"
#include "snk/error.hpp"
#include "snk/nn/network.hpp"

namespace snk::nn {

inline constexpr std::string_view kModelMagic = "SNKM";
inline constexpr std::uint16_t kModelVersion = 1;

enum class LayerType : std::uint8_t { kLstm = 0, kDense = 1 };

namespace detail {

inline void put_matrix(ByteWriter& w, const Matrix<float>& m) {
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c) w.f32(m(r, c));
}

inline void get_matrix(ByteReader& r, Matrix<float>& m) {
  for (Index i = 0; i < m.rows(); ++i)
    for (Index c = 0; c < m.cols(); ++c) m(i, c) = r.f32();
}

}  // namespace detail

inline std::vector<std::uint8_t> encode_model(const Network<float>& net) {
  net.validate();
  ByteWriter w;
  w.raw(kModelMagic);
  w.u16(kModelVersion);
  w.u16(static_cast<std::uint16_t>(net.lstm.size() + net.dense.size()));
  for (const auto& l : net.lstm) {
    w.u8(static_cast<std::uint8_t>(LayerType::kLstm));
    w.u8(l.return_sequences ? 1 : 0);
    w.u32(static_cast<std::uint32_t>(l.input_dim()));
    w.u32(static_cast<std::uint32_t>(l.units()));
  }
  for (const auto& l : net.dense) {
    w.u8(static_cast<std::uint8_t>(LayerType::kDense));
    w.u8(static_cast<std::uint8_t>(l.activation));
    w.u32(static_cast<std::uint32_t>(l.input_dim()));
    w.u32(static_cast<std::uint32_t>(l.units()));
  }
  for (const auto& l : net.lstm) {
    detail::put_matrix(w, l.kernel);
    detail::put_matrix(w, l.recurrent);
    w.f32s({l.bias.data(), static_cast<std::size_t>(l.bias.size())});
  }
  for (const auto& l : net.dense) {
    detail::put_matrix(w, l.kernel);
    w.f32s({l.bias.data(), static_cast<std::size_t>(l.bias.size())});
  }
  return std::move(w).bytes();
}

inline Network<float> decode_model(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, ErrorCode::kCorruptModel);
  if (bytes.size() < kModelMagic.size() || r.raw(kModelMagic.size()) != kModelMagic) {
    throw Error(ErrorCode::kFormat, "bad magic, not an SNKM model file");
  }
  const auto version = r.u16();
  if (version != kModelVersion) throw Error(ErrorCode::kFormat, "unsupported SNKM version " + std::to_string(version));
  const auto layer_count = r.u16();

  Network<float> net;
  std::size_t expected_floats = 0;
  for (std::uint16_t i = 0; i < layer_count; ++i) {
    const auto type = r.u8();
    const auto mode = r.u8();
    const auto in = r.u32();
    const auto units = r.u32();
    if (in == 0 || units == 0 || in > (1u << 20) || units > (1u << 16)) {
      throw Error(ErrorCode::kCorruptModel, "layer " + std::to_string(i) + " has implausible dimensions");
    }
    if (type == static_cast<std::uint8_t>(LayerType::kLstm)) {
      if (!net.dense.empty()) throw Error(ErrorCode::kCorruptModel, "LSTM layer after a dense layer");
      if (mode > 1) throw Error(ErrorCode::kCorruptModel, "bad LSTM mode " + std::to_string(mode));
      net.lstm.push_back(LstmLayer<float>::zeros(in, units, mode == 1));
      expected_floats += std::size_t{4} * units * (in + units + 1);
    } else if (type == static_cast<std::uint8_t>(LayerType::kDense)) {
      if (mode > 2) throw Error(ErrorCode::kCorruptModel, "bad activation code " + std::to_string(mode));
      net.dense.push_back(DenseLayer<float>::zeros(in, units, static_cast<Activation>(mode)));
      expected_floats += std::size_t{units} * (in + 1);
    } else {
      throw Error(ErrorCode::kCorruptModel, "unknown layer type " + std::to_string(type));
    }
  }
  if (r.remaining() != expected_floats * 4) {
    throw Error(ErrorCode::kCorruptModel, "layer table declares " + std::to_string(expected_floats * 4) +
                                              " payload bytes, found " + std::to_string(r.remaining()));
  }
  try {
    net.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kCorruptModel, e.detail());
  }
  for (auto& l : net.lstm) {
    detail::get_matrix(r, l.kernel);
    detail::get_matrix(r, l.recurrent);
    r.f32s({l.bias.data(), static_cast<std::size_t>(l.bias.size())});
  }
  for (auto& l : net.dense) {
    detail::get_matrix(r, l.kernel);
    r.f32s({l.bias.data(), static_cast<std::size_t>(l.bias.size())});
  }
  bool finite = true;
  for_each_tensor([&finite](const auto& m) { finite = finite && m.allFinite(); }, net);
  if (!finite) throw Error(ErrorCode::kCorruptModel, "non-finite parameter value");
  return net;
}

inline void save_model(const Network<float>& net, const std::filesystem::path& path) {
  write_file_bytes(path, encode_model(net));
}

inline Network<float> load_model(const std::filesystem::path& path) {
  try {
    return decode_model(read_file_bytes(path));
  } catch (const Error& e) {
    throw e.with_context(path.string());
  }
}

/// Human-readable layer table, one row per layer, then the total.
template <typename T>
std::string describe(const Network<T>& net) {
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-8s %-8s %-12s %-14s %10s\n", "layer", "type", "activation", "output", "params");
  out += buf;
  std::size_t total = 0;
  int i = 0;
  for (const auto& l : net.lstm) {
    const std::string shape = l.return_sequences ? "(T, " + std::to_string(l.units()) + ")" : "(" + std::to_string(l.units()) + ")";
    std::snprintf(buf, sizeof buf, "%-8d %-8s %-12s %-14s %10zu\n", i++, "lstm", "tanh", shape.c_str(), l.param_count());
    out += buf;
    total += l.param_count();
  }
  for (const auto& l : net.dense) {
    const std::string shape = "(" + std::to_string(l.units()) + ")";
    std::snprintf(buf, sizeof buf, "%-8d %-8s %-12s %-14s %10zu\n", i++, "dense", std::string(to_string(l.activation)).c_str(),
                  shape.c_str(), l.param_count());
    out += buf;
    total += l.param_count();
  }
  out += "total " + std::to_string(total) + "\n";
  out += std::string("canonical ") + (is_canonical(net) ? "yes" : "no") + "\n";
  return out;
}

}  // namespace snk::nn

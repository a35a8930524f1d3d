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
#include <cstdio>
#include <filesystem>
#include <map>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "snk/binary_io.hpp"
#include "snk/error.hpp"
#include "snk/frame.hpp"
#include "snk/labels.hpp"
#include "snk/rng.hpp"
#include "snk/sequence_io.hpp"

namespace snk {

inline constexpr int kDatasetFormatVersion = 1;
inline constexpr float kDefaultFps = 60.0f;
inline constexpr std::string_view kSequenceExtension = ".snk";

struct Manifest {
  std::array<std::size_t, kNumClasses> counts{};
  float fps = kDefaultFps;
  int version = kDatasetFormatVersion;
  std::vector<std::string> warnings;

  std::size_t total() const {
    std::size_t n = 0;
    for (auto c : counts) n += c;
    return n;
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["version"] = version;
    j["fps"] = fps;
    j["classes"] = nlohmann::ordered_json::array();
    for (auto name : kClassNames) j["classes"].push_back(std::string(name));
    nlohmann::ordered_json counts_json = nlohmann::ordered_json::object();
    for (std::size_t c = 0; c < kNumClasses; ++c) counts_json[std::string(kClassNames[c])] = counts[c];
    j["counts"] = std::move(counts_json);
    j["total"] = total();
    j["warnings"] = warnings;
    return j;
  }

  friend bool operator==(const Manifest&, const Manifest&) = default;
};

struct LabeledDataset {
  std::vector<Sequence> sequences;
  Manifest manifest;

  std::size_t size() const { return sequences.size(); }

  /// Recomputes manifest counts from the contents.
  void recount() {
    manifest.counts.fill(0);
    for (const auto& s : sequences) ++manifest.counts[s.label.index()];
  }

  friend bool operator==(const LabeledDataset&, const LabeledDataset&) = default;
};

inline std::string sequence_filename(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "seq_%04zu", index);
  return std::string(buf) + std::string(kSequenceExtension);
}

/// Writes `<root>/<ClassName>/seq_NNNN.snk` per sequence (numbered per class in
/// dataset order) and `<root>/manifest.json`.
inline void write_dataset(const std::filesystem::path& root, const LabeledDataset& ds) {
  namespace fs = std::filesystem;
  fs::create_directories(root);
  std::array<std::size_t, kNumClasses> next{};
  for (std::size_t c = 0; c < kNumClasses; ++c) fs::create_directories(root / std::string(kClassNames[c]));
  for (const auto& seq : ds.sequences) {
    const std::size_t c = seq.label.index();
    write_sequence(root / std::string(kClassNames[c]) / sequence_filename(next[c]++), seq);
  }
  write_file_text(root / "manifest.json", ds.manifest.to_json().dump(2) + "\n");
}

/// Loads every `*.snk` file below the per-class directories of `root`.
/// Ordering is lexicographic by class directory name, then by filename.
inline LabeledDataset load_dataset(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root)) {
    throw Error(ErrorCode::kIo, "dataset root '" + root.string() + "' is not a directory");
  }
  std::vector<std::pair<std::string, ClassLabel>> class_dirs;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (!entry.is_directory()) continue;
    const std::string name = entry.path().filename().string();
    auto label = ClassLabel::find(name);
    if (!label) {
      throw Error(ErrorCode::kUnknownClass,
                  entry.path().string() + ": directory '" + name + "' is not a known class");
    }
    class_dirs.emplace_back(name, *label);
  }
  std::sort(class_dirs.begin(), class_dirs.end());

  LabeledDataset ds;
  std::vector<bool> seen(kNumClasses, false);
  bool fps_set = false;
  for (const auto& [name, label] : class_dirs) {
    seen[label.index()] = true;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(root / name)) {
      if (entry.is_regular_file() && entry.path().extension() == kSequenceExtension) {
        files.push_back(entry.path());
      }
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) ds.manifest.warnings.push_back("class directory '" + name + "' is empty");
    for (const auto& file : files) {
      Sequence seq = read_sequence(file);
      if (seq.label != label) {
        throw Error(ErrorCode::kLabel, file.string() + ": file label '" + std::string(seq.label.name()) +
                                           "' does not match directory '" + name + "'");
      }
      if (!fps_set) {
        ds.manifest.fps = seq.fps;
        fps_set = true;
      } else if (seq.fps != ds.manifest.fps) {
        ds.manifest.warnings.push_back(file.string() + ": fps differs from the first sequence");
      }
      ds.sequences.push_back(std::move(seq));
    }
  }
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    if (!seen[c]) ds.manifest.warnings.push_back("class directory '" + std::string(kClassNames[c]) + "' is missing");
  }
  ds.recount();
  return ds;
}

/// Round half away from zero.
inline std::size_t round_half_away(double x) {
  return static_cast<std::size_t>(std::floor(x + 0.5));
}

/// Number of test items taken from a class of `count` sequences:
/// round(fraction * count), at least one, leaving at least one for training.
inline std::size_t stratified_test_count(std::size_t count, double test_fraction) {
  std::size_t n = round_half_away(test_fraction * static_cast<double>(count));
  n = std::max<std::size_t>(n, 1);
  n = std::min(n, count - 1);
  return n;
}

struct DatasetSplit {
  LabeledDataset train;
  LabeledDataset test;
};

/// Stratified, seeded partition. Within each class a seeded shuffle picks the
/// test members; both partitions keep the input's relative order.
inline DatasetSplit split(const LabeledDataset& ds, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw Error(ErrorCode::kConfig, "test fraction must lie in (0, 1)");
  }
  std::array<std::vector<std::size_t>, kNumClasses> by_class;
  for (std::size_t i = 0; i < ds.sequences.size(); ++i) by_class[ds.sequences[i].label.index()].push_back(i);

  std::vector<bool> in_test(ds.sequences.size(), false);
  Rng rng(derive_seed(seed, 0x5b117));
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    auto& idx = by_class[c];
    if (idx.size() < 2) {
      throw Error(ErrorCode::kInsufficientData, "class '" + std::string(kClassNames[c]) + "' has " +
                                                    std::to_string(idx.size()) +
                                                    " sequences, at least 2 are required to split");
    }
    rng.shuffle(std::span<std::size_t>(idx));
    const std::size_t n_test = stratified_test_count(idx.size(), test_fraction);
    for (std::size_t k = 0; k < n_test; ++k) in_test[idx[k]] = true;
  }

  DatasetSplit out;
  out.train.manifest = out.test.manifest = ds.manifest;
  for (std::size_t i = 0; i < ds.sequences.size(); ++i) {
    (in_test[i] ? out.test : out.train).sequences.push_back(ds.sequences[i]);
  }
  out.train.recount();
  out.test.recount();
  return out;
}

namespace detail {

// Template values are fixed per class and independent of the generator seed,
// so datasets drawn with different seeds share the same class structure.
inline constexpr std::uint64_t kTemplateSalt = 0x534e4b54454d504cULL;

inline double template_uniform(std::size_t cls, std::size_t dim, std::uint64_t which) {
  const std::uint64_t key = kTemplateSalt ^ (std::uint64_t{cls} << 40) ^ (std::uint64_t{dim} << 8) ^ which;
  return unit_double(splitmix64(splitmix64(key)));
}

}  // namespace detail

/// The noiseless trajectory for one class: value(t, j) = base + amp * sin(2pi t / L + phase)
/// with base in [0.1, 0.9], amp in [0.02, 0.1], so entries stay inside [0, 1]
/// like normalised landmark coordinates.
inline std::vector<float> class_template(ClassLabel label) {
  std::vector<float> out(kSequenceValues);
  for (std::size_t j = 0; j < kFeatureDim; ++j) {
    const double base = 0.1 + 0.8 * detail::template_uniform(label.index(), j, 0);
    const double amp = 0.02 + 0.08 * detail::template_uniform(label.index(), j, 1);
    const double phase = 2.0 * std::numbers::pi * detail::template_uniform(label.index(), j, 2);
    for (std::size_t t = 0; t < kWindowLength; ++t) {
      const double angle = 2.0 * std::numbers::pi * static_cast<double>(t) / kWindowLength + phase;
      out[t * kFeatureDim + j] = static_cast<float>(base + amp * std::sin(angle));
    }
  }
  return out;
}

/// Class templates plus i.i.d. Gaussian noise of standard deviation
/// `noise_scale`. Sequences are ordered by class index, then draw order.
inline LabeledDataset gen_synthetic(std::size_t sequences_per_class, double noise_scale, std::uint64_t seed) {
  if (sequences_per_class < 1) throw Error(ErrorCode::kConfig, "sequences per class must be >= 1");
  if (!(noise_scale >= 0.0) || !std::isfinite(noise_scale)) {
    throw Error(ErrorCode::kConfig, "noise scale must be finite and >= 0");
  }
  LabeledDataset ds;
  ds.manifest.fps = kDefaultFps;
  Rng rng(derive_seed(seed, 0x6e015e));
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    const ClassLabel label = ClassLabel::from_index(c);
    const std::vector<float> tmpl = class_template(label);
    for (std::size_t s = 0; s < sequences_per_class; ++s) {
      Sequence seq{tmpl, label, kDefaultFps};
      if (noise_scale > 0.0) {
        for (float& v : seq.values) v = static_cast<float>(v + noise_scale * rng.normal());
      }
      ds.sequences.push_back(std::move(seq));
    }
  }
  ds.recount();
  return ds;
}

}  // namespace snk

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
#include <cstdio>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "snk/error.hpp"
#include "snk/labels.hpp"

namespace snk::metrics {

namespace detail {

inline void check_lengths(std::span<const std::size_t> y_true, std::span<const std::size_t> y_pred) {
  if (y_true.size() != y_pred.size()) {
    throw Error(ErrorCode::kInput, "label lists differ in length (" + std::to_string(y_true.size()) + " vs " +
                                       std::to_string(y_pred.size()) + ")");
  }
  if (y_true.empty()) throw Error(ErrorCode::kInput, "label lists are empty");
}

}  // namespace detail

/// Fraction of positions where prediction equals truth.
inline double accuracy(std::span<const std::size_t> y_true, std::span<const std::size_t> y_pred) {
  detail::check_lengths(y_true, y_pred);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < y_true.size(); ++i) hits += y_true[i] == y_pred[i];
  return static_cast<double>(hits) / static_cast<double>(y_true.size());
}

/// K x K counts, rows = true class, columns = predicted class.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t num_classes = kNumClasses)
      : k_(num_classes), counts_(num_classes * num_classes, 0) {}

  std::size_t num_classes() const { return k_; }
  std::size_t total() const { return n_; }
  std::size_t operator()(std::size_t truth, std::size_t predicted) const { return counts_[truth * k_ + predicted]; }

  void add(std::size_t truth, std::size_t predicted) {
    if (truth >= k_ || predicted >= k_) {
      throw Error(ErrorCode::kLabel, "label (" + std::to_string(truth) + ", " + std::to_string(predicted) +
                                         ") out of range for " + std::to_string(k_) + " classes");
    }
    ++counts_[truth * k_ + predicted];
    ++n_;
  }

  std::size_t trace() const {
    std::size_t t = 0;
    for (std::size_t c = 0; c < k_; ++c) t += (*this)(c, c);
    return t;
  }

  std::size_t row_sum(std::size_t c) const {
    std::size_t s = 0;
    for (std::size_t p = 0; p < k_; ++p) s += (*this)(c, p);
    return s;
  }

  std::size_t col_sum(std::size_t c) const {
    std::size_t s = 0;
    for (std::size_t t = 0; t < k_; ++t) s += (*this)(t, c);
    return s;
  }

  /// Header row of class names, then one row of counts per true class.
  std::string to_csv(std::span<const std::string> class_names) const {
    if (class_names.size() != k_) throw Error(ErrorCode::kInput, "need one name per class");
    std::string out;
    for (std::size_t c = 0; c < k_; ++c) out += (c ? "," : "") + class_names[c];
    out += "\n";
    for (std::size_t t = 0; t < k_; ++t) {
      for (std::size_t p = 0; p < k_; ++p) out += (p ? "," : "") + std::to_string((*this)(t, p));
      out += "\n";
    }
    return out;
  }

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  std::size_t k_;
  std::vector<std::size_t> counts_;
  std::size_t n_ = 0;
};

inline ConfusionMatrix confusion(std::span<const std::size_t> y_true, std::span<const std::size_t> y_pred,
                                 std::size_t num_classes = kNumClasses) {
  detail::check_lengths(y_true, y_pred);
  ConfusionMatrix cm(num_classes);
  for (std::size_t i = 0; i < y_true.size(); ++i) cm.add(y_true[i], y_pred[i]);
  return cm;
}

struct ClassStats {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  double precision = 0.0, recall = 0.0, f1 = 0.0;
  // False where the ratio had a zero denominator and was set to 0 by convention.
  bool precision_defined = false, recall_defined = false, f1_defined = false;
};

/// One-vs-rest counts and ratios for every class.
inline std::vector<ClassStats> per_class_stats(const ConfusionMatrix& cm) {
  std::vector<ClassStats> out(cm.num_classes());
  const std::size_t n = cm.total();
  for (std::size_t c = 0; c < cm.num_classes(); ++c) {
    ClassStats& s = out[c];
    s.tp = cm(c, c);
    s.fp = cm.col_sum(c) - s.tp;
    s.fn = cm.row_sum(c) - s.tp;
    s.tn = n - s.tp - s.fp - s.fn;
    if (s.tp + s.fp > 0) {
      s.precision = static_cast<double>(s.tp) / static_cast<double>(s.tp + s.fp);
      s.precision_defined = true;
    }
    if (s.tp + s.fn > 0) {
      s.recall = static_cast<double>(s.tp) / static_cast<double>(s.tp + s.fn);
      s.recall_defined = true;
    }
    if (s.precision + s.recall > 0.0) {
      s.f1 = 2.0 * s.precision * s.recall / (s.precision + s.recall);
      s.f1_defined = true;
    }
  }
  return out;
}

struct MicroAverage {
  double precision = 0.0;
  double recall = 0.0;
};

/// Pooled precision/recall over all classes; both equal accuracy for
/// single-label multiclass data.
inline MicroAverage micro_average(const std::vector<ClassStats>& stats) {
  std::size_t tp = 0, fp = 0, fn = 0;
  for (const auto& s : stats) {
    tp += s.tp;
    fp += s.fp;
    fn += s.fn;
  }
  MicroAverage m;
  if (tp + fp) m.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  if (tp + fn) m.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  return m;
}

/// Object keyed by class name, in class order.
inline nlohmann::ordered_json stats_to_json(const std::vector<ClassStats>& stats, std::span<const std::string> class_names) {
  if (class_names.size() != stats.size()) throw Error(ErrorCode::kInput, "need one name per class");
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (std::size_t c = 0; c < stats.size(); ++c) {
    const auto& s = stats[c];
    nlohmann::ordered_json e;
    e["tp"] = s.tp;
    e["fp"] = s.fp;
    e["fn"] = s.fn;
    e["tn"] = s.tn;
    e["precision"] = s.precision;
    e["recall"] = s.recall;
    e["f1"] = s.f1;
    e["precision_defined"] = s.precision_defined;
    e["recall_defined"] = s.recall_defined;
    e["f1_defined"] = s.f1_defined;
    j[class_names[c]] = std::move(e);
  }
  return j;
}

inline std::vector<std::string> canonical_class_names() {
  return {kClassNames.begin(), kClassNames.end()};
}

}  // namespace snk::metrics

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

#include <algorithm>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "snk/metrics.hpp"
#include "snk/rng.hpp"

namespace snk::metrics {
namespace {

using Labels = std::vector<std::size_t>;

const Labels kTrue = {0, 1, 2, 2};
const Labels kPred = {0, 2, 2, 2};

Labels random_labels(Rng& rng, std::size_t n, std::size_t k) {
  Labels out(n);
  for (auto& v : out) v = static_cast<std::size_t>(rng.below(k));
  return out;
}

TEST(Accuracy, Examples) {
  EXPECT_DOUBLE_EQ(accuracy(kTrue, kPred), 0.75);
  EXPECT_DOUBLE_EQ(accuracy(kTrue, kTrue), 1.0);
  EXPECT_DOUBLE_EQ(accuracy(Labels{1, 1}, Labels{0, 0}), 0.0);
}

TEST(Accuracy, InputErrors) {
  try {
    accuracy(Labels{0, 1}, Labels{0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInput);
  }
  EXPECT_THROW(accuracy(Labels{}, Labels{}), Error);
}

TEST(Confusion, CountsExample) {
  const ConfusionMatrix cm = confusion(kTrue, kPred);
  EXPECT_EQ(cm.total(), 4u);
  for (std::size_t t = 0; t < 8; ++t) {
    for (std::size_t p = 0; p < 8; ++p) {
      std::size_t want = 0;
      if (t == 0 && p == 0) want = 1;
      if (t == 1 && p == 2) want = 1;
      if (t == 2 && p == 2) want = 2;
      EXPECT_EQ(cm(t, p), want) << t << "," << p;
    }
  }
}

TEST(Confusion, PerfectPredictionsAreDiagonal) {
  const Labels y = {3, 3, 0, 7, 7, 7};
  const ConfusionMatrix cm = confusion(y, y);
  EXPECT_EQ(cm(3, 3), 2u);
  EXPECT_EQ(cm(7, 7), 3u);
  EXPECT_EQ(cm.trace(), 6u);
  for (const auto& s : per_class_stats(cm)) {
    if (s.precision_defined) EXPECT_EQ(s.precision, 1.0);
    if (s.recall_defined) EXPECT_EQ(s.recall, 1.0);
    if (s.f1_defined) EXPECT_EQ(s.f1, 1.0);
  }
}

TEST(Confusion, OutOfRangeLabelIsLabelError) {
  try {
    confusion(Labels{0, 8}, Labels{0, 1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kLabel);
  }
}

TEST(PerClassStats, ClassTwoOfTheExample) {
  const auto stats = per_class_stats(confusion(kTrue, kPred));
  const ClassStats& s = stats[2];
  EXPECT_EQ(s.tp, 2u);
  EXPECT_EQ(s.fp, 1u);
  EXPECT_EQ(s.fn, 0u);
  EXPECT_EQ(s.tn, 1u);
  EXPECT_DOUBLE_EQ(s.precision, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.recall, 1.0);
  EXPECT_NEAR(s.f1, 0.8, 1e-15);
}

TEST(PerClassStats, AbsentClassIsZeroAndFlagged) {
  const auto stats = per_class_stats(confusion(kTrue, kPred));
  const ClassStats& s = stats[5];
  EXPECT_EQ(s.tp + s.fp + s.fn, 0u);
  EXPECT_EQ(s.tn, 4u);
  EXPECT_EQ(s.precision, 0.0);
  EXPECT_EQ(s.recall, 0.0);
  EXPECT_EQ(s.f1, 0.0);
  EXPECT_FALSE(s.precision_defined || s.recall_defined || s.f1_defined);
  // Predicted but never correct: precision defined as 0, recall undefined.
  const ClassStats& one = stats[1];
  EXPECT_FALSE(one.precision_defined);
  EXPECT_TRUE(one.recall_defined);
  EXPECT_EQ(one.recall, 0.0);
}

// Identities on random label vectors, with counts recomputed by brute force.
TEST(Properties, IdentitiesOnRandomLabelVectors) {
  Rng rng(123);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(rng.below(60));
    const Labels t = random_labels(rng, n, 8);
    const Labels p = random_labels(rng, n, 8);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i) hits += t[i] == p[i];
    const double acc = static_cast<double>(hits) / static_cast<double>(n);

    const ConfusionMatrix cm = confusion(t, p);
    ASSERT_DOUBLE_EQ(accuracy(t, p), acc);
    ASSERT_DOUBLE_EQ(static_cast<double>(cm.trace()) / static_cast<double>(n), acc);
    std::size_t sum = 0;
    for (std::size_t a = 0; a < 8; ++a)
      for (std::size_t b = 0; b < 8; ++b) sum += cm(a, b);
    ASSERT_EQ(sum, n);
    const auto stats = per_class_stats(cm);
    for (std::size_t c = 0; c < 8; ++c) {
      const auto& s = stats[c];
      ASSERT_EQ(s.tp + s.fp + s.fn + s.tn, n);
      ASSERT_EQ(cm.row_sum(c), static_cast<std::size_t>(std::count(t.begin(), t.end(), c)));
      ASSERT_GE(s.f1, 0.0);
      ASSERT_LE(s.f1, 1.0);
    }
    const MicroAverage m = micro_average(stats);
    ASSERT_NEAR(m.precision, acc, 1e-12);
    ASSERT_NEAR(m.recall, acc, 1e-12);
  }
}

TEST(Properties, PermutationEquivariance) {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(rng.below(40));
    const Labels t = random_labels(rng, n, 8);
    const Labels p = random_labels(rng, n, 8);
    std::vector<std::size_t> perm(8);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(perm));
    Labels pt(n), pp(n);
    for (std::size_t i = 0; i < n; ++i) {
      pt[i] = perm[t[i]];
      pp[i] = perm[p[i]];
    }
    const ConfusionMatrix a = confusion(t, p);
    const ConfusionMatrix b = confusion(pt, pp);
    for (std::size_t x = 0; x < 8; ++x)
      for (std::size_t y = 0; y < 8; ++y) ASSERT_EQ(b(perm[x], perm[y]), a(x, y));
  }
}

TEST(Export, CsvHasHeaderAndEightRows) {
  const std::string csv = confusion(kTrue, kPred).to_csv(canonical_class_names());
  const std::string header =
      "Pranamasana,Hasta Uttanasana,Hasta Padasana,Ashwa Sanchalanasana,Dandasana,Ashtanga Namaskara,"
      "Bhujangasana,Svanasana\n";
  EXPECT_EQ(csv, header +
                     "1,0,0,0,0,0,0,0\n"
                     "0,0,1,0,0,0,0,0\n"
                     "0,0,2,0,0,0,0,0\n"
                     "0,0,0,0,0,0,0,0\n"
                     "0,0,0,0,0,0,0,0\n"
                     "0,0,0,0,0,0,0,0\n"
                     "0,0,0,0,0,0,0,0\n"
                     "0,0,0,0,0,0,0,0\n");
}

TEST(Export, JsonKeyedByClassName) {
  const auto j = stats_to_json(per_class_stats(confusion(kTrue, kPred)), canonical_class_names());
  ASSERT_EQ(j.size(), 8u);
  EXPECT_EQ(j.begin().key(), "Pranamasana");
  EXPECT_EQ(j["Hasta Padasana"]["tp"], 2);
  EXPECT_EQ(j["Hasta Padasana"]["fp"], 1);
  EXPECT_EQ(j["Dandasana"]["precision_defined"], false);
  EXPECT_DOUBLE_EQ(j["Hasta Padasana"]["f1"].get<double>(), 0.8);
}

}  // namespace
}  // namespace snk::metrics

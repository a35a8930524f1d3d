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

// Library tour: synthesize a small dataset, train a reduced network for a
// few epochs, report held-out metrics and classify one window.

#include <cstdio>

#include "snk/snk.hpp"

int main() {
  const snk::LabeledDataset ds = snk::gen_synthetic(10, 0.1, 7);

  snk::train::TrainConfig cfg;
  cfg.epochs = 30;
  cfg.seed = 7;
  const snk::DatasetSplit parts = snk::split(ds, cfg.test_fraction, cfg.seed);

  // A much smaller stack than the reference one; same input and output.
  snk::nn::Network<float> net = snk::nn::init_params<float>(
      snk::nn::Architecture{static_cast<snk::nn::Index>(snk::kFeatureDim), {16}, {16, 8}}, cfg.seed);
  const auto train_set = snk::train::to_samples<float>(parts.train);
  const auto test_set = snk::train::to_samples<float>(parts.test);
  const auto curve = snk::train::fit(net, train_set, test_set, cfg);
  std::printf("last epoch: loss %.4f, val acc %.3f\n", curve.epochs.back().train_loss,
              curve.epochs.back().val_accuracy.value_or(0.0));

  const auto ev = snk::train::evaluate(net, test_set);
  std::vector<std::size_t> truth;
  for (const auto& s : test_set) truth.push_back(s.label);
  const auto cm = snk::metrics::confusion(truth, ev.predictions);
  std::printf("held-out accuracy %.3f\n%s", snk::metrics::accuracy(truth, ev.predictions),
              cm.to_csv(snk::metrics::canonical_class_names()).c_str());

  const auto p = snk::nn::forward<float>(net, parts.test.sequences.front().values);
  snk::nn::Index best = 0;
  p.maxCoeff(&best);
  std::printf("first test window: %s (p=%.3f)\n", std::string(snk::kClassNames[best]).c_str(),
              static_cast<double>(p(best)));
  return 0;
}

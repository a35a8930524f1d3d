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

// snk: generate data, train, evaluate, predict, serve and inspect models.

#include <algorithm>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "snk/snk.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitRuntime = 3;

int exit_code_for(snk::ErrorCode code) {
  using snk::ErrorCode;
  switch (code) {
    case ErrorCode::kConfig:
      return kExitUsage;
    case ErrorCode::kBlockShape:
    case ErrorCode::kInvalidValue:
    case ErrorCode::kFormat:
    case ErrorCode::kCorruptFile:
    case ErrorCode::kUnknownClass:
    case ErrorCode::kInsufficientData:
    case ErrorCode::kLabel:
    case ErrorCode::kShape:
    case ErrorCode::kCorruptModel:
    case ErrorCode::kIo:
      return kExitData;
    default:
      return kExitRuntime;
  }
}

struct Options {
  std::string data;
  std::string model;
  std::string out;
  std::uint64_t seed = 42;
  int epochs = 200;
  double lr = 0.001;
  int batch_size = 32;
  double test_fraction = 0.25;
  std::optional<double> clip_norm;
  std::size_t per_class = 30;
  double noise = 0.1;
  std::string listen;
  bool stdio = false;
  double tau = 0.7;
  std::size_t stability_n = 5;
};

void log_config(const std::string& cmd, const std::vector<std::pair<std::string, std::string>>& kv) {
  std::ostringstream os;
  os << "snk " << cmd << ":";
  for (const auto& [k, v] : kv) os << ' ' << k << '=' << v;
  std::cerr << os.str() << std::endl;
}

template <typename T>
std::string str(const T& v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

snk::train::TrainConfig train_config(const Options& o) {
  snk::train::TrainConfig cfg;
  cfg.epochs = o.epochs;
  cfg.learning_rate = o.lr;
  cfg.batch_size = o.batch_size;
  cfg.seed = o.seed;
  cfg.test_fraction = o.test_fraction;
  cfg.clip_norm = o.clip_norm;
  cfg.validate();
  return cfg;
}

fs::path output_dir(const Options& o) {
  const fs::path dir = o.out.empty() ? fs::path(".") : fs::path(o.out);
  fs::create_directories(dir);
  return dir;
}

int cmd_gen_synthetic(const Options& o) {
  log_config("gen-synthetic", {{"out", o.out}, {"per_class", str(o.per_class)}, {"noise", str(o.noise)},
                               {"seed", str(o.seed)}});
  const snk::LabeledDataset ds = snk::gen_synthetic(o.per_class, o.noise, o.seed);
  snk::write_dataset(o.out, ds);
  std::cout << "wrote " << ds.size() << " sequences to " << o.out << "\n";
  return kExitOk;
}

int cmd_train(const Options& o) {
  const snk::train::TrainConfig cfg = train_config(o);
  log_config("train", {{"data", o.data}, {"out", o.out}, {"seed", str(cfg.seed)}, {"epochs", str(cfg.epochs)},
                       {"lr", str(cfg.learning_rate)}, {"batch_size", str(cfg.batch_size)},
                       {"test_fraction", str(cfg.test_fraction)},
                       {"clip_norm", cfg.clip_norm ? str(*cfg.clip_norm) : "off"}});
  const snk::LabeledDataset ds = snk::load_dataset(o.data);
  for (const auto& w : ds.manifest.warnings) std::cerr << "warning: " << w << "\n";
  const auto result = snk::train::train(ds, cfg, [&](const snk::train::EpochRecord& r) {
    if (r.epoch == 1 || r.epoch % 10 == 0 || r.epoch == cfg.epochs) {
      std::fprintf(stderr, "epoch %4d  loss %.4f  acc %.3f  val_loss %.4f  val_acc %.3f\n", r.epoch, r.train_loss,
                   r.train_accuracy, r.val_loss.value_or(0.0), r.val_accuracy.value_or(0.0));
    }
  });
  const fs::path model_path = o.out;
  if (model_path.has_parent_path()) fs::create_directories(model_path.parent_path());
  snk::nn::save_model(result.net, model_path);
  const fs::path curves = model_path.parent_path() / "curves.csv";
  snk::write_file_text(curves, result.curve.to_csv());
  const auto& last = result.curve.epochs.back();
  std::printf("train accuracy %.3f\n", last.train_accuracy);
  if (last.val_accuracy) std::printf("test accuracy %.3f\n", *last.val_accuracy);
  std::cout << "model " << model_path.string() << "\ncurves " << curves.string() << "\n";
  return kExitOk;
}

int cmd_eval(const Options& o) {
  if (!(o.test_fraction > 0.0 && o.test_fraction < 1.0)) {
    throw snk::Error(snk::ErrorCode::kConfig, "--test-fraction must lie in (0, 1)");
  }
  const fs::path dir = output_dir(o);
  log_config("eval", {{"model", o.model}, {"data", o.data}, {"out", dir.string()}, {"seed", str(o.seed)},
                      {"test_fraction", str(o.test_fraction)}});
  const auto net = snk::nn::load_model(o.model);
  const snk::LabeledDataset ds = snk::load_dataset(o.data);
  for (const auto& w : ds.manifest.warnings) std::cerr << "warning: " << w << "\n";
  const snk::DatasetSplit parts = snk::split(ds, o.test_fraction, o.seed);
  const auto train_eval = snk::train::evaluate(net, snk::train::to_samples<float>(parts.train));
  const auto test_eval = snk::train::evaluate(net, snk::train::to_samples<float>(parts.test));

  std::vector<std::size_t> truth;
  for (const auto& s : parts.test.sequences) truth.push_back(s.label.index());
  const std::size_t k = static_cast<std::size_t>(net.num_classes());
  const auto cm = snk::metrics::confusion(truth, test_eval.predictions, k);
  const auto stats = snk::metrics::per_class_stats(cm);
  std::vector<std::string> names = snk::metrics::canonical_class_names();
  for (std::size_t c = names.size(); c < k; ++c) names.push_back("class_" + std::to_string(c));
  names.resize(k);
  snk::write_file_text(dir / "confusion.csv", cm.to_csv(names));
  snk::write_file_text(dir / "per_class.json", snk::metrics::stats_to_json(stats, names).dump(2) + "\n");

  std::printf("train accuracy %.3f (%zu sequences)\n", train_eval.accuracy, parts.train.size());
  std::printf("test accuracy %.3f (%zu sequences)\n", test_eval.accuracy, parts.test.size());
  std::printf("test loss %.4f\n", test_eval.mean_loss);
  for (std::size_t c = 0; c < k; ++c) {
    std::printf("  %-22s precision %.3f  recall %.3f  f1 %.3f\n", names[c].c_str(), stats[c].precision,
                stats[c].recall, stats[c].f1);
  }
  return kExitOk;
}

std::vector<fs::path> sequence_files(const fs::path& p) {
  std::vector<fs::path> out;
  if (fs::is_directory(p)) {
    for (const auto& e : fs::recursive_directory_iterator(p)) {
      if (e.is_regular_file() && e.path().extension() == snk::kSequenceExtension) out.push_back(e.path());
    }
    std::sort(out.begin(), out.end());
  } else {
    out.push_back(p);
  }
  return out;
}

int cmd_predict(const Options& o, const std::vector<std::string>& files) {
  log_config("predict", {{"model", o.model}, {"data", o.data}});
  const auto net = snk::nn::load_model(o.model);
  if (net.num_classes() != static_cast<snk::nn::Index>(snk::kNumClasses)) {
    throw snk::Error(snk::ErrorCode::kShape, o.model + ": predict needs an " + std::to_string(snk::kNumClasses) +
                                                 "-class model");
  }
  std::vector<fs::path> paths;
  if (!o.data.empty()) paths = sequence_files(o.data);
  for (const auto& f : files) {
    const auto more = sequence_files(f);
    paths.insert(paths.end(), more.begin(), more.end());
  }
  if (paths.empty()) throw snk::Error(snk::ErrorCode::kConfig, "no sequence files given (use --data or paths)");
  std::printf("file,label,probability");
  for (auto name : snk::kClassNames) std::printf(",%s", std::string(name).c_str());
  std::printf("\n");
  for (const auto& path : paths) {
    const snk::Sequence seq = snk::read_sequence(path);
    const auto p = snk::nn::forward<float>(net, seq.values);
    snk::nn::Index best = 0;
    p.maxCoeff(&best);
    std::printf("%s,%s,%.4f", path.string().c_str(), std::string(snk::kClassNames[best]).c_str(),
                static_cast<double>(p(best)));
    for (snk::nn::Index c = 0; c < p.size(); ++c) std::printf(",%.4f", static_cast<double>(p(c)));
    std::printf("\n");
  }
  return kExitOk;
}

volatile std::sig_atomic_t g_stop = 0;
extern "C" void on_signal(int) { g_stop = 1; }

int cmd_serve(const Options& o) {
  if (o.stdio == !o.listen.empty()) {
    throw snk::Error(snk::ErrorCode::kConfig, "serve needs exactly one of --listen or --stdio");
  }
  snk::rt::ServeConfig cfg;
  cfg.stability.threshold = o.tau;
  cfg.stability.window_count = o.stability_n;
  cfg.stability.validate();
  log_config("serve", {{"model", o.model}, {"listen", o.stdio ? "stdio" : o.listen}, {"tau", str(o.tau)},
                       {"stability_n", str(o.stability_n)}});
  const auto net = snk::nn::load_model(o.model);
  snk::rt::Session probe(net, cfg.stability);  // rejects models of the wrong shape up front
  if (o.stdio) {
    snk::rt::serve_fd(0, 1, net, cfg);
    return kExitOk;
  }
  const snk::rt::Endpoint ep = snk::rt::parse_endpoint(o.listen);
  snk::rt::TcpServer server(net, cfg);
  std::uint16_t port = 0;
  try {
    port = server.listen(ep);
  } catch (const snk::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  struct sigaction sa {};
  sa.sa_handler = on_signal;
  sigemptyset(&sa.sa_mask);
  sigaction(SIGINT, &sa, nullptr);
  sigaction(SIGTERM, &sa, nullptr);
  std::cerr << "listening on " << ep.host << ":" << port << std::endl;
  server.run([] { return g_stop != 0; });
  server.stop();
  std::cerr << "stopped" << std::endl;
  return kExitOk;
}

int cmd_inspect(const Options& o) {
  log_config("inspect-model", {{"model", o.model}});
  std::cout << snk::nn::describe(snk::nn::load_model(o.model));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Surya Namaskar pose classifier: data, training, evaluation and streaming inference"};
  app.require_subcommand(1);
  Options o;
  std::vector<std::string> predict_files;

  auto* gen = app.add_subcommand("gen-synthetic", "Write a synthetic labeled dataset");
  gen->add_option("--out", o.out, "Dataset directory")->required();
  gen->add_option("--per-class", o.per_class, "Sequences per class")->check(CLI::PositiveNumber);
  gen->add_option("--noise", o.noise, "Gaussian noise standard deviation")->check(CLI::NonNegativeNumber);
  gen->add_option("--seed", o.seed, "Random seed");

  auto* train = app.add_subcommand("train", "Train the classifier on a dataset directory");
  train->add_option("--data", o.data, "Dataset directory")->required();
  train->add_option("--out", o.out, "Model file to write (curves.csv goes next to it)")->required();
  train->add_option("--seed", o.seed, "Seed for the split, initialisation and shuffling");
  train->add_option("--epochs", o.epochs, "Training epochs");
  train->add_option("--lr", o.lr, "Adam learning rate");
  train->add_option("--batch-size", o.batch_size, "Mini-batch size");
  train->add_option("--test-fraction", o.test_fraction, "Held-out fraction per class");
  train->add_option("--clip-norm", o.clip_norm, "Rescale gradients to this global norm (off by default)");

  auto* eval = app.add_subcommand("eval", "Evaluate a model on the partitions of a dataset");
  eval->add_option("--model", o.model, "Model file")->required();
  eval->add_option("--data", o.data, "Dataset directory")->required();
  eval->add_option("--out", o.out, "Directory for confusion.csv and per_class.json");
  eval->add_option("--seed", o.seed, "Seed used for the split at training time");
  eval->add_option("--test-fraction", o.test_fraction, "Held-out fraction used at training time");

  auto* predict = app.add_subcommand("predict", "Classify sequence files");
  predict->add_option("--model", o.model, "Model file")->required();
  predict->add_option("--data", o.data, "Sequence file or directory");
  predict->add_option("files", predict_files, "More sequence files or directories");

  auto* serve = app.add_subcommand("serve", "Stream predictions over TCP or stdio");
  serve->add_option("--model", o.model, "Model file")->required();
  serve->add_option("--listen", o.listen, "host:port to listen on");
  serve->add_flag("--stdio", o.stdio, "Speak the protocol on stdin/stdout");
  serve->add_option("--tau", o.tau, "Stability probability threshold");
  serve->add_option("--stability-n", o.stability_n, "Consecutive windows required for stability");

  auto* inspect = app.add_subcommand("inspect-model", "Print the layer table of a model");
  inspect->add_option("--model", o.model, "Model file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*gen) return cmd_gen_synthetic(o);
    if (*train) return cmd_train(o);
    if (*eval) return cmd_eval(o);
    if (*predict) return cmd_predict(o, predict_files);
    if (*serve) return cmd_serve(o);
    if (*inspect) return cmd_inspect(o);
  } catch (const snk::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

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

#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>

#include <gtest/gtest.h>

#include "reference/streams.hpp"
#include "snk/binary_io.hpp"
#include "snk/nn/model_io.hpp"
#include "snk/rt/client.hpp"
#include "snk/rt/server.hpp"

namespace snk {
namespace {

namespace fs = std::filesystem;

const std::string kCli = SNK_CLI_PATH;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("snk_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  // Runs the CLI with stdout and stderr captured to files; returns the exit code.
  int run(const std::string& args, const std::string& stdin_file = "") {
    std::string cmd = "'" + kCli + "' " + args + " > '" + (dir_ / "stdout").string() + "' 2> '" +
                      (dir_ / "stderr").string() + "'";
    if (!stdin_file.empty()) cmd += " < '" + stdin_file + "'";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string read(const fs::path& p) const {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
  }
  std::string out() const { return read(dir_ / "stdout"); }
  std::string err() const { return read(dir_ / "stderr"); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

TEST_F(CliTest, GenSyntheticWritesDataset) {
  ASSERT_EQ(run("gen-synthetic --out " + path("data") + " --per-class 30 --seed 7"), 0) << err();
  std::size_t files = 0, class_dirs = 0;
  for (const auto& e : fs::directory_iterator(path("data"))) class_dirs += e.is_directory();
  for (const auto& e : fs::recursive_directory_iterator(path("data"))) files += e.path().extension() == ".snk";
  EXPECT_EQ(class_dirs, 8u);
  EXPECT_EQ(files, 240u);
  EXPECT_TRUE(fs::exists(path("data/manifest.json")));
  EXPECT_NE(err().find("seed=7"), std::string::npos);
}

TEST_F(CliTest, InspectCanonicalModel) {
  nn::save_model(nn::init_params<float>(1), path("m.snkm"));
  ASSERT_EQ(run("inspect-model --model " + path("m.snkm")), 0) << err();
  const std::string text = out();
  std::size_t rows = 0;
  std::istringstream lines(text);
  for (std::string line; std::getline(lines, line);) rows += line.find("lstm") != std::string::npos ||
                                                            line.find("dense") != std::string::npos;
  EXPECT_EQ(rows, 6u);
  EXPECT_NE(text.find("total 596840"), std::string::npos);
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(run("inspect-model --model x --bogus 1"), 1);
  EXPECT_EQ(run("no-such-command"), 1);
  EXPECT_EQ(run(""), 1);
  EXPECT_EQ(run("inspect-model --model " + path("missing.snkm")), 2);
  EXPECT_NE(err().find("missing.snkm"), std::string::npos);

  write_file_text(path("junk.snkm"), "not a model");
  EXPECT_EQ(run("inspect-model --model " + path("junk.snkm")), 2);

  ASSERT_EQ(run("gen-synthetic --out " + path("data") + " --per-class 2 --seed 1"), 0);
  EXPECT_EQ(run("train --data " + path("data") + " --out " + path("m.snkm") + " --epochs 0"), 1);
  EXPECT_EQ(run("train --data " + path("data") + " --out " + path("m.snkm") + " --test-fraction 1.5"), 1);
  fs::create_directories(path("data/Tadasana"));
  EXPECT_EQ(run("train --data " + path("data") + " --out " + path("m.snkm")), 2);
  EXPECT_NE(err().find("Tadasana"), std::string::npos);
}

TEST_F(CliTest, DivergenceExitsWithRuntimeCode) {
  ASSERT_EQ(run("gen-synthetic --out " + path("data") + " --per-class 2 --seed 1"), 0);
  EXPECT_EQ(run("train --data " + path("data") + " --out " + path("m.snkm") + " --epochs 5 --lr 1e36"), 3);
  EXPECT_NE(err().find("loss in epoch "), std::string::npos) << err();
  EXPECT_FALSE(fs::exists(path("m.snkm")));
}

TEST_F(CliTest, EvalOutputsAreByteIdenticalAcrossRuns) {
  ASSERT_EQ(run("gen-synthetic --out " + path("data") + " --per-class 6 --noise 0.2 --seed 3"), 0);
  nn::save_model(nn::init_params<float>(5), path("m.snkm"));
  const std::string args = "eval --model " + path("m.snkm") + " --data " + path("data") + " --seed 9 --out ";
  ASSERT_EQ(run(args + path("a")), 0) << err();
  const std::string first_stdout = out();
  ASSERT_EQ(run(args + path("b")), 0) << err();
  EXPECT_EQ(out(), first_stdout);
  EXPECT_EQ(read(path("a/confusion.csv")), read(path("b/confusion.csv")));
  EXPECT_EQ(read(path("a/per_class.json")), read(path("b/per_class.json")));
  // Held-out partition: 2 of 6 per class.
  const std::string csv = read(path("a/confusion.csv"));
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  std::size_t total = 0;
  while (std::getline(lines, line)) {
    std::istringstream cells(line);
    for (std::string c; std::getline(cells, c, ',');) total += std::stoul(c);
  }
  EXPECT_EQ(total, 16u);
}

TEST_F(CliTest, TrainThenEvalOnSeparableData) {
  ASSERT_EQ(run("gen-synthetic --out " + path("data") + " --per-class 4 --noise 0 --seed 7"), 0);
  ASSERT_EQ(run("train --data " + path("data") + " --seed 42 --out " + path("model/model.snkm")), 0) << err();
  EXPECT_TRUE(fs::exists(path("model/curves.csv")));
  const std::string curves = read(path("model/curves.csv"));
  EXPECT_EQ(curves.rfind("epoch,train_loss,train_acc,val_loss,val_acc\n", 0), 0u);
  EXPECT_EQ(std::count(curves.begin(), curves.end(), '\n'), 201);
  ASSERT_EQ(run("eval --model " + path("model/model.snkm") + " --data " + path("data") + " --out " + path("ev")), 0);
  EXPECT_NE(out().find("train accuracy 1.000"), std::string::npos) << out();

  ASSERT_EQ(run("predict --model " + path("model/model.snkm") + " " + path("data/Svanasana")), 0) << err();
  std::istringstream rows(out());
  std::string row;
  std::getline(rows, row);
  std::size_t n = 0;
  while (std::getline(rows, row)) {
    EXPECT_NE(row.find(",Svanasana,"), std::string::npos) << row;
    ++n;
  }
  EXPECT_EQ(n, 4u);
}

TEST_F(CliTest, ServeStdioReplaysTheFixture) {
  const auto net = nn::init_params<float>(3);
  nn::save_model(net, path("m.snkm"));
  const auto input = testing::client_bytes(testing::replay_fixture());
  write_file_bytes(path("in.bin"), input);

  rt::Connection conn(net, rt::ServeConfig{});
  const auto want = conn.on_bytes(input);
  for (int i = 0; i < 2; ++i) {
    ASSERT_EQ(run("serve --stdio --model " + path("m.snkm"), path("in.bin")), 0) << err();
    const std::string got = out();
    ASSERT_EQ(got.size(), want.size());
    EXPECT_EQ(0, std::memcmp(got.data(), want.data(), want.size()));
  }
  std::size_t predictions = 0;
  for (const auto& m : testing::decode_all(want)) predictions += std::holds_alternative<rt::PredictionMsg>(m);
  EXPECT_EQ(predictions, 111u);
}

TEST_F(CliTest, ServeNeedsOneTransport) {
  nn::save_model(nn::init_params<float>(3), path("m.snkm"));
  EXPECT_EQ(run("serve --model " + path("m.snkm")), 1);
  EXPECT_EQ(run("serve --stdio --listen 127.0.0.1:0 --model " + path("m.snkm")), 1);
  EXPECT_EQ(run("serve --stdio --tau 2 --model " + path("m.snkm")), 1);
}

TEST_F(CliTest, ServeTcpStopsOnSigterm) {
  nn::save_model(testing::indicator_network(), path("m.snkm"));
  const std::string log = path("serve.log");
  const pid_t pid = ::fork();
  ASSERT_GE(pid, 0);
  if (pid == 0) {
    if (std::freopen(log.c_str(), "w", stderr) == nullptr) std::_Exit(126);
    const std::string model = path("m.snkm");
    ::execl(kCli.c_str(), kCli.c_str(), "serve", "--model", model.c_str(), "--listen", "127.0.0.1:0",
            static_cast<char*>(nullptr));
    std::_Exit(127);
  }
  std::uint16_t port = 0;
  for (int i = 0; i < 200 && port == 0; ++i) {
    std::this_thread::sleep_for(std::chrono::milliseconds(25));
    const std::string text = read(log);
    const auto at = text.find("listening on 127.0.0.1:");
    if (at != std::string::npos && text.find('\n', at) != std::string::npos) {
      port = static_cast<std::uint16_t>(std::stoul(text.substr(at + 23)));
    }
  }
  ASSERT_NE(port, 0) << read(log);
  {
    rt::Client c = rt::Client::connect({"127.0.0.1", port});
    c.send(rt::Hello{1, 1662});
    const auto ack = c.receive();
    ASSERT_TRUE(ack.has_value());
    EXPECT_EQ(std::get<rt::HelloAck>(*ack).class_names.size(), 8u);
  }
  ::kill(pid, SIGTERM);
  int status = 0;
  ASSERT_EQ(::waitpid(pid, &status, 0), pid);
  ASSERT_TRUE(WIFEXITED(status));
  EXPECT_EQ(WEXITSTATUS(status), 0);
  EXPECT_NE(read(log).find("stopped"), std::string::npos);
}

}  // namespace
}  // namespace snk

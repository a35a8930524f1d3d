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

// Replays an SNK1 frame stream against a running `snk serve --listen` and
// prints what comes back.
//
//   stream_client 127.0.0.1:7070 frames.snk
//
// Without a file, streams two seconds of each synthetic pose in cycle order.

#include <cmath>
#include <cstdio>
#include <string>
#include <thread>
#include <variant>

#include "snk/snk.hpp"

namespace {

snk::FrameStream synthetic_round() {
  snk::FrameStream fs;
  fs.dim = static_cast<std::uint16_t>(snk::kFeatureDim);
  const auto ds = snk::gen_synthetic(1, 0.02, 1);
  for (snk::ClassLabel c : snk::rt::canonical_cycle()) {
    const auto& tmpl = ds.sequences[c.index()].values;
    for (int rep = 0; rep < 12; ++rep) fs.values.insert(fs.values.end(), tmpl.begin(), tmpl.end());
    fs.frame_count += 12 * snk::kWindowLength;
  }
  return fs;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: %s host:port [frames.snk]\n", argv[0]);
    return 1;
  }
  try {
    const snk::FrameStream fs = argc > 2 ? snk::read_frame_stream(argv[2]) : synthetic_round();
    snk::rt::Client client = snk::rt::Client::connect(snk::rt::parse_endpoint(argv[1]));
    client.send(snk::rt::Hello{snk::rt::kProtocolVersion, fs.dim});
    const auto ack = client.receive();
    if (!ack || !std::holds_alternative<snk::rt::HelloAck>(*ack)) {
      std::fprintf(stderr, "handshake failed\n");
      return 2;
    }
    const auto names = std::get<snk::rt::HelloAck>(*ack).class_names;

    // Frames go out from a second thread so replies are read while sending.
    std::thread sender([&] {
      for (std::uint32_t i = 0; i < fs.frame_count; ++i) {
        const auto f = fs.frame(i);
        const auto ts = static_cast<std::uint64_t>(std::llround(i * 1000.0 / fs.fps));
        client.send(snk::rt::FrameMsg{ts, {f.begin(), f.end()}});
      }
      client.finish_sending();
    });
    while (auto msg = client.receive()) {
      if (const auto* p = std::get_if<snk::rt::PredictionMsg>(&*msg)) {
        std::printf("%8llu ms  %-22s %.2f%s\n", static_cast<unsigned long long>(p->timestamp_ms),
                    names.at(p->class_index).c_str(), static_cast<double>(p->probabilities[p->class_index]),
                    p->stable() ? "  stable" : "");
      } else if (const auto* c = std::get_if<snk::rt::CycleMsg>(&*msg)) {
        const snk::rt::CycleEvent e{static_cast<snk::rt::CycleEventKind>(c->event_code), c->step_index,
                                    snk::ClassLabel::from_index(c->expected_class),
                                    snk::ClassLabel::from_index(c->observed_class)};
        std::printf("cycle: %s (step %u / 12)\n", e.describe().c_str(), unsigned{c->step_index});
      } else if (const auto* err = std::get_if<snk::rt::ErrorMsg>(&*msg)) {
        std::printf("server error %s: %s\n", std::string(snk::rt::to_string(err->code)).c_str(), err->message.c_str());
      }
    }
    sender.join();
  } catch (const snk::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}

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

#include "snk/binary_io.hpp"
#include "snk/dataset.hpp"
#include "snk/error.hpp"
#include "snk/frame.hpp"
#include "snk/labels.hpp"
#include "snk/metrics.hpp"
#include "snk/nn/model_io.hpp"
#include "snk/nn/network.hpp"
#include "snk/rng.hpp"
#include "snk/rt/client.hpp"
#include "snk/rt/cycle.hpp"
#include "snk/rt/protocol.hpp"
#include "snk/rt/server.hpp"
#include "snk/rt/session.hpp"
#include "snk/sequence_io.hpp"
#include "snk/train/adam.hpp"
#include "snk/train/backward.hpp"
#include "snk/train/trainer.hpp"

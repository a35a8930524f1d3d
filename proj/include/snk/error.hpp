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

#include <stdexcept>
#include <string>
#include <string_view>

namespace snk {

enum class ErrorCode {
  kBlockShape,
  kInvalidValue,
  kFormat,
  kCorruptFile,
  kUnknownClass,
  kInsufficientData,
  kLabel,
  kShape,
  kConfig,
  kDivergence,
  kOrdering,
  kInput,
  kCorruptModel,
  kProtocol,
  kIo,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kBlockShape: return "block-shape";
    case ErrorCode::kInvalidValue: return "invalid-value";
    case ErrorCode::kFormat: return "format";
    case ErrorCode::kCorruptFile: return "corrupt-file";
    case ErrorCode::kUnknownClass: return "unknown-class";
    case ErrorCode::kInsufficientData: return "insufficient-data";
    case ErrorCode::kLabel: return "label";
    case ErrorCode::kShape: return "shape";
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kDivergence: return "divergence";
    case ErrorCode::kOrdering: return "ordering";
    case ErrorCode::kInput: return "input";
    case ErrorCode::kCorruptModel: return "corrupt-model";
    case ErrorCode::kProtocol: return "protocol";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

/// Every failure raised by the library. `code()` identifies the failure class
/// so callers (the CLI in particular) can map it without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + " error: " + message),
        code_(code),
        detail_(message) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

  /// Same error class, message prefixed with a location (file path, flag).
  Error with_context(std::string_view where) const {
    return Error(code_, std::string(where) + ": " + detail_);
  }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace snk

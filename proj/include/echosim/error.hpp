// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 The echosim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
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

namespace echosim {

enum class ErrorCode {
  io_error,
  parse_error,
  empty_mesh,
  invalid_material,
  invalid_argument,
  no_candidates,
  grid_mismatch,
  length_mismatch,
  channel_mismatch,
  singular_system,
  invalid_band,
  rate_mismatch,
  config_error,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::io_error: return "io_error";
    case ErrorCode::parse_error: return "parse_error";
    case ErrorCode::empty_mesh: return "empty_mesh";
    case ErrorCode::invalid_material: return "invalid_material";
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::no_candidates: return "no_candidates";
    case ErrorCode::grid_mismatch: return "grid_mismatch";
    case ErrorCode::length_mismatch: return "length_mismatch";
    case ErrorCode::channel_mismatch: return "channel_mismatch";
    case ErrorCode::singular_system: return "singular_system";
    case ErrorCode::invalid_band: return "invalid_band";
    case ErrorCode::rate_mismatch: return "rate_mismatch";
    case ErrorCode::config_error: return "config_error";
  }
  return "unknown";
}

/// Exception type thrown by every module. The code identifies the failure
/// class; the message carries the details (and a stage label when raised
/// from inside the simulation pipeline).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace echosim

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

#include <filesystem>
#include <string>
#include <vector>

#include "echosim/types.hpp"

namespace echosim {

/// Mono IEEE float32 WAV.
void write_wav(const std::filesystem::path& path, const Eigen::VectorXd& samples, double sample_rate);

struct WavData {
  Eigen::VectorXd samples;
  double sample_rate = 0.0;
};

/// Reads files produced by write_wav.
WavData read_wav(const std::filesystem::path& path);

/// CSV with a header row: `axis_label`, then one column per entry of
/// `columns`; one row per axis value.
void write_matrix_csv(const std::filesystem::path& path, const std::string& axis_label, const Eigen::VectorXd& axis,
                      const std::vector<std::string>& columns, const Eigen::MatrixXd& values);

/// 64-bit FNV-1a, as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace echosim

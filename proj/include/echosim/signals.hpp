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

#include <string>
#include <utility>

#include "echosim/ertf.hpp"
#include "echosim/spectral.hpp"

namespace echosim {

enum class CallKind { hyperbolic_fm, linear_fm, cf };
enum class Window { rectangular, hann, tukey };

CallKind call_kind_from_string(const std::string& name);
Window window_from_string(const std::string& name);
std::string to_string(CallKind kind);
std::string to_string(Window window);

/// Emitted call s_e(t).
struct EmittedCall {
  Eigen::VectorXd samples;
  double sample_rate = 1e6;
  double duration = 0.0;
  double f_low = 0.0;
  double f_high = 0.0;
};

/// Phase-continuous sweep from `f_start` to `f_end` (cf uses `f_start`
/// only), amplitude-windowed and scaled to unit peak. Throws
/// ErrorCode::invalid_band for a non-positive duration or frequencies
/// outside (0, fs/2).
EmittedCall synthesize_call(CallKind kind, double f_start, double f_end, double duration, double sample_rate,
                            Window window = Window::hann);

/// Ear responses: each bank applied over the combined multichannel IR.
std::pair<Eigen::VectorXd, Eigen::VectorXd> filter_ears(const ImpulseResponseSet& irs, const ErtfFilterBank& left,
                                                        const ErtfFilterBank& right);

/// s = h * s_e per ear. Throws ErrorCode::rate_mismatch when the call and
/// response sample rates differ.
std::pair<Eigen::VectorXd, Eigen::VectorXd> receive(const EmittedCall& call, const Eigen::VectorXd& h_left,
                                                    const Eigen::VectorXd& h_right, double sample_rate);

struct BinauralResult {
  Eigen::VectorXd h_left, h_right;
  Eigen::VectorXd s_left, s_right;
  double output_scale = 1.0;  ///< factor applied to s_left / s_right
};

}  // namespace echosim

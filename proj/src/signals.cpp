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

#include "echosim/signals.hpp"

#include <cmath>

#include "echosim/error.hpp"

namespace echosim {

CallKind call_kind_from_string(const std::string& name) {
  if (name == "hyperbolic_fm" || name == "hfm") return CallKind::hyperbolic_fm;
  if (name == "linear_fm" || name == "lfm") return CallKind::linear_fm;
  if (name == "cf") return CallKind::cf;
  throw Error(ErrorCode::invalid_argument, "unknown call kind '" + name + "'");
}

Window window_from_string(const std::string& name) {
  if (name == "rectangular" || name == "none") return Window::rectangular;
  if (name == "hann") return Window::hann;
  if (name == "tukey") return Window::tukey;
  throw Error(ErrorCode::invalid_argument, "unknown window '" + name + "'");
}

std::string to_string(CallKind kind) {
  switch (kind) {
    case CallKind::hyperbolic_fm: return "hyperbolic_fm";
    case CallKind::linear_fm: return "linear_fm";
    case CallKind::cf: return "cf";
  }
  return "?";
}

std::string to_string(Window window) {
  switch (window) {
    case Window::rectangular: return "rectangular";
    case Window::hann: return "hann";
    case Window::tukey: return "tukey";
  }
  return "?";
}

namespace {

double window_value(Window window, double x) {  // x in [0, 1]
  switch (window) {
    case Window::rectangular: return 1.0;
    case Window::hann: return 0.5 - 0.5 * std::cos(2.0 * kPi * x);
    case Window::tukey: {
      constexpr double r = 0.25;
      if (x < r / 2.0) return 0.5 * (1.0 - std::cos(2.0 * kPi * x / r));
      if (x > 1.0 - r / 2.0) return 0.5 * (1.0 - std::cos(2.0 * kPi * (1.0 - x) / r));
      return 1.0;
    }
  }
  return 1.0;
}

}  // namespace

EmittedCall synthesize_call(CallKind kind, double f_start, double f_end, double duration, double sample_rate,
                            Window window) {
  if (kind == CallKind::cf) f_end = f_start;
  const double nyquist = sample_rate / 2.0;
  if (!(duration > 0.0)) throw Error(ErrorCode::invalid_band, "call duration must be positive");
  if (!(f_start > 0.0 && f_start < nyquist && f_end > 0.0 && f_end < nyquist))
    throw Error(ErrorCode::invalid_band, "call frequencies must lie in (0, fs/2)");
  const auto n = static_cast<Eigen::Index>(std::llround(duration * sample_rate));
  if (n < 1) throw Error(ErrorCode::invalid_band, "call is shorter than one sample");

  EmittedCall call;
  call.sample_rate = sample_rate;
  call.duration = duration;
  call.f_low = std::min(f_start, f_end);
  call.f_high = std::max(f_start, f_end);
  call.samples.resize(n);
  const double a = 1.0 / f_start;
  const double b = (1.0 / f_end - 1.0 / f_start) / duration;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    double cycles = 0.0;
    switch (kind) {
      case CallKind::cf: cycles = f_start * t; break;
      case CallKind::linear_fm: cycles = f_start * t + 0.5 * (f_end - f_start) / duration * t * t; break;
      case CallKind::hyperbolic_fm:
        // 1/f(t) is linear in t.
        cycles = b == 0.0 ? f_start * t : std::log1p(b * t / a) / b;
        break;
    }
    const double x = n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 0.5;
    call.samples(i) = window_value(window, x) * std::sin(2.0 * kPi * cycles);
  }
  const double peak = call.samples.cwiseAbs().maxCoeff();
  if (peak > 0.0) call.samples /= peak;
  return call;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> filter_ears(const ImpulseResponseSet& irs, const ErtfFilterBank& left,
                                                        const ErtfFilterBank& right) {
  return {apply_filter_bank(left, irs.combined), apply_filter_bank(right, irs.combined)};
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> receive(const EmittedCall& call, const Eigen::VectorXd& h_left,
                                                    const Eigen::VectorXd& h_right, double sample_rate) {
  if (call.sample_rate != sample_rate)
    throw Error(ErrorCode::rate_mismatch, "call sampled at " + std::to_string(call.sample_rate) +
                                              " Hz, responses at " + std::to_string(sample_rate) + " Hz");
  return {convolve(h_left, call.samples), convolve(h_right, call.samples)};
}

}  // namespace echosim

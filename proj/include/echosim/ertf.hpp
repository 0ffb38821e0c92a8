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

#include "echosim/scene.hpp"

namespace echosim {

/// Desired directivity E(f, psi) sampled on a direction x frequency grid.
/// Directions are unit vectors in the sensor frame.
struct DirectivityTarget {
  Points directions;            ///< P x 3
  Eigen::VectorXd frequencies;  ///< F, Hz
  Eigen::MatrixXcd gains;       ///< F x P
  Eigen::VectorXd weights;      ///< P least-squares row weights; empty means uniform

  void validate() const;
};

enum class PatternKind { omni, cardioid_power, cosine_lobe };

struct AnalyticPattern {
  PatternKind kind = PatternKind::omni;
  double exponent = 1.0;
  Vec3 axis = Vec3::UnitX();

  /// Real, frequency-independent gain toward `direction`.
  double gain(const Vec3& direction) const;
};

PatternKind pattern_kind_from_string(const std::string& name);
std::string to_string(PatternKind kind);

DirectivityTarget make_target(const AnalyticPattern& pattern, const Points& directions,
                              const Eigen::VectorXd& frequencies);

/// Reads rows `az_deg, el_deg, freq_hz, gain_re, gain_im` (header optional).
/// Azimuth turns from +X toward +Y, elevation toward +Z. Every direction
/// must appear at every frequency.
DirectivityTarget load_target_csv(const std::filesystem::path& path);

/// Per-receiver FIR filters. The fitted filters carry a bulk delay of
/// `delay` samples.
struct ErtfFilterBank {
  Eigen::MatrixXd taps;  ///< I x L
  double sample_rate = 1e6;
  int delay = 0;
  std::vector<Eigen::VectorXd> prefilters;  ///< empty, or one FIR per receiver

  Eigen::Index receiver_count() const { return taps.rows(); }
  Eigen::Index length() const { return taps.cols(); }
  /// Taps with the prefilter folded in.
  Eigen::VectorXd effective_filter(Eigen::Index receiver) const;
  /// Compensated response sum_t h(t) exp(-j 2 pi f (t - delay) / fs).
  cplx response(Eigen::Index receiver, double f) const;
  void validate() const;
};

/// Bank of one-tap filters: 1 for the listed receivers, 0 elsewhere.
ErtfFilterBank selection_bank(Eigen::Index receivers, const std::vector<int>& members, double sample_rate);

/// exp(-j (2 pi f / c) direction . (p_i - emitter)) for a plane wave
/// travelling along `direction`.
Eigen::VectorXcd steering_vector(const SensorArray& array, const Vec3& direction, double f, double c);

/// Array response to an echo arriving from `direction` (propagation along
/// -direction).
Eigen::VectorXcd arrival_vector(const SensorArray& array, const Vec3& direction, double f, double c);

enum class Regularization { trace_normalized, absolute };

struct FitOptions {
  int taps = 128;
  double lambda = 1e-6;
  Regularization mode = Regularization::trace_normalized;
  double sample_rate = 1e6;
  double speed_of_sound = 343.0;
  unsigned workers = 1;
};

struct FitResult {
  ErtfFilterBank bank;
  double lambda = 0.0;     ///< absolute ridge weight used
  double residual = 0.0;   ///< data term
  double objective = 0.0;  ///< residual + lambda * |taps|^2
};

/// Ridge least squares for per-receiver FIRs whose array sum realizes the
/// target. Frequencies on the L-point DFT grid are solved exactly for the
/// tap-domain objective; others are solved as complex weights and
/// interpolated onto the grid.
FitResult fit_fir_bank(const DirectivityTarget& target, const SensorArray& array, const FitOptions& options);

struct Objective {
  double residual = 0.0;
  double objective = 0.0;
};

Objective fit_objective(const ErtfFilterBank& bank, const DirectivityTarget& target, const SensorArray& array,
                        double c, double lambda);

/// sum_i A_i(f, psi) W_i(f) with W the delay-compensated response; F x P.
Eigen::MatrixXcd evaluate_realized_pattern(const ErtfFilterBank& bank, const SensorArray& array,
                                           const Points& directions, const Eigen::VectorXd& frequencies, double c);

/// s_f = sum_i h_e(i) * s_i. `channels` holds one signal per column.
/// Throws ErrorCode::channel_mismatch.
Eigen::VectorXd apply_filter_bank(const ErtfFilterBank& bank, const Eigen::MatrixXd& channels);

/// Header: uint32 I, uint32 L, float64 fs; then I x L float64 taps, row
/// major; all little-endian. Loaded banks get delay L / 2.
void save_filter_bank(const std::filesystem::path& path, const ErtfFilterBank& bank);
ErtfFilterBank load_filter_bank(const std::filesystem::path& path);

}  // namespace echosim

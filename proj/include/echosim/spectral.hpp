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

#include <vector>

#include "echosim/raytrace.hpp"
#include "echosim/scene.hpp"

namespace echosim {

/// Complex transfer function on the one-sided grid f_j = j fs / N_t,
/// j = 0 .. N_t / 2.
struct TransferSpectrum {
  Eigen::VectorXcd values;
  int receiver = 0;
};

/// Per-receiver impulse responses, one column per receiver, N_t rows.
struct ImpulseResponseSet {
  Eigen::MatrixXd specular;
  Eigen::MatrixXd diffraction;
  Eigen::MatrixXd combined;
};

/// Band weights per bin: 1 inside the band, raised-cosine edges of width
/// `transition` outside it, 0 beyond. All ones when no band is configured.
Eigen::ArrayXd band_window(const SimParams& params);

/// Linear interpolation of a magnitude profile sampled on `grid` at `f`,
/// held constant beyond the ends.
double interpolate_magnitude(const Eigen::ArrayXd& magnitude, const Eigen::VectorXd& grid, double f);

/// H(f) = H_m(f) exp(-j 2 pi f r / c) / r^2. The negative exponent puts
/// the time-domain peak at the positive delay r / c. `magnitude_grid` is
/// the grid the contribution's magnitude was sampled on.
TransferSpectrum synthesize_transfer(const Contribution& contribution, const Eigen::VectorXd& magnitude_grid,
                                     const SimParams& params);

/// Adds a contribution's transfer function, times `window`, into `acc`
/// (bins where the window is zero are skipped). Returns false when the
/// delay does not fit into the response (aliasing guard) and nothing was
/// added.
bool add_transfer(const Contribution& contribution, const Eigen::VectorXd& magnitude_grid, const SimParams& params,
                  const Eigen::ArrayXd& window, Eigen::Ref<Eigen::VectorXcd> acc, double scale = 1.0);

/// Inverse real FFT of a one-sided spectrum (N_t / 2 + 1 bins) to N_t samples.
/// Throws ErrorCode::grid_mismatch on a wrong bin count.
Eigen::VectorXd to_time_domain(const Eigen::VectorXcd& spectrum, int ir_length);
inline Eigen::VectorXd to_time_domain(const TransferSpectrum& spectrum, const SimParams& params) {
  return to_time_domain(spectrum.values, params.ir_length);
}

/// Forward real FFT, one-sided output.
Eigen::VectorXcd to_frequency_domain(const Eigen::VectorXd& signal);

/// Time-domain energy implied by a one-sided spectrum of an N-sample real
/// signal (discrete Parseval).
double spectrum_energy(const Eigen::VectorXcd& one_sided, int n);

/// Element-wise sum; ErrorCode::length_mismatch on unequal lengths.
Eigen::VectorXd accumulate(const std::vector<Eigen::VectorXd>& responses);

/// Linear convolution of length a + b - 1. FFT-based when the output is
/// longer than 1024 samples, direct otherwise.
Eigen::VectorXd convolve(const Eigen::VectorXd& a, const Eigen::VectorXd& b);
Eigen::VectorXd convolve_direct(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// a_r * h + a_d * g.
Eigen::MatrixXd combine(const Eigen::MatrixXd& specular, const Eigen::MatrixXd& diffraction, double specular_gain,
                        double diffraction_gain);

}  // namespace echosim

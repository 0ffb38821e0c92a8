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

#include <cmath>

#include "echosim/curvature.hpp"

namespace echosim {

/// Parameters of the curvature -> BRDF mapping.
///
///   s(C, f)  = x / (1 + x),  x = C / C_ref(f),  C_ref(f) = 2 pi f / c * kappa_scale
///   alpha    = alpha_min + (alpha_max - alpha_min) * s
///   k        = k_max - (k_max - k_min) * s
///
/// so flat faces reflect specularly and strongly while faces that are sharp
/// compared to the wavelength scatter widely and weakly.
struct MaterialParams {
  double alpha_min = deg2rad(5.0);
  double alpha_max = deg2rad(150.0);
  double k_min = 0.05;
  double k_max = 1.0;
  double kappa_scale = 1.0;
  double speed_of_sound = 343.0;

  /// Throws ErrorCode::invalid_material when outside the documented ranges.
  void validate() const;
};

/// Per-face, per-frequency lobe half-width alpha (rad) and strength k.
/// Rows are faces, columns follow `frequencies`.
struct BrdfField {
  Eigen::VectorXd frequencies;
  Eigen::ArrayXXd alpha;
  Eigen::ArrayXXd strength;

  Eigen::Index face_count() const { return alpha.rows(); }
  Eigen::Index frequency_count() const { return frequencies.size(); }
};

/// Saturating curvature ratio used by the mapping; 0 for flat, -> 1 when sharp.
inline double sharpness(double curvature, double frequency, const MaterialParams& m) {
  const double reference = 2.0 * kPi * frequency / m.speed_of_sound * m.kappa_scale;
  const double x = curvature / reference;
  return x / (1.0 + x);
}

BrdfField derive_brdf(const Eigen::VectorXd& face_curvature, const Eigen::VectorXd& frequencies,
                      const MaterialParams& material);

inline BrdfField derive_brdf(const CurvatureField& curvature, const Eigen::VectorXd& frequencies,
                             const MaterialParams& material) {
  return derive_brdf(curvature.face_magnitude, frequencies, material);
}

/// Gaussian reflection lobe; `half_width` is the half-power half-width, so
/// lobe(half_width) == 0.5 and lobe(0) == 1.
template <typename Scalar>
Scalar lobe(Scalar angle, Scalar half_width) {
  const Scalar r = angle / half_width;
  return std::exp(-Scalar(std::numbers::ln2) * r * r);
}

}  // namespace echosim

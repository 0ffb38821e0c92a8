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

#include "echosim/brdf.hpp"

#include "echosim/error.hpp"

namespace echosim {

void MaterialParams::validate() const {
  auto fail = [](const char* what) { throw Error(ErrorCode::invalid_material, what); };
  if (!(alpha_min > 0.0 && alpha_min <= kPi)) fail("alpha_min must lie in (0, pi]");
  if (!(alpha_max >= alpha_min && alpha_max <= kPi)) fail("alpha_max must lie in [alpha_min, pi]");
  if (!(k_min >= 0.0 && k_min <= k_max && k_max <= 1.0)) fail("need 0 <= k_min <= k_max <= 1");
  if (!(kappa_scale > 0.0 && std::isfinite(kappa_scale))) fail("kappa_scale must be positive");
  if (!(speed_of_sound > 0.0)) fail("speed_of_sound must be positive");
}

BrdfField derive_brdf(const Eigen::VectorXd& face_curvature, const Eigen::VectorXd& frequencies,
                      const MaterialParams& material) {
  material.validate();
  if (frequencies.size() == 0) throw Error(ErrorCode::invalid_argument, "empty BRDF frequency grid");
  for (Eigen::Index j = 0; j < frequencies.size(); ++j) {
    if (!(frequencies(j) > 0.0)) throw Error(ErrorCode::invalid_argument, "BRDF frequencies must be positive");
    if (j > 0 && !(frequencies(j) > frequencies(j - 1)))
      throw Error(ErrorCode::invalid_argument, "BRDF frequencies must be strictly increasing");
  }
  if ((face_curvature.array() < 0.0).any() || !face_curvature.allFinite())
    throw Error(ErrorCode::invalid_argument, "curvature magnitudes must be finite and non-negative");

  BrdfField field;
  field.frequencies = frequencies;
  field.alpha.resize(face_curvature.size(), frequencies.size());
  field.strength.resize(face_curvature.size(), frequencies.size());
  for (Eigen::Index j = 0; j < frequencies.size(); ++j) {
    for (Eigen::Index f = 0; f < face_curvature.size(); ++f) {
      const double s = sharpness(face_curvature(f), frequencies(j), material);
      field.alpha(f, j) = material.alpha_min + (material.alpha_max - material.alpha_min) * s;
      field.strength(f, j) = material.k_max - (material.k_max - material.k_min) * s;
    }
  }
  return field;
}

}  // namespace echosim

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

#include "echosim/spectral.hpp"

#include <algorithm>
#include <cmath>

#include <unsupported/Eigen/FFT>

#include "echosim/error.hpp"

namespace echosim {

Eigen::ArrayXd band_window(const SimParams& params) {
  const int bins = params.bin_count();
  Eigen::ArrayXd w = Eigen::ArrayXd::Ones(bins);
  if (!params.band) return w;
  const Band& b = *params.band;
  for (int j = 0; j < bins; ++j) {
    const double f = params.bin_frequency(j);
    double gap = 0.0;
    if (f < b.low) gap = b.low - f;
    if (f > b.high) gap = f - b.high;
    if (gap == 0.0) continue;
    w(j) = (b.transition > 0.0 && gap < b.transition) ? 0.5 * (1.0 + std::cos(kPi * gap / b.transition)) : 0.0;
  }
  return w;
}

double interpolate_magnitude(const Eigen::ArrayXd& magnitude, const Eigen::VectorXd& grid, double f) {
  const Eigen::Index n = magnitude.size();
  if (n == 1 || f <= grid(0)) return magnitude(0);
  if (f >= grid(n - 1)) return magnitude(n - 1);
  const double* it = std::upper_bound(grid.data(), grid.data() + n, f);
  const Eigen::Index hi = it - grid.data();
  const Eigen::Index lo = hi - 1;
  const double t = (f - grid(lo)) / (grid(hi) - grid(lo));
  return magnitude(lo) + t * (magnitude(hi) - magnitude(lo));
}

TransferSpectrum synthesize_transfer(const Contribution& contribution, const Eigen::VectorXd& magnitude_grid,
                                     const SimParams& params) {
  if (!(contribution.path_length > 0.0)) throw Error(ErrorCode::invalid_argument, "path length must be positive");
  TransferSpectrum out;
  out.receiver = contribution.receiver;
  out.values = Eigen::VectorXcd::Zero(params.bin_count());
  const Eigen::ArrayXd window = band_window(params);
  const double r = contribution.path_length;
  const double spread = 1.0 / (r * r);
  for (int j = 0; j < params.bin_count(); ++j) {
    if (window(j) == 0.0) continue;
    const double f = params.bin_frequency(j);
    const double mag = interpolate_magnitude(contribution.magnitude, magnitude_grid, f);
    out.values(j) = std::polar(window(j) * mag * spread, -2.0 * kPi * f * r / params.speed_of_sound);
  }
  return out;
}

bool add_transfer(const Contribution& contribution, const Eigen::VectorXd& magnitude_grid, const SimParams& params,
                  const Eigen::ArrayXd& window, Eigen::Ref<Eigen::VectorXcd> acc, double scale) {
  const double r = contribution.path_length;
  const double delay_samples = r / params.speed_of_sound * params.sample_rate;
  if (!(delay_samples < params.ir_length)) return false;
  if (!contribution.magnitude.isZero(0.0) && r > 0.0) {
    const double spread = scale / (r * r);
    const double df = params.sample_rate / params.ir_length;
    // Phase advance per bin; the rotating phasor is re-anchored every
    // 64 bins to bound round-off.
    const double dphi = -2.0 * kPi * df * r / params.speed_of_sound;
    const cplx step = std::polar(1.0, dphi);
    const Eigen::ArrayXd& mag = contribution.magnitude;
    const Eigen::Index nmag = mag.size();
    Eigen::Index seg = 0;
    cplx phasor;
    for (int j = 0; j < params.bin_count(); ++j) {
      if (window(j) == 0.0) continue;
      if (j % 64 == 0 || j == 0 || window(j - 1) == 0.0) {
        phasor = std::polar(1.0, dphi * j);
      }
      const double f = j * df;
      double m;
      if (nmag == 1 || f <= magnitude_grid(0)) {
        m = mag(0);
      } else if (f >= magnitude_grid(nmag - 1)) {
        m = mag(nmag - 1);
      } else {
        while (magnitude_grid(seg + 1) < f) ++seg;
        const double t = (f - magnitude_grid(seg)) / (magnitude_grid(seg + 1) - magnitude_grid(seg));
        m = mag(seg) + t * (mag(seg + 1) - mag(seg));
      }
      acc(j) += (window(j) * m * spread) * phasor;
      phasor *= step;
      if ((j + 1) % 64 == 0) phasor = std::polar(1.0, dphi * (j + 1));
    }
  }
  return true;
}

Eigen::VectorXd to_time_domain(const Eigen::VectorXcd& spectrum, int ir_length) {
  if (spectrum.size() != ir_length / 2 + 1)
    throw Error(ErrorCode::grid_mismatch, "spectrum has " + std::to_string(spectrum.size()) + " bins, expected " +
                                              std::to_string(ir_length / 2 + 1));
  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  // DC and Nyquist must be real for a real signal.
  Eigen::VectorXcd half = spectrum;
  half(0) = half(0).real();
  if (ir_length % 2 == 0) half(ir_length / 2) = half(ir_length / 2).real();
  Eigen::VectorXd out;
  fft.inv(out, half, ir_length);
  return out;
}

Eigen::VectorXcd to_frequency_domain(const Eigen::VectorXd& signal) {
  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  Eigen::VectorXcd out;
  fft.fwd(out, signal);
  return out;
}

double spectrum_energy(const Eigen::VectorXcd& one_sided, int n) {
  double sum = 0.0;
  for (Eigen::Index k = 0; k < one_sided.size(); ++k) {
    const bool unique = k == 0 || (n % 2 == 0 && k == n / 2);
    sum += (unique ? 1.0 : 2.0) * std::norm(one_sided(k));
  }
  return sum / n;
}

Eigen::VectorXd convolve_direct(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() == 0 || b.size() == 0) return {};
  Eigen::VectorXd out = Eigen::VectorXd::Zero(a.size() + b.size() - 1);
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a(i) == 0.0) continue;
    out.segment(i, b.size()) += a(i) * b;
  }
  return out;
}

Eigen::VectorXd convolve(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() == 0 || b.size() == 0) return {};
  const Eigen::Index n = a.size() + b.size() - 1;
  if (n <= 1024) return convolve_direct(a, b);
  Eigen::Index nfft = 1;
  while (nfft < n) nfft <<= 1;
  Eigen::VectorXd pa = Eigen::VectorXd::Zero(nfft);
  Eigen::VectorXd pb = Eigen::VectorXd::Zero(nfft);
  pa.head(a.size()) = a;
  pb.head(b.size()) = b;
  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  Eigen::VectorXcd fa, fb;
  fft.fwd(fa, pa);
  fft.fwd(fb, pb);
  const Eigen::VectorXcd prod = fa.cwiseProduct(fb);
  Eigen::VectorXd out;
  fft.inv(out, prod, nfft);
  return out.head(n);
}

Eigen::VectorXd accumulate(const std::vector<Eigen::VectorXd>& responses) {
  if (responses.empty()) return {};
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(responses.front().size());
  for (const auto& r : responses) {
    if (r.size() != sum.size()) throw Error(ErrorCode::length_mismatch, "responses differ in length");
    sum += r;
  }
  return sum;
}

Eigen::MatrixXd combine(const Eigen::MatrixXd& specular, const Eigen::MatrixXd& diffraction, double specular_gain,
                        double diffraction_gain) {
  if (specular.rows() != diffraction.rows() || specular.cols() != diffraction.cols())
    throw Error(ErrorCode::length_mismatch, "specular and diffraction responses differ in shape");
  return specular_gain * specular + diffraction_gain * diffraction;
}

}  // namespace echosim

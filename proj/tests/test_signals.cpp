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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <complex>
#include <unsupported/Eigen/FFT>
#include <vector>

#include "echosim/error.hpp"
#include "echosim/signals.hpp"
#include "echosim/simulation.hpp"
#include "oracles.hpp"

using namespace echosim;

namespace {

ImpulseResponseSet random_irs(int n, int receivers) {
  ImpulseResponseSet irs;
  irs.specular = Eigen::MatrixXd::Random(n, receivers);
  irs.diffraction = Eigen::MatrixXd::Zero(n, receivers);
  irs.combined = irs.specular;
  return irs;
}

double relative_energy_gap(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).squaredNorm() / a.squaredNorm();
}

// Peak of the matched-filter envelope (analytic-signal magnitude).
Eigen::Index xcorr_lag(const Eigen::VectorXd& s, const Eigen::VectorXd& call) {
  const Eigen::Index n = s.size() - call.size() + 1;
  std::vector<double> r(n);
  for (Eigen::Index lag = 0; lag < n; ++lag) r[lag] = s.segment(lag, call.size()).dot(call);
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spectrum, analytic;
  fft.fwd(spectrum, r);
  for (Eigen::Index k = 1; k < n; ++k) spectrum[k] *= 2 * k < n ? 2.0 : 2 * k == n ? 1.0 : 0.0;
  fft.inv(analytic, spectrum);
  return std::max_element(analytic.begin(), analytic.end(),
                          [](auto a, auto b) { return std::abs(a) < std::abs(b); }) -
         analytic.begin();
}

}  // namespace

TEST_CASE("filter_ears: identical, unit, scaled banks") {
  const ImpulseResponseSet irs = random_irs(300, 4);
  ErtfFilterBank bank;
  bank.taps = Eigen::MatrixXd::Random(4, 12);
  const auto [l, r] = filter_ears(irs, bank, bank);
  CHECK(l == r);

  const ErtfFilterBank unit = selection_bank(4, {0, 1, 2, 3}, 1e6);
  const auto [ul, ur] = filter_ears(irs, unit, unit);
  CHECK((ul - irs.combined.rowwise().sum()).cwiseAbs().maxCoeff() < 1e-15);

  ErtfFilterBank twice = bank;
  twice.taps *= 2.0;
  const auto [dl, dr] = filter_ears(irs, twice, bank);
  CHECK((dl - 2.0 * dr).cwiseAbs().maxCoeff() < 1e-12);

  ErtfFilterBank wrong;
  wrong.taps = Eigen::MatrixXd::Ones(3, 2);
  CHECK_THROWS_AS(filter_ears(irs, wrong, bank), Error);
}

TEST_CASE("call: linear FM midpoint frequency") {
  const double fs = 1e6;
  const EmittedCall call = synthesize_call(CallKind::linear_fm, 100e3, 50e3, 2e-3, fs, Window::rectangular);
  REQUIRE(call.samples.size() == 2000);
  CHECK(call.samples.cwiseAbs().maxCoeff() == doctest::Approx(1.0));
  // Instantaneous frequency from the analytic phase difference of a quadrature pair.
  const EmittedCall quad = synthesize_call(CallKind::linear_fm, 100e3, 50e3, 2e-3, fs, Window::rectangular);
  const int m = 1000;
  double phase = 0.0;
  const int span = 20;
  for (int k = -span; k < span; ++k) {
    // Zero-crossing rate over a short window around the midpoint.
    if ((quad.samples(m + k) < 0) != (quad.samples(m + k + 1) < 0)) phase += oracle::pi;
  }
  const double f_zc = phase / (2.0 * oracle::pi) / (2.0 * span / fs);
  CHECK(f_zc == doctest::Approx(75e3).epsilon(0.1));

  // Sharper estimate: fit the local period between zero crossings.
  std::vector<double> crossings;
  for (int k = m - 60; k < m + 60; ++k) {
    const double a = call.samples(k), b = call.samples(k + 1);
    if ((a < 0) != (b < 0)) crossings.push_back(k + a / (a - b));
  }
  REQUIRE(crossings.size() >= 4);
  double best = 1e9;
  double f_mid = 0.0;
  for (std::size_t i = 0; i + 2 < crossings.size(); ++i) {
    const double centre = 0.5 * (crossings[i] + crossings[i + 2]);
    if (std::abs(centre - m) < best) {
      best = std::abs(centre - m);
      f_mid = fs / (crossings[i + 2] - crossings[i]);
    }
  }
  CHECK(f_mid == doctest::Approx(75e3).epsilon(0.01));
}

TEST_CASE("call: constant frequency peaks at its bin") {
  const double fs = 1e6;
  const EmittedCall call = synthesize_call(CallKind::cf, 80e3, 80e3, 1e-3, fs);
  const Eigen::VectorXcd spec = oracle::dft_half(call.samples);
  Eigen::Index k;
  spec.cwiseAbs().maxCoeff(&k);
  CHECK(k * fs / call.samples.size() == doctest::Approx(80e3).epsilon(1e-9));
}

TEST_CASE("call: hyperbolic FM sweeps between its end frequencies") {
  const double fs = 1e6;
  const EmittedCall call = synthesize_call(CallKind::hyperbolic_fm, 90e3, 30e3, 3e-3, fs, Window::rectangular);
  CHECK(call.f_low == 30e3);
  CHECK(call.f_high == 90e3);
  auto local_f = [&](Eigen::Index at) {
    std::vector<double> z;
    for (Eigen::Index k = at; k < at + 200 && z.size() < 3; ++k) {
      const double a = call.samples(k), b = call.samples(k + 1);
      if ((a < 0) != (b < 0)) z.push_back(k + a / (a - b));
    }
    return fs / (z[2] - z[0]);
  };
  CHECK(local_f(0) == doctest::Approx(90e3).epsilon(0.03));
  CHECK(local_f(call.samples.size() - 120) == doctest::Approx(30e3).epsilon(0.05));
  // Period grows linearly in time for a hyperbolic sweep.
  const double p0 = 1.0 / local_f(500), p1 = 1.0 / local_f(1500), p2 = 1.0 / local_f(2500);
  CHECK((p2 - p1) == doctest::Approx(p1 - p0).epsilon(0.05));
}

TEST_CASE("call: invalid band") {
  for (auto bad : {std::array<double, 3>{80e3, 40e3, 0.0}, std::array<double, 3>{0.0, 40e3, 1e-3},
                   std::array<double, 3>{80e3, 600e3, 1e-3}}) {
    try {
      synthesize_call(CallKind::linear_fm, bad[0], bad[1], bad[2], 1e6);
      FAIL("expected invalid_band");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::invalid_band);
    }
  }
}

TEST_CASE("receive: impulses shift and scale the call") {
  const EmittedCall call = synthesize_call(CallKind::linear_fm, 80e3, 40e3, 1e-3, 1e6);
  const int n = 4096;
  Eigen::VectorXd h = Eigen::VectorXd::Zero(n);
  h(37) = 1.0;
  const auto [s, s2] = receive(call, h, h, 1e6);
  REQUIRE(s.size() == n + call.samples.size() - 1);
  CHECK((s.segment(37, call.samples.size()) - call.samples).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(s.head(37).cwiseAbs().maxCoeff() < 1e-12);

  EmittedCall impulse = call;
  impulse.samples = Eigen::VectorXd::Unit(1, 0);
  const Eigen::VectorXd hr = Eigen::VectorXd::Random(n);
  const auto [same, other] = receive(impulse, hr, hr, 1e6);
  CHECK((same - hr).cwiseAbs().maxCoeff() < 1e-12);

  const double a = 0.7, b = -0.2;
  Eigen::VectorXd two = Eigen::VectorXd::Zero(n);
  two(100) = a;
  two(2500) = b;
  const auto [s3, s4] = receive(call, two, two, 1e6);
  const double pa = s3.segment(100, call.samples.size()).cwiseAbs().maxCoeff();
  const double pb = s3.segment(2500, call.samples.size()).cwiseAbs().maxCoeff();
  CHECK(std::abs(pa / pb - std::abs(a / b)) < 1e-9);
  const Eigen::VectorXd direct = oracle::convolve(two, call.samples);
  CHECK((s3 - direct).cwiseAbs().maxCoeff() < 1e-12);

  CHECK_THROWS_AS(receive(call, h, h, 500e3), Error);
}

TEST_CASE("end to end: delay, linearity, binaural symmetry") {
  SimParams params;
  params.n_rays = 60000;
  params.ir_length = 8192;
  params.band = Band{30e3, 90e3, 5e3};
  params.n_diffraction_points = 0;
  params.diffraction_gain = 0.0;
  const double d = 1.2;
  const double radius = 0.05;
  const PreparedObject sphere = prepare_object(primitives::icosphere(radius, 4), MaterialParams{},
                                               make_pose(Vec3(d + radius, 0, 0.0), Vec3::Zero()));
  const Scene scene = assemble_scene({sphere}, params.brdf_frequencies());

  SensorArray array;
  array.receivers.resize(4, 3);
  array.receivers << 0, 0.01, 0, 0, 0.012, 0.003, 0, -0.01, 0, 0, -0.012, 0.003;
  array.groups = {"left", "left", "right", "right"};
  const EarBanks ears = default_ears(array, params.sample_rate);
  const EmittedCall call = synthesize_call(CallKind::hyperbolic_fm, 80e3, 40e3, 1e-3, params.sample_rate);

  const SimulationResult r = simulate(scene, array, Pose(), params, ears, &call);
  const long expected = std::lround(2 * d / params.speed_of_sound * params.sample_rate);
  CHECK(std::abs(xcorr_lag(r.ears.s_left, call.samples) - expected) <= 1);

  EmittedCall loud = call;
  loud.samples *= 2.0;
  const SimulationResult r2 = simulate(scene, array, Pose(), params, ears, &loud);
  CHECK(r2.ears.s_left == 2.0 * r.ears.s_left);
  CHECK(r2.ears.s_right == 2.0 * r.ears.s_right);

  const double gap = relative_energy_gap(r.ears.s_left, r.ears.s_right);
  MESSAGE("binaural relative energy gap " << gap);
  CHECK(gap < 1e-6);
}

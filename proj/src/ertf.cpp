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

#include "echosim/ertf.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <unsupported/Eigen/FFT>

#include "echosim/error.hpp"
#include "echosim/parallel.hpp"
#include "echosim/spectral.hpp"

namespace echosim {

void DirectivityTarget::validate() const {
  if (directions.rows() < 1) throw Error(ErrorCode::invalid_argument, "target needs at least one direction");
  if (frequencies.size() < 1) throw Error(ErrorCode::invalid_argument, "target needs at least one frequency");
  if (gains.rows() != frequencies.size() || gains.cols() != directions.rows())
    throw Error(ErrorCode::invalid_argument, "target gains must be frequencies x directions");
  if (!gains.allFinite() || !directions.allFinite() || !frequencies.allFinite())
    throw Error(ErrorCode::invalid_argument, "target values must be finite");
  for (Eigen::Index f = 1; f < frequencies.size(); ++f)
    if (!(frequencies(f) > frequencies(f - 1)))
      throw Error(ErrorCode::invalid_argument, "target frequencies must be strictly increasing");
  if (frequencies(0) < 0.0) throw Error(ErrorCode::invalid_argument, "target frequencies must be >= 0");
  if (weights.size() != 0 && (weights.size() != directions.rows() || (weights.array() < 0.0).any()))
    throw Error(ErrorCode::invalid_argument, "target weights must be one non-negative value per direction");
}

double AnalyticPattern::gain(const Vec3& direction) const {
  const double c = std::clamp(direction.normalized().dot(axis.normalized()), -1.0, 1.0);
  switch (kind) {
    case PatternKind::omni: return 1.0;
    case PatternKind::cardioid_power: return std::pow(0.5 * (1.0 + c), exponent);
    case PatternKind::cosine_lobe: return std::pow(std::max(c, 0.0), exponent);
  }
  return 0.0;
}

PatternKind pattern_kind_from_string(const std::string& name) {
  if (name == "omni") return PatternKind::omni;
  if (name == "cardioid-power" || name == "cardioid") return PatternKind::cardioid_power;
  if (name == "cosine-lobe") return PatternKind::cosine_lobe;
  throw Error(ErrorCode::invalid_argument, "unknown pattern '" + name + "'");
}

std::string to_string(PatternKind kind) {
  switch (kind) {
    case PatternKind::omni: return "omni";
    case PatternKind::cardioid_power: return "cardioid-power";
    case PatternKind::cosine_lobe: return "cosine-lobe";
  }
  return "?";
}

DirectivityTarget make_target(const AnalyticPattern& pattern, const Points& directions,
                              const Eigen::VectorXd& frequencies) {
  DirectivityTarget t;
  t.directions = directions;
  t.frequencies = frequencies;
  t.gains.resize(frequencies.size(), directions.rows());
  for (Eigen::Index p = 0; p < directions.rows(); ++p) {
    const double g = pattern.gain(directions.row(p).transpose());
    t.gains.col(p).setConstant(g);
  }
  t.validate();
  return t;
}

DirectivityTarget load_target_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path.string());
  struct Row {
    double az, el, f;
    cplx g;
  };
  std::vector<Row> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> v;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        v.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        numeric = false;
        break;
      }
    }
    if (!numeric) {
      if (rows.empty() && line_no == 1) continue;  // header
      throw Error(ErrorCode::parse_error, path.string() + ":" + std::to_string(line_no) + ": non-numeric cell");
    }
    if (v.size() != 5)
      throw Error(ErrorCode::parse_error, path.string() + ":" + std::to_string(line_no) + ": expected 5 columns");
    rows.push_back({v[0], v[1], v[2], {v[3], v[4]}});
  }
  if (rows.empty()) throw Error(ErrorCode::parse_error, path.string() + ": no target rows");

  std::map<std::pair<double, double>, Eigen::Index> dir_index;
  std::vector<std::pair<double, double>> dirs;
  std::map<double, Eigen::Index> freq_index;
  for (const auto& r : rows) {
    if (dir_index.emplace(std::pair{r.az, r.el}, static_cast<Eigen::Index>(dirs.size())).second)
      dirs.emplace_back(r.az, r.el);
    freq_index.emplace(r.f, 0);
  }
  DirectivityTarget t;
  t.frequencies.resize(static_cast<Eigen::Index>(freq_index.size()));
  Eigen::Index k = 0;
  for (auto& [f, idx] : freq_index) {
    idx = k;
    t.frequencies(k++) = f;
  }
  t.directions.resize(static_cast<Eigen::Index>(dirs.size()), 3);
  for (std::size_t p = 0; p < dirs.size(); ++p) {
    const double az = deg2rad(dirs[p].first);
    const double el = deg2rad(dirs[p].second);
    t.directions.row(static_cast<Eigen::Index>(p)) << std::cos(el) * std::cos(az), std::cos(el) * std::sin(az),
        std::sin(el);
  }
  t.gains = Eigen::MatrixXcd::Constant(t.frequencies.size(), t.directions.rows(), cplx(NAN, NAN));
  for (const auto& r : rows) t.gains(freq_index.at(r.f), dir_index.at({r.az, r.el})) = r.g;
  if (!t.gains.allFinite())
    throw Error(ErrorCode::parse_error, path.string() + ": every direction needs a gain at every frequency");
  t.validate();
  return t;
}

Eigen::VectorXd ErtfFilterBank::effective_filter(Eigen::Index receiver) const {
  const Eigen::VectorXd h = taps.row(receiver).transpose();
  if (prefilters.empty()) return h;
  return convolve(prefilters[receiver], h);
}

cplx ErtfFilterBank::response(Eigen::Index receiver, double f) const {
  const Eigen::VectorXd h = effective_filter(receiver);
  const double w = -2.0 * kPi * f / sample_rate;
  cplx sum = 0.0;
  for (Eigen::Index t = 0; t < h.size(); ++t) sum += h(t) * std::polar(1.0, w * static_cast<double>(t - delay));
  return sum;
}

void ErtfFilterBank::validate() const {
  if (taps.rows() < 1 || taps.cols() < 1) throw Error(ErrorCode::invalid_argument, "filter bank is empty");
  if (!taps.allFinite()) throw Error(ErrorCode::invalid_argument, "filter taps must be finite");
  if (!(sample_rate > 0.0)) throw Error(ErrorCode::invalid_argument, "filter bank sample rate must be positive");
  if (!prefilters.empty() && static_cast<Eigen::Index>(prefilters.size()) != taps.rows())
    throw Error(ErrorCode::channel_mismatch, "need one prefilter per receiver");
}

ErtfFilterBank selection_bank(Eigen::Index receivers, const std::vector<int>& members, double sample_rate) {
  ErtfFilterBank bank;
  bank.taps = Eigen::MatrixXd::Zero(receivers, 1);
  for (int m : members) bank.taps(m, 0) = 1.0;
  bank.sample_rate = sample_rate;
  return bank;
}

Eigen::VectorXcd steering_vector(const SensorArray& array, const Vec3& direction, double f, double c) {
  const double k = 2.0 * kPi * f / c;
  Eigen::VectorXcd out(array.receivers.rows());
  for (Eigen::Index i = 0; i < array.receivers.rows(); ++i) {
    const Vec3 p = array.receivers.row(i).transpose() - array.emitter;
    out(i) = std::polar(1.0, -k * direction.dot(p));
  }
  return out;
}

Eigen::VectorXcd arrival_vector(const SensorArray& array, const Vec3& direction, double f, double c) {
  return steering_vector(array, -direction, f, c);
}

namespace {

// A(f): P x I, rows scaled by sqrt(weight).
Eigen::MatrixXcd weighted_arrival(const DirectivityTarget& target, const SensorArray& array, double f, double c,
                                  const Eigen::VectorXd& sqrt_w) {
  Eigen::MatrixXcd a(target.directions.rows(), array.receivers.rows());
  for (Eigen::Index p = 0; p < a.rows(); ++p)
    a.row(p) = sqrt_w(p) * arrival_vector(array, target.directions.row(p).transpose(), f, c).transpose();
  return a;
}

Eigen::VectorXd ridge_solve(const Eigen::MatrixXd& m, const Eigen::VectorXd& rhs, double mu) {
  if (mu == 0.0) {
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(m);
    if (cod.rank() < m.cols())
      throw Error(ErrorCode::singular_system, "rank-deficient least-squares system; raise lambda above 0");
    return cod.solve(rhs);
  }
  Eigen::MatrixXd normal = m.transpose() * m;
  normal.diagonal().array() += mu;
  return normal.ldlt().solve(m.transpose() * rhs);
}

Eigen::VectorXcd ridge_solve(const Eigen::MatrixXcd& m, const Eigen::VectorXcd& rhs, double mu) {
  if (mu == 0.0) {
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod(m);
    if (cod.rank() < m.cols())
      throw Error(ErrorCode::singular_system, "rank-deficient least-squares system; raise lambda above 0");
    return cod.solve(rhs);
  }
  Eigen::MatrixXcd normal = m.adjoint() * m;
  normal.diagonal().array() += mu;
  return normal.ldlt().solve(m.adjoint() * rhs);
}

}  // namespace

FitResult fit_fir_bank(const DirectivityTarget& target, const SensorArray& array, const FitOptions& options) {
  target.validate();
  array.validate();
  if (options.taps < 1) throw Error(ErrorCode::invalid_argument, "filter length must be >= 1");
  if (!(options.lambda >= 0.0)) throw Error(ErrorCode::invalid_argument, "lambda must be >= 0");
  if (!(options.sample_rate > 0.0) || !(options.speed_of_sound > 0.0))
    throw Error(ErrorCode::invalid_argument, "sample rate and speed of sound must be positive");
  if (target.frequencies(target.frequencies.size() - 1) > options.sample_rate / 2.0)
    throw Error(ErrorCode::invalid_argument, "target frequencies must not exceed fs / 2");

  const Eigen::Index ni = array.receivers.rows();
  const int nl = options.taps;
  const Eigen::Index nf = target.frequencies.size();
  const Eigen::Index half = nl / 2 + 1;
  const double c = options.speed_of_sound;
  const Eigen::VectorXd sqrt_w = target.weights.size() ? Eigen::VectorXd(target.weights.cwiseSqrt())
                                                        : Eigen::VectorXd::Ones(target.directions.rows());

  double lambda = options.lambda;
  if (options.mode == Regularization::trace_normalized) {
    // Arrival vectors have unit modulus, so trace(A^H W A) / I = sum(w).
    lambda *= sqrt_w.squaredNorm();
  }

  // Position of each target frequency on the L-point DFT grid.
  std::vector<Eigen::Index> bin(nf, -1);
  for (Eigen::Index f = 0; f < nf; ++f) {
    const double pos = target.frequencies(f) * nl / options.sample_rate;
    const double k = std::round(pos);
    if (std::abs(pos - k) < 1e-9 && k < static_cast<double>(half)) bin[f] = static_cast<Eigen::Index>(k);
  }

  Eigen::MatrixXcd solved(nf, ni);
  parallel_for(static_cast<std::size_t>(nf), options.workers, [&](std::size_t fi) {
    const auto f = static_cast<Eigen::Index>(fi);
    const Eigen::MatrixXcd a = weighted_arrival(target, array, target.frequencies(f), c, sqrt_w);
    const Eigen::VectorXcd e = sqrt_w.cwiseProduct(target.gains.row(f).transpose());
    const bool edge = bin[f] == 0 || (nl % 2 == 0 && bin[f] == nl / 2);
    const double mu = lambda * (edge ? 1.0 : 2.0) / nl;
    if (edge) {
      // Real taps force a real response at DC and Nyquist.
      Eigen::MatrixXd m(2 * a.rows(), ni);
      m << a.real(), a.imag();
      Eigen::VectorXd rhs(2 * e.size());
      rhs << e.real(), e.imag();
      solved.row(f) = ridge_solve(m, rhs, mu).cast<cplx>().transpose();
    } else {
      solved.row(f) = ridge_solve(a, e, mu).transpose();
    }
  });

  // One-sided response on the DFT grid; bins outside the target stay zero.
  Eigen::MatrixXcd grid = Eigen::MatrixXcd::Zero(half, ni);
  std::vector<bool> filled(half, false);
  for (Eigen::Index f = 0; f < nf; ++f) {
    if (bin[f] < 0) continue;
    grid.row(bin[f]) = solved.row(f);
    filled[bin[f]] = true;
  }
  const double f_lo = target.frequencies(0);
  const double f_hi = target.frequencies(nf - 1);
  for (Eigen::Index k = 0; k < half; ++k) {
    if (filled[k]) continue;
    const double fk = k * options.sample_rate / nl;
    if (fk < f_lo || fk > f_hi) continue;
    const double* fr = target.frequencies.data();
    const Eigen::Index hi = std::upper_bound(fr, fr + nf, fk) - fr;
    if (hi == 0 || hi >= nf) {
      grid.row(k) = solved.row(hi == 0 ? 0 : nf - 1);
    } else {
      const double t = (fk - fr[hi - 1]) / (fr[hi] - fr[hi - 1]);
      grid.row(k) = (1.0 - t) * solved.row(hi - 1) + t * solved.row(hi);
    }
    if (k == 0 || (nl % 2 == 0 && k == nl / 2)) grid.row(k) = grid.row(k).real().cast<cplx>();
  }

  FitResult result;
  result.lambda = lambda;
  ErtfFilterBank& bank = result.bank;
  bank.sample_rate = options.sample_rate;
  bank.delay = nl / 2;
  bank.taps.resize(ni, nl);
  Eigen::FFT<double> fft;
  for (Eigen::Index i = 0; i < ni; ++i) {
    Eigen::VectorXcd full(nl);
    for (Eigen::Index k = 0; k < half; ++k) full(k) = grid(k, i);
    for (Eigen::Index k = half; k < nl; ++k) full(k) = std::conj(grid(nl - k, i));
    Eigen::VectorXcd g;
    fft.inv(g, full);
    // g(t) = h(t + delay) circularly.
    for (int t = 0; t < nl; ++t) bank.taps(i, t) = g((t - bank.delay + nl) % nl).real();
  }
  const Objective obj = fit_objective(bank, target, array, c, lambda);
  result.residual = obj.residual;
  result.objective = obj.objective;
  return result;
}

Eigen::MatrixXcd evaluate_realized_pattern(const ErtfFilterBank& bank, const SensorArray& array,
                                           const Points& directions, const Eigen::VectorXd& frequencies, double c) {
  if (bank.receiver_count() != array.receivers.rows())
    throw Error(ErrorCode::channel_mismatch, "bank and array receiver counts differ");
  Eigen::MatrixXcd out(frequencies.size(), directions.rows());
  for (Eigen::Index f = 0; f < frequencies.size(); ++f) {
    Eigen::VectorXcd w(bank.receiver_count());
    for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = bank.response(i, frequencies(f));
    for (Eigen::Index p = 0; p < directions.rows(); ++p)
      out(f, p) = arrival_vector(array, directions.row(p).transpose(), frequencies(f), c).cwiseProduct(w).sum();
  }
  return out;
}

Objective fit_objective(const ErtfFilterBank& bank, const DirectivityTarget& target, const SensorArray& array,
                        double c, double lambda) {
  const Eigen::MatrixXcd realized =
      evaluate_realized_pattern(bank, array, target.directions, target.frequencies, c);
  Eigen::ArrayXXd err = (realized - target.gains).cwiseAbs2().array();
  if (target.weights.size()) err.rowwise() *= target.weights.transpose().array();
  Objective o;
  o.residual = err.sum();
  double energy = 0.0;
  for (Eigen::Index i = 0; i < bank.receiver_count(); ++i) energy += bank.effective_filter(i).squaredNorm();
  o.objective = o.residual + lambda * energy;
  return o;
}

Eigen::VectorXd apply_filter_bank(const ErtfFilterBank& bank, const Eigen::MatrixXd& channels) {
  bank.validate();
  if (channels.cols() != bank.receiver_count())
    throw Error(ErrorCode::channel_mismatch, "signal has " + std::to_string(channels.cols()) + " channels, bank has " +
                                                 std::to_string(bank.receiver_count()));
  Eigen::Index length = 0;
  std::vector<Eigen::VectorXd> filters(bank.receiver_count());
  for (Eigen::Index i = 0; i < bank.receiver_count(); ++i) {
    filters[i] = bank.effective_filter(i);
    length = std::max(length, filters[i].size());
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(channels.rows() + length - 1);
  for (Eigen::Index i = 0; i < bank.receiver_count(); ++i) {
    if (filters[i].isZero(0.0)) continue;
    const Eigen::VectorXd y = convolve(channels.col(i), filters[i]);
    out.head(y.size()) += y;
  }
  return out;
}

namespace {

template <typename T>
void put_le(std::ostream& out, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get_le(std::istream& in, const std::filesystem::path& path) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T)))
    throw Error(ErrorCode::parse_error, path.string() + ": truncated filter bank");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

void save_filter_bank(const std::filesystem::path& path, const ErtfFilterBank& bank) {
  bank.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string());
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(bank.receiver_count()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(bank.length()));
  put_le<double>(out, bank.sample_rate);
  for (Eigen::Index i = 0; i < bank.receiver_count(); ++i)
    for (Eigen::Index t = 0; t < bank.length(); ++t) put_le<double>(out, bank.taps(i, t));
  if (!out) throw Error(ErrorCode::io_error, "write failed for " + path.string());
}

ErtfFilterBank load_filter_bank(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path.string());
  ErtfFilterBank bank;
  const auto ni = get_le<std::uint32_t>(in, path);
  const auto nl = get_le<std::uint32_t>(in, path);
  bank.sample_rate = get_le<double>(in, path);
  if (ni == 0 || nl == 0) throw Error(ErrorCode::parse_error, path.string() + ": empty filter bank");
  bank.taps.resize(ni, nl);
  for (std::uint32_t i = 0; i < ni; ++i)
    for (std::uint32_t t = 0; t < nl; ++t) bank.taps(i, t) = get_le<double>(in, path);
  if (in.peek() != std::char_traits<char>::eof())
    throw Error(ErrorCode::parse_error, path.string() + ": trailing bytes after filter taps");
  bank.delay = static_cast<int>(nl / 2);
  bank.validate();
  return bank;
}

}  // namespace echosim

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

#include "echosim/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "echosim/error.hpp"

namespace echosim {

namespace {

template <typename T>
void put(std::ostream& out, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get(const std::string& data, std::size_t offset) {
  if (offset + sizeof(T) > data.size()) throw Error(ErrorCode::parse_error, "truncated WAV file");
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, data.data() + offset, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

void write_wav(const std::filesystem::path& path, const Eigen::VectorXd& samples, double sample_rate) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string());
  const auto rate = static_cast<std::uint32_t>(std::llround(sample_rate));
  const auto data_bytes = static_cast<std::uint32_t>(samples.size() * 4);
  out.write("RIFF", 4);
  put<std::uint32_t>(out, 4 + 26 + 12 + 8 + data_bytes);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  put<std::uint32_t>(out, 18);
  put<std::uint16_t>(out, 3);  // IEEE float
  put<std::uint16_t>(out, 1);
  put<std::uint32_t>(out, rate);
  put<std::uint32_t>(out, rate * 4);
  put<std::uint16_t>(out, 4);
  put<std::uint16_t>(out, 32);
  put<std::uint16_t>(out, 0);
  out.write("fact", 4);
  put<std::uint32_t>(out, 4);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(samples.size()));
  out.write("data", 4);
  put<std::uint32_t>(out, data_bytes);
  for (Eigen::Index i = 0; i < samples.size(); ++i) put<float>(out, static_cast<float>(samples(i)));
  if (!out) throw Error(ErrorCode::io_error, "write failed for " + path.string());
}

WavData read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path.string());
  const std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (data.size() < 12 || data.compare(0, 4, "RIFF") != 0 || data.compare(8, 4, "WAVE") != 0)
    throw Error(ErrorCode::parse_error, path.string() + ": not a WAV file");
  WavData wav;
  std::uint16_t format = 0, bits = 0, channels = 0;
  std::size_t pos = 12;
  while (pos + 8 <= data.size()) {
    const std::string id = data.substr(pos, 4);
    const auto size = get<std::uint32_t>(data, pos + 4);
    const std::size_t body = pos + 8;
    if (id == "fmt ") {
      format = get<std::uint16_t>(data, body);
      channels = get<std::uint16_t>(data, body + 2);
      wav.sample_rate = get<std::uint32_t>(data, body + 4);
      bits = get<std::uint16_t>(data, body + 14);
    } else if (id == "data") {
      if (format != 3 || bits != 32 || channels != 1)
        throw Error(ErrorCode::parse_error, path.string() + ": only mono float32 WAV is supported");
      wav.samples.resize(size / 4);
      for (std::uint32_t i = 0; i < size / 4; ++i) wav.samples(i) = get<float>(data, body + 4 * i);
      return wav;
    }
    pos = body + size + (size & 1);
  }
  throw Error(ErrorCode::parse_error, path.string() + ": no data chunk");
}

void write_matrix_csv(const std::filesystem::path& path, const std::string& axis_label, const Eigen::VectorXd& axis,
                      const std::vector<std::string>& columns, const Eigen::MatrixXd& values) {
  if (values.rows() != axis.size() || values.cols() != static_cast<Eigen::Index>(columns.size()))
    throw Error(ErrorCode::invalid_argument, "CSV shape does not match its labels");
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string());
  out << axis_label;
  for (const auto& c : columns) out << ',' << c;
  out << '\n' << std::setprecision(17);
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    out << axis(r);
    for (Eigen::Index c = 0; c < values.cols(); ++c) out << ',' << values(r, c);
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::io_error, "write failed for " + path.string());
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << h;
  return s.str();
}

}  // namespace echosim

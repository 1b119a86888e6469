// Copyright 2026 The CCL Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <type_traits>
#include <unordered_map>
#include <vector>

namespace ccl {

template <typename T>
using MatrixX = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using VectorX = Eigen::Matrix<T, Eigen::Dynamic, 1>;
template <typename T>
using RowVectorX = Eigen::Matrix<T, 1, Eigen::Dynamic>;

using MatrixF = MatrixX<float>;
using MatrixD = MatrixX<double>;

/// One cluster id per sample. Contiguous ids start at 0.
using Labels = std::vector<int>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by file readers; the message names the file and the offending row.
class FormatError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Random numbers
//
// std::uniform_int_distribution and friends are implementation-defined, so
// every sampling decision goes through these helpers on top of the
// fully-specified mt19937_64 engine. Same seed, same stream, any platform.

using Rng = std::mt19937_64;

/// Uniform integer in [0, bound). Lemire's multiply-shift with rejection.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t bound) {
  if (bound == 0) throw Error("uniform_index: empty range");
  std::uint64_t x = rng();
  __uint128_t m = static_cast<__uint128_t>(x) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      x = rng();
      m = static_cast<__uint128_t>(x) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform_real(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Standard normal via Box-Muller (no cached second value).
inline double standard_normal(Rng& rng) {
  double u1 = uniform_real(rng);
  while (u1 <= 0.0) u1 = uniform_real(rng);
  const double u2 = uniform_real(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_index(rng, i));
    std::swap(v[i - 1], v[j]);
  }
}

// ---------------------------------------------------------------------------
// Little-endian binary helpers

namespace detail {

template <typename T>
T byteswap_value(T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  std::reverse(bytes, bytes + sizeof(T));
  std::memcpy(&v, bytes, sizeof(T));
  return v;
}

template <typename T>
void write_le(std::ostream& out, T value) {
  if constexpr (std::endian::native == std::endian::big) value = byteswap_value(value);
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
bool read_le(std::istream& in, T& value) {
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (in.gcount() != static_cast<std::streamsize>(sizeof(T))) return false;
  if constexpr (std::endian::native == std::endian::big) value = byteswap_value(value);
  return true;
}

template <typename T>
void write_le_array(std::ostream& out, const T* data, std::size_t count) {
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * sizeof(T)));
  } else {
    for (std::size_t i = 0; i < count; ++i) write_le(out, data[i]);
  }
}

template <typename T>
bool read_le_array(std::istream& in, T* data, std::size_t count) {
  const auto bytes = static_cast<std::streamsize>(count * sizeof(T));
  in.read(reinterpret_cast<char*>(data), bytes);
  if (in.gcount() != bytes) return false;
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < count; ++i) data[i] = byteswap_value(data[i]);
  }
  return true;
}

/// Runs fn(begin, end) over [0, count) in contiguous chunks, one thread per
/// chunk group. Each index is owned by exactly one chunk so results do not
/// depend on scheduling.
template <typename Fn>
void parallel_chunks(std::size_t count, std::size_t chunk, Fn&& fn) {
  if (count == 0) return;
  const std::size_t num_chunks = (count + chunk - 1) / chunk;
  std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, num_chunks);
  if (workers <= 1) {
    for (std::size_t c = 0; c < num_chunks; ++c) fn(c * chunk, std::min(count, (c + 1) * chunk));
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t c = w; c < num_chunks; c += workers) fn(c * chunk, std::min(count, (c + 1) * chunk));
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Label helpers

/// Renumbers arbitrary integer ids to 0..K-1 in order of first occurrence.
inline Labels relabel_contiguous(const Labels& labels) {
  std::unordered_map<int, int> remap;
  Labels out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto [it, inserted] = remap.try_emplace(labels[i], static_cast<int>(remap.size()));
    out[i] = it->second;
  }
  return out;
}

inline int count_clusters(const Labels& labels) {
  int max_label = -1;
  for (int l : labels) max_label = std::max(max_label, l);
  return max_label + 1;
}

/// Members of each cluster, ascending sample index. Requires contiguous labels.
inline std::vector<std::vector<int>> cluster_members(const Labels& labels) {
  std::vector<std::vector<int>> members(static_cast<std::size_t>(count_clusters(labels)));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0) throw Error("cluster_members: negative label at row " + std::to_string(i));
    members[static_cast<std::size_t>(labels[i])].push_back(static_cast<int>(i));
  }
  return members;
}

}  // namespace ccl

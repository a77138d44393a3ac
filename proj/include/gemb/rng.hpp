// Copyright (C) 2026 The gemb authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License"); you may not use this file except in compliance
// with the License. You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software distributed under the License
// is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express
// or implied. See the License for the specific language governing permissions and limitations under the License

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace gemb::rng {

// Derives an independent stream seed from a master seed and a stream name
// (FNV-1a over the seed bytes and the name). All commands draw their
// randomness from named sub-streams of one master seed.
inline uint64_t derive_seed(uint64_t master, std::string_view stream) {
  uint64_t h = 14695981039346656037ull;
  auto mix = [&h](uint8_t byte) {
    h ^= byte;
    h *= 1099511628211ull;
  };
  for (int i = 0; i < 8; ++i) mix(static_cast<uint8_t>(master >> (8 * i)));
  for (char c : stream) mix(static_cast<uint8_t>(c));
  return h;
}

inline std::mt19937_64 engine(uint64_t seed) { return std::mt19937_64(seed); }

// Uniform double in [0, 1) with 53 random bits. Hand-rolled instead of
// std::uniform_real_distribution, whose output is implementation-defined.
inline double uniform01(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, n). Modulo bias is ~n/2^64, irrelevant here.
inline uint64_t bounded(std::mt19937_64& gen, uint64_t n) { return gen() % n; }

// Standard normal via Box-Muller. One variate per call, two engine draws.
inline double standard_normal(std::mt19937_64& gen) {
  double u1 = 1.0 - uniform01(gen);  // (0, 1]
  double u2 = uniform01(gen);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

template <typename T>
void shuffle(std::vector<T>& values, std::mt19937_64& gen) {
  for (size_t i = values.size(); i > 1; --i) {
    size_t j = static_cast<size_t>(bounded(gen, i));
    std::swap(values[i - 1], values[j]);
  }
}

inline Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& gen) {
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = standard_normal(gen);
  return out;
}

}  // namespace gemb::rng

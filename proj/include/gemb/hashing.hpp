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

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace gemb {

/// Packed binary codes, row-major in 64-bit words. Bit j of a row lives in
/// word j/64 at position j%64; bits past n_bits in the last word are zero.
struct BinaryCodes {
  std::vector<uint64_t> words;
  int64_t n_rows = 0;
  int n_bits = 0;

  int words_per_row() const { return (n_bits + 63) / 64; }

  std::span<const uint64_t> row(int64_t i) const {
    return {words.data() + i * words_per_row(), static_cast<size_t>(words_per_row())};
  }

  bool bit(int64_t row_index, int bit_index) const {
    const uint64_t word = words[row_index * words_per_row() + bit_index / 64];
    return (word >> (bit_index % 64)) & 1u;
  }
};

struct ItqModel {
  Eigen::VectorXd mean;            // input_dim
  Eigen::MatrixXd pca_projection;  // input_dim x n_bits, orthonormal columns
  Eigen::MatrixXd rotation;        // n_bits x n_bits, orthogonal
  int n_bits = 0;
};

struct LshModel {
  Eigen::VectorXd mean;         // input_dim
  Eigen::MatrixXd hyperplanes;  // input_dim x n_bits, seeded standard normal
  int n_bits = 0;
};

/// Per-iteration diagnostics of the ITQ alternation.
struct ItqTrainLog {
  std::vector<double> losses;                  // ||B - V R||^2 after each iteration
  std::vector<double> rotation_orthogonality;  // max |R^T R - I| after each iteration
};

// Iterative quantization: center, project to the top n_bits principal
// directions, then alternate B = sign(V R) with the orthogonal Procrustes
// update R = Sbar * Shat^T for B^T V = Shat * Omega * Sbar^T. The
// quantization loss is non-increasing across iterations. The initial
// rotation is the Q factor of a seeded Gaussian matrix.
ItqModel fit_itq(const Eigen::MatrixXd& x, int n_bits, int n_iters, uint64_t seed,
                 ItqTrainLog* log = nullptr);

// Random-hyperplane baseline: centered dot products against seeded
// standard-normal directions.
LshModel fit_lsh(const Eigen::MatrixXd& x, int n_bits, uint64_t seed);

// Bit j of row t is 1 iff the projected coordinate is >= 0 (ties to 1).
BinaryCodes encode(const ItqModel& model, const Eigen::MatrixXd& x);
BinaryCodes encode(const LshModel& model, const Eigen::MatrixXd& x);

// Popcount of XOR across packed words. Word counts must match.
int hamming_distance(std::span<const uint64_t> a, std::span<const uint64_t> b);

// Same, with an n_bits equality check between the two code sets.
int hamming_distance(const BinaryCodes& a, int64_t row_a, const BinaryCodes& b, int64_t row_b);

// Code file: magic "GEMC", u32 LE version = 1, u64 LE m, u64 LE b, then
// m rows of ceil(b/64) u64 LE words.
void save_codes(const std::string& path, const BinaryCodes& codes);
BinaryCodes load_codes(const std::string& path);

}  // namespace gemb

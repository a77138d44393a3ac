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
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace gemb {

/// A descriptor matrix: one sample per row, optionally with class labels.
/// Immutable by convention after construction/validation.
struct FeatureMatrix {
  Eigen::MatrixXd data;                    // m x d
  std::optional<std::vector<int>> labels;  // size m when present, ids >= 0

  Eigen::Index rows() const { return data.rows(); }
  Eigen::Index cols() const { return data.cols(); }
  bool has_labels() const { return labels.has_value(); }
};

// Checks m >= 1, d >= 1, all entries finite, labels consistent.
// Throws DataError (bad values, reported with row/column) or ShapeError.
void validate(const FeatureMatrix& x);

enum class FileFormat { kBinary, kCsv };

// Binary layout: magic "GEMB", u32 LE version = 1, u64 LE m, u64 LE d,
// then m*d float32 LE values row-major. CSV: one row per line, comma
// separated. Both paths validate the result.
FeatureMatrix load_features(const std::string& path, FileFormat format);

// Writes the canonical binary format (float32 payload).
void save_features(const std::string& path, const FeatureMatrix& x);

// Label sidecar: one non-negative decimal integer per line, exactly one
// line per sample.
std::vector<int> load_labels(const std::string& path, Eigen::Index expected_rows);
void save_labels(const std::string& path, const std::vector<int>& labels);

struct SplitSpec {
  double query_fraction = 0.1;  // in (0, 1)
  uint64_t seed = 0;
  bool stratified = true;
};

struct Split {
  FeatureMatrix query;
  FeatureMatrix database;
  std::vector<Eigen::Index> query_indices;  // ascending, disjoint from db_indices
  std::vector<Eigen::Index> db_indices;     // ascending; union covers all rows
};

// Partitions x into query/database rows. Stratified mode draws
// round-half-up(query_fraction * count) samples per class, at least one.
// Deterministic given spec.seed.
Split split(const FeatureMatrix& x, const SplitSpec& spec);

}  // namespace gemb

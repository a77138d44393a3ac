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

#include "gemb/dataset.hpp"
#include "gemb/eval.hpp"
#include "gemb/gmm.hpp"

namespace gemb {

enum class HasherKind { kItq, kLsh, kNone };

/// Everything one end-to-end run needs. Serializes to a flat key=value
/// text file; parse(serialize(c)) == c.
struct PipelineConfig {
  double gamma = 0.85;
  double alpha = 0.15;
  int n_components = 0;  // 0 = auto: equal to n_bits
  CovarianceKind covariance = CovarianceKind::kFull;
  int n_bits = 32;
  HasherKind hasher = HasherKind::kItq;

  int em_max_iters = 200;
  double em_tol = 1e-5;
  std::optional<double> em_reg_covar;  // unset = auto
  int em_n_init = 3;
  int itq_iters = 50;

  double query_fraction = 0.1;
  bool stratified = true;
  bool fit_on_database_only = true;  // false: fit embedding on all rows

  int64_t eval_k = 1000;
  int eval_r = 2;
  std::optional<int64_t> map_cutoff;
  int trials = 5;
  uint64_t seed = 1;

  int resolved_components() const { return n_components > 0 ? n_components : n_bits; }

  bool operator==(const PipelineConfig&) const = default;
};

PipelineConfig parse_config(const std::string& text);
PipelineConfig load_config(const std::string& path);
std::string serialize_config(const PipelineConfig& cfg);

const char* to_string(HasherKind kind);
const char* to_string(CovarianceKind kind);

struct PipelineOptions {
  bool run_baseline = false;   // also run the hasher on raw descriptors
  std::string artifacts_dir;   // when set, persist per-trial intermediates
};

struct PipelineResult {
  EvalReport report;                    // embedding + hasher
  std::optional<EvalReport> baseline;   // hasher only, same splits
};

// Per trial t (seed + t): split -> fit embedding on the database rows ->
// embed both sides -> fit hasher on database embeddings -> encode ->
// evaluate. Sub-stage seeds come from named sub-streams of the trial seed.
// Requires labels. hasher == kNone only makes sense with artifacts_dir
// (embeddings are written, retrieval is skipped).
PipelineResult run_pipeline(const FeatureMatrix& data, const PipelineConfig& cfg,
                            const PipelineOptions& options = {});

}  // namespace gemb

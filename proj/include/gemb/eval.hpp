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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gemb/hashing.hpp"

namespace gemb {

/// Database codes plus their ground-truth class labels.
struct RetrievalIndex {
  BinaryCodes codes;
  std::vector<int> labels;  // size codes.n_rows
};

// Database indices sorted by ascending Hamming distance to the query row;
// ties broken by ascending index (counting sort, so fully deterministic).
std::vector<int64_t> rank_by_hamming(const RetrievalIndex& index, const BinaryCodes& queries,
                                     int64_t query_row);

// AP = (1/R) * sum over relevant positions i of (relevant in top i)/i,
// with R the number of relevant items in the sequence. 0 when R == 0.
double average_precision(const std::vector<bool>& ranked_relevance);

// AP over the first `cutoff` positions, normalized by min(R, cutoff).
double average_precision_at(const std::vector<bool>& ranked_relevance, int64_t cutoff);

// Fraction of database items within Hamming radius r that share
// query_label; 0 when nothing falls within the radius.
double precision_at_radius(const RetrievalIndex& index, const BinaryCodes& queries,
                           int64_t query_row, int query_label, int radius);

// Fraction of the top-min(k, m) ranked items sharing query_label.
double precision_at_k(const RetrievalIndex& index, const BinaryCodes& queries, int64_t query_row,
                      int query_label, int64_t k);

struct EvalOptions {
  int64_t k = 1000;                 // precision@k depth
  int radius = 2;                   // precision@r radius
  std::optional<int64_t> map_cutoff;  // when set, mAP over the top cutoff only
};

struct ClassMetrics {
  double map = 0.0;     // percent
  double p_at_k = 0.0;  // percent
  double p_at_r = 0.0;  // percent
  int64_t n_queries = 0;
};

/// Metrics of one evaluation pass. Class-averaged values weight every
/// class equally regardless of its query count.
struct TrialResult {
  std::map<int, ClassMetrics> per_class;
  double map = 0.0;
  double p_at_k = 0.0;
  double p_at_r = 0.0;
  std::vector<int> missing_classes;  // query classes absent from the database
};

TrialResult evaluate(const RetrievalIndex& index, const BinaryCodes& queries,
                     const std::vector<int>& query_labels, const EvalOptions& options);

struct EvalReport {
  std::vector<TrialResult> trials;
  double map = 0.0;     // mean over trials, percent
  double p_at_k = 0.0;
  double p_at_r = 0.0;
  int64_t k = 1000;
  int radius = 2;
};

EvalReport aggregate_trials(std::vector<TrialResult> trials, int64_t k, int radius);

// Stable key=value sections: [summary], then [trial.i] and
// [trial.i.class.c] blocks.
std::string format_report(const EvalReport& report);

// Tab-separated rows (trial, class, map, precision_at_k, precision_at_r)
// for plotting; class "all" carries the class-averaged values.
std::string format_report_table(const EvalReport& report);

}  // namespace gemb

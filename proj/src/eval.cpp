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

#include "gemb/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "gemb/error.hpp"

namespace gemb {

namespace {

// Fixed-width decimal for report output; metrics are percentages so four
// fractional digits keep full comparison resolution.
std::string fmt(double v) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(4);
  os << v;
  return os.str();
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_stddev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double mu = mean_of(v);
  double acc = 0.0;
  for (double x : v) acc += (x - mu) * (x - mu);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

void check_query(const RetrievalIndex& index, const BinaryCodes& queries, int64_t query_row) {
  if (index.codes.n_bits != queries.n_bits)
    throw ShapeError("database and query code lengths differ: " +
                     std::to_string(index.codes.n_bits) + " vs " +
                     std::to_string(queries.n_bits));
  if (static_cast<int64_t>(index.labels.size()) != index.codes.n_rows)
    throw ShapeError("database label count does not match code count");
  if (query_row < 0 || query_row >= queries.n_rows)
    throw ShapeError("query row " + std::to_string(query_row) + " out of range");
}

std::vector<int> query_distances(const RetrievalIndex& index, const BinaryCodes& queries,
                                 int64_t query_row) {
  const auto query = queries.row(query_row);
  std::vector<int> distances(static_cast<size_t>(index.codes.n_rows));
  for (int64_t i = 0; i < index.codes.n_rows; ++i)
    distances[static_cast<size_t>(i)] = hamming_distance(index.codes.row(i), query);
  return distances;
}

// Counting sort over the bounded distance range keeps ranking O(m + b) and
// makes the tie rule explicit: buckets fill in row order, so equal
// distances come out ascending by database index.
std::vector<int64_t> rank_distances(const std::vector<int>& distances, int n_bits) {
  std::vector<int64_t> counts(static_cast<size_t>(n_bits) + 2, 0);
  for (int d : distances) ++counts[static_cast<size_t>(d) + 1];
  for (size_t d = 1; d < counts.size(); ++d) counts[d] += counts[d - 1];
  std::vector<int64_t> order(distances.size());
  for (size_t i = 0; i < distances.size(); ++i) {
    int64_t& slot = counts[static_cast<size_t>(distances[i])];
    order[static_cast<size_t>(slot)] = static_cast<int64_t>(i);
    ++slot;
  }
  return order;
}

double radius_precision(const std::vector<int>& distances, const std::vector<int>& labels,
                        int query_label, int radius) {
  int64_t retrieved = 0;
  int64_t relevant = 0;
  for (size_t i = 0; i < distances.size(); ++i) {
    if (distances[i] > radius) continue;
    ++retrieved;
    relevant += labels[i] == query_label ? 1 : 0;
  }
  // An empty ball counts as zero precision rather than being skipped: a
  // query that retrieves nothing is a retrieval failure, not a no-op.
  if (retrieved == 0) return 0.0;
  return static_cast<double>(relevant) / static_cast<double>(retrieved);
}

double top_k_precision(const std::vector<bool>& ranked_relevance, int64_t k) {
  const size_t n = std::min<size_t>(ranked_relevance.size(), static_cast<size_t>(k));
  int64_t relevant = 0;
  for (size_t i = 0; i < n; ++i) relevant += ranked_relevance[i] ? 1 : 0;
  return n == 0 ? 0.0 : static_cast<double>(relevant) / static_cast<double>(n);
}

}  // namespace

std::vector<int64_t> rank_by_hamming(const RetrievalIndex& index, const BinaryCodes& queries,
                                     int64_t query_row) {
  check_query(index, queries, query_row);
  return rank_distances(query_distances(index, queries, query_row), index.codes.n_bits);
}

double average_precision(const std::vector<bool>& ranked_relevance) {
  int64_t total_relevant = 0;
  for (bool r : ranked_relevance) total_relevant += r ? 1 : 0;
  if (total_relevant == 0) return 0.0;
  double acc = 0.0;
  int64_t hits = 0;
  for (size_t i = 0; i < ranked_relevance.size(); ++i) {
    if (!ranked_relevance[i]) continue;
    ++hits;
    acc += static_cast<double>(hits) / static_cast<double>(i + 1);
  }
  return acc / static_cast<double>(total_relevant);
}

double average_precision_at(const std::vector<bool>& ranked_relevance, int64_t cutoff) {
  if (cutoff < 1) throw ShapeError("AP cutoff must be >= 1");
  int64_t total_relevant = 0;
  for (bool r : ranked_relevance) total_relevant += r ? 1 : 0;
  if (total_relevant == 0) return 0.0;
  const size_t n = std::min<size_t>(ranked_relevance.size(), static_cast<size_t>(cutoff));
  double acc = 0.0;
  int64_t hits = 0;
  for (size_t i = 0; i < n; ++i) {
    if (!ranked_relevance[i]) continue;
    ++hits;
    acc += static_cast<double>(hits) / static_cast<double>(i + 1);
  }
  // min(R, cutoff) normalizer: a perfect ranking scores 1 even when more
  // relevant items exist than the cutoff can hold.
  return acc / static_cast<double>(std::min<int64_t>(total_relevant, cutoff));
}

double precision_at_radius(const RetrievalIndex& index, const BinaryCodes& queries,
                           int64_t query_row, int query_label, int radius) {
  if (radius < 0) throw ShapeError("radius must be >= 0");
  check_query(index, queries, query_row);
  return radius_precision(query_distances(index, queries, query_row), index.labels, query_label,
                          radius);
}

double precision_at_k(const RetrievalIndex& index, const BinaryCodes& queries, int64_t query_row,
                      int query_label, int64_t k) {
  if (k < 1) throw ShapeError("k must be >= 1");
  check_query(index, queries, query_row);
  const auto distances = query_distances(index, queries, query_row);
  const auto order = rank_distances(distances, index.codes.n_bits);
  std::vector<bool> relevance(order.size());
  for (size_t rank = 0; rank < order.size(); ++rank)
    relevance[rank] = index.labels[static_cast<size_t>(order[rank])] == query_label;
  return top_k_precision(relevance, k);
}

TrialResult evaluate(const RetrievalIndex& index, const BinaryCodes& queries,
                     const std::vector<int>& query_labels, const EvalOptions& options) {
  if (index.codes.n_rows < 1) throw DataError("empty database");
  if (queries.n_rows < 1) throw DataError("empty query set");
  if (index.codes.n_bits != queries.n_bits)
    throw ShapeError("database and query code lengths differ");
  if (static_cast<int64_t>(index.labels.size()) != index.codes.n_rows)
    throw ShapeError("database label count does not match code count");
  if (static_cast<int64_t>(query_labels.size()) != queries.n_rows)
    throw ShapeError("query label count does not match code count");
  if (options.radius < 0) throw ConfigError("radius must be >= 0");
  if (options.k < 1) throw ConfigError("k must be >= 1");

  struct Accum {
    std::vector<double> ap, p_k, p_r;
  };
  std::map<int, Accum> per_class;

  std::vector<bool> relevance(static_cast<size_t>(index.codes.n_rows));
  for (int64_t q = 0; q < queries.n_rows; ++q) {
    const auto distances = query_distances(index, queries, q);
    const auto order = rank_distances(distances, index.codes.n_bits);
    const int label = query_labels[static_cast<size_t>(q)];
    for (size_t rank = 0; rank < order.size(); ++rank)
      relevance[rank] = index.labels[static_cast<size_t>(order[rank])] == label;
    Accum& acc = per_class[label];
    acc.ap.push_back(options.map_cutoff ? average_precision_at(relevance, *options.map_cutoff)
                                        : average_precision(relevance));
    acc.p_r.push_back(radius_precision(distances, index.labels, label, options.radius));
    acc.p_k.push_back(top_k_precision(relevance, options.k));
  }

  TrialResult result;
  std::vector<double> class_map, class_pk, class_pr;
  const std::set<int> db_labels(index.labels.begin(), index.labels.end());
  for (const auto& [label, acc] : per_class) {
    ClassMetrics cm;
    cm.n_queries = static_cast<int64_t>(acc.ap.size());
    cm.map = 100.0 * mean_of(acc.ap);
    cm.p_at_k = 100.0 * mean_of(acc.p_k);
    cm.p_at_r = 100.0 * mean_of(acc.p_r);
    result.per_class.emplace(label, cm);
    class_map.push_back(cm.map);
    class_pk.push_back(cm.p_at_k);
    class_pr.push_back(cm.p_at_r);
    // A query class with no database members cannot score above zero; it
    // still enters the class average but is flagged for the caller.
    if (!db_labels.count(label)) result.missing_classes.push_back(label);
  }
  result.map = mean_of(class_map);
  result.p_at_k = mean_of(class_pk);
  result.p_at_r = mean_of(class_pr);
  return result;
}

EvalReport aggregate_trials(std::vector<TrialResult> trials, int64_t k, int radius) {
  if (trials.empty()) throw DataError("no trials to aggregate");
  EvalReport report;
  report.k = k;
  report.radius = radius;
  std::vector<double> maps, pks, prs;
  for (const TrialResult& t : trials) {
    maps.push_back(t.map);
    pks.push_back(t.p_at_k);
    prs.push_back(t.p_at_r);
  }
  report.map = mean_of(maps);
  report.p_at_k = mean_of(pks);
  report.p_at_r = mean_of(prs);
  report.trials = std::move(trials);
  return report;
}

std::string format_report(const EvalReport& report) {
  std::vector<double> maps, pks, prs;
  for (const TrialResult& t : report.trials) {
    maps.push_back(t.map);
    pks.push_back(t.p_at_k);
    prs.push_back(t.p_at_r);
  }
  std::ostringstream os;
  os << "[summary]\n";
  os << "n_trials=" << report.trials.size() << "\n";
  os << "k=" << report.k << "\n";
  os << "radius=" << report.radius << "\n";
  os << "map=" << fmt(report.map) << "\n";
  os << "p_at_k=" << fmt(report.p_at_k) << "\n";
  os << "p_at_r=" << fmt(report.p_at_r) << "\n";
  os << "map_stddev=" << fmt(sample_stddev(maps)) << "\n";
  os << "p_at_k_stddev=" << fmt(sample_stddev(pks)) << "\n";
  os << "p_at_r_stddev=" << fmt(sample_stddev(prs)) << "\n";
  for (size_t t = 0; t < report.trials.size(); ++t) {
    const TrialResult& trial = report.trials[t];
    os << "[trial." << t << "]\n";
    os << "map=" << fmt(trial.map) << "\n";
    os << "p_at_k=" << fmt(trial.p_at_k) << "\n";
    os << "p_at_r=" << fmt(trial.p_at_r) << "\n";
    if (!trial.missing_classes.empty()) {
      os << "missing_classes=";
      for (size_t i = 0; i < trial.missing_classes.size(); ++i) {
        if (i) os << ",";
        os << trial.missing_classes[i];
      }
      os << "\n";
    }
    for (const auto& [label, cm] : trial.per_class) {
      os << "[trial." << t << ".class." << label << "]\n";
      os << "n_queries=" << cm.n_queries << "\n";
      os << "map=" << fmt(cm.map) << "\n";
      os << "p_at_k=" << fmt(cm.p_at_k) << "\n";
      os << "p_at_r=" << fmt(cm.p_at_r) << "\n";
    }
  }
  return os.str();
}

std::string format_report_table(const EvalReport& report) {
  std::ostringstream os;
  os << "trial\tclass\tmap\tp_at_k\tp_at_r\n";
  for (size_t t = 0; t < report.trials.size(); ++t) {
    const TrialResult& trial = report.trials[t];
    for (const auto& [label, cm] : trial.per_class)
      os << t << "\t" << label << "\t" << fmt(cm.map) << "\t" << fmt(cm.p_at_k) << "\t"
         << fmt(cm.p_at_r) << "\n";
    os << t << "\tall\t" << fmt(trial.map) << "\t" << fmt(trial.p_at_k) << "\t"
       << fmt(trial.p_at_r) << "\n";
  }
  os << "mean\tall\t" << fmt(report.map) << "\t" << fmt(report.p_at_k) << "\t"
     << fmt(report.p_at_r) << "\n";
  return os.str();
}

}  // namespace gemb

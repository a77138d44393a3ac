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

#include "gemb/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>

#include "gemb/error.hpp"
#include "gemb/io_util.hpp"
#include "gemb/rng.hpp"

namespace gemb {

namespace {

constexpr char kFeatureMagic[4] = {'G', 'E', 'M', 'B'};
constexpr uint32_t kFeatureVersion = 1;

FeatureMatrix load_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  io::check_magic(in, kFeatureMagic, "GEMB descriptor");
  io::check_version(in, kFeatureVersion, "descriptor");
  const auto m = io::read_le<uint64_t>(in, "row count");
  const auto d = io::read_le<uint64_t>(in, "column count");
  if (m == 0 || d == 0)
    throw FormatError("empty matrix in " + path + " (m=" + std::to_string(m) + ", d=" + std::to_string(d) + ")");
  FeatureMatrix x;
  x.data.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(d));
  std::vector<float> row(d);
  for (uint64_t i = 0; i < m; ++i) {
    in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(d * sizeof(float)));
    if (!in) throw FormatError("truncated payload in " + path + " at row " + std::to_string(i));
    for (uint64_t j = 0; j < d; ++j) x.data(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
  }
  return x;
}

FeatureMatrix load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> fields;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      size_t pos = 0;
      double value;
      try {
        value = std::stod(cell, &pos);
      } catch (const std::exception&) {
        throw FormatError("unparseable value '" + cell + "' at line " + std::to_string(line_no));
      }
      if (cell.find_first_not_of(" \t\r", pos) != std::string::npos)
        throw FormatError("trailing junk in cell '" + cell + "' at line " + std::to_string(line_no));
      fields.push_back(value);
    }
    if (!rows.empty() && fields.size() != rows.front().size())
      throw FormatError("line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                        " fields, expected " + std::to_string(rows.front().size()));
    if (fields.empty()) throw FormatError("no fields at line " + std::to_string(line_no));
    rows.push_back(std::move(fields));
  }
  if (rows.empty()) throw FormatError("no data rows in " + path);
  FeatureMatrix x;
  x.data.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index i = 0; i < x.data.rows(); ++i)
    for (Eigen::Index j = 0; j < x.data.cols(); ++j) x.data(i, j) = rows[i][j];
  return x;
}

// round-half-up, as in "10% of each class"
int64_t round_half_up(double v) { return static_cast<int64_t>(std::floor(v + 0.5)); }

FeatureMatrix take_rows(const FeatureMatrix& x, const std::vector<Eigen::Index>& indices) {
  FeatureMatrix out;
  out.data.resize(static_cast<Eigen::Index>(indices.size()), x.cols());
  for (size_t i = 0; i < indices.size(); ++i) out.data.row(static_cast<Eigen::Index>(i)) = x.data.row(indices[i]);
  if (x.has_labels()) {
    std::vector<int> labels(indices.size());
    for (size_t i = 0; i < indices.size(); ++i) labels[i] = (*x.labels)[static_cast<size_t>(indices[i])];
    out.labels = std::move(labels);
  }
  return out;
}

}  // namespace

void validate(const FeatureMatrix& x) {
  if (x.rows() < 1 || x.cols() < 1)
    throw DataError("matrix must have at least one row and one column (got " + std::to_string(x.rows()) +
                    "x" + std::to_string(x.cols()) + ")");
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j)
      if (!std::isfinite(x.data(i, j)))
        throw DataError("non-finite value at row " + std::to_string(i) + ", column " + std::to_string(j));
  if (x.has_labels()) {
    if (static_cast<Eigen::Index>(x.labels->size()) != x.rows())
      throw ShapeError("label count " + std::to_string(x.labels->size()) + " does not match row count " +
                       std::to_string(x.rows()));
    for (size_t i = 0; i < x.labels->size(); ++i)
      if ((*x.labels)[i] < 0)
        throw DataError("negative class id at label row " + std::to_string(i));
  }
}

FeatureMatrix load_features(const std::string& path, FileFormat format) {
  FeatureMatrix x = format == FileFormat::kBinary ? load_binary(path) : load_csv(path);
  validate(x);
  return x;
}

void save_features(const std::string& path, const FeatureMatrix& x) {
  validate(x);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  io::write_magic(out, kFeatureMagic);
  io::write_le<uint32_t>(out, kFeatureVersion);
  io::write_le<uint64_t>(out, static_cast<uint64_t>(x.rows()));
  io::write_le<uint64_t>(out, static_cast<uint64_t>(x.cols()));
  std::vector<float> row(static_cast<size_t>(x.cols()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) row[static_cast<size_t>(j)] = static_cast<float>(x.data(i, j));
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size() * sizeof(float)));
  }
  if (!out) throw IoError("write failed for " + path);
}

std::vector<int> load_labels(const std::string& path, Eigen::Index expected_rows) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<int> labels;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty()) continue;
    size_t pos = 0;
    long value;
    try {
      value = std::stol(line, &pos);
    } catch (const std::exception&) {
      throw FormatError("unparseable label '" + line + "' at line " + std::to_string(line_no));
    }
    if (pos != line.size())
      throw FormatError("trailing junk in label '" + line + "' at line " + std::to_string(line_no));
    if (value < 0) throw FormatError("negative label at line " + std::to_string(line_no));
    labels.push_back(static_cast<int>(value));
  }
  if (static_cast<Eigen::Index>(labels.size()) != expected_rows)
    throw FormatError(path + " has " + std::to_string(labels.size()) + " labels, expected " +
                      std::to_string(expected_rows));
  return labels;
}

void save_labels(const std::string& path, const std::vector<int>& labels) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  for (int label : labels) out << label << '\n';
  if (!out) throw IoError("write failed for " + path);
}

Split split(const FeatureMatrix& x, const SplitSpec& spec) {
  validate(x);
  if (!(spec.query_fraction > 0.0 && spec.query_fraction < 1.0))
    throw ConfigError("query_fraction must be in (0, 1)");
  if (spec.stratified && !x.has_labels())
    throw ConfigError("stratified split requires labels");

  auto gen = rng::engine(spec.seed);
  std::vector<Eigen::Index> query_indices;

  if (spec.stratified) {
    std::map<int, std::vector<Eigen::Index>> by_class;
    for (Eigen::Index i = 0; i < x.rows(); ++i) by_class[(*x.labels)[static_cast<size_t>(i)]].push_back(i);
    for (auto& [label, members] : by_class) {
      int64_t want = round_half_up(spec.query_fraction * static_cast<double>(members.size()));
      if (want == 0) want = 1;  // every class contributes at least one query
      if (want >= static_cast<int64_t>(members.size()))
        throw DataError("class " + std::to_string(label) + " has too few samples (" +
                        std::to_string(members.size()) + ") for query fraction " +
                        std::to_string(spec.query_fraction));
      rng::shuffle(members, gen);
      query_indices.insert(query_indices.end(), members.begin(), members.begin() + want);
    }
  } else {
    std::vector<Eigen::Index> all(static_cast<size_t>(x.rows()));
    for (Eigen::Index i = 0; i < x.rows(); ++i) all[static_cast<size_t>(i)] = i;
    int64_t want = round_half_up(spec.query_fraction * static_cast<double>(x.rows()));
    if (want == 0) want = 1;
    if (want >= x.rows()) throw DataError("too few samples for query fraction");
    rng::shuffle(all, gen);
    query_indices.assign(all.begin(), all.begin() + want);
  }

  std::sort(query_indices.begin(), query_indices.end());
  std::vector<char> is_query(static_cast<size_t>(x.rows()), 0);
  for (Eigen::Index i : query_indices) is_query[static_cast<size_t>(i)] = 1;
  std::vector<Eigen::Index> db_indices;
  db_indices.reserve(static_cast<size_t>(x.rows()) - query_indices.size());
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    if (!is_query[static_cast<size_t>(i)]) db_indices.push_back(i);

  Split out;
  out.query = take_rows(x, query_indices);
  out.database = take_rows(x, db_indices);
  out.query_indices = std::move(query_indices);
  out.db_indices = std::move(db_indices);
  return out;
}

}  // namespace gemb

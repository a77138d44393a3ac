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

#include "gemb/hashing.hpp"

#include <Eigen/Dense>
#include <bit>
#include <cmath>
#include <fstream>

#include "gemb/error.hpp"
#include "gemb/io_util.hpp"
#include "gemb/rng.hpp"

namespace gemb {

namespace {

constexpr char kCodeMagic[4] = {'G', 'E', 'M', 'C'};
constexpr uint32_t kCodeVersion = 1;

// Top-k eigenvectors of the population covariance of already-centered
// data, descending eigenvalue order, signs fixed for reproducibility.
Eigen::MatrixXd top_principal_directions(const Eigen::MatrixXd& centered, int k) {
  const Eigen::MatrixXd cov =
      (centered.transpose() * centered) / static_cast<double>(centered.rows());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  Eigen::MatrixXd directions = solver.eigenvectors().rowwise().reverse().leftCols(k);
  for (Eigen::Index c = 0; c < directions.cols(); ++c) {
    Eigen::Index imax = 0;
    directions.col(c).cwiseAbs().maxCoeff(&imax);
    if (directions(imax, c) < 0.0) directions.col(c) = -directions.col(c);
  }
  return directions;
}

// Q factor of a seeded Gaussian matrix, columns sign-fixed so the QR is
// unique (diagonal of R non-negative).
Eigen::MatrixXd random_orthogonal(int n, std::mt19937_64& gen) {
  const Eigen::MatrixXd g = rng::gaussian_matrix(n, n, gen);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int c = 0; c < n; ++c)
    if (r(c, c) < 0.0) q.col(c) = -q.col(c);
  return q;
}

BinaryCodes pack_signs(const Eigen::MatrixXd& projected) {
  BinaryCodes codes;
  codes.n_rows = projected.rows();
  codes.n_bits = static_cast<int>(projected.cols());
  const int wpr = codes.words_per_row();
  codes.words.assign(static_cast<size_t>(codes.n_rows) * wpr, 0);
  for (Eigen::Index i = 0; i < projected.rows(); ++i) {
    uint64_t* row = codes.words.data() + i * wpr;
    for (Eigen::Index j = 0; j < projected.cols(); ++j)
      if (projected(i, j) >= 0.0) row[j / 64] |= uint64_t{1} << (j % 64);
  }
  return codes;
}

void check_input_dim(Eigen::Index got, Eigen::Index want) {
  if (got != want)
    throw ShapeError("input has " + std::to_string(got) + " columns, model expects " +
                     std::to_string(want));
}

}  // namespace

ItqModel fit_itq(const Eigen::MatrixXd& x, int n_bits, int n_iters, uint64_t seed,
                 ItqTrainLog* log) {
  if (n_bits < 1) throw ConfigError("n_bits must be >= 1");
  if (n_iters < 0) throw ConfigError("n_iters must be >= 0");
  if (x.cols() < n_bits)
    throw DataError("input dimension " + std::to_string(x.cols()) + " is smaller than n_bits " +
                    std::to_string(n_bits));
  if (x.rows() < n_bits)
    throw DataError("need at least n_bits samples to span " + std::to_string(n_bits) + " bits");

  ItqModel model;
  model.n_bits = n_bits;
  model.mean = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - model.mean.transpose();
  model.pca_projection = top_principal_directions(centered, n_bits);
  const Eigen::MatrixXd v = centered * model.pca_projection;  // m x b

  auto gen = rng::engine(seed);
  model.rotation = random_orthogonal(n_bits, gen);

  for (int iter = 0; iter < n_iters; ++iter) {
    const Eigen::MatrixXd vr = v * model.rotation;
    const Eigen::MatrixXd b = vr.unaryExpr([](double c) { return c >= 0.0 ? 1.0 : -1.0; });
    // orthogonal Procrustes: B^T V = Shat * Omega * Sbar^T, R = Sbar * Shat^T
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(b.transpose() * v,
                                          Eigen::ComputeFullU | Eigen::ComputeFullV);
    model.rotation = svd.matrixV() * svd.matrixU().transpose();
    if (log) {
      log->losses.push_back((b - v * model.rotation).squaredNorm());
      log->rotation_orthogonality.push_back(
          (model.rotation.transpose() * model.rotation - Eigen::MatrixXd::Identity(n_bits, n_bits))
              .cwiseAbs()
              .maxCoeff());
    }
  }
  return model;
}

LshModel fit_lsh(const Eigen::MatrixXd& x, int n_bits, uint64_t seed) {
  if (n_bits < 1) throw ConfigError("n_bits must be >= 1");
  LshModel model;
  model.n_bits = n_bits;
  model.mean = x.colwise().mean();
  auto gen = rng::engine(seed);
  model.hyperplanes = rng::gaussian_matrix(x.cols(), n_bits, gen);
  return model;
}

BinaryCodes encode(const ItqModel& model, const Eigen::MatrixXd& x) {
  check_input_dim(x.cols(), model.mean.size());
  return pack_signs(((x.rowwise() - model.mean.transpose()) * model.pca_projection) *
                    model.rotation);
}

BinaryCodes encode(const LshModel& model, const Eigen::MatrixXd& x) {
  check_input_dim(x.cols(), model.mean.size());
  return pack_signs((x.rowwise() - model.mean.transpose()) * model.hyperplanes);
}

int hamming_distance(std::span<const uint64_t> a, std::span<const uint64_t> b) {
  if (a.size() != b.size()) throw ShapeError("code word counts differ");
  int distance = 0;
  for (size_t w = 0; w < a.size(); ++w) distance += std::popcount(a[w] ^ b[w]);
  return distance;
}

int hamming_distance(const BinaryCodes& a, int64_t row_a, const BinaryCodes& b, int64_t row_b) {
  if (a.n_bits != b.n_bits)
    throw ShapeError("code lengths differ: " + std::to_string(a.n_bits) + " vs " +
                     std::to_string(b.n_bits));
  return hamming_distance(a.row(row_a), b.row(row_b));
}

void save_codes(const std::string& path, const BinaryCodes& codes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  io::write_magic(out, kCodeMagic);
  io::write_le<uint32_t>(out, kCodeVersion);
  io::write_le<uint64_t>(out, static_cast<uint64_t>(codes.n_rows));
  io::write_le<uint64_t>(out, static_cast<uint64_t>(codes.n_bits));
  for (uint64_t word : codes.words) io::write_le<uint64_t>(out, word);
  if (!out) throw IoError("write failed for " + path);
}

BinaryCodes load_codes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  io::check_magic(in, kCodeMagic, "GEMC code");
  io::check_version(in, kCodeVersion, "code");
  BinaryCodes codes;
  codes.n_rows = static_cast<int64_t>(io::read_le<uint64_t>(in, "row count"));
  codes.n_bits = static_cast<int>(io::read_le<uint64_t>(in, "bit count"));
  if (codes.n_rows < 1 || codes.n_bits < 1) throw FormatError("empty code matrix in " + path);
  const size_t total = static_cast<size_t>(codes.n_rows) * codes.words_per_row();
  codes.words.resize(total);
  for (size_t w = 0; w < total; ++w) codes.words[w] = io::read_le<uint64_t>(in, "code words");
  const int tail_bits = codes.n_bits % 64;
  if (tail_bits != 0) {
    const uint64_t mask = (uint64_t{1} << tail_bits) - 1;
    const int wpr = codes.words_per_row();
    for (int64_t i = 0; i < codes.n_rows; ++i)
      if (codes.words[static_cast<size_t>(i) * wpr + wpr - 1] & ~mask)
        throw FormatError("nonzero padding bits in row " + std::to_string(i));
  }
  return codes;
}

}  // namespace gemb

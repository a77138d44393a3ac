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

#include "gemb/pca.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "gemb/error.hpp"

namespace gemb {

namespace {

// Flip each column so its largest-magnitude entry is positive; first
// occurrence wins on ties. Makes refits bit-reproducible.
void fix_column_signs(Eigen::MatrixXd& u) {
  for (Eigen::Index c = 0; c < u.cols(); ++c) {
    Eigen::Index imax = 0;
    double best = -1.0;
    for (Eigen::Index r = 0; r < u.rows(); ++r) {
      const double mag = std::abs(u(r, c));
      if (mag > best) {
        best = mag;
        imax = r;
      }
    }
    if (u(imax, c) < 0.0) u.col(c) = -u.col(c);
  }
}

}  // namespace

PcaModel fit_pca(const FeatureMatrix& x, double gamma) {
  validate(x);
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("gamma must be in (0, 1]");
  const Eigen::Index m = x.rows();
  const Eigen::Index d = x.cols();
  if (m < 2) throw DataError("PCA needs at least 2 samples");

  PcaModel model;
  model.gamma = gamma;
  model.d_in = d;
  model.mean = x.data.colwise().mean();
  Eigen::MatrixXd centered = x.data.rowwise() - model.mean.transpose();

  Eigen::VectorXd eigenvalues;   // descending
  Eigen::MatrixXd eigenvectors;  // d x n_kept, matching order
  if (m >= d) {
    Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(m);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
    eigenvalues = solver.eigenvalues().reverse();
    eigenvectors = solver.eigenvectors().rowwise().reverse();
  } else {
    // Gram trick: the m x m problem shares the top spectrum; eigenvectors
    // map back through X^T v / sqrt(m * lambda).
    Eigen::MatrixXd gram = (centered * centered.transpose()) / static_cast<double>(m);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
    if (solver.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
    const Eigen::VectorXd values = solver.eigenvalues().reverse();
    const Eigen::MatrixXd vectors = solver.eigenvectors().rowwise().reverse();
    const double floor = 1e-12 * std::max(values(0), 0.0);
    Eigen::Index kept = 0;
    while (kept < m && values(kept) > floor) ++kept;
    if (kept == 0) kept = 1;  // constant data: keep one arbitrary direction
    eigenvalues = Eigen::VectorXd::Zero(d);
    eigenvalues.head(kept) = values.head(kept).cwiseMax(0.0);
    eigenvectors.resize(d, kept);
    for (Eigen::Index k = 0; k < kept; ++k) {
      if (values(k) > floor) {
        eigenvectors.col(k) =
            centered.transpose() * vectors.col(k) / std::sqrt(static_cast<double>(m) * values(k));
      } else {
        eigenvectors.col(k) = Eigen::VectorXd::Unit(d, k);
      }
    }
  }

  // Clamp small numerical negatives to zero.
  for (Eigen::Index j = 0; j < eigenvalues.size(); ++j)
    if (eigenvalues(j) < 0.0) eigenvalues(j) = 0.0;

  // Smallest D whose cumulative eigenvalue mass reaches gamma of the
  // total; the tiny slack absorbs round-off at exact-equality boundaries.
  const Eigen::Index limit = eigenvectors.cols();
  double total = 0.0;
  for (Eigen::Index j = 0; j < eigenvalues.size(); ++j) total += eigenvalues(j);
  const double threshold = gamma * total - 1e-12 * total;
  Eigen::Index n_keep = 1;
  double cum = eigenvalues(0);
  while (cum < threshold && n_keep < limit) {
    cum += eigenvalues(n_keep);
    ++n_keep;
  }

  model.eigenvalues = eigenvalues;
  model.projection = eigenvectors.leftCols(n_keep);
  fix_column_signs(model.projection);
  model.d_out = n_keep;
  return model;
}

FeatureMatrix project(const PcaModel& model, const FeatureMatrix& x) {
  if (x.cols() != model.d_in)
    throw ShapeError("input has " + std::to_string(x.cols()) + " columns, model expects " +
                     std::to_string(model.d_in));
  FeatureMatrix out;
  out.data = (x.data.rowwise() - model.mean.transpose()) * model.projection;
  out.labels = x.labels;
  return out;
}

}  // namespace gemb

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

#include <Eigen/Core>

#include "gemb/dataset.hpp"

namespace gemb {

struct PcaModel {
  Eigen::VectorXd mean;         // d_in
  Eigen::VectorXd eigenvalues;  // d_in, non-increasing, clamped at zero
  Eigen::MatrixXd projection;   // d_in x d_out, orthonormal columns
  double gamma = 1.0;
  Eigen::Index d_in = 0;
  Eigen::Index d_out = 0;
};

// Fits mean-centered PCA with population covariance (1/m). The output
// dimension is the smallest D whose top-D eigenvalue mass reaches the
// gamma fraction of the total. Eigenvector signs are fixed so the
// largest-magnitude entry of each column is positive, making refits
// bit-reproducible. When m < d the eigenproblem is solved through the
// m x m Gram matrix, which shares the top spectrum.
PcaModel fit_pca(const FeatureMatrix& x, double gamma);

// Returns (x - mean) * projection; labels are carried through.
FeatureMatrix project(const PcaModel& model, const FeatureMatrix& x);

}  // namespace gemb

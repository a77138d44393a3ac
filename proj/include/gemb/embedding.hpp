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
#include <vector>

#include <Eigen/Core>

#include "gemb/gmm.hpp"
#include "gemb/pca.hpp"

namespace gemb {

/// The full embedding pipeline: PCA projection, GMM posterior features,
/// power normalization.
struct GembModel {
  PcaModel pca;
  GmmModel gmm;
  double alpha = 0.15;  // power-normalization exponent, in (0, 1]
  double gamma = 0.85;  // variance retained by the PCA stage
};

struct EmbeddingMatrix {
  Eigen::MatrixXd data;  // m x N
};

// Elementwise sign(z) * |z|^alpha; exact identity at alpha == 1.
Eigen::MatrixXd power_normalize(const Eigen::MatrixXd& z, double alpha);

// PCA on x at `gamma`, then a GMM with `n_components`/`kind` on the
// projected data. `em` supplies the EM hyperparameters (its component
// count and kind are overridden by the explicit arguments).
GembModel fit_gemb(const FeatureMatrix& x, double gamma, int n_components, CovarianceKind kind,
                   double alpha, EmConfig em);

// power_normalize(posteriors(gmm, project(pca, x)), alpha).
EmbeddingMatrix embed(const GembModel& model, const FeatureMatrix& x);

struct Histogram {
  std::vector<double> edges;    // n_bins + 1 ascending edges
  std::vector<int64_t> counts;  // n_bins
};

// Histogram over log10 of the entries, with values clamped at 1e-300 so
// underflowed posteriors land in the lowest bin.
Histogram sparsity_histogram(const EmbeddingMatrix& z, int n_bins);

// Median of log10(max(entry, 1e-300)); the sparsity summary statistic.
double median_log10(const EmbeddingMatrix& z);

}  // namespace gemb

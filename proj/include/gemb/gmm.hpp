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
#include <vector>

#include <Eigen/Core>

#include "gemb/dataset.hpp"

namespace gemb {

enum class CovarianceKind { kFull, kDiagonal };

/// Weighted Gaussian mixture. Covariances of the diagonal kind are stored
/// as D x 1 columns; full covariances as D x D SPD matrices. The Cholesky
/// factor and log-determinant of every component are cached so density
/// evaluation never re-factorizes.
struct GmmModel {
  CovarianceKind kind = CovarianceKind::kFull;
  Eigen::VectorXd weights;                   // N, positive, sums to 1
  Eigen::MatrixXd means;                     // N x D, one mean per row
  std::vector<Eigen::MatrixXd> covariances;  // full: D x D; diagonal: D x 1
  std::vector<Eigen::MatrixXd> factors;      // full: lower L; diagonal: sqrt(diag) as D x 1
  Eigen::VectorXd log_dets;                  // N, ln |Sigma_i|

  int n_components() const { return static_cast<int>(weights.size()); }
  Eigen::Index dim() const { return means.cols(); }
};

// Recomputes `factors` and `log_dets` from `covariances`.
// Throws NumericalError if any component is not positive definite.
void refresh_factorizations(GmmModel& model);

struct EmConfig {
  int n_components = 8;
  CovarianceKind kind = CovarianceKind::kFull;
  int max_iters = 200;
  double tol = 1e-5;                // relative log-likelihood improvement
  std::optional<double> reg_covar;  // unset: 1e-6 * mean per-dimension variance
  uint64_t seed = 0;
  int n_init = 3;
};

struct EmResult {
  GmmModel model;
  double final_log_likelihood = 0.0;
  int n_iters = 0;
  // Log-likelihood measured at every E-step of the winning restart;
  // non-decreasing up to numerical slack.
  std::vector<double> log_likelihood_trace;
};

// ln N(x | mu_j, Sigma_j) through the cached factorization:
// -(D ln 2pi + ln|Sigma_j| + ||L_j^-1 (x - mu_j)||^2) / 2.
double log_component_density(const GmmModel& model, int component, const Eigen::VectorXd& x);

// m x N matrix of P(j | x_t) = w_j p_j / sum_i w_i p_i, computed in
// log-space with max subtraction. Every row sums to one.
Eigen::MatrixXd posteriors(const GmmModel& model, const FeatureMatrix& x);

// sum_t ln sum_j w_j p_j(x_t), log-sum-exp stabilized.
double log_likelihood(const GmmModel& model, const FeatureMatrix& x);

// Free parameters: (N-1) weights + N*D means + covariance terms
// (N*D*(D+1)/2 full, N*D diagonal).
int64_t parameter_count(const GmmModel& model);

// k * ln m - 2 * log_likelihood; lower is better.
double bic(const GmmModel& model, const FeatureMatrix& x);

// k-means++ seeded EM with n_init restarts; returns the restart with the
// best final log-likelihood. reg_covar is added to covariance diagonals at
// every M-step. Collapsed components (weight < 1e-10 or failed
// factorization) are re-seeded at the worst-explained sample; three
// consecutive collapse iterations abort with NumericalError.
EmResult fit_gmm(const FeatureMatrix& x, const EmConfig& cfg);

}  // namespace gemb

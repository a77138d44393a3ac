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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "gemb/error.hpp"
#include "gemb/pca.hpp"
#include "gemb/rng.hpp"
#include "oracles.hpp"

using namespace gemb;

namespace {

// Builds data whose population covariance is exactly diag(spectrum): for
// each axis j, the rows +a_j e_j and -a_j e_j with a_j = sqrt(d * lambda_j)
// give mean zero and covariance (2 a_j^2) / (2d) = lambda_j.
FeatureMatrix exact_spectrum_data(const std::vector<double>& spectrum) {
  const auto d = static_cast<Eigen::Index>(spectrum.size());
  FeatureMatrix x;
  x.data = Eigen::MatrixXd::Zero(2 * d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const double a = std::sqrt(static_cast<double>(d) * spectrum[static_cast<size_t>(j)]);
    x.data(2 * j, j) = a;
    x.data(2 * j + 1, j) = -a;
  }
  return x;
}

// Independent Eq. 1 oracle on a known spectrum (assumed sorted descending).
Eigen::Index expected_dims(const std::vector<double>& spectrum, double gamma) {
  double total = 0.0;
  for (double v : spectrum) total += v;
  double cum = 0.0;
  for (size_t j = 0; j < spectrum.size(); ++j) {
    cum += spectrum[j];
    if (cum / total >= gamma) return static_cast<Eigen::Index>(j + 1);
  }
  return static_cast<Eigen::Index>(spectrum.size());
}

FeatureMatrix anisotropic_data(Eigen::Index m, Eigen::Index d, uint64_t seed) {
  auto gen = rng::engine(seed);
  FeatureMatrix x;
  x.data = rng::gaussian_matrix(m, d, gen);
  // anisotropy so the spectrum is distinct
  for (Eigen::Index j = 0; j < d; ++j) x.data.col(j) *= 1.0 + static_cast<double>(j);
  return x;
}

}  // namespace

TEST_CASE("Eq. 1 dimension selection on a hand-built spectrum") {
  const std::vector<double> spectrum{4.0, 3.0, 2.0, 1.0};
  const FeatureMatrix x = exact_spectrum_data(spectrum);
  // 4/10 = 0.40 < 0.65 <= 7/10 = 0.70
  CHECK(fit_pca(x, 0.65).d_out == 2);
  CHECK(fit_pca(x, 0.5).d_out == 2);   // 0.40 < 0.5 <= 0.70
  CHECK(fit_pca(x, 0.85).d_out == 3);  // 0.70 < 0.85 <= 0.90
  CHECK(fit_pca(x, 1.0).d_out == 4);
  CHECK(fit_pca(x, 0.4).d_out == 1);   // boundary: exactly 4/10
}

TEST_CASE("isotropic spectrum splits evenly") {
  const FeatureMatrix x = exact_spectrum_data({2.0, 2.0, 2.0, 2.0});
  CHECK(fit_pca(x, 0.5).d_out == 2);
  CHECK(fit_pca(x, 0.25).d_out == 1);
  CHECK(fit_pca(x, 1.0).d_out == 4);
}

TEST_CASE("dimension selection matches the oracle on random spectra") {
  auto gen = rng::engine(11);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> spectrum;
    const int d = 2 + static_cast<int>(rng::bounded(gen, 6));
    for (int j = 0; j < d; ++j) spectrum.push_back(0.1 + rng::uniform01(gen));
    std::sort(spectrum.rbegin(), spectrum.rend());
    const FeatureMatrix x = exact_spectrum_data(spectrum);
    for (double gamma : {0.3, 0.5, 0.65, 0.85, 0.999, 1.0}) {
      const PcaModel model = fit_pca(x, gamma);
      CHECK(model.d_out == expected_dims(spectrum, gamma));
    }
  }
}

TEST_CASE("eigenvalues are sorted, clamped, and sum to the trace") {
  const FeatureMatrix x = anisotropic_data(200, 6, 3);
  const PcaModel model = fit_pca(x, 1.0);
  REQUIRE(model.eigenvalues.size() == 6);
  for (Eigen::Index j = 1; j < 6; ++j)
    CHECK(model.eigenvalues(j) <= model.eigenvalues(j - 1));
  CHECK(model.eigenvalues.minCoeff() >= 0.0);
  const double trace = oracle::population_covariance(x.data).trace();
  CHECK(model.eigenvalues.sum() == doctest::Approx(trace).epsilon(1e-6));
}

TEST_CASE("projection columns are orthonormal and decorrelate the data") {
  const FeatureMatrix x = anisotropic_data(300, 5, 4);
  const PcaModel model = fit_pca(x, 1.0);
  const Eigen::MatrixXd gram =
      model.projection.transpose() * model.projection -
      Eigen::MatrixXd::Identity(model.d_out, model.d_out);
  CHECK(gram.cwiseAbs().maxCoeff() < 1e-8);

  const FeatureMatrix projected = project(model, x);
  const Eigen::MatrixXd cov = oracle::population_covariance(projected.data);
  const double lambda1 = model.eigenvalues(0);
  for (Eigen::Index i = 0; i < cov.rows(); ++i) {
    for (Eigen::Index j = 0; j < cov.cols(); ++j) {
      if (i == j) {
        // projected variances are the eigenvalues, in order
        CHECK(cov(i, i) == doctest::Approx(model.eigenvalues(i)).epsilon(1e-8));
      } else {
        CHECK(std::abs(cov(i, j)) < 1e-8 * lambda1);
      }
    }
  }
  for (Eigen::Index i = 1; i < cov.rows(); ++i) CHECK(cov(i, i) <= cov(i - 1, i - 1) + 1e-12);
}

TEST_CASE("projecting the training mean gives the zero vector") {
  const FeatureMatrix x = anisotropic_data(50, 4, 5);
  const PcaModel model = fit_pca(x, 0.9);
  FeatureMatrix mean_row;
  mean_row.data = model.mean.transpose();
  const FeatureMatrix projected = project(model, mean_row);
  CHECK(projected.data.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("axis-aligned data maps to itself up to axis order and sign fix") {
  // covariance already diagonal with distinct entries: eigenvectors are
  // the coordinate axes; gamma=1 keeps all of them
  const FeatureMatrix x = exact_spectrum_data({5.0, 3.0, 1.0});
  const PcaModel model = fit_pca(x, 1.0);
  // each column must be +- a coordinate axis; the sign convention makes
  // the largest-magnitude entry positive, so exactly a coordinate axis
  for (Eigen::Index c = 0; c < model.projection.cols(); ++c) {
    Eigen::Index argmax = 0;
    model.projection.col(c).cwiseAbs().maxCoeff(&argmax);
    CHECK(model.projection(argmax, c) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(argmax == c);  // descending eigenvalue order matches axis order
  }
}

TEST_CASE("refitting the same data gives identical projections") {
  const FeatureMatrix x = anisotropic_data(120, 7, 6);
  const PcaModel a = fit_pca(x, 0.9);
  const PcaModel b = fit_pca(x, 0.9);
  CHECK(a.projection == b.projection);
  CHECK(a.eigenvalues == b.eigenvalues);
}

TEST_CASE("wide data (m < d) goes through the Gram path with the same contract") {
  const FeatureMatrix x = anisotropic_data(20, 40, 7);
  const PcaModel model = fit_pca(x, 0.9);
  CHECK(model.d_out >= 1);
  CHECK(model.d_out <= 19);  // rank of 20 centered samples is at most 19
  const Eigen::MatrixXd gram =
      model.projection.transpose() * model.projection -
      Eigen::MatrixXd::Identity(model.d_out, model.d_out);
  CHECK(gram.cwiseAbs().maxCoeff() < 1e-8);
  // columns are true eigenvectors of the covariance: C v = lambda v
  const Eigen::MatrixXd cov = oracle::population_covariance(x.data);
  for (Eigen::Index c = 0; c < model.d_out; ++c) {
    const Eigen::VectorXd residual =
        cov * model.projection.col(c) - model.eigenvalues(c) * model.projection.col(c);
    CHECK(residual.cwiseAbs().maxCoeff() < 1e-8 * model.eigenvalues(0));
  }
}

TEST_CASE("degenerate and invalid inputs") {
  FeatureMatrix constant;
  constant.data = Eigen::MatrixXd::Constant(5, 3, 2.5);
  const PcaModel model = fit_pca(constant, 0.85);  // no variance anywhere
  CHECK(model.d_out == 1);                          // minimal valid projection

  FeatureMatrix one_row;
  one_row.data = Eigen::MatrixXd::Ones(1, 3);
  CHECK_THROWS_AS(fit_pca(one_row, 0.85), DataError);

  const FeatureMatrix x = anisotropic_data(10, 3, 8);
  CHECK_THROWS_AS(fit_pca(x, 0.0), ConfigError);
  CHECK_THROWS_AS(fit_pca(x, 1.5), ConfigError);

  const PcaModel ok = fit_pca(x, 0.9);
  FeatureMatrix wrong_width;
  wrong_width.data = Eigen::MatrixXd::Ones(2, 5);
  CHECK_THROWS_AS(project(ok, wrong_width), ShapeError);
}

TEST_CASE("project carries labels through") {
  FeatureMatrix x = anisotropic_data(30, 4, 9);
  std::vector<int> labels(30, 1);
  labels[3] = 2;
  x.labels = labels;
  const PcaModel model = fit_pca(x, 0.9);
  const FeatureMatrix projected = project(model, x);
  REQUIRE(projected.has_labels());
  CHECK(*projected.labels == labels);
}

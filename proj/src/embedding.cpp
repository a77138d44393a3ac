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

#include "gemb/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "gemb/error.hpp"

namespace gemb {

namespace {
constexpr double kLogClamp = 1e-300;

double clamped_log10(double v) { return std::log10(std::max(v, kLogClamp)); }
}  // namespace

Eigen::MatrixXd power_normalize(const Eigen::MatrixXd& z, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha must be in (0, 1]");
  if (alpha == 1.0) return z;  // keep the identity exact
  return z.unaryExpr([alpha](double v) {
    if (v == 0.0) return 0.0;
    return v > 0.0 ? std::pow(v, alpha) : -std::pow(-v, alpha);
  });
}

GembModel fit_gemb(const FeatureMatrix& x, double gamma, int n_components, CovarianceKind kind,
                   double alpha, EmConfig em) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha must be in (0, 1]");
  GembModel model;
  model.gamma = gamma;
  model.alpha = alpha;
  model.pca = fit_pca(x, gamma);
  const FeatureMatrix projected = project(model.pca, x);
  em.n_components = n_components;
  em.kind = kind;
  model.gmm = std::move(fit_gmm(projected, em).model);
  return model;
}

EmbeddingMatrix embed(const GembModel& model, const FeatureMatrix& x) {
  const FeatureMatrix projected = project(model.pca, x);
  return EmbeddingMatrix{power_normalize(posteriors(model.gmm, projected), model.alpha)};
}

Histogram sparsity_histogram(const EmbeddingMatrix& z, int n_bins) {
  if (n_bins < 2) throw ConfigError("n_bins must be >= 2");
  if (z.data.size() == 0) throw ConfigError("empty embedding matrix");

  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < z.data.rows(); ++i)
    for (Eigen::Index j = 0; j < z.data.cols(); ++j) {
      const double v = clamped_log10(z.data(i, j));
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  if (hi - lo < 1e-12) {  // all entries equal: one centered bin range
    lo -= 0.5;
    hi += 0.5;
  }

  Histogram hist;
  hist.edges.resize(static_cast<size_t>(n_bins) + 1);
  hist.counts.assign(static_cast<size_t>(n_bins), 0);
  const double width = (hi - lo) / n_bins;
  for (int b = 0; b <= n_bins; ++b) hist.edges[static_cast<size_t>(b)] = lo + width * b;

  for (Eigen::Index i = 0; i < z.data.rows(); ++i)
    for (Eigen::Index j = 0; j < z.data.cols(); ++j) {
      const double v = clamped_log10(z.data(i, j));
      auto bin = static_cast<int64_t>((v - lo) / width);
      bin = std::clamp<int64_t>(bin, 0, n_bins - 1);
      ++hist.counts[static_cast<size_t>(bin)];
    }
  return hist;
}

double median_log10(const EmbeddingMatrix& z) {
  if (z.data.size() == 0) throw ConfigError("empty embedding matrix");
  std::vector<double> values;
  values.reserve(static_cast<size_t>(z.data.size()));
  for (Eigen::Index i = 0; i < z.data.rows(); ++i)
    for (Eigen::Index j = 0; j < z.data.cols(); ++j) values.push_back(clamped_log10(z.data(i, j)));
  const size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  if (values.size() % 2 == 1) return values[mid];
  const double upper = values[mid];
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

}  // namespace gemb

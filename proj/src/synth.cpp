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

#include "gemb/synth.hpp"

#include <cmath>

#include "gemb/error.hpp"
#include "gemb/rng.hpp"

namespace gemb {

FeatureMatrix make_blobs(const SynthConfig& cfg) {
  if (cfg.n_classes < 1) throw ConfigError("n_classes must be >= 1");
  if (cfg.per_class < 1) throw ConfigError("per_class must be >= 1");
  if (cfg.dim < 1) throw ConfigError("dim must be >= 1");
  if (cfg.class_sep < 0.0) throw ConfigError("class_sep must be >= 0");
  if (cfg.noise <= 0.0) throw ConfigError("noise must be > 0");
  if (cfg.correlation < 0.0 || cfg.correlation >= 1.0)
    throw ConfigError("correlation must be in [0, 1)");

  auto gen = rng::engine(cfg.seed);
  const Eigen::MatrixXd centers =
      cfg.class_sep * rng::gaussian_matrix(cfg.n_classes, cfg.dim, gen);

  // Equicorrelated within-class covariance noise^2 ((1-rho) I + rho 11^T)
  // sampled without a factorization: independent per-dimension noise plus
  // one shared scalar per sample.
  const double indep = cfg.noise * std::sqrt(1.0 - cfg.correlation);
  const double shared = cfg.noise * std::sqrt(cfg.correlation);

  const int64_t m = static_cast<int64_t>(cfg.n_classes) * cfg.per_class;
  FeatureMatrix out;
  out.data.resize(m, cfg.dim);
  out.labels = std::vector<int>(static_cast<size_t>(m));

  int64_t row = 0;
  for (int c = 0; c < cfg.n_classes; ++c) {
    for (int64_t s = 0; s < cfg.per_class; ++s, ++row) {
      const double common = shared * rng::standard_normal(gen);
      for (int j = 0; j < cfg.dim; ++j)
        out.data(row, j) = centers(c, j) + indep * rng::standard_normal(gen) + common;
      (*out.labels)[static_cast<size_t>(row)] = c;
    }
  }
  return out;
}

}  // namespace gemb

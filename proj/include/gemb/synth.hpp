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

#include "gemb/dataset.hpp"

namespace gemb {

/// Labeled Gaussian-blob generator. Class means are drawn from
/// N(0, class_sep^2 I); samples add correlated within-class noise with
/// covariance noise^2 * ((1 - correlation) I + correlation * 11^T), an
/// equicorrelated full covariance with off-diagonal correlation
/// `correlation`.
struct SynthConfig {
  int n_classes = 10;
  int64_t per_class = 500;
  int dim = 32;
  double class_sep = 1.0;    // std of class means per dimension
  double noise = 0.3;        // within-class std per dimension
  double correlation = 0.0;  // within-class equicorrelation, in [0, 1)
  uint64_t seed = 0;
};

FeatureMatrix make_blobs(const SynthConfig& cfg);

}  // namespace gemb

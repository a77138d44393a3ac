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

#include <optional>
#include <string>

#include "gemb/embedding.hpp"
#include "gemb/gmm.hpp"
#include "gemb/hashing.hpp"
#include "gemb/pca.hpp"

namespace gemb {

/// Contents of a model container file. A file holds one or more typed
/// sections; unknown section types are rejected on read.
///
/// Container layout: magic "GEMM", u32 LE version = 1, then sections of
/// (u32 LE type, u64 LE payload length, payload). All floats are
/// float64 LE; matrices are written row-major after their dimensions.
struct ModelFile {
  std::optional<PcaModel> pca;
  std::optional<GmmModel> gmm;
  std::optional<GembModel> gemb;
  std::optional<ItqModel> itq;
  std::optional<LshModel> lsh;
};

void save_models(const std::string& path, const ModelFile& models);
ModelFile load_models(const std::string& path);

}  // namespace gemb

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

#include <stdexcept>
#include <string>
#include <utility>

namespace gemb {

/// Base class for all library errors. `kind()` names the error category so
/// the CLI can report which contract was violated.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(kind + ": " + message), kind_(std::move(kind)) {}

  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

// File could not be opened, read, or written.
struct IoError : Error {
  explicit IoError(const std::string& message) : Error("IoError", message) {}
};

// File exists but its contents do not match the expected layout.
struct FormatError : Error {
  explicit FormatError(const std::string& message) : Error("FormatError", message) {}
};

// Input values violate a data contract (non-finite entries, bad labels, ...).
struct DataError : Error {
  explicit DataError(const std::string& message) : Error("DataError", message) {}
};

// Configuration value outside its legal range.
struct ConfigError : Error {
  explicit ConfigError(const std::string& message) : Error("ConfigError", message) {}
};

// Dimension mismatch between an input and a model.
struct ShapeError : Error {
  explicit ShapeError(const std::string& message) : Error("ShapeError", message) {}
};

// Numerical routine failed (eigendecomposition, Cholesky, EM collapse, ...).
struct NumericalError : Error {
  explicit NumericalError(const std::string& message) : Error("NumericalError", message) {}
};

}  // namespace gemb

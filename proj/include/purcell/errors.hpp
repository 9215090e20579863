// Copyright 2026 The purcell-sim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace purcell {

/// Base class for every error raised by the library. `code()` is a stable
/// machine-readable tag used in sweep outputs.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

class LayoutError : public Error {
 public:
  explicit LayoutError(const std::string& what) : Error("layout_error", what) {}
};

class InvalidState : public Error {
 public:
  explicit InvalidState(const std::string& what) : Error("invalid_state", what) {}
};

class SpecError : public Error {
 public:
  explicit SpecError(const std::string& what) : Error("invalid_spec", what) {}
};

class AssemblyError : public Error {
 public:
  explicit AssemblyError(const std::string& what) : Error("assembly_error", what) {}
};

class DegenerateSteadyState : public Error {
 public:
  DegenerateSteadyState(int multiplicity, const std::string& what)
      : Error("degenerate_steady_state", what), multiplicity_(multiplicity) {}
  /// Estimated dimension of the numerical kernel (>= 2).
  int multiplicity() const noexcept { return multiplicity_; }

 private:
  int multiplicity_;
};

class SolverError : public Error {
 public:
  SolverError(const std::string& what, double residual = -1.0)
      : Error("solver_error", what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

class StiffnessError : public Error {
 public:
  explicit StiffnessError(const std::string& what) : Error("stiffness_error", what) {}
};

class HeraldImpossible : public Error {
 public:
  explicit HeraldImpossible(const std::string& what) : Error("herald_impossible", what) {}
};

class UndefinedStatistics : public Error {
 public:
  explicit UndefinedStatistics(const std::string& what)
      : Error("undefined_statistics", what) {}
};

class UnsupportedModel : public Error {
 public:
  explicit UnsupportedModel(const std::string& what) : Error("unsupported_model", what) {}
};

class PlanError : public Error {
 public:
  explicit PlanError(const std::string& what) : Error("invalid_plan", what) {}
};

}  // namespace purcell

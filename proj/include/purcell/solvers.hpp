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

// Steady states, time propagation and photon-heralded conditioning.

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "purcell/qop.hpp"

namespace purcell {

enum class SteadyMethod { null_space_lu, shifted_inverse_iteration };

const char* to_string(SteadyMethod m);

struct SteadyOptions {
  SteadyMethod method = SteadyMethod::null_space_lu;
  /// Restrict to the zero coherence-degree sector when the generator carries
  /// excitation numbers.
  bool use_symmetry = true;
  /// Estimated condition number above which the kernel counts as degenerate.
  double degeneracy_condition = 1e13;
  /// Largest unknown count handled by sparse direct factorization.
  Index direct_limit = 200000;
  /// Systems up to this size are factorized densely.
  Index dense_limit = 1024;
  /// Relative residual target ||L x|| / ||L|| for iterative paths.
  double residual_target = 1e-12;
  int max_iterations = 60;
  std::uint64_t seed = 12345;
};

/// Kernel vector of a generic generator: `weights` is the linear functional
/// that the generator annihilates from the left (the trace). Returns x with
/// weights . x = 1.
struct KernelProblem {
  const SparseMatrix* L = nullptr;
  Vector weights;
  /// Coherence degree of every coordinate, empty if unknown. When present
  /// and `use_symmetry` is on, only the degree-0 coordinates are solved.
  std::vector<int> degree;
};

struct KernelResult {
  Vector x;
  SteadyMethod method;
  /// Unknowns actually solved for (after sector restriction).
  Index solved_dimension = 0;
};

KernelResult solve_kernel(const KernelProblem& problem, const SteadyOptions& opts = {});

/// Induced 1-norm (maximum column sum).
double operator_norm(const SparseMatrix& L);

struct SteadyStateResult {
  DensityMatrix rho_ss;
  double residual = 0.0;  // ||L rho_ss||_F
  double relative_residual = 0.0;  // residual / ||L||_1
  SteadyMethod method;
};

SteadyStateResult steady_state(const Liouvillian& L, const SteadyOptions& opts = {});

using Observable = std::function<double(const DensityMatrix&)>;

struct EvolveOptions {
  double rtol = 1e-8;
  double atol = 1e-10;
  double initial_step = 0.0;  // 0 picks a default from ||L||
  long max_steps = 2000000;
  bool keep_states = true;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<DensityMatrix> states;
  std::map<std::string, std::vector<double>> observables;
  double max_trace_drift = 0.0;
  long steps = 0;
};

/// Generic propagation of y' = L y. `on_output` is called at every requested
/// time (t_grid must be non-decreasing and start at or after 0).
struct PropagationStats {
  long steps = 0;
  long rejected = 0;
};
PropagationStats propagate(const SparseMatrix& L, Vector y0, const std::vector<double>& t_grid,
                           const EvolveOptions& opts,
                           const std::function<void(std::size_t, const Vector&)>& on_output,
                           const std::function<double(const Vector&, const Vector&)>& error_norm =
                               nullptr);

/// Coherence degree n_i - n_j of every column-stacked coordinate (i, j), or
/// empty when L carries no excitation numbers.
std::vector<int> coherence_degrees(const Liouvillian& L);

/// propagate(), but when L is block diagonal in `degree` every sector that
/// y0 populates is integrated on its own (empty `degree` disables this).
PropagationStats propagate_by_sector(const SparseMatrix& L, const std::vector<int>& degree,
                                     const Vector& y0, const std::vector<double>& t_grid,
                                     const EvolveOptions& opts,
                                     const std::function<void(std::size_t, const Vector&)>& on_output);

Trajectory time_evolve(const Liouvillian& L, const DensityMatrix& rho0,
                       const std::vector<double>& t_grid,
                       const std::map<std::string, Observable>& observables = {},
                       const EvolveOptions& opts = {});

/// Logarithmic grid from t_min to t_max (inclusive), `points` values.
std::vector<double> log_time_grid(double t_min = 1e-6, double t_max = 10.0, int points = 141);

/// rho_c = J rho J^dag / Tr[J rho J^dag].
DensityMatrix conditional_state(const DensityMatrix& rho, const LabeledOperator& jump);

/// Fit rho(t) = A (1 - exp(-t / tau)) to samples; returns 1/tau.
double fit_saturating_rate(const std::vector<double>& t, const std::vector<double>& y);

}  // namespace purcell

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

// Two-emitter models with the cavity adiabatically eliminated, and the
// closed-form predictions that follow from them.
//
// Eigenbasis labels: |1> = |gg>, |2> = |->, |3> = |+>, |4> = |ee>, where
// |+-> are the one-excitation eigenstates of the emitter Hamiltonian with
// eigenvalue +-R. Transition operators are sigma_ij = |j><i| (from i down to
// j) with couplings g_ij = g <j| sigma_1 + sigma_2 |i> and frequencies
// omega_ij = lambda_i - lambda_j.

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "purcell/model.hpp"

namespace purcell {

struct EffectiveModel {
  Eigen::Vector4d eigenvalues;
  DenseMatrix eigenvectors;  // columns |1>..|4> in the product basis
  DenseMatrix g;             // g(i, j) = g_ij, zero-based indices
  Eigen::Matrix4d omega;     // omega(i, j) = lambda_i - lambda_j
  double Gamma_P = 0.0;
  DenseMatrix xi_S;          // product basis
};

/// Eigenbasis, couplings and the effective jump operator. Requires N = 2.
EffectiveModel effective_model(const SystemSpec& spec);

/// Emitter Hamiltonian (with drive) and all emitter channels, no cavity.
Liouvillian emitter_liouvillian(const SystemSpec& spec);

/// Cavity contribution after elimination, complete double sum over all
/// transitions. With `resonant_only` the sums are restricted to the two
/// transitions (2,1) and (4,3).
Liouvillian bloch_redfield_cavity_term(const SystemSpec& spec, bool resonant_only = false);

/// emitter_liouvillian + bloch_redfield_cavity_term.
Liouvillian effective_liouvillian(const SystemSpec& spec, bool resonant_only = false);

struct JumpModel {
  double Gamma_P = 0.0;
  DenseMatrix xi_S;
};

/// xi_S = |+><ee| + beta |gg><-| (incoherent), or
/// -|+><ee| + (beta/2) |gg><-| for the coherent-drive variant.
JumpModel effective_jump_model(const SystemSpec& spec, bool coherent = false);

/// emitter_liouvillian + Gamma_P D[xi_S].
Liouvillian jump_model_liouvillian(const SystemSpec& spec, bool coherent = false);

enum class DriveMode { incoherent, coherent };

struct CascadedPrediction {
  DriveMode mode = DriveMode::incoherent;
  // Three-population steady state at Delta_a = -J, beta = 0 (incoherent).
  double rho_S = 0.0;
  double rho_A = 0.0;
  double rho_ee = 0.0;
  // [1 + P/2Gamma_P + gamma_S/P + (Gamma_P/8P)(kappa/J)^2]^-1
  double rho_S_simplified = 0.0;
  // [1 + P/2Gamma_P + gamma_S/P]^-1, the three-level limit
  double rho_S_three_level = 0.0;
  double inv_tau_full = 0.0;    // incoherent, complete expression
  double inv_tau = 0.0;         // incoherent Gamma_P >> gamma_S form, or coherent
  bool low_pump_regime = false; // P < gamma, outside the stated validity

  /// rho_S_simplified * (1 - exp(-t * inv_tau)).
  double rho_S_at(double t) const;
};

/// Incoherent mode requires P > 0; coherent mode requires Omega > 0.
CascadedPrediction cascaded_prediction(const SystemSpec& spec,
                                       DriveMode mode = DriveMode::incoherent);

enum class OptimumRegime { cavity_limited, cooperativity_limited, intermediate };
const char* to_string(OptimumRegime r);

struct OptimalPump {
  double P_opt = 0.0;
  double rho_S_max = 0.0;
  double limit_cavity = 0.0;         // (1 + kappa/2J)^-1, valid for C >> J/kappa >> 1
  double limit_cooperativity = 0.0;  // (1 + 2/sqrt(C))^-1, valid for J/kappa >> C >> 1
  OptimumRegime regime = OptimumRegime::intermediate;
};

OptimalPump optimal_pump(const SystemSpec& spec);

/// "a >> b" is read as a / b >= 10.
constexpr double kMuchGreater = 10.0;
bool much_greater(double a, double b);

struct HierarchyGates {
  bool J_kappa = false;
  bool kappa_GammaP = false;
  bool GammaP_gamma = false;
  bool GammaP_P = false;
  // Auxiliary conditions.
  bool P_gamma = false;
  bool kappa_Omega2p = false;
  bool PS_gamma = false;

  bool all() const { return J_kappa && kappa_GammaP && GammaP_gamma && GammaP_P; }
};

HierarchyGates hierarchy_gates(const SystemSpec& spec);

/// Human-readable notes for specs outside the elimination's validity.
std::vector<std::string> validity_warnings(const SystemSpec& spec);

struct ScanResult {
  double argmax = 0.0;
  double max = 0.0;
};

/// Maximizes f on a log grid over [lo, hi] (points_per_decade samples per
/// decade), then refines around the best sample with Brent's method.
ScanResult log_scan_argmax(const std::function<double(double)>& f, double lo, double hi,
                           int points_per_decade = 40, bool refine = true);

}  // namespace purcell

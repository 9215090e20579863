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

// Entanglement and optical observables.

#pragma once

#include "purcell/qop.hpp"

namespace purcell {

enum class TargetKind { symmetric_S, antisymmetric_A, W_N, top, custom };

/// Pure target state. `dicke` marks amplitudes given over the maximal-j
/// Dicke block (m = j, j-1, ..., -j) instead of the 2^N product basis.
struct TargetState {
  TargetKind kind = TargetKind::custom;
  int N = 0;
  Vector amplitudes;
  bool dicke = false;
};

/// (|eg> + |ge>)/sqrt(2); sites ordered (emitter 0, emitter 1).
TargetState target_S();
/// (|eg> - |ge>)/sqrt(2).
TargetState target_A();
/// Equal superposition of the N states with a single emitter in |g>.
TargetState target_W(int N);
/// Normalizes `psi`; throws InvalidState for a zero vector.
TargetState target_custom(const Vector& psi);

/// Wootters concurrence of a two-qubit state.
double concurrence(const DensityMatrix& rho2);

/// <target|rho|target>; rho must live on the target's product space.
double fidelity(const DensityMatrix& rho, const TargetState& target);

/// Trace out the last site (the cavity).
DensityMatrix reduce_to_emitters(const DensityMatrix& rho);

/// Photon-number distribution of the last site.
Eigen::VectorXd photon_distribution(const DensityMatrix& rho);

/// <a^dag a> on the last site.
double cavity_population(const DensityMatrix& rho);

/// <a^dag a^dag a a> / <a^dag a>^2 on the last site; throws
/// UndefinedStatistics when <a^dag a> <= 1e-12.
double g2_zero(const DensityMatrix& rho);
double g2_from_distribution(const Eigen::VectorXd& p);

}  // namespace purcell

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

// Physical parameter sets and their translation into Hamiltonians,
// dissipator lists and Liouvillians. All rates and frequencies are in units
// of the local emitter decay rate gamma, and every Hamiltonian is written in
// the frame rotating at the bare emitter frequency (the coherent drive, when
// present, is resonant with it).

#pragma once

#include <json.hpp>

#include <functional>
#include <string>
#include <vector>

#include "purcell/qop.hpp"

namespace purcell {

enum class ModelKind { dimer, all_to_all };

const char* to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& s);

struct SystemSpec {
  int n_emitters = 2;
  ModelKind model_kind = ModelKind::dimer;
  double J = 0.0;
  double delta = 0.0;  // half splitting, dimer only
  double gamma = 1.0;
  double gamma_collective = 0.0;
  double P = 0.0;
  double Omega = 0.0;
  double Delta_a = 0.0;
  double kappa = 1.0;
  double g = 0.0;
  int n_max = 4;
  double Gamma_extra = 0.0;
  double gamma_phi = 0.0;
  double Gamma_phi = 0.0;

  /// Throws SpecError on any violated invariant.
  void validate() const;

  bool operator==(const SystemSpec&) const = default;
};

struct DerivedRates {
  double Omega_2p = 0.0;
  double Gamma_P = 0.0;
  double C = 0.0;
  double beta = 0.0;
  double R = 0.0;
  double gamma_S = 0.0;
  double gamma_A = 0.0;
  double P_S = 0.0;
};

DerivedRates derived_rates(const SystemSpec& spec);

/// Named parameter sets: "fig1" (H-aggregate dimer, incoherent pump at the
/// |ee> -> |S> resonance), "fig1_coherent", "w5", "w5_weak_J", "w50".
SystemSpec preset_spec(const std::string& name);
std::vector<std::string> preset_spec_names();

/// Flat key/value form. Unknown keys are rejected, missing keys keep their
/// defaults.
nlohmann::json to_json(const SystemSpec& spec);
SystemSpec spec_from_json(const nlohmann::json& j, SystemSpec base = {});

/// Numeric parameter access by key, used by sweeps and `--set`. Integer
/// fields (n_emitters, n_max) reject non-integral values.
double get_parameter(const SystemSpec& spec, const std::string& key);
void set_parameter(SystemSpec& spec, const std::string& key, double value);
bool is_parameter(const std::string& key);

/// [2]*N followed by the cavity [n_max+1].
SubsystemLayout full_layout(const SystemSpec& spec);
/// [2]*N, emitters only.
SubsystemLayout emitter_layout(const SystemSpec& spec);

/// Emitter-emitter coupling plus coherent drive on the emitter layout.
LabeledOperator build_emitter_hamiltonian(const SystemSpec& spec);
LabeledOperator build_hamiltonian(const SystemSpec& spec);

struct DissipatorTerm {
  double rate = 0.0;
  LabeledOperator A;
  LabeledOperator B;
  std::string label;
};

std::vector<DissipatorTerm> build_dissipators(const SystemSpec& spec);
/// The emitter-only channels (everything except the cavity loss) on the
/// emitter layout.
std::vector<DissipatorTerm> build_emitter_dissipators(const SystemSpec& spec);

Liouvillian assemble_liouvillian(const LabeledOperator& H,
                                 const std::vector<DissipatorTerm>& terms);

/// Re-evaluates `observable` with two more photons in the cavity; the
/// truncation counts as converged when the shift stays below `tol`.
struct TruncationCheck {
  double value = 0.0;
  double refined = 0.0;
  double shift = 0.0;
  bool converged = false;
};
TruncationCheck truncation_check(const SystemSpec& spec,
                                 const std::function<double(const SystemSpec&)>& observable,
                                 double tol = 1e-4);

/// Full emitter + cavity generator. When Omega = 0 the generator conserves
/// the excitation coherence degree and the excitation number of each basis
/// state is attached to the result.
Liouvillian build_liouvillian(const SystemSpec& spec);

}  // namespace purcell

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

#include "purcell/model.hpp"

#include <cmath>
#include <functional>
#include <map>

namespace purcell {

namespace {

struct Field {
  std::function<double(const SystemSpec&)> get;
  std::function<void(SystemSpec&, double)> set;
};

int to_int(double v, const std::string& key) {
  const double r = std::round(v);
  if (std::abs(r - v) > 1e-9 || !std::isfinite(v)) {
    throw SpecError(key + " must be an integer, got " + std::to_string(v));
  }
  return static_cast<int>(r);
}

#define PURCELL_FIELD(name) \
  { #name, {[](const SystemSpec& s) { return s.name; }, [](SystemSpec& s, double v) { s.name = v; }} }

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table = {
      PURCELL_FIELD(J),
      PURCELL_FIELD(delta),
      PURCELL_FIELD(gamma),
      PURCELL_FIELD(gamma_collective),
      PURCELL_FIELD(P),
      PURCELL_FIELD(Omega),
      PURCELL_FIELD(Delta_a),
      PURCELL_FIELD(kappa),
      PURCELL_FIELD(g),
      PURCELL_FIELD(Gamma_extra),
      PURCELL_FIELD(gamma_phi),
      PURCELL_FIELD(Gamma_phi),
      {"n_emitters",
       {[](const SystemSpec& s) { return static_cast<double>(s.n_emitters); },
        [](SystemSpec& s, double v) { s.n_emitters = to_int(v, "n_emitters"); }}},
      {"n_max",
       {[](const SystemSpec& s) { return static_cast<double>(s.n_max); },
        [](SystemSpec& s, double v) { s.n_max = to_int(v, "n_max"); }}},
  };
  return table;
}

#undef PURCELL_FIELD

LabeledOperator sigma_sum(const SubsystemLayout& layout, int n) {
  LabeledOperator s = LabeledOperator::zero(layout);
  for (int i = 0; i < n; ++i) s += embed(ops::sigma_minus(), i, layout);
  return s;
}

void add_emitter_terms(const SystemSpec& spec, const SubsystemLayout& layout,
                       std::vector<DissipatorTerm>& out) {
  const int n = spec.n_emitters;
  std::vector<LabeledOperator> sm, sz;
  for (int i = 0; i < n; ++i) {
    sm.push_back(embed(ops::sigma_minus(), i, layout));
    sz.push_back(embed(ops::sigma_z(), i, layout));
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double rate = (i == j ? spec.gamma : spec.gamma_collective) / 2.0;
      out.push_back({rate, sm[static_cast<std::size_t>(i)], sm[static_cast<std::size_t>(j)],
                     "gamma_" + std::to_string(i) + std::to_string(j)});
    }
  }
  for (int i = 0; i < n; ++i) {
    out.push_back({spec.P / 2.0, sm[static_cast<std::size_t>(i)].dagger(),
                   sm[static_cast<std::size_t>(i)].dagger(), "pump_" + std::to_string(i)});
  }
  if (spec.Gamma_extra != 0.0) {
    for (int i = 0; i < n; ++i) {
      out.push_back({spec.Gamma_extra / 2.0, sm[static_cast<std::size_t>(i)],
                     sm[static_cast<std::size_t>(i)], "extra_decay_" + std::to_string(i)});
    }
  }
  if (spec.gamma_phi != 0.0) {
    for (int i = 0; i < n; ++i) {
      out.push_back({spec.gamma_phi / 2.0, sz[static_cast<std::size_t>(i)],
                     sz[static_cast<std::size_t>(i)], "dephasing_" + std::to_string(i)});
    }
  }
  if (spec.Gamma_phi != 0.0) {
    LabeledOperator total = LabeledOperator::zero(layout);
    for (const auto& z : sz) total += z;
    out.push_back({spec.Gamma_phi / 2.0, total, total, "collective_dephasing"});
  }
}

LabeledOperator emitter_part(const SystemSpec& spec, const SubsystemLayout& layout) {
  const int n = spec.n_emitters;
  LabeledOperator H = LabeledOperator::zero(layout);
  if (spec.model_kind == ModelKind::dimer) {
    const LabeledOperator s1 = embed(ops::sigma_minus(), 0, layout);
    const LabeledOperator s2 = embed(ops::sigma_minus(), 1, layout);
    H += cplx(-spec.delta) * (s1.dagger() * s1);
    H += cplx(spec.delta) * (s2.dagger() * s2);
    H += cplx(spec.J) * (s1.dagger() * s2 + s2.dagger() * s1);
  } else {
    const LabeledOperator S = sigma_sum(layout, n);
    H += cplx(spec.J) * (S.dagger() * S);
  }
  if (spec.Omega != 0.0) {
    const LabeledOperator S = sigma_sum(layout, n);
    H += cplx(spec.Omega) * (S + S.dagger());
  }
  return H;
}

void check_hermitian(const LabeledOperator& H) {
  const double scale = std::max(1.0, H.norm());
  if (!H.is_hermitian(1e-12 * scale)) throw AssemblyError("assembled Hamiltonian is not Hermitian");
}

}  // namespace

const char* to_string(ModelKind kind) {
  return kind == ModelKind::dimer ? "dimer" : "all_to_all";
}

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "dimer") return ModelKind::dimer;
  if (s == "all_to_all") return ModelKind::all_to_all;
  throw SpecError("unknown model_kind '" + s + "' (expected dimer or all_to_all)");
}

void SystemSpec::validate() const {
  if (n_emitters < 1) throw SpecError("n_emitters must be positive");
  if (model_kind == ModelKind::dimer && n_emitters != 2) {
    throw SpecError("the dimer model has exactly two emitters");
  }
  if (n_max < 1) throw SpecError("n_max must be at least 1");
  const std::pair<const char*, double> finite[] = {
      {"J", J},         {"delta", delta}, {"gamma", gamma}, {"gamma_collective", gamma_collective},
      {"P", P},         {"Omega", Omega}, {"Delta_a", Delta_a}, {"kappa", kappa},
      {"g", g},         {"Gamma_extra", Gamma_extra}, {"gamma_phi", gamma_phi},
      {"Gamma_phi", Gamma_phi}};
  for (const auto& [name, v] : finite) {
    if (!std::isfinite(v)) throw SpecError(std::string(name) + " is not finite");
  }
  const std::pair<const char*, double> rates[] = {
      {"gamma", gamma}, {"P", P}, {"kappa", kappa}, {"Gamma_extra", Gamma_extra},
      {"gamma_phi", gamma_phi}, {"Gamma_phi", Gamma_phi}};
  for (const auto& [name, v] : rates) {
    if (v < 0.0) throw SpecError(std::string(name) + " must be non-negative");
  }
  if (std::abs(gamma_collective) > gamma) {
    throw SpecError("|gamma_collective| must not exceed gamma");
  }
}

DerivedRates derived_rates(const SystemSpec& spec) {
  DerivedRates r;
  r.Omega_2p = spec.J != 0.0 ? 2.0 * spec.Omega * spec.Omega / spec.J : 0.0;
  r.Gamma_P = spec.kappa > 0.0 ? 4.0 * spec.g * spec.g / spec.kappa : 0.0;
  r.C = r.Gamma_P / spec.gamma;
  r.beta = spec.model_kind == ModelKind::dimer && spec.J != 0.0
               ? std::atan(std::abs(spec.delta / spec.J))
               : 0.0;
  r.R = spec.model_kind == ModelKind::dimer ? std::hypot(spec.J, spec.delta) : std::abs(spec.J);
  r.gamma_S = spec.gamma + spec.gamma_collective;
  r.gamma_A = spec.gamma - spec.gamma_collective;
  r.P_S = r.Gamma_P > 0.0 ? r.Omega_2p * r.Omega_2p / r.Gamma_P : 0.0;
  return r;
}

SystemSpec preset_spec(const std::string& name) {
  SystemSpec s;
  if (name == "fig1" || name == "fig1_coherent") {
    s.model_kind = ModelKind::dimer;
    s.n_emitters = 2;
    s.J = 9.18e4;
    s.delta = 1e-2 * s.J;
    s.gamma_collective = 0.999;
    s.kappa = 1e4;
    s.g = 0.1 * s.kappa;
    s.Delta_a = -s.J;
    s.n_max = 4;
    if (name == "fig1") {
      s.P = 40.0;
    } else {
      s.Omega = 1e4;
    }
    return s;
  }
  if (name == "w5" || name == "w5_weak_J" || name == "w50") {
    s.model_kind = ModelKind::all_to_all;
    s.gamma_collective = 0.999;
    s.n_max = 4;
    if (name == "w50") {
      s.n_emitters = 50;
      s.J = 1e5;
      s.kappa = 12500.0;  // C = 0.04 kappa = 500
      s.P = 500.0;
      // Photon occupation stays below 0.1; three photons are plenty.
      s.n_max = 3;
    } else {
      s.n_emitters = 5;
      if (name == "w5") {
        s.J = 1e5;
        s.kappa = 12421.0;  // C = 496.84
        s.P = 132.3;
      } else {
        // With J = 1e3 the J = 1e5 cavity no longer resolves the ladder
        // (kappa >> J). This is the best-performing cavity at g = 0.1 kappa.
        s.J = 1e3;
        s.kappa = 500.0;  // C = 20
        s.P = 30.0;
      }
    }
    s.g = 0.1 * s.kappa;
    s.Delta_a = s.J * (2.0 - s.n_emitters);
    return s;
  }
  throw SpecError("unknown preset '" + name + "'");
}

std::vector<std::string> preset_spec_names() {
  return {"fig1", "fig1_coherent", "w5", "w5_weak_J", "w50"};
}

nlohmann::json to_json(const SystemSpec& spec) {
  nlohmann::json j;
  j["model_kind"] = to_string(spec.model_kind);
  for (const auto& [key, f] : fields()) {
    if (key == "n_emitters" || key == "n_max") {
      j[key] = static_cast<int>(f.get(spec));
    } else {
      j[key] = f.get(spec);
    }
  }
  return j;
}

SystemSpec spec_from_json(const nlohmann::json& j, SystemSpec base) {
  if (!j.is_object()) throw SpecError("system spec must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() == "model_kind") {
      if (!it.value().is_string()) throw SpecError("model_kind must be a string");
      base.model_kind = model_kind_from_string(it.value().get<std::string>());
      continue;
    }
    const auto f = fields().find(it.key());
    if (f == fields().end()) throw SpecError("unknown system spec key '" + it.key() + "'");
    if (!it.value().is_number()) throw SpecError(it.key() + " must be a number");
    f->second.set(base, it.value().get<double>());
  }
  base.validate();
  return base;
}

double get_parameter(const SystemSpec& spec, const std::string& key) {
  const auto f = fields().find(key);
  if (f == fields().end()) throw SpecError("unknown parameter '" + key + "'");
  return f->second.get(spec);
}

void set_parameter(SystemSpec& spec, const std::string& key, double value) {
  const auto f = fields().find(key);
  if (f == fields().end()) throw SpecError("unknown parameter '" + key + "'");
  f->second.set(spec, value);
}

bool is_parameter(const std::string& key) { return fields().count(key) > 0; }

SubsystemLayout full_layout(const SystemSpec& spec) {
  std::vector<int> dims(static_cast<std::size_t>(spec.n_emitters), 2);
  dims.push_back(spec.n_max + 1);
  return SubsystemLayout(std::move(dims));
}

SubsystemLayout emitter_layout(const SystemSpec& spec) {
  return SubsystemLayout(std::vector<int>(static_cast<std::size_t>(spec.n_emitters), 2));
}

LabeledOperator build_emitter_hamiltonian(const SystemSpec& spec) {
  spec.validate();
  LabeledOperator H = emitter_part(spec, emitter_layout(spec));
  check_hermitian(H);
  return H;
}

LabeledOperator build_hamiltonian(const SystemSpec& spec) {
  spec.validate();
  const SubsystemLayout layout = full_layout(spec);
  LabeledOperator H = emitter_part(spec, layout);
  const int cav = spec.n_emitters;
  const LabeledOperator a = embed(ops::destroy(spec.n_max + 1), cav, layout);
  H += cplx(spec.Delta_a) * (a.dagger() * a);
  const LabeledOperator S = sigma_sum(layout, spec.n_emitters);
  H += cplx(spec.g) * (a.dagger() * S + S.dagger() * a);
  check_hermitian(H);
  return H;
}

std::vector<DissipatorTerm> build_dissipators(const SystemSpec& spec) {
  spec.validate();
  const SubsystemLayout layout = full_layout(spec);
  std::vector<DissipatorTerm> out;
  const LabeledOperator a = embed(ops::destroy(spec.n_max + 1), spec.n_emitters, layout);
  out.push_back({spec.kappa / 2.0, a, a, "cavity_loss"});
  add_emitter_terms(spec, layout, out);
  return out;
}

std::vector<DissipatorTerm> build_emitter_dissipators(const SystemSpec& spec) {
  spec.validate();
  std::vector<DissipatorTerm> out;
  add_emitter_terms(spec, emitter_layout(spec), out);
  return out;
}

Liouvillian assemble_liouvillian(const LabeledOperator& H,
                                 const std::vector<DissipatorTerm>& terms) {
  Liouvillian L = hamiltonian_superop(H);
  for (const auto& t : terms) {
    if (t.rate == 0.0) continue;
    L += t.rate * lindblad_dissipator(t.A, t.B);
  }
  return L;
}

Liouvillian build_liouvillian(const SystemSpec& spec) {
  Liouvillian L = assemble_liouvillian(build_hamiltonian(spec), build_dissipators(spec));
  if (spec.Omega == 0.0) {
    const SubsystemLayout layout = full_layout(spec);
    std::vector<int> n(static_cast<std::size_t>(layout.total_dim()));
    const int cav_dim = spec.n_max + 1;
    for (Index k = 0; k < layout.total_dim(); ++k) {
      const Index emitters = k / cav_dim;
      const int photons = static_cast<int>(k % cav_dim);
      n[static_cast<std::size_t>(k)] =
          __builtin_popcountll(static_cast<unsigned long long>(emitters)) + photons;
    }
    L.set_excitation_numbers(std::move(n));
  }
  return L;
}

TruncationCheck truncation_check(const SystemSpec& spec,
                                 const std::function<double(const SystemSpec&)>& observable, double tol) {
  SystemSpec wider = spec;
  wider.n_max += 2;
  TruncationCheck c;
  c.value = observable(spec);
  c.refined = observable(wider);
  c.shift = std::abs(c.refined - c.value);
  c.converged = c.shift < tol;
  return c;
}

}  // namespace purcell

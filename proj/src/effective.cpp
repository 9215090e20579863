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

#include "purcell/effective.hpp"

#include <unsupported/Eigen/KroneckerProduct>
#include <boost/math/tools/minima.hpp>

#include <cmath>
#include <limits>

namespace purcell {

namespace {

constexpr Index kGG = 0, kGE = 1, kEG = 2, kEE = 3;

void require_pair(const SystemSpec& spec) {
  spec.validate();
  if (spec.n_emitters != 2) {
    throw UnsupportedModel("the eliminated-cavity model is defined for two emitters");
  }
}

DenseMatrix eigenvectors_of(const SystemSpec& spec) {
  DenseMatrix V = DenseMatrix::Zero(4, 4);
  double s = 0.0;
  if (spec.model_kind == ModelKind::dimer) s = std::sin(derived_rates(spec).beta);
  if (spec.delta < 0.0) s = -s;
  const double a = std::sqrt((1.0 - s) / 2.0), b = std::sqrt((1.0 + s) / 2.0);
  V(kGG, 0) = 1.0;
  // |-> and |+> for J > 0; for J < 0 the two swap energetic order but the
  // labels stay tied to the sign of the eigenvalue of the exchange term.
  V(kEG, 1) = b;
  V(kGE, 1) = -a;
  V(kEG, 2) = a;
  V(kGE, 2) = b;
  V(kEE, 3) = 1.0;
  return V;
}

SparseMatrix to_sparse(const DenseMatrix& m) {
  SparseMatrix s = m.sparseView();
  s.makeCompressed();
  return s;
}

}  // namespace

EffectiveModel effective_model(const SystemSpec& spec) {
  require_pair(spec);
  SystemSpec bare = spec;
  bare.Omega = 0.0;
  const DenseMatrix Hq = build_emitter_hamiltonian(bare).dense();
  const SubsystemLayout layout = emitter_layout(spec);
  const DenseMatrix S = embed(ops::sigma_minus(), 0, layout).dense() +
                        embed(ops::sigma_minus(), 1, layout).dense();

  EffectiveModel m;
  m.eigenvectors = eigenvectors_of(spec);
  const DenseMatrix& V = m.eigenvectors;
  for (int i = 0; i < 4; ++i) {
    m.eigenvalues(i) = (V.col(i).adjoint() * Hq * V.col(i))(0, 0).real();
  }
  const double resid = (Hq * V - V * m.eigenvalues.cast<cplx>().asDiagonal()).cwiseAbs().maxCoeff();
  if (resid > 1e-9 * std::max(1.0, Hq.cwiseAbs().maxCoeff())) {
    throw AssemblyError("analytic emitter eigenbasis does not diagonalize the Hamiltonian");
  }
  m.g = DenseMatrix::Zero(4, 4);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      m.g(i, j) = spec.g * (V.col(j).adjoint() * S * V.col(i))(0, 0);
      m.omega(i, j) = m.eigenvalues(i) - m.eigenvalues(j);
    }
  }
  const JumpModel jm = effective_jump_model(spec);
  m.Gamma_P = jm.Gamma_P;
  m.xi_S = jm.xi_S;
  return m;
}

Liouvillian emitter_liouvillian(const SystemSpec& spec) {
  return assemble_liouvillian(build_emitter_hamiltonian(spec), build_emitter_dissipators(spec));
}

Liouvillian bloch_redfield_cavity_term(const SystemSpec& spec, bool resonant_only) {
  const EffectiveModel m = effective_model(spec);
  const SubsystemLayout layout = emitter_layout(spec);
  const DenseMatrix& V = m.eigenvectors;

  DenseMatrix X = DenseMatrix::Zero(4, 4);
  DenseMatrix Lambda = DenseMatrix::Zero(4, 4);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      if (resonant_only && !((i == 1 && j == 0) || (i == 3 && j == 2))) continue;
      const DenseMatrix sij = V.col(j) * V.col(i).adjoint();  // |j><i|
      const cplx c = m.g(i, j) / cplx(spec.kappa / 2.0, spec.Delta_a - m.omega(i, j));
      X += c * sij;
      Lambda += m.g(i, j) * sij;
    }
  }
  // X rho Lambda^dag - Lambda^dag X rho + Lambda rho X^dag - rho X^dag Lambda
  const SparseMatrix I = to_sparse(DenseMatrix::Identity(4, 4));
  const SparseMatrix x = to_sparse(X), l = to_sparse(Lambda);
  const SparseMatrix left = to_sparse(Lambda.adjoint() * X);
  const SparseMatrix right = to_sparse(X.adjoint() * Lambda);
  SparseMatrix sup = sandwich_superop(x, l) + sandwich_superop(l, x);
  sup -= SparseMatrix(Eigen::kroneckerProduct(I, left));
  sup -= SparseMatrix(Eigen::kroneckerProduct(SparseMatrix(right.transpose()), I));
  sup.prune(cplx(0.0));
  return Liouvillian(layout, std::move(sup));
}

Liouvillian effective_liouvillian(const SystemSpec& spec, bool resonant_only) {
  return emitter_liouvillian(spec) + bloch_redfield_cavity_term(spec, resonant_only);
}

JumpModel effective_jump_model(const SystemSpec& spec, bool coherent) {
  require_pair(spec);
  const DerivedRates r = derived_rates(spec);
  const DenseMatrix V = eigenvectors_of(spec);
  const Vector gg = V.col(0), minus = V.col(1), plus = V.col(2), ee = V.col(3);
  JumpModel out;
  out.Gamma_P = r.Gamma_P;
  if (coherent) {
    out.xi_S = -plus * ee.adjoint() + (r.beta / 2.0) * gg * minus.adjoint();
  } else {
    out.xi_S = plus * ee.adjoint() + r.beta * gg * minus.adjoint();
  }
  return out;
}

Liouvillian jump_model_liouvillian(const SystemSpec& spec, bool coherent) {
  const JumpModel jm = effective_jump_model(spec, coherent);
  const SubsystemLayout layout = emitter_layout(spec);
  const LabeledOperator xi(layout, jm.xi_S);
  return emitter_liouvillian(spec) + jm.Gamma_P * lindblad_dissipator(xi, xi);
}

double CascadedPrediction::rho_S_at(double t) const {
  return rho_S_simplified * -std::expm1(-t * inv_tau);
}

CascadedPrediction cascaded_prediction(const SystemSpec& spec, DriveMode mode) {
  spec.validate();
  const DerivedRates r = derived_rates(spec);
  CascadedPrediction out;
  out.mode = mode;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (mode == DriveMode::coherent) {
    if (!(spec.Omega > 0.0) || spec.J == 0.0) {
      throw SpecError("coherent predictions need Omega > 0 and J != 0");
    }
    out.rho_S = out.rho_A = out.rho_ee = nan;
    out.rho_S_simplified = out.rho_S_three_level = out.inv_tau_full = nan;
    const cplx root = std::sqrt(cplx(r.Gamma_P * r.Gamma_P - 4.0 * r.Omega_2p * r.Omega_2p, 0.0));
    out.inv_tau = (r.Gamma_P - root.real()) / 2.0;
    return out;
  }
  if (!(spec.P > 0.0)) throw SpecError("incoherent predictions need P > 0");
  if (!(spec.kappa > 0.0) || spec.J == 0.0) throw SpecError("predictions need kappa > 0 and J != 0");

  const double P = spec.P, g2 = spec.g * spec.g, g4 = g2 * g2, J2 = spec.J * spec.J;
  const double k = spec.kappa, gS = r.gamma_S, G = r.Gamma_P;
  const double den = 8.0 * g2 * P * J2 * (P + gS) + 4.0 * g4 * P * k + J2 * k * P * P * P;
  out.rho_S = P * P * J2 * (8.0 * g2 + gS * k) / den;
  out.rho_A = P * (4.0 * g2 * J2 * gS + 2.0 * g4 * k + J2 * k * gS * spec.gamma) / den;
  out.rho_ee = P * P * J2 * k * (P + spec.gamma) / den;

  const double kJ = k / spec.J;
  out.rho_S_simplified = G > 0.0 ? 1.0 / (1.0 + P / (2.0 * G) + gS / P + G / (8.0 * P) * kJ * kJ) : 0.0;
  out.rho_S_three_level = G > 0.0 ? 1.0 / (1.0 + P / (2.0 * G) + gS / P) : 0.0;
  out.inv_tau_full = P + G + gS / 2.0 - std::sqrt(P * gS + 0.25 * (gS - 2.0 * G) * (gS - 2.0 * G));
  out.inv_tau = P + G - std::sqrt(G * G + P * gS);
  out.low_pump_regime = P < spec.gamma;
  return out;
}

const char* to_string(OptimumRegime r) {
  switch (r) {
    case OptimumRegime::cavity_limited: return "cavity_limited";
    case OptimumRegime::cooperativity_limited: return "cooperativity_limited";
    default: return "intermediate";
  }
}

OptimalPump optimal_pump(const SystemSpec& spec) {
  spec.validate();
  const DerivedRates r = derived_rates(spec);
  if (!(r.C > 0.0) || !(spec.J > 0.0)) throw SpecError("optimal pump needs C > 0 and J > 0");
  const double kJ = spec.kappa / spec.J;
  const double root = std::sqrt(kJ * kJ + 16.0 / r.C);
  OptimalPump out;
  out.P_opt = r.Gamma_P / 2.0 * root;
  out.rho_S_max = 1.0 / (1.0 + 0.5 * root);
  out.limit_cavity = 1.0 / (1.0 + kJ / 2.0);
  out.limit_cooperativity = 1.0 / (1.0 + 2.0 / std::sqrt(r.C));
  const double Jk = spec.J / spec.kappa;
  if (much_greater(r.C, Jk) && much_greater(Jk, 1.0)) {
    out.regime = OptimumRegime::cavity_limited;
  } else if (much_greater(Jk, r.C) && much_greater(r.C, 1.0)) {
    out.regime = OptimumRegime::cooperativity_limited;
  }
  return out;
}

bool much_greater(double a, double b) { return a >= kMuchGreater * b; }

HierarchyGates hierarchy_gates(const SystemSpec& spec) {
  const DerivedRates r = derived_rates(spec);
  HierarchyGates h;
  h.J_kappa = much_greater(std::abs(spec.J), spec.kappa);
  h.kappa_GammaP = much_greater(spec.kappa, r.Gamma_P);
  h.GammaP_gamma = much_greater(r.Gamma_P, spec.gamma);
  h.GammaP_P = much_greater(r.Gamma_P, spec.P);
  h.P_gamma = much_greater(spec.P, spec.gamma);
  h.kappa_Omega2p = much_greater(spec.kappa, r.Omega_2p);
  h.PS_gamma = much_greater(r.P_S, spec.gamma);
  return h;
}

std::vector<std::string> validity_warnings(const SystemSpec& spec) {
  std::vector<std::string> out;
  const HierarchyGates h = hierarchy_gates(spec);
  if (!much_greater(spec.kappa, std::abs(spec.g))) out.push_back("kappa >> g violated: cavity elimination is unreliable");
  if (!h.J_kappa) out.push_back("J >> kappa violated: transitions are not frequency resolved");
  if (!h.kappa_GammaP) out.push_back("kappa >> Gamma_P violated");
  if (!h.GammaP_gamma) out.push_back("Gamma_P >> gamma violated");
  if (spec.P > 0.0 && spec.P < spec.gamma) out.push_back("P < gamma: closed-form populations outside their stated validity");
  return out;
}

ScanResult log_scan_argmax(const std::function<double(double)>& f, double lo, double hi,
                           int points_per_decade, bool refine) {
  if (!(lo > 0.0 && hi > lo) || points_per_decade < 1) throw SpecError("invalid scan range");
  const double a = std::log10(lo), b = std::log10(hi);
  const int n = std::max(2, static_cast<int>(std::ceil((b - a) * points_per_decade)) + 1);
  ScanResult best{lo, -std::numeric_limits<double>::infinity()};
  double best_x = a;
  for (int i = 0; i < n; ++i) {
    const double x = a + (b - a) * i / (n - 1);
    const double v = f(std::pow(10.0, x));
    if (v > best.max) {
      best = {std::pow(10.0, x), v};
      best_x = x;
    }
  }
  if (refine) {
    const double step = (b - a) / (n - 1);
    const auto neg = [&](double x) { return -f(std::pow(10.0, x)); };
    const auto r = boost::math::tools::brent_find_minima(neg, std::max(a, best_x - step),
                                                         std::min(b, best_x + step), 30);
    if (-r.second > best.max) best = {std::pow(10.0, r.first), -r.second};
  }
  return best;
}

}  // namespace purcell

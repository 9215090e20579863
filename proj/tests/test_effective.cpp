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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "purcell/effective.hpp"
#include "purcell/metrics.hpp"
#include "purcell/model.hpp"
#include "purcell/solvers.hpp"
#include "test_util.hpp"

using namespace purcell;
using purcell::testing::Rng;

namespace {

const double kSqrtHalf = 1.0 / std::sqrt(2.0);

Vector two_qubit(double gg, double ge, double eg, double ee) {
  Vector v(4);
  v << gg, ge, eg, ee;
  return v;
}

double full_fidelity_S(const SystemSpec& s) {
  return fidelity(reduce_to_emitters(steady_state(build_liouvillian(s)).rho_ss), target_S());
}

// Spec inside J >> kappa >> Gamma_P >> P >> gamma, every ratio drawn from
// [10, 30].
SystemSpec deep_hierarchy(Rng& rng) {
  using purcell::testing::uniform;
  SystemSpec s = preset_spec("fig1");
  s.P = uniform(rng, 10, 30);
  const double GP = s.P * uniform(rng, 10, 30);
  s.kappa = GP * uniform(rng, 10, 30);
  s.J = s.kappa * uniform(rng, 10, 30);
  s.delta = 1e-2 * s.J;
  s.Delta_a = -s.J;
  s.g = std::sqrt(GP * s.kappa / 4.0);
  s.n_max = 3;
  return s;
}

}  // namespace

TEST_CASE("jump operator at zero mixing angle is |S><ee|") {
  SystemSpec s = preset_spec("fig1");
  s.delta = 0.0;
  const Vector S = two_qubit(0, kSqrtHalf, kSqrtHalf, 0), ee = two_qubit(0, 0, 0, 1);
  const DenseMatrix want = S * ee.adjoint();
  CHECK((effective_jump_model(s).xi_S - want).cwiseAbs().maxCoeff() < 1e-10);
  const auto m = effective_model(s);
  CHECK((m.xi_S - want).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(m.Gamma_P == doctest::Approx(400.0));
}

TEST_CASE("subradiant branch weight at delta = 0.01 J") {
  const SystemSpec s = preset_spec("fig1");
  const auto jm = effective_jump_model(s);
  const double beta = derived_rates(s).beta;
  CHECK(beta * beta == doctest::Approx(1e-4).epsilon(1e-3));
  const auto m = effective_model(s);
  // |gg><-| weight relative to |+><ee|.
  const Vector plus = m.eigenvectors.col(2), minus = m.eigenvectors.col(1);
  const Vector gg = m.eigenvectors.col(0), ee = m.eigenvectors.col(3);
  const cplx top = plus.dot(jm.xi_S * ee);
  const cplx sub = gg.dot(jm.xi_S * minus);
  CHECK(std::norm(sub / top) == doctest::Approx(1e-4).epsilon(1e-3));

  const auto coh = effective_jump_model(s, true);
  CHECK(plus.dot(coh.xi_S * ee).real() == doctest::Approx(-1.0));
  CHECK(std::abs(gg.dot(coh.xi_S * minus)) == doctest::Approx(beta / 2).epsilon(1e-10));
}

TEST_CASE("coupling sum rule") {
  Rng rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    SystemSpec s = preset_spec("fig1");
    s.delta = purcell::testing::uniform(rng, -0.5, 0.5) * s.J;
    s.g = purcell::testing::uniform(rng, 1, 2000);
    const auto m = effective_model(s);
    const SubsystemLayout l({2, 2});
    const DenseMatrix Sm = (embed(ops::sigma_minus(), 0, l) + embed(ops::sigma_minus(), 1, l)).dense();
    for (int i = 0; i < 4; ++i) {
      double sum = 0.0;
      for (int j = 0; j < 4; ++j) sum += std::norm(m.g(i, j));
      const Vector v = m.eigenvectors.col(i);
      const double want = s.g * s.g * v.dot(Sm.adjoint() * Sm * v).real();
      CHECK(sum == doctest::Approx(want).epsilon(1e-10));
    }
  }
}

TEST_CASE("eigenvalues of the emitter Hamiltonian are 0, -R, +R, 0") {
  const SystemSpec s = preset_spec("fig1");
  const auto m = effective_model(s);
  const double R = derived_rates(s).R;
  CHECK(std::abs(m.eigenvalues(0)) < 1e-6);
  CHECK(m.eigenvalues(1) == doctest::Approx(-R));
  CHECK(m.eigenvalues(2) == doctest::Approx(R));
  CHECK(std::abs(m.eigenvalues(3)) < 1e-6);
  CHECK(m.omega(1, 0) == doctest::Approx(-R));
}

TEST_CASE("the resonant transitions dominate at Delta_a = -J") {
  SystemSpec s = preset_spec("fig1");
  s.delta = 1e-6 * s.J;
  const auto m = effective_model(s);
  // Lorentzian weight of each emission channel i -> j.
  double resonant_min = 1e300, other_max = 0.0;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      if (std::abs(m.g(i, j)) < 1e-12 * s.g) continue;
      const double w = std::norm(m.g(i, j)) /
                       std::abs(cplx(s.kappa / 2, s.Delta_a - m.omega(i, j)));
      const bool resonant = (i == 1 && j == 0) || (i == 3 && j == 2);
      if (resonant) resonant_min = std::min(resonant_min, w);
      else other_max = std::max(other_max, w);
    }
  }
  // (2,1) carries weight beta^2 at small delta, so compare the bright (4,3)
  // branch to everything off resonance; the suppression is ~ kappa / J.
  const double bright = std::norm(m.g(3, 2)) / (s.kappa / 2);
  CHECK(other_max < 0.1 * bright);
  CHECK(resonant_min > 0.0);
  CHECK(std::abs(m.omega(3, 2) - s.Delta_a) < 1e-6 * s.J);
}

TEST_CASE("restricting the double sum to the resonant set changes little") {
  const SystemSpec s = preset_spec("fig1");
  const auto a = steady_state(effective_liouvillian(s, false)).rho_ss;
  const auto b = steady_state(effective_liouvillian(s, true)).rho_ss;
  CHECK(trace_distance(a.matrix(), b.matrix()) < 2e-2);
}

TEST_CASE("no coupling, no cavity term") {
  SystemSpec s = preset_spec("fig1");
  s.g = 0.0;
  CHECK(DenseMatrix(bloch_redfield_cavity_term(s).superop()).norm() == 0.0);
}

TEST_CASE("Bloch-Redfield steady state matches the full model") {
  const SystemSpec s = preset_spec("fig1");
  const auto full = reduce_to_emitters(steady_state(build_liouvillian(s)).rho_ss);
  const auto eff = steady_state(effective_liouvillian(s)).rho_ss;
  CHECK(trace_distance(full.matrix(), eff.matrix()) < 1e-2);
}

TEST_CASE("closed-form numbers at the fig1 operating point") {
  const SystemSpec s = preset_spec("fig1");
  const auto p = cascaded_prediction(s);
  CHECK(p.rho_S_simplified == doctest::Approx(1.0 / (1 + 0.05 + 0.05 + 0.01482)).epsilon(1e-4));
  CHECK(p.rho_S_simplified == doctest::Approx(0.897).epsilon(1.2e-3));
  CHECK(p.inv_tau == doctest::Approx(440.0 - std::sqrt(160080.0)).epsilon(1e-3));
  CHECK(p.inv_tau == doctest::Approx(39.9).epsilon(2e-3));
  CHECK(p.rho_S + p.rho_A + p.rho_ee <= 1.0 + 1e-12);
  CHECK(p.rho_S > 0.85);
  CHECK_FALSE(p.low_pump_regime);
  CHECK(p.rho_S_at(0.0) == 0.0);
  CHECK(p.rho_S_at(1.0 / p.inv_tau) == doctest::Approx(p.rho_S_simplified * (1 - std::exp(-1.0))));

  const auto o = optimal_pump(s);
  CHECK(o.P_opt == doctest::Approx(200.0 * std::sqrt(0.011867 + 0.04)).epsilon(1e-3));
  CHECK(o.P_opt == doctest::Approx(45.5).epsilon(2e-3));

  SystemSpec low = s;
  low.P = 0.5;
  CHECK(cascaded_prediction(low).low_pump_regime);
  low.P = 0.0;
  CHECK_THROWS_AS(cascaded_prediction(low), SpecError);
  CHECK_THROWS_AS(cascaded_prediction(s, DriveMode::coherent), SpecError);
}

TEST_CASE("optimal population limits") {
  SystemSpec s = preset_spec("fig1");
  // C -> infinity at kappa / J = 0.1.
  s.J = 10 * s.kappa;
  s.g = std::sqrt(1e9 * s.kappa / 4);
  auto o = optimal_pump(s);
  CHECK(o.limit_cavity == doctest::Approx(1.0 / 1.05));
  CHECK(o.rho_S_max == doctest::Approx(0.952).epsilon(1e-3));
  CHECK(o.regime == OptimumRegime::cavity_limited);
  // kappa / J -> 0 at C = 100.
  s.J = 1e9;
  s.g = std::sqrt(100 * s.kappa / 4);
  o = optimal_pump(s);
  CHECK(o.limit_cooperativity == doctest::Approx(1.0 / 1.2));
  CHECK(o.rho_S_max == doctest::Approx(0.833).epsilon(1e-3));
  CHECK(o.regime == OptimumRegime::cooperativity_limited);
  CHECK(optimal_pump(preset_spec("fig1")).regime == OptimumRegime::intermediate);
}

TEST_CASE("timescales in the Purcell-dominated limit") {
  SystemSpec s = preset_spec("fig1");
  s.g = std::sqrt(1e8 * s.kappa / 4);  // Gamma_P = 1e8
  s.P = 40.0;
  CHECK(cascaded_prediction(s).inv_tau == doctest::Approx(40.0).epsilon(1e-3));
  SystemSpec c = preset_spec("fig1_coherent");
  c.g = std::sqrt(1e8 * c.kappa / 4);
  const double PS = derived_rates(c).P_S;
  CHECK(cascaded_prediction(c, DriveMode::coherent).inv_tau == doctest::Approx(PS).epsilon(1e-3));
}

TEST_CASE("hierarchy gates") {
  const auto g = hierarchy_gates(preset_spec("fig1"));
  // J / kappa = 9.18 sits just under the decade rule.
  CHECK_FALSE(g.J_kappa);
  CHECK(g.kappa_GammaP);
  CHECK(g.GammaP_gamma);
  CHECK(g.GammaP_P);
  CHECK_FALSE(g.all());
  CHECK(much_greater(10.0, 1.0));
  CHECK_FALSE(much_greater(9.99, 1.0));
  Rng rng(22);
  CHECK(hierarchy_gates(deep_hierarchy(rng)).all());
  SystemSpec bad = preset_spec("fig1");
  bad.g = bad.kappa;
  CHECK_FALSE(validity_warnings(bad).empty());
}

TEST_CASE("full model tracks the closed form deep inside the hierarchy") {
  Rng rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    const SystemSpec s = deep_hierarchy(rng);
    REQUIRE(hierarchy_gates(s).all());
    CAPTURE(s.P);
    CAPTURE(s.J);
    const double F = full_fidelity_S(s);
    CHECK(std::abs(F - cascaded_prediction(s).rho_S_simplified) <= 0.02);
  }
}

TEST_CASE("build-up rate matches the closed form where the gates pass") {
  Rng rng(24);
  for (int trial = 0; trial < 3; ++trial) {
    const SystemSpec s = deep_hierarchy(rng);
    const auto pred = cascaded_prediction(s);
    const Liouvillian L = build_liouvillian(s);
    std::vector<int> zero(static_cast<std::size_t>(full_layout(s).sites()), 0);
    const auto grid = log_time_grid(1e-3 / pred.inv_tau, 8.0 / pred.inv_tau, 50);
    const auto traj = time_evolve(L, DensityMatrix::basis_state(L.layout(), zero), grid,
                                  {{"F", [](const DensityMatrix& r) {
                                      return fidelity(reduce_to_emitters(r), target_S());
                                    }}},
                                  {.keep_states = false});
    const double rate = fit_saturating_rate(grid, traj.observables.at("F"));
    CHECK(std::abs(rate - pred.inv_tau) / pred.inv_tau < 0.10);
  }
}

TEST_CASE("numerical optimum over P sits near the closed-form one") {
  const SystemSpec s = preset_spec("fig1");
  const auto o = optimal_pump(s);
  const auto scan = log_scan_argmax(
      [&](double P) {
        SystemSpec t = s;
        t.P = P;
        return full_fidelity_S(t);
      },
      1.0, 1e4, 40, false);
  CHECK(scan.argmax > o.P_opt / 2);
  CHECK(scan.argmax < o.P_opt * 2);
  SystemSpec at = s;
  at.P = o.P_opt;
  CHECK(std::abs(full_fidelity_S(at) - cascaded_prediction(at).rho_S_simplified) < 0.05);
}

TEST_CASE("log scan finds a known maximum") {
  const auto r = log_scan_argmax([](double x) { return -std::pow(std::log10(x) - 1.3, 2); }, 1e-2, 1e4, 10);
  CHECK(r.argmax == doctest::Approx(std::pow(10.0, 1.3)).epsilon(1e-5));
  CHECK(r.max == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("effective model needs two emitters") {
  CHECK_THROWS_AS(effective_model(preset_spec("w5")), UnsupportedModel);
}

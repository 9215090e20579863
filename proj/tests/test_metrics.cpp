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

#include <algorithm>
#include <array>
#include <cmath>

#include "purcell/metrics.hpp"
#include "purcell/model.hpp"
#include "purcell/solvers.hpp"
#include "test_util.hpp"

using namespace purcell;
using purcell::testing::Rng;

namespace {

const SubsystemLayout kQubits({2, 2});

DenseMatrix kron(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// Wootters from the eigenvalues of the non-Hermitian product rho rho~.
double wootters_oracle(const DenseMatrix& rho) {
  const DenseMatrix yy = kron(ops::sigma_y(), ops::sigma_y());
  const DenseMatrix R = rho * yy * rho.conjugate() * yy;
  Eigen::ComplexEigenSolver<DenseMatrix> es(R);
  std::array<double, 4> l{};
  for (int i = 0; i < 4; ++i) l[static_cast<std::size_t>(i)] = std::sqrt(std::max(0.0, es.eigenvalues()(i).real()));
  std::sort(l.begin(), l.end(), std::greater<>());
  return std::max(0.0, l[0] - l[1] - l[2] - l[3]);
}

DensityMatrix from_matrix(const DenseMatrix& m) { return DensityMatrix(kQubits, m); }

}  // namespace

TEST_CASE("targets are normalized and W has equal weights") {
  CHECK(std::abs(target_S().amplitudes.norm() - 1.0) < 1e-12);
  CHECK(std::abs(target_A().amplitudes.norm() - 1.0) < 1e-12);
  for (int N : {2, 3, 5, 8}) {
    const auto w = target_W(N);
    CHECK(w.amplitudes.size() == (Index{1} << N));
    CHECK(std::abs(w.amplitudes.norm() - 1.0) < 1e-12);
    int nonzero = 0;
    for (Index i = 0; i < w.amplitudes.size(); ++i) {
      if (std::abs(w.amplitudes(i)) > 0) {
        ++nonzero;
        CHECK(std::abs(w.amplitudes(i) - 1.0 / std::sqrt(N)) < 1e-14);
        // Exactly one emitter in |g>.
        CHECK(__builtin_popcountll(static_cast<unsigned long long>(i)) == N - 1);
      }
    }
    CHECK(nonzero == N);
  }
  CHECK_THROWS_AS(target_custom(Vector::Zero(4)), InvalidState);
}

TEST_CASE("concurrence of Bell and product states") {
  CHECK(concurrence(DensityMatrix::pure(kQubits, target_S().amplitudes)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(concurrence(DensityMatrix::pure(kQubits, target_A().amplitudes)) == doctest::Approx(1.0).epsilon(1e-12));
  Rng rng(1);
  for (int trial = 0; trial < 10; ++trial) {
    const DenseMatrix a = purcell::testing::random_density(2, rng), b = purcell::testing::random_density(2, rng);
    CHECK(concurrence(from_matrix(kron(a, b))) < 1e-10);
  }
  CHECK_THROWS_AS(concurrence(DensityMatrix(SubsystemLayout({2, 3}), DenseMatrix::Identity(6, 6) / 6.0)),
                  LayoutError);
}

TEST_CASE("Werner state concurrence") {
  Vector phi = Vector::Zero(4);
  phi(0) = phi(3) = 1.0 / std::sqrt(2.0);
  for (double p : {0.0, 0.2, 1.0 / 3.0, 0.5, 0.8, 1.0}) {
    const DenseMatrix w = p * phi * phi.adjoint() + (1 - p) * DenseMatrix::Identity(4, 4) / 4.0;
    const double oracle = wootters_oracle(w);
    CHECK(std::abs(oracle - std::max(0.0, (3 * p - 1) / 2)) < 1e-7);
    CHECK(std::abs(concurrence(from_matrix(w)) - oracle) < 1e-7);
  }
  const DenseMatrix w8 = 0.8 * phi * phi.adjoint() + 0.2 * DenseMatrix::Identity(4, 4) / 4.0;
  CHECK(concurrence(from_matrix(w8)) == doctest::Approx(0.7).epsilon(1e-10));
}

TEST_CASE("pure-state concurrence equals 2|ad - bc|") {
  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const Vector psi = purcell::testing::random_vector(4, rng);
    const double oracle = 2.0 * std::abs(psi(0) * psi(3) - psi(1) * psi(2));
    CHECK(std::abs(concurrence(DensityMatrix::pure(kQubits, psi)) - oracle) < 1e-7);
  }
}

TEST_CASE("concurrence agrees with the eigenvalue oracle on mixed states") {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    // Low-rank mixtures reach the entangled region often enough.
    const DenseMatrix g = purcell::testing::random_matrix(4, 1 + trial % 3, rng);
    DenseMatrix rho = g * g.adjoint();
    rho /= rho.trace();
    CHECK(std::abs(concurrence(from_matrix(rho)) - wootters_oracle(rho)) < 1e-7);
  }
}

TEST_CASE("concurrence is invariant under local unitaries") {
  Rng rng(4);
  for (int trial = 0; trial < 30; ++trial) {
    const DenseMatrix g = purcell::testing::random_matrix(4, 2, rng);
    DenseMatrix rho = g * g.adjoint();
    rho /= rho.trace();
    const DenseMatrix U = kron(purcell::testing::random_unitary(2, rng), purcell::testing::random_unitary(2, rng));
    const double c0 = concurrence(from_matrix(rho));
    const DenseMatrix r1 = U * rho * U.adjoint();
    CHECK(std::abs(concurrence(from_matrix(0.5 * (r1 + r1.adjoint()))) - c0) < 1e-10);
  }
}

TEST_CASE("concurrence is convex") {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const DenseMatrix g1 = purcell::testing::random_matrix(4, 1 + trial % 2, rng);
    const DenseMatrix g2 = purcell::testing::random_matrix(4, 1 + (trial / 2) % 2, rng);
    DenseMatrix r1 = g1 * g1.adjoint(), r2 = g2 * g2.adjoint();
    r1 /= r1.trace();
    r2 /= r2.trace();
    const double p = purcell::testing::uniform(rng, 0, 1);
    const double mix = concurrence(from_matrix(p * r1 + (1 - p) * r2));
    CHECK(mix <= p * concurrence(from_matrix(r1)) + (1 - p) * concurrence(from_matrix(r2)) + 1e-10);
  }
}

TEST_CASE("fidelity examples and completion") {
  const auto S = DensityMatrix::pure(kQubits, target_S().amplitudes);
  const auto A = DensityMatrix::pure(kQubits, target_A().amplitudes);
  CHECK(fidelity(S, target_S()) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(fidelity(A, target_S())) < 1e-14);

  // {|gg>, |S>, |A>, |ee>} is an orthonormal basis.
  Rng rng(6);
  Vector gg = Vector::Zero(4), ee = Vector::Zero(4);
  gg(0) = 1.0;
  ee(3) = 1.0;
  for (int trial = 0; trial < 10; ++trial) {
    const auto rho = from_matrix(purcell::testing::random_density(4, rng));
    const double sum = fidelity(rho, target_S()) + fidelity(rho, target_A()) +
                       fidelity(rho, target_custom(gg)) + fidelity(rho, target_custom(ee));
    CHECK(std::abs(sum - 1.0) < 1e-10);
  }

  // Random orthonormal completion in three qubits.
  const SubsystemLayout l3({2, 2, 2});
  const DenseMatrix U = purcell::testing::random_unitary(8, rng);
  const auto rho3 = DensityMatrix(l3, purcell::testing::random_density(8, rng));
  double total = 0.0;
  for (Index k = 0; k < 8; ++k) total += fidelity(rho3, target_custom(U.col(k)));
  CHECK(std::abs(total - 1.0) < 1e-10);
  CHECK_THROWS_AS(fidelity(rho3, target_S()), LayoutError);
}

TEST_CASE("photon statistics of simple cavity states") {
  const int dim = 9;
  const SubsystemLayout l({2, dim});
  std::array<int, 2> idx{0, 0};
  CHECK(cavity_population(DensityMatrix::basis_state(l, idx)) == 0.0);
  CHECK_THROWS_AS(g2_zero(DensityMatrix::basis_state(l, idx)), UndefinedStatistics);
  idx = {0, 1};
  CHECK(cavity_population(DensityMatrix::basis_state(l, idx)) == doctest::Approx(1.0));
  CHECK(g2_zero(DensityMatrix::basis_state(l, idx)) == doctest::Approx(0.0));
  idx = {1, 3};
  // Fock |3>: g2 = n(n-1)/n^2.
  CHECK(g2_zero(DensityMatrix::basis_state(l, idx)) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("coherent state has Poissonian statistics") {
  // |alpha> truncated at n_max = 8 with nbar = 0.1; the truncation error is
  // of order nbar^9 / 9!.
  const int dim = 9;
  const double nbar = 0.1;
  Vector psi(dim);
  double fact = 1.0;
  for (int n = 0; n < dim; ++n) {
    if (n > 0) fact *= n;
    psi(n) = std::pow(std::sqrt(nbar), n) / std::sqrt(fact);
  }
  psi /= psi.norm();
  const auto rho = DensityMatrix::pure(SubsystemLayout({dim}), psi);
  CHECK(cavity_population(rho) == doctest::Approx(nbar).epsilon(1e-10));
  CHECK(std::abs(g2_zero(rho) - 1.0) < 1e-9);
  const auto p = photon_distribution(rho);
  CHECK(p.sum() == doctest::Approx(1.0));
  CHECK(g2_from_distribution(p) == doctest::Approx(g2_zero(rho)));
}

TEST_CASE("fig1 steady state: concurrence tracks 2F - 1, light is antibunched") {
  const auto rho = steady_state(build_liouvillian(preset_spec("fig1"))).rho_ss;
  const auto q = reduce_to_emitters(rho);
  const double F = fidelity(q, target_S());
  const double C = concurrence(q);
  CHECK(std::abs(F - 0.897) < 0.03);
  CHECK(std::abs(C - (2 * F - 1)) < 0.1);
  CHECK(g2_zero(rho) < 1.0);
  CHECK(cavity_population(rho) > 0.0);
}

TEST_CASE("five-emitter resonance shows up in the cavity population") {
  SystemSpec s = preset_spec("w5");
  s.n_max = 2;
  const double on = cavity_population(steady_state(build_liouvillian(s)).rho_ss);
  s.Delta_a += 50 * s.kappa;
  const double off = cavity_population(steady_state(build_liouvillian(s)).rho_ss);
  CHECK(on > 10 * off);
}

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

#include <array>
#include <cmath>

#include "purcell/qop.hpp"
#include "test_util.hpp"

using namespace purcell;
using purcell::testing::Rng;

namespace {

DenseMatrix kron(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// Reshape-free reference: vec(rho) -> vec(2 A rho B^dag - {B^dag A, rho}).
DenseMatrix dissipator_dense(const DenseMatrix& A, const DenseMatrix& B) {
  const Index d = A.rows();
  const DenseMatrix I = DenseMatrix::Identity(d, d);
  const DenseMatrix BdA = B.adjoint() * A;
  return 2.0 * kron(B.conjugate(), A) - kron(I, BdA) - kron(BdA.transpose(), I);
}

}  // namespace

TEST_CASE("layout bookkeeping") {
  const SubsystemLayout l({2, 2, 5});
  CHECK(l.total_dim() == 20);
  CHECK(l.sites() == 3);
  CHECK_THROWS_AS(SubsystemLayout({2, 0}), LayoutError);
  const std::array<int, 3> idx{1, 0, 3};
  CHECK(basis_index(l, idx) == 1 * 10 + 0 * 5 + 3);
}

TEST_CASE("embed sigma_z keeps |eg> with eigenvalue +1") {
  const SubsystemLayout l({2, 2});
  const auto Z = embed(ops::sigma_z(), 0, l);
  const std::array<int, 2> eg{1, 0};
  Vector psi = Vector::Zero(4);
  psi(basis_index(l, eg)) = 1.0;
  CHECK((Z.dense() * psi - psi).norm() < 1e-15);
}

TEST_CASE("embedding the local identity gives the global identity") {
  const SubsystemLayout l({2, 3});
  CHECK((embed(ops::identity(2), 0, l).dense() - DenseMatrix::Identity(6, 6)).norm() == 0.0);
  CHECK((embed(ops::identity(3), 1, l).dense() - DenseMatrix::Identity(6, 6)).norm() == 0.0);
  CHECK_THROWS_AS(embed(ops::identity(2), 1, l), LayoutError);
  CHECK_THROWS_AS(embed(ops::identity(2), 5, l), LayoutError);
}

TEST_CASE("embedded cavity lowering operator matches the Kronecker product") {
  const SubsystemLayout l({2, 2, 3});
  const DenseMatrix a = ops::destroy(3);
  const DenseMatrix oracle = kron(kron(DenseMatrix::Identity(2, 2), DenseMatrix::Identity(2, 2)), a);
  const DenseMatrix A = embed(a, 2, l).dense();
  CHECK((A - oracle).norm() < 1e-15);
  const std::array<int, 3> bra{1, 1, 0}, ket{1, 1, 1};
  CHECK(std::abs(A(basis_index(l, bra), basis_index(l, ket)) - 1.0) < 1e-15);

  // Middle site against the oracle too.
  const DenseMatrix mid = kron(kron(DenseMatrix::Identity(2, 2), ops::sigma_minus()),
                               DenseMatrix::Identity(3, 3));
  CHECK((embed(ops::sigma_minus(), 1, l).dense() - mid).norm() < 1e-15);
}

TEST_CASE("dagger is an involution and commutes with embed") {
  Rng rng(7);
  const SubsystemLayout l({2, 3, 2});
  for (int trial = 0; trial < 20; ++trial) {
    const int site = static_cast<int>(rng() % 3);
    const DenseMatrix local = purcell::testing::random_matrix(l.dim(site), l.dim(site), rng);
    const auto A = embed(local, site, l);
    CHECK((A.dagger().dagger().dense() - A.dense()).norm() == 0.0);
    CHECK((embed(local.adjoint(), site, l).dense() - A.dagger().dense()).norm() == 0.0);
  }
}

TEST_CASE("layout mismatch is rejected") {
  const auto A = embed(ops::sigma_minus(), 0, SubsystemLayout({2, 2}));
  const auto B = embed(ops::sigma_minus(), 0, SubsystemLayout({2, 3}));
  CHECK_THROWS_AS(A + B, LayoutError);
  CHECK_THROWS_AS(lindblad_dissipator(A, B), LayoutError);
}

TEST_CASE("dissipator of random operators matches its definition") {
  Rng rng(11);
  for (int d : {2, 3, 6, 12}) {
    const SubsystemLayout l({d});
    for (int trial = 0; trial < 5; ++trial) {
      const DenseMatrix A = purcell::testing::random_matrix(d, d, rng);
      const DenseMatrix B = purcell::testing::random_matrix(d, d, rng);
      const DenseMatrix rho = purcell::testing::random_density(d, rng);
      const auto L = lindblad_dissipator(LabeledOperator(l, A), LabeledOperator(l, B));
      const DenseMatrix want = 2.0 * A * rho * B.adjoint() - B.adjoint() * A * rho - rho * B.adjoint() * A;
      const DenseMatrix got = L.apply(rho);
      CHECK((got - want).norm() <= 1e-12 * std::max(1.0, want.norm()));
    }
  }
}

TEST_CASE("cross dissipator on two qubits matches the dense construction") {
  const SubsystemLayout l({2, 2});
  const auto s1 = embed(ops::sigma_minus(), 0, l);
  const auto s2 = embed(ops::sigma_minus(), 1, l);
  const DenseMatrix got = DenseMatrix(lindblad_dissipator(s1, s2).superop());
  const DenseMatrix want = dissipator_dense(s1.dense(), s2.dense());
  CHECK((got - want).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("single-qubit decay has rate gamma on the population") {
  const SubsystemLayout l({2});
  const auto s = embed(ops::sigma_minus(), 0, l);
  const double gamma = 3.7;
  const Liouvillian L = (gamma / 2.0) * lindblad_dissipator(s, s);
  DenseMatrix ee = DenseMatrix::Zero(2, 2);
  ee(1, 1) = 1.0;
  const DenseMatrix d = L.apply(ee);
  CHECK(std::abs(d(1, 1) + gamma) < 1e-14);
  CHECK(std::abs(d(0, 0) - gamma) < 1e-14);
  // The population sector of the generator has eigenvalues {0, -gamma}.
  const DenseMatrix S(L.superop());
  Eigen::Matrix2cd pop;
  pop << S(0, 0), S(0, 3), S(3, 0), S(3, 3);
  Eigen::ComplexEigenSolver<Eigen::Matrix2cd> es(pop);
  const double lo = std::min(es.eigenvalues()(0).real(), es.eigenvalues()(1).real());
  CHECK(std::abs(lo + gamma) < 1e-12);
}

TEST_CASE("identity dissipator vanishes") {
  const SubsystemLayout l({2, 3});
  const auto I = LabeledOperator::identity(l);
  CHECK(DenseMatrix(lindblad_dissipator(I, I).superop()).norm() < 1e-15);
}

TEST_CASE("assembled generators annihilate the trace functional") {
  Rng rng(5);
  const SubsystemLayout l({2, 2, 3});
  const Index d = l.total_dim();
  for (int trial = 0; trial < 5; ++trial) {
    DenseMatrix h = purcell::testing::random_matrix(d, d, rng);
    h = (h + h.adjoint()).eval();
    Liouvillian L = hamiltonian_superop(LabeledOperator(l, h));
    for (int k = 0; k < 3; ++k) {
      const auto A = LabeledOperator(l, purcell::testing::random_matrix(d, d, rng));
      L += purcell::testing::uniform(rng, 0.1, 5.0) * lindblad_dissipator(A, A);
    }
    const auto s0 = embed(ops::sigma_minus(), 0, l), s1 = embed(ops::sigma_minus(), 1, l);
    L += 0.5 * (lindblad_dissipator(s0, s1) + lindblad_dissipator(s1, s0));

    // Trace row: sum over diagonal rows of each column.
    const DenseMatrix S(L.superop());
    double worst = 0.0;
    for (Index c = 0; c < S.cols(); ++c) {
      cplx t = 0.0;
      for (Index i = 0; i < d; ++i) t += S(i * d + i, c);
      worst = std::max(worst, std::abs(t));
    }
    CHECK(worst <= 1e-10 * std::max(1.0, S.norm()));

    const DenseMatrix rho = purcell::testing::random_density(d, rng);
    CHECK(std::abs(L.apply(rho).trace()) <= 1e-10 * std::max(1.0, S.norm()));
  }
}

TEST_CASE("partial trace of a product state returns the factor") {
  Rng rng(3);
  const SubsystemLayout l({2, 2, 4});
  const DenseMatrix q = purcell::testing::random_density(4, rng);
  DenseMatrix vac = DenseMatrix::Zero(4, 4);
  vac(0, 0) = 1.0;
  const DensityMatrix rho(l, kron(q, vac));
  const std::array<int, 2> keep{0, 1};
  CHECK((partial_trace(rho, keep).matrix() - q).norm() < 1e-14);
}

TEST_CASE("partial trace of a Bell state is maximally mixed") {
  const SubsystemLayout l({2, 2});
  Vector bell = Vector::Zero(4);
  bell(0) = bell(3) = 1.0 / std::sqrt(2.0);
  const auto rho = DensityMatrix::pure(l, bell);
  const std::array<int, 1> keep{1};
  CHECK((partial_trace(rho, keep).matrix() - 0.5 * DenseMatrix::Identity(2, 2)).norm() < 1e-15);
  CHECK_THROWS_AS(partial_trace(rho, std::span<const int>{}), LayoutError);
}

TEST_CASE("sequential partial traces agree with a single one") {
  Rng rng(19);
  const SubsystemLayout l({2, 2, 3});
  for (int trial = 0; trial < 10; ++trial) {
    const DensityMatrix rho(l, purcell::testing::random_density(12, rng));
    const std::array<int, 1> q0{0};
    const auto direct = partial_trace(rho, q0);

    // Cavity first, then qubit 1.
    const std::array<int, 2> qq{0, 1};
    const auto a = partial_trace(partial_trace(rho, qq), q0);
    // Qubit 1 first, then the cavity (site 1 of the reduced layout).
    const std::array<int, 2> qc{0, 2};
    const auto b = partial_trace(partial_trace(rho, qc), q0);

    CHECK((a.matrix() - direct.matrix()).norm() < 1e-12);
    CHECK((b.matrix() - direct.matrix()).norm() < 1e-12);
    CHECK(std::abs(direct.matrix().trace() - 1.0) < 1e-12);
  }
}

TEST_CASE("expectation values") {
  const SubsystemLayout l({2});
  DenseMatrix ee = DenseMatrix::Zero(2, 2);
  ee(1, 1) = 1.0;
  const DensityMatrix rho(l, ee);
  CHECK(std::abs(expectation(LabeledOperator::identity(l), rho) - 1.0) < 1e-15);
  const DenseMatrix n = ops::sigma_plus() * ops::sigma_minus();
  CHECK(std::abs(expectation(LabeledOperator(l, n), rho) - 1.0) < 1e-15);
}

TEST_CASE("thermal cavity occupation matches the geometric series") {
  // p_n proportional to x^n, truncated at n_max; the oracle is the closed
  // form of sum n x^n / sum x^n.
  const int n_max = 30;
  const SubsystemLayout l({n_max + 1});
  for (double nbar : {0.05, 0.3, 1.0}) {
    const double x = nbar / (1.0 + nbar);
    DenseMatrix rho = DenseMatrix::Zero(n_max + 1, n_max + 1);
    for (int n = 0; n <= n_max; ++n) rho(n, n) = std::pow(x, n);
    rho /= rho.trace();
    const double K = n_max + 1;
    const double truncated =
        x / (1.0 - x) - K * std::pow(x, K) / (1.0 - std::pow(x, K));
    const cplx got = expectation(LabeledOperator(l, ops::number(n_max + 1)), DensityMatrix(l, rho));
    CHECK(std::abs(got.imag()) < 1e-12);
    CHECK(std::abs(got.real() - truncated) < 1e-10);
    CHECK(std::abs(got.real() - nbar) < 1e-3);
  }
}

TEST_CASE("density matrix validation") {
  const SubsystemLayout l({2});
  DenseMatrix bad = DenseMatrix::Identity(2, 2);
  CHECK_THROWS_AS(DensityMatrix(l, bad), InvalidState);
  DenseMatrix neg = DenseMatrix::Zero(2, 2);
  neg(0, 0) = 1.1;
  neg(1, 1) = -0.1;
  CHECK_THROWS_AS(DensityMatrix(l, neg), InvalidState);
  DenseMatrix nonherm = 0.5 * DenseMatrix::Identity(2, 2);
  nonherm(0, 1) = 0.1;
  CHECK_THROWS_AS(DensityMatrix(l, nonherm), InvalidState);
  CHECK_THROWS_AS(DensityMatrix(SubsystemLayout({3}), 0.5 * DenseMatrix::Identity(2, 2)), LayoutError);
}

TEST_CASE("dense and sparse representations agree") {
  // 2 x 2 x 20 = 80 > the dense threshold, so these operators are sparse.
  const SubsystemLayout l({2, 2, 20});
  const auto a = embed(ops::destroy(20), 2, l);
  const auto s = embed(ops::sigma_minus(), 0, l);
  CHECK_FALSE(a.is_dense());
  const DenseMatrix prod = (a.dagger() * s).dense();
  CHECK((prod - a.dense().adjoint() * s.dense()).norm() < 1e-14);
  const SubsystemLayout small({2, 3});
  CHECK(embed(ops::destroy(3), 1, small).is_dense());
}

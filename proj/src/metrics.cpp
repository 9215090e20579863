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

#include "purcell/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace purcell {

namespace {

TargetState make_target(TargetKind kind, int N, Vector psi) {
  const double n = psi.norm();
  if (!(n > 0.0)) throw InvalidState("target state has zero norm");
  return TargetState{kind, N, psi / n, false};
}

}  // namespace

TargetState target_S() {
  Vector v = Vector::Zero(4);
  v(2) = 1.0;  // |eg>
  v(1) = 1.0;  // |ge>
  return make_target(TargetKind::symmetric_S, 2, v);
}

TargetState target_A() {
  Vector v = Vector::Zero(4);
  v(2) = 1.0;
  v(1) = -1.0;
  return make_target(TargetKind::antisymmetric_A, 2, v);
}

TargetState target_W(int N) {
  if (N < 1 || N > 24) throw LayoutError("product-basis W state needs 1 <= N <= 24");
  const Index dim = Index{1} << N;
  Vector v = Vector::Zero(dim);
  for (int k = 0; k < N; ++k) v(dim - 1 - (Index{1} << k)) = 1.0;
  return make_target(TargetKind::W_N, N, v);
}

TargetState target_custom(const Vector& psi) {
  int N = 0;
  while ((Index{1} << N) < psi.size()) ++N;
  return make_target(TargetKind::custom, N, psi);
}

double concurrence(const DensityMatrix& rho2) {
  if (!(rho2.layout() == SubsystemLayout({2, 2}))) {
    throw LayoutError("concurrence needs a two-qubit state, got " + rho2.layout().describe());
  }
  DenseMatrix yy = DenseMatrix::Zero(4, 4);
  yy(0, 3) = -1.0;
  yy(3, 0) = -1.0;
  yy(1, 2) = 1.0;
  yy(2, 1) = 1.0;

  // rho = W W^dag and the spin-flip eigenvalues are the singular values of
  // W^T (sigma_y x sigma_y) W. Eigenvalues of rho at round-off level are
  // dropped: concurrence has a square-root cusp at rank-deficient states, so
  // keeping them would turn 1e-16 noise into 1e-8 errors.
  const DenseMatrix& rho = rho2.matrix();
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(0.5 * (rho + rho.adjoint()));
  const Eigen::VectorXd& p = es.eigenvalues();
  const double floor = 64.0 * std::numeric_limits<double>::epsilon() * std::max(p.maxCoeff(), 0.0);
  std::vector<Index> kept;
  for (Index k = 0; k < p.size(); ++k) {
    if (p(k) > floor) kept.push_back(k);
  }
  if (kept.empty()) return 0.0;
  DenseMatrix W(4, static_cast<Index>(kept.size()));
  for (std::size_t c = 0; c < kept.size(); ++c) {
    W.col(static_cast<Index>(c)) = std::sqrt(p(kept[c])) * es.eigenvectors().col(kept[c]);
  }
  const DenseMatrix tau = W.transpose() * yy * W;
  Eigen::JacobiSVD<DenseMatrix> svd(tau);
  const Eigen::VectorXd& mu = svd.singularValues();  // decreasing
  double c = mu(0);
  for (Index k = 1; k < mu.size(); ++k) c -= mu(k);
  return std::clamp(c, 0.0, 1.0);
}

double fidelity(const DensityMatrix& rho, const TargetState& target) {
  if (rho.matrix().rows() != target.amplitudes.size()) {
    throw LayoutError("fidelity: state dimension " + std::to_string(rho.matrix().rows()) +
                      " does not match target dimension " +
                      std::to_string(target.amplitudes.size()));
  }
  const cplx f = target.amplitudes.dot(rho.matrix() * target.amplitudes);
  return std::clamp(f.real(), 0.0, 1.0);
}

DensityMatrix reduce_to_emitters(const DensityMatrix& rho) {
  std::vector<int> keep(static_cast<std::size_t>(rho.layout().sites() - 1));
  std::iota(keep.begin(), keep.end(), 0);
  return partial_trace(rho, keep);
}

Eigen::VectorXd photon_distribution(const DensityMatrix& rho) {
  const int cav = rho.layout().sites() - 1;
  const int nc = rho.layout().dim(cav);
  const DenseMatrix& m = rho.matrix();
  Eigen::VectorXd p = Eigen::VectorXd::Zero(nc);
  for (Index i = 0; i < m.rows(); ++i) p(i % nc) += m(i, i).real();
  return p;
}

double cavity_population(const DensityMatrix& rho) {
  const Eigen::VectorXd p = photon_distribution(rho);
  double n = 0.0;
  for (Index k = 0; k < p.size(); ++k) n += static_cast<double>(k) * p(k);
  return std::max(n, 0.0);
}

double g2_from_distribution(const Eigen::VectorXd& p) {
  double n = 0.0, nn = 0.0;
  for (Index k = 0; k < p.size(); ++k) {
    n += static_cast<double>(k) * p(k);
    nn += static_cast<double>(k * (k - 1)) * p(k);
  }
  if (!(n > 1e-12)) {
    throw UndefinedStatistics("g2(0) undefined for an empty cavity (<n> = " + std::to_string(n) + ")");
  }
  return std::max(nn, 0.0) / (n * n);
}

double g2_zero(const DensityMatrix& rho) { return g2_from_distribution(photon_distribution(rho)); }

}  // namespace purcell

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

// Random generators for property tests. Everything is seeded explicitly so
// failures reproduce.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <random>

#include "purcell/qop.hpp"

namespace purcell::testing {

using Rng = std::mt19937_64;

inline cplx random_complex(Rng& rng) {
  std::normal_distribution<double> n;
  return {n(rng), n(rng)};
}

inline DenseMatrix random_matrix(Index rows, Index cols, Rng& rng) {
  DenseMatrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = random_complex(rng);
  return m;
}

inline Vector random_vector(Index n, Rng& rng) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = random_complex(rng);
  return v / v.norm();
}

/// Full-rank mixed state G G^dag / Tr, G Ginibre.
inline DenseMatrix random_density(Index d, Rng& rng) {
  const DenseMatrix g = random_matrix(d, d, rng);
  DenseMatrix rho = g * g.adjoint();
  return rho / rho.trace();
}

/// Haar-ish unitary from the QR factor of a Ginibre matrix.
inline DenseMatrix random_unitary(Index d, Rng& rng) {
  Eigen::HouseholderQR<DenseMatrix> qr(random_matrix(d, d, rng));
  return qr.householderQ() * DenseMatrix::Identity(d, d);
}

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// 10^uniform(lo, hi).
inline double log_uniform(Rng& rng, double lo, double hi) { return std::pow(10.0, uniform(rng, lo, hi)); }

}  // namespace purcell::testing

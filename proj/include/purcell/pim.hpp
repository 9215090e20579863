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

// Permutationally invariant representation of N identical emitters coupled
// to one cavity mode.
//
// A permutation-symmetric density matrix is block diagonal over total spin
// j = N/2, N/2 - 1, ..., (N mod 2)/2, and identical on each of the d_j
// copies of a block: rho = sum_j p_j (x) 1_{d_j}. Only p_j is stored; the
// multiplicities enter as trace weights, Tr rho = sum_j d_j Tr p_j.
//
// Inside a block the Dicke index runs mi = 0 .. 2j with m = j - mi, so
// mi = 0 is the most excited state. Coordinates are ordered
// (block, m, m', n, n') with the cavity Fock indices fastest:
//   flat = offset(block) + ((mi * D + mi') * nc + n) * nc + n'
// where D = 2j + 1 and nc = n_max + 1. The block matrix p_j itself uses the
// row index mi * nc + n.

#pragma once

#include <vector>

#include "purcell/metrics.hpp"
#include "purcell/model.hpp"
#include "purcell/solvers.hpp"

namespace purcell {

struct DickeBlock {
  int twice_j = 0;
  double multiplicity = 0.0;
  Index offset = 0;

  double j() const { return twice_j / 2.0; }
  int dim() const { return twice_j + 1; }
};

class DickeSpace {
 public:
  DickeSpace(int n_emitters, int n_max);

  int n_emitters() const noexcept { return n_; }
  int n_max() const noexcept { return n_max_; }
  int cavity_dim() const noexcept { return n_max_ + 1; }
  const std::vector<DickeBlock>& blocks() const noexcept { return blocks_; }
  /// Index into blocks() of total spin twice_j / 2; throws LayoutError.
  std::size_t block_index(int twice_j) const;
  Index size() const noexcept { return size_; }
  Index flat(std::size_t block, int mi, int mi2, int n, int n2) const;

 private:
  int n_ = 0;
  int n_max_ = 0;
  std::vector<DickeBlock> blocks_;
  Index size_ = 0;
};

/// Number of spin-j copies in N spin-1/2: C(N, N/2-j) - C(N, N/2-j-1).
double dicke_multiplicity(int n_emitters, int twice_j);

class PimState {
 public:
  explicit PimState(DickeSpace space);
  PimState(DickeSpace space, const Vector& coords);

  const DickeSpace& space() const noexcept { return space_; }
  /// Block matrix p_j, (D nc) x (D nc).
  const DenseMatrix& block(std::size_t b) const { return blocks_.at(b); }
  DenseMatrix& block(std::size_t b) { return blocks_.at(b); }
  Vector coordinates() const;

  double trace() const;
  double min_eigenvalue() const;
  /// Throws InvalidState if trace, Hermiticity or positivity fail `tol`.
  void validate(const StateTolerance& tol = {}) const;

 private:
  DickeSpace space_;
  std::vector<DenseMatrix> blocks_;
};

/// All emitters in |g> and the cavity in vacuum.
PimState pim_ground_state(const DickeSpace& space);

struct PimLiouvillian {
  DickeSpace space{1, 1};
  SparseMatrix superop;
  /// Flat coordinates represented by the rows/columns of superop.
  std::vector<Index> coords;
  /// True when only the zero coherence-degree sector was assembled.
  bool restricted = false;
  Vector weights;
};

/// Generator over PIM coordinates for an all_to_all spec (or a dimer with
/// delta = 0). With `restrict_sector` and Omega = 0 only the coordinates the
/// steady state can occupy are assembled.
PimLiouvillian build_pim_liouvillian(const SystemSpec& spec, bool restrict_sector = true);

/// Map from D_src x D_src block matrices to D_dst x D_dst ones (column
/// stacked) of X -> sum_i s_q^(i) X s_q^(i)^dag restricted to the blocks,
/// where s_{-1} = sigma, s_{+1} = sigma^dag, s_0 = sigma_z.
DenseMatrix local_sandwich_map(int n_emitters, int twice_j_src, int twice_j_dst, int q);

/// The same map extracted numerically by symmetrizing the full 2^N
/// operators (N <= 8).
DenseMatrix local_sandwich_map_bruteforce(int n_emitters, int twice_j_src, int twice_j_dst, int q);

/// Dicke basis of the full 2^N space: for every block, the d_j copies as
/// 2^N x D column blocks (columns mi = 0 .. 2j).
std::vector<std::vector<DenseMatrix>> dicke_basis(int n_emitters);

/// Full density matrix on [2]*N + [n_max+1]; N <= 8.
DensityMatrix pim_to_full(const PimState& state);

enum class DickeTarget { top, W };
/// Amplitudes over the maximal-j block, indexed by mi.
TargetState dicke_target(int n_emitters, DickeTarget kind);

double pim_fidelity(const PimState& state, const TargetState& target);
double pim_cavity_population(const PimState& state);
Eigen::VectorXd pim_photon_distribution(const PimState& state);
double pim_g2_zero(const PimState& state);
/// <J_z> + N/2, the mean number of excited emitters.
double pim_excitations(const PimState& state);
/// a rho a^dag normalized; throws HeraldImpossible.
PimState pim_conditional_state(const PimState& state);

struct PimSteadyResult {
  PimState state;
  double residual = 0.0;
  double relative_residual = 0.0;
  SteadyMethod method;
};

PimSteadyResult pim_steady_state(const PimLiouvillian& L, const SteadyOptions& opts = {});

/// Largest |difference| between the production and brute-force local maps
/// over all blocks and channels for N emitters.
double local_map_discrepancy(int n_emitters);

}  // namespace purcell

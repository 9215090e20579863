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

#include "purcell/pim.hpp"

#include <Eigen/SVD>
#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>

namespace purcell {

namespace {

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return std::round(r);
}

DenseMatrix spin_plus(int twice_j) {
  const int D = twice_j + 1;
  const double j = twice_j / 2.0;
  DenseMatrix m = DenseMatrix::Zero(D, D);
  for (int mi = 1; mi < D; ++mi) {
    const double mm = j - mi;
    m(mi - 1, mi) = std::sqrt((j - mm) * (j + mm + 1.0));
  }
  return m;
}

DenseMatrix spin_z(int twice_j) {
  const int D = twice_j + 1;
  DenseMatrix m = DenseMatrix::Zero(D, D);
  for (int mi = 0; mi < D; ++mi) m(mi, mi) = twice_j / 2.0 - mi;
  return m;
}

// <j m; 1 q | J m+q> in the Condon-Shortley convention, J in {j-1, j, j+1}.
double clebsch_vector(double j, double m, int q, double J) {
  const double M = m + q;
  if (std::abs(M) > J + 1e-12 || std::abs(m) > j + 1e-12 || J < -1e-12) return 0.0;
  const auto sq = [](double x) { return x <= 0.0 ? 0.0 : std::sqrt(x); };
  if (std::abs(J - (j + 1.0)) < 1e-12) {
    if (q == 1) return sq((j + M) * (j + M + 1.0) / ((2.0 * j + 1.0) * (2.0 * j + 2.0)));
    if (q == 0) return sq((j - M + 1.0) * (j + M + 1.0) / ((2.0 * j + 1.0) * (j + 1.0)));
    return sq((j - M) * (j - M + 1.0) / ((2.0 * j + 1.0) * (2.0 * j + 2.0)));
  }
  if (std::abs(J - j) < 1e-12) {
    if (j == 0.0) return 0.0;
    if (q == 1) return -sq((j + M) * (j - M + 1.0) / (2.0 * j * (j + 1.0)));
    if (q == 0) return M / std::sqrt(j * (j + 1.0));
    return sq((j - M) * (j + M + 1.0) / (2.0 * j * (j + 1.0)));
  }
  if (std::abs(J - (j - 1.0)) < 1e-12) {
    if (j < 1.0) return 0.0;
    if (q == 1) return sq((j - M) * (j - M + 1.0) / (2.0 * j * (2.0 * j + 1.0)));
    if (q == 0) return -sq((j - M) * (j + M) / (j * (2.0 * j + 1.0)));
    return sq((j + M + 1.0) * (j + M) / (2.0 * j * (2.0 * j + 1.0)));
  }
  return 0.0;
}

// Reduced weight of the permutation-symmetric sum of single-spin sandwiches
// between blocks j and J (see local_sandwich_map).
double block_weight(int n_emitters, double j, double J) {
  const double h = n_emitters / 2.0;
  if (std::abs(J - (j + 1.0)) < 1e-12) return (2.0 * j + 1.0) * (h + j + 2.0) / (2.0 * j + 3.0);
  if (std::abs(J - j) < 1e-12) return h + 1.0;
  if (std::abs(J - (j - 1.0)) < 1e-12) return (2.0 * j + 1.0) * (h - j + 1.0) / (2.0 * j - 1.0);
  return 0.0;
}

DenseMatrix single_site(int n_emitters, int site, const DenseMatrix& op) {
  return embed(op, site, SubsystemLayout(std::vector<int>(static_cast<std::size_t>(n_emitters), 2)))
      .dense();
}

DenseMatrix local_op(int q) {
  if (q == -1) return ops::sigma_minus();
  if (q == 1) return ops::sigma_plus();
  return ops::sigma_z();
}

void require_small(int n_emitters) {
  if (n_emitters < 1 || n_emitters > 8) {
    throw UnsupportedModel("full-space Dicke constructions are limited to 1 <= N <= 8");
  }
}

}  // namespace

double dicke_multiplicity(int n_emitters, int twice_j) {
  if ((n_emitters - twice_j) % 2 != 0 || twice_j < 0 || twice_j > n_emitters) return 0.0;
  const int k = (n_emitters - twice_j) / 2;
  return binomial(n_emitters, k) - binomial(n_emitters, k - 1);
}

DickeSpace::DickeSpace(int n_emitters, int n_max) : n_(n_emitters), n_max_(n_max) {
  if (n_emitters < 1) throw SpecError("DickeSpace needs at least one emitter");
  if (n_max < 0) throw SpecError("negative cavity truncation");
  const int nc = n_max + 1;
  for (int tj = n_emitters; tj >= 0; tj -= 2) {
    DickeBlock b{tj, dicke_multiplicity(n_emitters, tj), size_};
    size_ += static_cast<Index>(b.dim()) * b.dim() * nc * nc;
    blocks_.push_back(b);
  }
}

std::size_t DickeSpace::block_index(int twice_j) const {
  if (twice_j > n_ || twice_j < 0 || (n_ - twice_j) % 2 != 0) {
    throw LayoutError("no block with 2j = " + std::to_string(twice_j));
  }
  return static_cast<std::size_t>((n_ - twice_j) / 2);
}

Index DickeSpace::flat(std::size_t block, int mi, int mi2, int n, int n2) const {
  const DickeBlock& b = blocks_.at(block);
  const Index D = b.dim(), nc = cavity_dim();
  return b.offset + ((mi * D + mi2) * nc + n) * nc + n2;
}

// ---------------------------------------------------------------- states

PimState::PimState(DickeSpace space) : space_(std::move(space)) {
  for (const auto& b : space_.blocks()) {
    const Index n = static_cast<Index>(b.dim()) * space_.cavity_dim();
    blocks_.push_back(DenseMatrix::Zero(n, n));
  }
}

PimState::PimState(DickeSpace space, const Vector& coords) : PimState(std::move(space)) {
  if (coords.size() != space_.size()) throw LayoutError("PIM coordinate vector has wrong size");
  const int nc = space_.cavity_dim();
  for (std::size_t bi = 0; bi < space_.blocks().size(); ++bi) {
    const int D = space_.blocks()[bi].dim();
    for (int mi = 0; mi < D; ++mi)
      for (int mi2 = 0; mi2 < D; ++mi2)
        for (int n = 0; n < nc; ++n)
          for (int n2 = 0; n2 < nc; ++n2)
            blocks_[bi](mi * nc + n, mi2 * nc + n2) = coords(space_.flat(bi, mi, mi2, n, n2));
  }
}

Vector PimState::coordinates() const {
  Vector out = Vector::Zero(space_.size());
  const int nc = space_.cavity_dim();
  for (std::size_t bi = 0; bi < space_.blocks().size(); ++bi) {
    const int D = space_.blocks()[bi].dim();
    for (int mi = 0; mi < D; ++mi)
      for (int mi2 = 0; mi2 < D; ++mi2)
        for (int n = 0; n < nc; ++n)
          for (int n2 = 0; n2 < nc; ++n2)
            out(space_.flat(bi, mi, mi2, n, n2)) = blocks_[bi](mi * nc + n, mi2 * nc + n2);
  }
  return out;
}

double PimState::trace() const {
  double t = 0.0;
  for (std::size_t bi = 0; bi < blocks_.size(); ++bi) {
    t += space_.blocks()[bi].multiplicity * blocks_[bi].trace().real();
  }
  return t;
}

double PimState::min_eigenvalue() const {
  double lo = std::numeric_limits<double>::infinity();
  for (const auto& b : blocks_) {
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(0.5 * (b + b.adjoint()), Eigen::EigenvaluesOnly);
    lo = std::min(lo, es.eigenvalues().minCoeff());
  }
  return lo;
}

void PimState::validate(const StateTolerance& tol) const {
  for (const auto& b : blocks_) {
    if (!b.allFinite()) throw InvalidState("PIM state has non-finite entries");
    if (b.size() > 0 && (b - b.adjoint()).cwiseAbs().maxCoeff() > tol.hermiticity) {
      throw InvalidState("PIM block not Hermitian");
    }
  }
  if (std::abs(trace() - 1.0) > tol.trace) {
    throw InvalidState("PIM state trace deviates from 1 by " + std::to_string(std::abs(trace() - 1.0)));
  }
  const double lo = min_eigenvalue();
  if (lo < tol.min_eigenvalue) throw InvalidState("PIM state has eigenvalue " + std::to_string(lo));
}

PimState pim_ground_state(const DickeSpace& space) {
  PimState s(space);
  s.block(0)(static_cast<Index>(space.n_emitters()) * space.cavity_dim(),
             static_cast<Index>(space.n_emitters()) * space.cavity_dim()) = 1.0;
  return s;
}

// ---------------------------------------------------------------- generator

// The local sandwich between blocks factorizes as K * (C (x) C) with C the
// Clebsch-Gordan matrix of the rank-1 component q. C has at most one nonzero
// per column.
struct SandwichFactor {
  double K = 0.0;
  Eigen::MatrixXd C;
};

SandwichFactor sandwich_factor(int n_emitters, int twice_j_src, int twice_j_dst, int q) {
  const int D = twice_j_src + 1, Dd = twice_j_dst + 1;
  SandwichFactor f;
  if (twice_j_dst < 0 || twice_j_dst > n_emitters) return f;
  const double j = twice_j_src / 2.0, J = twice_j_dst / 2.0;
  f.K = block_weight(n_emitters, j, J) * (q == 0 ? 2.0 : 1.0);
  f.C = Eigen::MatrixXd::Zero(Dd, D);
  for (int mi = 0; mi < D; ++mi) {
    const double m = j - mi;
    const double M = m + q;
    const double Mi = J - M;
    if (Mi < -1e-9 || Mi > twice_j_dst + 1e-9) continue;
    f.C(static_cast<Index>(std::lround(Mi)), mi) = clebsch_vector(j, m, q, J);
  }
  return f;
}

DenseMatrix local_sandwich_map(int n_emitters, int twice_j_src, int twice_j_dst, int q) {
  const int D = twice_j_src + 1, Dd = twice_j_dst + 1;
  DenseMatrix out = DenseMatrix::Zero(static_cast<Index>(Dd) * Dd, static_cast<Index>(D) * D);
  const SandwichFactor f = sandwich_factor(n_emitters, twice_j_src, twice_j_dst, q);
  if (f.K == 0.0) return out;
  for (int a = 0; a < D; ++a)
    for (int b = 0; b < D; ++b)
      for (int A = 0; A < Dd; ++A)
        for (int B = 0; B < Dd; ++B)
          out(A + B * Dd, a + b * D) = f.K * f.C(A, a) * f.C(B, b);
  return out;
}

PimLiouvillian build_pim_liouvillian(const SystemSpec& spec, bool restrict_sector) {
  spec.validate();
  const int N = spec.n_emitters;
  bool dimer = false;
  if (spec.model_kind == ModelKind::dimer) {
    if (spec.delta != 0.0) {
      throw UnsupportedModel("detuned emitters break permutation symmetry (delta != 0)");
    }
    dimer = true;
  }
  PimLiouvillian out;
  out.space = DickeSpace(N, spec.n_max);
  const DickeSpace& space = out.space;
  const int nc = space.cavity_dim();
  const double h = N / 2.0;
  const double decay_local = spec.gamma - spec.gamma_collective + spec.Gamma_extra;
  out.restricted = restrict_sector && spec.Omega == 0.0;

  // Coordinate selection.
  std::vector<Index> pos(static_cast<std::size_t>(space.size()), -1);
  for (std::size_t bi = 0; bi < space.blocks().size(); ++bi) {
    const int D = space.blocks()[bi].dim();
    for (int mi = 0; mi < D; ++mi)
      for (int mi2 = 0; mi2 < D; ++mi2)
        for (int n = 0; n < nc; ++n)
          for (int n2 = 0; n2 < nc; ++n2) {
            if (out.restricted && (mi2 - mi) + (n - n2) != 0) continue;
            const Index f = space.flat(bi, mi, mi2, n, n2);
            pos[static_cast<std::size_t>(f)] = static_cast<Index>(out.coords.size());
            out.coords.push_back(f);
          }
  }
  const Index n_coords = static_cast<Index>(out.coords.size());
  out.weights = Vector::Zero(n_coords);
  for (std::size_t bi = 0; bi < space.blocks().size(); ++bi) {
    const int D = space.blocks()[bi].dim();
    for (int mi = 0; mi < D; ++mi)
      for (int n = 0; n < nc; ++n) {
        const Index p = pos[static_cast<std::size_t>(space.flat(bi, mi, mi, n, n))];
        if (p >= 0) out.weights(p) = space.blocks()[bi].multiplicity;
      }
  }

  std::vector<Eigen::Triplet<cplx>> trip;
  const auto add = [&](Index row_flat, Index col_flat, cplx v) {
    const Index r = pos[static_cast<std::size_t>(row_flat)];
    const Index c = pos[static_cast<std::size_t>(col_flat)];
    if (r >= 0 && c >= 0 && v != cplx(0.0)) trip.emplace_back(r, c, v);
  };

  for (std::size_t bi = 0; bi < space.blocks().size(); ++bi) {
    const DickeBlock& blk = space.blocks()[bi];
    const int D = blk.dim();
    const Index Db = static_cast<Index>(D) * nc;
    const SubsystemLayout layout({D, nc});
    const LabeledOperator Jp = embed(spin_plus(blk.twice_j), 0, layout);
    const LabeledOperator Jm = Jp.dagger();
    const LabeledOperator Jz = embed(spin_z(blk.twice_j), 0, layout);
    const LabeledOperator a = embed(ops::destroy(nc), 1, layout);
    const LabeledOperator I = LabeledOperator::identity(layout);

    LabeledOperator H = cplx(spec.J) * (Jp * Jm);
    if (dimer) H -= cplx(spec.J) * (Jz + cplx(h) * I);
    H += cplx(spec.Delta_a) * (a.dagger() * a);
    H += cplx(spec.g) * (a.dagger() * Jm + Jp * a);
    if (spec.Omega != 0.0) H += cplx(spec.Omega) * (Jm + Jp);

    // Element-wise action on the block density matrix rho(r, c):
    //   rho -> Lop rho + rho Rop + sum_k rate_k X_k rho X_k^dag.
    // Built directly so that only the selected columns are visited.
    const LabeledOperator Jz_h = Jz + cplx(h) * I;
    LabeledOperator decay = cplx(decay_local / 2.0) * Jz_h + cplx(spec.P / 2.0) * (cplx(h) * I - Jz) +
                            cplx(spec.gamma_phi * N / 2.0) * I;
    std::vector<std::pair<double, SparseMatrix>> jumps;
    const auto channel = [&](double rate, const LabeledOperator& X) {
      if (rate == 0.0) return;
      decay += cplx(rate / 2.0) * (X.dagger() * X);
      jumps.emplace_back(rate, X.sparse());
    };
    channel(spec.kappa, a);
    channel(spec.gamma_collective, Jm);
    channel(spec.Gamma_phi, cplx(2.0) * Jz);
    const SparseMatrix Lop = (cplx(0.0, -1.0) * H - decay).sparse();
    // Right action rho Rop, read along rows of Rop = columns of Rop^T.
    const SparseMatrix RopT = SparseMatrix((cplx(0.0, 1.0) * H - decay).sparse().transpose());

    const auto fl = [&](Index r, Index c) {
      return space.flat(bi, static_cast<int>(r / nc), static_cast<int>(c / nc), static_cast<int>(r % nc),
                        static_cast<int>(c % nc));
    };
    for (Index c = 0; c < Db; ++c)
      for (Index r = 0; r < Db; ++r) {
        const Index cf = fl(r, c);
        if (pos[static_cast<std::size_t>(cf)] < 0) continue;
        for (SparseMatrix::InnerIterator it(Lop, r); it; ++it) add(fl(it.row(), c), cf, it.value());
        for (SparseMatrix::InnerIterator it(RopT, c); it; ++it) add(fl(r, it.row()), cf, it.value());
        for (const auto& [rate, X] : jumps)
          for (SparseMatrix::InnerIterator ir(X, r); ir; ++ir)
            for (SparseMatrix::InnerIterator ic(X, c); ic; ++ic)
              add(fl(ir.row(), ic.row()), cf, rate * ir.value() * std::conj(ic.value()));
      }

    // Local sandwiches move weight between neighbouring blocks.
    const std::pair<int, double> channels[] = {
        {-1, decay_local}, {1, spec.P}, {0, spec.gamma_phi}};
    for (const auto& [q, rate] : channels) {
      if (rate == 0.0) continue;
      for (int dtj : {-2, 0, 2}) {
        const int tjd = blk.twice_j + dtj;
        if (tjd < 0 || tjd > N) continue;
        const SandwichFactor f = sandwich_factor(N, blk.twice_j, tjd, q);
        if (f.K == 0.0) continue;
        const std::size_t bd = space.block_index(tjd);
        // Destination index of each source m under C (or -1).
        std::vector<int> to(static_cast<std::size_t>(D), -1);
        std::vector<double> cv(static_cast<std::size_t>(D), 0.0);
        for (int m = 0; m < D; ++m)
          for (Index M = 0; M < f.C.rows(); ++M)
            if (f.C(M, m) != 0.0) {
              to[static_cast<std::size_t>(m)] = static_cast<int>(M);
              cv[static_cast<std::size_t>(m)] = f.C(M, m);
            }
        for (int m1 = 0; m1 < D; ++m1) {
          if (to[static_cast<std::size_t>(m1)] < 0) continue;
          for (int m2 = 0; m2 < D; ++m2) {
            if (to[static_cast<std::size_t>(m2)] < 0) continue;
            const double v = rate * f.K * cv[static_cast<std::size_t>(m1)] * cv[static_cast<std::size_t>(m2)];
            for (int n = 0; n < nc; ++n)
              for (int n2 = 0; n2 < nc; ++n2)
                add(space.flat(bd, to[static_cast<std::size_t>(m1)], to[static_cast<std::size_t>(m2)], n, n2),
                    space.flat(bi, m1, m2, n, n2), v);
          }
        }
      }
    }
  }
  out.superop = SparseMatrix(n_coords, n_coords);
  out.superop.setFromTriplets(trip.begin(), trip.end());
  out.superop.makeCompressed();
  return out;
}

PimSteadyResult pim_steady_state(const PimLiouvillian& L, const SteadyOptions& opts) {
  KernelProblem problem;
  problem.L = &L.superop;
  problem.weights = L.weights;
  const KernelResult k = solve_kernel(problem, opts);
  Vector full = Vector::Zero(L.space.size());
  for (std::size_t i = 0; i < L.coords.size(); ++i) full(L.coords[i]) = k.x(static_cast<Index>(i));
  PimState state(L.space, full);
  for (std::size_t b = 0; b < L.space.blocks().size(); ++b) {
    DenseMatrix& m = state.block(b);
    m = 0.5 * (m + m.adjoint()).eval();
  }
  const double tr = state.trace();
  for (std::size_t b = 0; b < L.space.blocks().size(); ++b) state.block(b) /= tr;

  const Vector all = state.coordinates();
  Vector x(static_cast<Index>(L.coords.size()));
  for (std::size_t i = 0; i < L.coords.size(); ++i) x(static_cast<Index>(i)) = all(L.coords[i]);
  const double residual = (L.superop * x).norm();
  const double normL = operator_norm(L.superop);
  if (!(residual <= 1e-9 * normL)) throw SolverError("PIM steady-state residual too large", residual);
  state.validate();
  return PimSteadyResult{std::move(state), residual, residual / normL, k.method};
}

// ---------------------------------------------------------------- observables

TargetState dicke_target(int n_emitters, DickeTarget kind) {
  if (n_emitters < 1) throw SpecError("dicke_target needs N >= 1");
  if (kind == DickeTarget::W && n_emitters < 1) throw SpecError("W target needs N >= 1");
  Vector v = Vector::Zero(n_emitters + 1);
  if (kind == DickeTarget::top) {
    v(0) = 1.0;
    return TargetState{TargetKind::top, n_emitters, v, true};
  }
  if (kind == DickeTarget::W) {
    v(1) = 1.0;
    return TargetState{TargetKind::W_N, n_emitters, v, true};
  }
  throw SpecError("unknown Dicke target kind");
}

double pim_fidelity(const PimState& state, const TargetState& target) {
  const int N = state.space().n_emitters();
  if (!target.dicke || target.amplitudes.size() != N + 1) {
    throw LayoutError("PIM fidelity needs a maximal-block Dicke target for N = " + std::to_string(N));
  }
  const int nc = state.space().cavity_dim();
  const DenseMatrix& top = state.block(0);
  cplx f = 0.0;
  for (int n = 0; n < nc; ++n)
    for (int a = 0; a <= N; ++a)
      for (int b = 0; b <= N; ++b)
        f += std::conj(target.amplitudes(a)) * top(a * nc + n, b * nc + n) * target.amplitudes(b);
  return std::clamp(f.real(), 0.0, 1.0);
}

Eigen::VectorXd pim_photon_distribution(const PimState& state) {
  const int nc = state.space().cavity_dim();
  Eigen::VectorXd p = Eigen::VectorXd::Zero(nc);
  for (std::size_t b = 0; b < state.space().blocks().size(); ++b) {
    const DenseMatrix& m = state.block(b);
    const double d = state.space().blocks()[b].multiplicity;
    for (Index r = 0; r < m.rows(); ++r) p(r % nc) += d * m(r, r).real();
  }
  return p;
}

double pim_cavity_population(const PimState& state) {
  const Eigen::VectorXd p = pim_photon_distribution(state);
  double n = 0.0;
  for (Index k = 0; k < p.size(); ++k) n += static_cast<double>(k) * p(k);
  return std::max(n, 0.0);
}

double pim_g2_zero(const PimState& state) { return g2_from_distribution(pim_photon_distribution(state)); }

double pim_excitations(const PimState& state) {
  const int nc = state.space().cavity_dim();
  const double h = state.space().n_emitters() / 2.0;
  double e = 0.0;
  for (std::size_t b = 0; b < state.space().blocks().size(); ++b) {
    const DickeBlock& blk = state.space().blocks()[b];
    const DenseMatrix& m = state.block(b);
    for (Index r = 0; r < m.rows(); ++r) {
      const double mm = blk.j() - static_cast<double>(r / nc);
      e += blk.multiplicity * (mm + h) * m(r, r).real();
    }
  }
  return e;
}

PimState pim_conditional_state(const PimState& state) {
  PimState out(state.space());
  const int nc = state.space().cavity_dim();
  double w = 0.0;
  for (std::size_t b = 0; b < state.space().blocks().size(); ++b) {
    const int D = state.space().blocks()[b].dim();
    const DenseMatrix a = embed(ops::destroy(nc), 1, SubsystemLayout({D, nc})).dense();
    out.block(b) = a * state.block(b) * a.adjoint();
    w += state.space().blocks()[b].multiplicity * out.block(b).trace().real();
  }
  if (!(w > 1e-14)) throw HeraldImpossible("no photon to herald (weight " + std::to_string(w) + ")");
  for (std::size_t b = 0; b < state.space().blocks().size(); ++b) out.block(b) /= w;
  return out;
}

// ---------------------------------------------------------------- full-space oracle

std::vector<std::vector<DenseMatrix>> dicke_basis(int n_emitters) {
  require_small(n_emitters);
  const int N = n_emitters;
  const Index dim = Index{1} << N;
  DenseMatrix Sp = DenseMatrix::Zero(dim, dim);
  for (int i = 0; i < N; ++i) Sp += single_site(N, i, ops::sigma_plus());
  const DenseMatrix Sm = Sp.adjoint();

  std::vector<std::vector<DenseMatrix>> out;
  for (int tj = N; tj >= 0; tj -= 2) {
    const int excited = (N + tj) / 2;
    std::vector<Index> sel;
    for (Index k = 0; k < dim; ++k) {
      if (__builtin_popcountll(static_cast<unsigned long long>(k)) == excited) sel.push_back(k);
    }
    DenseMatrix E = DenseMatrix::Zero(dim, static_cast<Index>(sel.size()));
    for (std::size_t c = 0; c < sel.size(); ++c) E(sel[c], static_cast<Index>(c)) = 1.0;
    const DenseMatrix A = Sp * E;
    Eigen::JacobiSVD<DenseMatrix> svd(A, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    std::vector<DenseMatrix> copies;
    const int D = tj + 1;
    const double j = tj / 2.0;
    for (Index c = 0; c < E.cols(); ++c) {
      const double sv = c < s.size() ? s(c) : 0.0;
      if (sv > 1e-9) continue;
      DenseMatrix U(dim, D);
      U.col(0) = E * svd.matrixV().col(c);
      for (int mi = 1; mi < D; ++mi) {
        const double m = j - (mi - 1);
        U.col(mi) = Sm * U.col(mi - 1) / std::sqrt((j + m) * (j - m + 1.0));
      }
      copies.push_back(std::move(U));
    }
    if (static_cast<double>(copies.size()) != dicke_multiplicity(N, tj)) {
      throw AssemblyError("Dicke basis construction found the wrong multiplicity");
    }
    out.push_back(std::move(copies));
  }
  return out;
}

DenseMatrix local_sandwich_map_bruteforce(int n_emitters, int twice_j_src, int twice_j_dst, int q) {
  require_small(n_emitters);
  const int N = n_emitters;
  const int D = twice_j_src + 1, Dd = twice_j_dst + 1;
  DenseMatrix out = DenseMatrix::Zero(static_cast<Index>(Dd) * Dd, static_cast<Index>(D) * D);
  if (twice_j_dst < 0 || twice_j_dst > N || (N - twice_j_dst) % 2 != 0) return out;
  const auto basis = dicke_basis(N);
  const auto& src = basis[static_cast<std::size_t>((N - twice_j_src) / 2)];
  const auto& dst = basis[static_cast<std::size_t>((N - twice_j_dst) / 2)];
  std::vector<DenseMatrix> s;
  for (int i = 0; i < N; ++i) s.push_back(single_site(N, i, local_op(q)));

  for (int a = 0; a < D; ++a) {
    for (int b = 0; b < D; ++b) {
      DenseMatrix X = DenseMatrix::Zero(Index{1} << N, Index{1} << N);
      for (const auto& U : src) X += U.col(a) * U.col(b).adjoint();
      DenseMatrix Y = DenseMatrix::Zero(X.rows(), X.cols());
      for (const auto& si : s) Y += si * X * si.adjoint();
      const DenseMatrix y = dst.front().adjoint() * Y * dst.front();
      for (int A = 0; A < Dd; ++A)
        for (int B = 0; B < Dd; ++B) out(A + B * Dd, a + b * D) = y(A, B);
    }
  }
  return out;
}

double local_map_discrepancy(int n_emitters) {
  double worst = 0.0;
  for (int tj = n_emitters; tj >= 0; tj -= 2) {
    for (int dtj : {-2, 0, 2}) {
      const int tjd = tj + dtj;
      if (tjd < 0 || tjd > n_emitters) continue;
      for (int q : {-1, 0, 1}) {
        const DenseMatrix a = local_sandwich_map(n_emitters, tj, tjd, q);
        const DenseMatrix b = local_sandwich_map_bruteforce(n_emitters, tj, tjd, q);
        worst = std::max(worst, (a - b).cwiseAbs().maxCoeff());
      }
    }
  }
  return worst;
}

DensityMatrix pim_to_full(const PimState& state) {
  const int N = state.space().n_emitters();
  require_small(N);
  const int nc = state.space().cavity_dim();
  const auto basis = dicke_basis(N);
  const Index dim = (Index{1} << N) * nc;
  DenseMatrix rho = DenseMatrix::Zero(dim, dim);
  const DenseMatrix Ic = DenseMatrix::Identity(nc, nc);
  for (std::size_t b = 0; b < basis.size(); ++b) {
    for (const auto& U : basis[b]) {
      const DenseMatrix W = Eigen::kroneckerProduct(U, Ic).eval();
      rho += W * state.block(b) * W.adjoint();
    }
  }
  std::vector<int> dims(static_cast<std::size_t>(N), 2);
  dims.push_back(nc);
  return DensityMatrix(SubsystemLayout(dims), rho, StateTolerance{1e-9, 1e-9, -1e-8});
}

}  // namespace purcell

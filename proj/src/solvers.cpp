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

#include "purcell/solvers.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>
#include <boost/math/tools/minima.hpp>

#include <array>
#include <cmath>
#include <memory>
#include <random>

namespace purcell {

namespace {

// One factorization of a square sparse system, dense LU for small systems,
// sparse LU up to the direct limit, ILUT-preconditioned BiCGSTAB beyond.
class Factorization {
 public:
  Factorization(const SparseMatrix& A, Index dense_limit, Index direct_limit) {
    n_ = A.rows();
    if (n_ <= dense_limit) {
      dense_ = std::make_unique<Eigen::PartialPivLU<DenseMatrix>>(DenseMatrix(A));
      ok_ = true;
    } else if (n_ <= direct_limit) {
      sparse_ = std::make_unique<Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>>();
      sparse_->analyzePattern(A);
      sparse_->factorize(A);
      ok_ = sparse_->info() == Eigen::Success;
    } else {
      iterative_ = std::make_unique<Eigen::BiCGSTAB<SparseMatrix, Eigen::IncompleteLUT<cplx>>>();
      iterative_->preconditioner().setDroptol(1e-6);
      iterative_->preconditioner().setFillfactor(20);
      iterative_->setTolerance(1e-13);
      iterative_->setMaxIterations(5000);
      iterative_->compute(A);
      ok_ = iterative_->info() == Eigen::Success;
    }
  }

  bool ok() const { return ok_; }

  Vector solve(const Vector& b) const {
    if (dense_) return dense_->solve(b);
    if (sparse_) return sparse_->solve(b);
    Vector x = iterative_->solve(b);
    if (iterative_->info() != Eigen::Success) {
      throw SolverError("iterative linear solve did not converge", iterative_->error());
    }
    return x;
  }

 private:
  Index n_ = 0;
  bool ok_ = false;
  std::unique_ptr<Eigen::PartialPivLU<DenseMatrix>> dense_;
  std::unique_ptr<Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>> sparse_;
  std::unique_ptr<Eigen::BiCGSTAB<SparseMatrix, Eigen::IncompleteLUT<cplx>>> iterative_;
};

SparseMatrix shifted(const SparseMatrix& L, cplx sigma) {
  SparseMatrix I(L.rows(), L.cols());
  I.setIdentity();
  SparseMatrix A = L - sigma * I;
  A.makeCompressed();
  return A;
}

Vector random_vector(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = cplx(nd(rng), nd(rng));
  return v / v.norm();
}

// Slow modes (rates far below ||L||) are physical in strongly hierarchical
// models, so the shift and the kernel cutoff sit close to round-off.
double kernel_shift(double normL) { return -std::max(1e-13 * normL, 1e-14); }
constexpr double kKernelRitzCutoff = 1e-12;

// Number of Ritz values of L within the numerical kernel, found by block
// shifted-inverse iteration from `seed` plus three random vectors.
int kernel_multiplicity(const SparseMatrix& L, const Factorization& shifted_lu,
                        const Vector& seed, double normL, std::mt19937_64& rng) {
  const Index n = L.rows();
  const int k = static_cast<int>(std::min<Index>(4, n));
  DenseMatrix Y(n, k);
  Y.col(0) = seed / seed.norm();
  for (int c = 1; c < k; ++c) Y.col(c) = random_vector(n, rng);
  for (int it = 0; it < 4; ++it) {
    for (int c = 0; c < k; ++c) Y.col(c) = shifted_lu.solve(Y.col(c));
    Eigen::HouseholderQR<DenseMatrix> qr(Y);
    Y = qr.householderQ() * DenseMatrix::Identity(n, k);
  }
  DenseMatrix LY(n, k);
  for (int c = 0; c < k; ++c) LY.col(c) = L * Y.col(c);
  const DenseMatrix small = Y.adjoint() * LY;
  Eigen::ComplexEigenSolver<DenseMatrix> es(small, false);
  int count = 0;
  for (Index i = 0; i < es.eigenvalues().size(); ++i) {
    if (std::abs(es.eigenvalues()(i)) <= kKernelRitzCutoff * normL) ++count;
  }
  return std::max(count, 1);
}

// Rough ||M^-1||_1 estimate from solves against a few random right-hand sides.
double inverse_norm_estimate(const Factorization& lu, Index n, std::mt19937_64& rng) {
  double best = 0.0;
  for (int i = 0; i < 3; ++i) {
    const Vector b = random_vector(n, rng);
    const Vector x = lu.solve(b);
    if (!x.allFinite()) return std::numeric_limits<double>::infinity();
    best = std::max(best, x.lpNorm<1>() / b.lpNorm<1>());
  }
  return best;
}

SparseMatrix restrict_to(const SparseMatrix& L, const std::vector<Index>& keep, Index n) {
  std::vector<Index> pos(static_cast<std::size_t>(n), -1);
  for (std::size_t i = 0; i < keep.size(); ++i) pos[static_cast<std::size_t>(keep[i])] = static_cast<Index>(i);
  std::vector<Eigen::Triplet<cplx>> trip;
  trip.reserve(static_cast<std::size_t>(L.nonZeros()));
  for (Index c : keep) {
    for (SparseMatrix::InnerIterator it(L, c); it; ++it) {
      const Index r = pos[static_cast<std::size_t>(it.row())];
      if (r >= 0) trip.emplace_back(r, pos[static_cast<std::size_t>(c)], it.value());
    }
  }
  SparseMatrix out(static_cast<Index>(keep.size()), static_cast<Index>(keep.size()));
  out.setFromTriplets(trip.begin(), trip.end());
  out.makeCompressed();
  return out;
}

// True when no nonzero of L connects coordinates of different degree.
bool block_diagonal_in_degree(const SparseMatrix& L, const std::vector<int>& degree) {
  for (Index c = 0; c < L.outerSize(); ++c) {
    for (SparseMatrix::InnerIterator it(L, c); it; ++it) {
      if (degree[static_cast<std::size_t>(it.row())] != degree[static_cast<std::size_t>(c)] &&
          it.value() != cplx(0.0)) {
        return false;
      }
    }
  }
  return true;
}

Vector solve_shifted_inverse(const SparseMatrix& L, const Vector& w, const SteadyOptions& opts,
                             double normL, std::mt19937_64& rng);

Vector solve_null_space_lu(const SparseMatrix& L, const Vector& w, const SteadyOptions& opts,
                           double normL, std::mt19937_64& rng) {
  const Index n = L.rows();
  Index replace = 0;
  double wmax = -1.0;
  for (Index i = 0; i < n; ++i) {
    if (std::abs(w(i)) > wmax) {
      wmax = std::abs(w(i));
      replace = i;
    }
  }
  // Swap one (linearly dependent) row of L for the normalization functional,
  // scaled to the size of L so that large weights do not wreck conditioning.
  const double scale = (normL > 0.0 ? normL : 1.0) / wmax;
  std::vector<Eigen::Triplet<cplx>> trip;
  trip.reserve(static_cast<std::size_t>(L.nonZeros() + n));
  for (Index c = 0; c < n; ++c) {
    for (SparseMatrix::InnerIterator it(L, c); it; ++it) {
      if (it.row() != replace) trip.emplace_back(it.row(), c, it.value());
    }
    if (w(c) != cplx(0.0)) trip.emplace_back(replace, c, scale * w(c));
  }
  SparseMatrix M(n, n);
  M.setFromTriplets(trip.begin(), trip.end());
  M.makeCompressed();

  if (n > opts.direct_limit) {
    throw SolverError("direct kernel solve refused above " + std::to_string(opts.direct_limit) +
                      " unknowns; use shifted inverse iteration");
  }
  Factorization lu(M, opts.dense_limit, opts.direct_limit);
  Vector x;
  bool singular = !lu.ok();
  if (!singular) {
    Vector b = Vector::Zero(n);
    b(replace) = scale;
    x = lu.solve(b);
    singular = !x.allFinite();
    if (!singular) {
      const double cond = operator_norm(M) * inverse_norm_estimate(lu, n, rng);
      singular = !(cond < opts.degeneracy_condition);
    }
  }
  if (singular) {
    // Ill-conditioning alone is not degeneracy: strongly hierarchical rates
    // give tiny but nonzero gaps. Count the kernel before giving up.
    Factorization slu(shifted(L, kernel_shift(normL)), opts.dense_limit, opts.direct_limit);
    const int mult = kernel_multiplicity(L, slu, w.conjugate(), normL, rng);
    if (mult > 1) {
      throw DegenerateSteadyState(mult, "steady state is not unique (kernel dimension " +
                                            std::to_string(mult) + ")");
    }
    if (x.size() == n && x.allFinite() && (L * x).norm() <= 1e-10 * normL * x.norm()) return x;
    return solve_shifted_inverse(L, w, opts, normL, rng);
  }
  return x;
}

Vector solve_shifted_inverse(const SparseMatrix& L, const Vector& w, const SteadyOptions& opts,
                             double normL, std::mt19937_64& rng) {
  Factorization lu(shifted(L, kernel_shift(normL)), opts.dense_limit, opts.direct_limit);
  if (!lu.ok()) throw SolverError("factorization of the shifted generator failed");
  Vector x = w.conjugate();
  x /= cplx(w.transpose() * x);
  double res = std::numeric_limits<double>::infinity();
  // A small residual still leaves an error of order residual / gap along slow
  // modes, so keep iterating for a couple of sweeps past the target.
  int extra = 2;
  for (int it = 0; it < opts.max_iterations; ++it) {
    x = lu.solve(x);
    const cplx tr = w.transpose() * x;
    if (std::abs(tr) == 0.0 || !x.allFinite()) throw SolverError("inverse iteration lost the trace");
    x /= tr;
    res = (L * x).norm() / normL;
    if (res <= opts.residual_target && extra-- == 0) break;
  }
  if (!(res <= std::max(opts.residual_target, 1e-10))) {
    throw SolverError("shifted inverse iteration did not converge", res * normL);
  }
  const int mult = kernel_multiplicity(L, lu, x, normL, rng);
  if (mult > 1) {
    throw DegenerateSteadyState(mult, "steady state is not unique (kernel dimension " +
                                          std::to_string(mult) + ")");
  }
  return x;
}

}  // namespace

const char* to_string(SteadyMethod m) {
  return m == SteadyMethod::null_space_lu ? "null-space-LU" : "shifted-inverse-iteration";
}

double operator_norm(const SparseMatrix& L) {
  double best = 0.0;
  for (Index c = 0; c < L.outerSize(); ++c) {
    double s = 0.0;
    for (SparseMatrix::InnerIterator it(L, c); it; ++it) s += std::abs(it.value());
    best = std::max(best, s);
  }
  return best;
}

KernelResult solve_kernel(const KernelProblem& problem, const SteadyOptions& opts) {
  if (problem.L == nullptr) throw SolverError("no generator given");
  const SparseMatrix& L = *problem.L;
  const Index n = L.rows();
  if (L.cols() != n || problem.weights.size() != n) throw LayoutError("kernel problem sizes differ");
  if (!problem.degree.empty() && static_cast<Index>(problem.degree.size()) != n) {
    throw LayoutError("degree labels must cover every coordinate");
  }
  std::mt19937_64 rng(opts.seed);

  std::vector<Index> keep;
  const bool restrict_sector = opts.use_symmetry && !problem.degree.empty() &&
                               block_diagonal_in_degree(L, problem.degree);
  if (restrict_sector) {
    for (Index i = 0; i < n; ++i) {
      if (problem.degree[static_cast<std::size_t>(i)] == 0) keep.push_back(i);
    }
  }
  const SparseMatrix Ls = restrict_sector ? restrict_to(L, keep, n) : L;
  Vector ws(Ls.rows());
  if (restrict_sector) {
    for (std::size_t i = 0; i < keep.size(); ++i) ws(static_cast<Index>(i)) = problem.weights(keep[i]);
  } else {
    ws = problem.weights;
  }

  const double normL = std::max(operator_norm(Ls), 1e-300);
  Vector xs = opts.method == SteadyMethod::null_space_lu
                  ? solve_null_space_lu(Ls, ws, opts, normL, rng)
                  : solve_shifted_inverse(Ls, ws, opts, normL, rng);
  xs /= cplx(ws.transpose() * xs);

  KernelResult out{Vector::Zero(n), opts.method, Ls.rows()};
  if (restrict_sector) {
    for (std::size_t i = 0; i < keep.size(); ++i) out.x(keep[i]) = xs(static_cast<Index>(i));
  } else {
    out.x = xs;
  }
  return out;
}

std::vector<int> coherence_degrees(const Liouvillian& L) {
  const Index d = L.layout().total_dim();
  const auto& n = L.excitation_numbers();
  std::vector<int> degree;
  if (n.empty()) return degree;
  degree.resize(static_cast<std::size_t>(d * d));
  for (Index j = 0; j < d; ++j) {
    for (Index i = 0; i < d; ++i) {
      degree[static_cast<std::size_t>(i + j * d)] =
          n[static_cast<std::size_t>(i)] - n[static_cast<std::size_t>(j)];
    }
  }
  return degree;
}

SteadyStateResult steady_state(const Liouvillian& L, const SteadyOptions& opts) {
  const Index d = L.layout().total_dim();
  KernelProblem problem;
  problem.L = &L.superop();
  problem.weights = Vector::Zero(d * d);
  for (Index i = 0; i < d; ++i) problem.weights(i + i * d) = 1.0;
  problem.degree = coherence_degrees(L);
  const KernelResult k = solve_kernel(problem, opts);
  DenseMatrix rho = Eigen::Map<const DenseMatrix>(k.x.data(), d, d);
  rho = 0.5 * (rho + rho.adjoint()).eval();
  rho /= rho.trace();

  const Vector r = L.superop() * Eigen::Map<const Vector>(rho.data(), d * d);
  const double normL = operator_norm(L.superop());
  const double residual = r.norm();
  if (!(residual <= 1e-9 * normL)) {
    throw SolverError("steady-state residual too large", residual);
  }
  return SteadyStateResult{DensityMatrix(L.layout(), std::move(rho)), residual,
                           residual / normL, k.method};
}

// ---------------------------------------------------------------- dynamics

namespace {

// Stiffly accurate (2,3) Pade approximant of exp(z), i.e. the stability
// function of the three-stage Radau IIA method, as a partial-fraction sum
// R(z) = sum_k c_k / (z - z_k).
struct PadeTable {
  std::array<cplx, 3> poles;
  std::array<cplx, 3> residues;
};

const PadeTable& pade_table() {
  static const PadeTable table = [] {
    // Denominator scaled to monic form: z^3 - 9 z^2 + 36 z - 60.
    Eigen::Matrix3d companion;
    companion << 9.0, -36.0, 60.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0;
    Eigen::EigenSolver<Eigen::Matrix3d> es(companion);
    PadeTable t;
    for (int k = 0; k < 3; ++k) {
      const cplx z = es.eigenvalues()(k);
      const cplx num = 1.0 + 2.0 * z / 5.0 + z * z / 20.0;
      const cplx dq = -3.0 / 5.0 + 3.0 * z / 10.0 - z * z / 20.0;
      t.poles[static_cast<std::size_t>(k)] = z;
      t.residues[static_cast<std::size_t>(k)] = num / dq;
    }
    return t;
  }();
  return table;
}

class PadeStepper {
 public:
  PadeStepper(const SparseMatrix& L, Index dense_limit) : L_(L), dense_limit_(dense_limit) {}

  Vector step(double h, const Vector& y) {
    const auto& f = factors(h);
    const auto& t = pade_table();
    Vector out = Vector::Zero(y.size());
    for (std::size_t k = 0; k < 3; ++k) out += t.residues[k] * f[k]->solve(y);
    return out;
  }

 private:
  using Set = std::array<std::shared_ptr<Factorization>, 3>;

  const Set& factors(double h) {
    auto it = cache_.find(h);
    if (it != cache_.end()) return it->second;
    if (cache_.size() > 48) cache_.clear();
    Set s;
    const auto& t = pade_table();
    for (std::size_t k = 0; k < 3; ++k) {
      SparseMatrix A = h * L_;
      SparseMatrix I(L_.rows(), L_.cols());
      I.setIdentity();
      A -= t.poles[k] * I;
      A.makeCompressed();
      s[k] = std::make_shared<Factorization>(A, dense_limit_, std::numeric_limits<Index>::max());
      if (!s[k]->ok()) throw SolverError("factorization failed during time stepping");
    }
    return cache_.emplace(h, std::move(s)).first->second;
  }

  const SparseMatrix& L_;
  Index dense_limit_;
  std::map<double, Set> cache_;
};

double quantized(int k) { return std::exp2(k / 4.0); }

}  // namespace

PropagationStats propagate(const SparseMatrix& L, Vector y, const std::vector<double>& t_grid,
                           const EvolveOptions& opts,
                           const std::function<void(std::size_t, const Vector&)>& on_output,
                           const std::function<double(const Vector&, const Vector&)>& error_norm) {
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (!(t_grid[i] >= 0.0) || (i > 0 && t_grid[i] < t_grid[i - 1])) {
      throw SolverError("time grid must be non-negative and non-decreasing");
    }
  }
  const auto norm = [&](const Vector& e, const Vector& ref) {
    if (error_norm) return error_norm(e, ref);
    double worst = 0.0;
    for (Index i = 0; i < e.size(); ++i) {
      worst = std::max(worst, std::abs(e(i)) / (opts.atol + opts.rtol * std::abs(ref(i))));
    }
    return worst;
  };

  const double normL = std::max(operator_norm(L), 1e-300);
  PadeStepper stepper(L, 1024);
  double h0 = opts.initial_step > 0.0 ? opts.initial_step : 1e-2 / normL;
  int k = static_cast<int>(std::floor(4.0 * std::log2(h0)));

  PropagationStats stats;
  double t = 0.0;
  std::size_t idx = 0;
  while (idx < t_grid.size()) {
    const double target = t_grid[idx];
    if (t >= target * (1.0 - 1e-14)) {
      on_output(idx, y);
      ++idx;
      continue;
    }
    const double hq = quantized(k);
    const bool exact = t + hq >= target;
    const double h = exact ? target - t : hq;

    const Vector full = stepper.step(h, y);
    const Vector half = stepper.step(h / 2.0, stepper.step(h / 2.0, y));
    const double err = norm((half - full) / 31.0, half);
    const double factor =
        err == 0.0 ? 4.0 : std::clamp(0.9 * std::pow(err, -1.0 / 6.0), 0.2, 4.0);
    const int dk = static_cast<int>(std::floor(4.0 * std::log2(factor)));
    if (err <= 1.0) {
      t = exact ? target : t + h;
      y = half;
      ++stats.steps;
      if (dk > 0) k += dk;
    } else {
      ++stats.rejected;
      const int kh = static_cast<int>(std::floor(4.0 * std::log2(h)));
      k = std::min(k, kh) + std::min(dk, -1);
    }
    if (quantized(k) < 1e-15 * std::max(1.0, t) || stats.steps + stats.rejected > opts.max_steps) {
      throw StiffnessError(
          "step size collapsed at t = " + std::to_string(t) +
          "; try a smaller cavity truncation or looser (scaled) tolerances");
    }
  }
  return stats;
}

PropagationStats propagate_by_sector(const SparseMatrix& L, const std::vector<int>& degree,
                                     const Vector& y0, const std::vector<double>& t_grid,
                                     const EvolveOptions& opts,
                                     const std::function<void(std::size_t, const Vector&)>& on_output) {
  const Index n = y0.size();
  if (degree.empty() || !block_diagonal_in_degree(L, degree)) {
    return propagate(L, y0, t_grid, opts, on_output);
  }
  std::map<int, std::vector<Index>> sectors;
  for (Index i = 0; i < n; ++i) {
    if (y0(i) != cplx(0.0)) sectors[degree[static_cast<std::size_t>(i)]];
  }
  for (Index i = 0; i < n; ++i) {
    const auto it = sectors.find(degree[static_cast<std::size_t>(i)]);
    if (it != sectors.end()) it->second.push_back(i);
  }
  if (sectors.empty()) return propagate(L, y0, t_grid, opts, on_output);

  PropagationStats total;
  const auto run = [&](const std::vector<Index>& keep, const auto& sink) {
    Vector ys(static_cast<Index>(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k) ys(static_cast<Index>(k)) = y0(keep[k]);
    const PropagationStats st = propagate(restrict_to(L, keep, n), ys, t_grid, opts, sink);
    total.steps += st.steps;
    total.rejected += st.rejected;
  };
  const auto scatter = [](const std::vector<Index>& keep, const Vector& y, Vector& full) {
    for (std::size_t k = 0; k < keep.size(); ++k) full(keep[k]) = y(static_cast<Index>(k));
  };

  if (sectors.size() == 1) {
    const auto& keep = sectors.begin()->second;
    run(keep, [&](std::size_t i, const Vector& y) {
      Vector full = Vector::Zero(n);
      scatter(keep, y, full);
      on_output(i, full);
    });
    return total;
  }
  // Sectors run with independent step sizes, so outputs are buffered.
  std::vector<Vector> buffer(t_grid.size(), Vector::Zero(n));
  for (const auto& [deg, keep] : sectors) {
    run(keep, [&](std::size_t i, const Vector& y) { scatter(keep, y, buffer[i]); });
  }
  for (std::size_t i = 0; i < t_grid.size(); ++i) on_output(i, buffer[i]);
  return total;
}

Trajectory time_evolve(const Liouvillian& L, const DensityMatrix& rho0,
                       const std::vector<double>& t_grid,
                       const std::map<std::string, Observable>& observables,
                       const EvolveOptions& opts) {
  require_same_layout(L.layout(), rho0.layout(), "time_evolve");
  const Index d = L.layout().total_dim();
  Trajectory traj;
  const double tol = std::max(opts.rtol, opts.atol);
  const StateTolerance state_tol{1e-8, 1e-8, -10.0 * tol};
  for (const auto& [name, f] : observables) traj.observables[name] = {};

  const Vector y0 = Eigen::Map<const Vector>(rho0.matrix().data(), d * d);
  const PropagationStats stats = propagate_by_sector(L.superop(), coherence_degrees(L), y0, t_grid, opts,
                                                    [&](std::size_t i, const Vector& y) {
    DenseMatrix m = Eigen::Map<const DenseMatrix>(y.data(), d, d);
    traj.max_trace_drift = std::max(traj.max_trace_drift, std::abs(m.trace() - cplx(1.0)));
    m = 0.5 * (m + m.adjoint()).eval();
    DensityMatrix state(L.layout(), std::move(m), state_tol);
    traj.times.push_back(t_grid[i]);
    for (const auto& [name, f] : observables) traj.observables[name].push_back(f(state));
    if (opts.keep_states) traj.states.push_back(std::move(state));
  });
  traj.steps = stats.steps;
  return traj;
}

std::vector<double> log_time_grid(double t_min, double t_max, int points) {
  if (!(t_min > 0.0 && t_max > t_min && points >= 2)) throw SolverError("invalid log grid");
  std::vector<double> out(static_cast<std::size_t>(points));
  const double a = std::log10(t_min), b = std::log10(t_max);
  for (int i = 0; i < points; ++i) {
    out[static_cast<std::size_t>(i)] = std::pow(10.0, a + (b - a) * i / (points - 1));
  }
  out.back() = t_max;
  return out;
}

DensityMatrix conditional_state(const DensityMatrix& rho, const LabeledOperator& jump) {
  require_same_layout(rho.layout(), jump.layout(), "conditional_state");
  const DenseMatrix J = jump.dense();
  DenseMatrix m = J * rho.matrix() * J.adjoint();
  const double w = m.trace().real();
  if (!(w > 1e-14)) {
    throw HeraldImpossible("jump has zero weight on this state (" + std::to_string(w) + ")");
  }
  m /= w;
  m = 0.5 * (m + m.adjoint()).eval();
  return DensityMatrix(rho.layout(), std::move(m));
}

double fit_saturating_rate(const std::vector<double>& t, const std::vector<double>& y) {
  if (t.size() != y.size() || t.size() < 3) throw SolverError("fit needs at least three samples");
  const auto sse = [&](double log_k) {
    const double k = std::exp(log_k);
    double fy = 0.0, ff = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double f = -std::expm1(-k * t[i]);
      fy += f * y[i];
      ff += f * f;
    }
    const double A = ff > 0.0 ? fy / ff : 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double r = y[i] + A * std::expm1(-k * t[i]);
      s += r * r;
    }
    return s;
  };
  const double tmin = *std::min_element(t.begin(), t.end());
  const double tmax = *std::max_element(t.begin(), t.end());
  const double lo = std::log(1e-2 / tmax), hi = std::log(1e2 / std::max(tmin, tmax * 1e-12));
  const int n = 400;
  double best = lo, best_v = sse(lo);
  for (int i = 1; i <= n; ++i) {
    const double x = lo + (hi - lo) * i / n;
    const double v = sse(x);
    if (v < best_v) {
      best_v = v;
      best = x;
    }
  }
  const double step = (hi - lo) / n;
  const auto r = boost::math::tools::brent_find_minima(sse, best - step, best + step, 50);
  return std::exp(r.first);
}

}  // namespace purcell

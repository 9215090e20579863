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

// Tensor-product operator algebra and superoperator construction.
//
// Conventions used throughout the library:
//  * Site 0 is the most significant factor of the Kronecker product, so a
//    basis index is the mixed-radix number (i_0, i_1, ..., i_{n-1}).
//  * A two-level emitter uses |g> = 0 and |e> = 1, so sigma = |g><e| and
//    sigma_z = 2 sigma^dag sigma - 1 has eigenvalue +1 on |e>.
//  * Cavity sites use the Fock basis |0>, ..., |n_max>.
//  * Superoperators act on column-stacked density matrices,
//    vec(A rho B) = (B^T kron A) vec(rho), which is Eigen's native storage
//    order for a column-major matrix.

#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <complex>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "purcell/errors.hpp"

namespace purcell {

using cplx = std::complex<double>;
using DenseMatrix = Eigen::MatrixXcd;
using SparseMatrix = Eigen::SparseMatrix<cplx>;
using Vector = Eigen::VectorXcd;
using Index = Eigen::Index;

class SubsystemLayout {
 public:
  SubsystemLayout() = default;
  explicit SubsystemLayout(std::vector<int> dims);

  const std::vector<int>& dims() const noexcept { return dims_; }
  int sites() const noexcept { return static_cast<int>(dims_.size()); }
  int dim(int site) const;
  Index total_dim() const noexcept { return total_; }
  std::string describe() const;

  /// Sub-layout made of the given sites, in the given order.
  SubsystemLayout select(std::span<const int> sites) const;

  bool operator==(const SubsystemLayout& other) const { return dims_ == other.dims_; }

 private:
  std::vector<int> dims_;
  Index total_ = 0;
};

void require_same_layout(const SubsystemLayout& a, const SubsystemLayout& b,
                         const char* context);

/// A complex matrix tagged with the layout it acts on. Operators with
/// total_dim <= kDenseThreshold are stored densely, larger ones sparsely.
class LabeledOperator {
 public:
  static constexpr Index kDenseThreshold = 64;

  LabeledOperator() = default;
  LabeledOperator(SubsystemLayout layout, const DenseMatrix& matrix);
  LabeledOperator(SubsystemLayout layout, const SparseMatrix& matrix);

  static LabeledOperator identity(const SubsystemLayout& layout);
  static LabeledOperator zero(const SubsystemLayout& layout);

  const SubsystemLayout& layout() const noexcept { return layout_; }
  bool is_dense() const noexcept { return std::holds_alternative<DenseMatrix>(rep_); }
  DenseMatrix dense() const;
  SparseMatrix sparse() const;

  LabeledOperator dagger() const;
  bool is_hermitian(double tol) const;
  double norm() const;  // Frobenius

  LabeledOperator& operator+=(const LabeledOperator& other);
  LabeledOperator& operator-=(const LabeledOperator& other);
  LabeledOperator& operator*=(cplx s);

  friend LabeledOperator operator+(LabeledOperator a, const LabeledOperator& b) { return a += b; }
  friend LabeledOperator operator-(LabeledOperator a, const LabeledOperator& b) { return a -= b; }
  friend LabeledOperator operator*(cplx s, LabeledOperator a) { return a *= s; }
  friend LabeledOperator operator*(const LabeledOperator& a, const LabeledOperator& b);

 private:
  SubsystemLayout layout_;
  std::variant<DenseMatrix, SparseMatrix> rep_;
};

/// Tolerances a density matrix must satisfy to be accepted.
struct StateTolerance {
  double trace = 1e-10;
  double hermiticity = 1e-10;
  double min_eigenvalue = -1e-8;
};

class DensityMatrix {
 public:
  /// Validates trace, Hermiticity and positivity; throws InvalidState.
  DensityMatrix(SubsystemLayout layout, DenseMatrix matrix, StateTolerance tol = {});

  /// Pure state |psi><psi| (psi is normalized here).
  static DensityMatrix pure(const SubsystemLayout& layout, const Vector& psi);
  /// Product of computational basis states, one index per site.
  static DensityMatrix basis_state(const SubsystemLayout& layout, std::span<const int> indices);

  const SubsystemLayout& layout() const noexcept { return layout_; }
  const DenseMatrix& matrix() const noexcept { return matrix_; }
  double min_eigenvalue() const;
  double purity() const;

 private:
  SubsystemLayout layout_;
  DenseMatrix matrix_;
};

/// Sparse superoperator acting on column-stacked density matrices.
class Liouvillian {
 public:
  Liouvillian() = default;
  Liouvillian(SubsystemLayout layout, SparseMatrix superop);

  static Liouvillian zero(const SubsystemLayout& layout);

  const SubsystemLayout& layout() const noexcept { return layout_; }
  const SparseMatrix& superop() const noexcept { return superop_; }

  /// Excitation number of every Hilbert basis index, when the generator is
  /// known to conserve the excitation coherence degree (weak U(1) symmetry).
  const std::vector<int>& excitation_numbers() const noexcept { return excitation_; }
  void set_excitation_numbers(std::vector<int> n);

  DenseMatrix apply(const DenseMatrix& rho) const;

  Liouvillian& operator+=(const Liouvillian& other);
  friend Liouvillian operator+(Liouvillian a, const Liouvillian& b) { return a += b; }
  friend Liouvillian operator*(double s, Liouvillian a);

 private:
  SubsystemLayout layout_;
  SparseMatrix superop_;
  std::vector<int> excitation_;
};

namespace ops {
DenseMatrix identity(int d);
DenseMatrix sigma_minus();  // |g><e|
DenseMatrix sigma_plus();   // |e><g|
DenseMatrix sigma_z();      // 2 sigma^dag sigma - 1
DenseMatrix sigma_y();
DenseMatrix destroy(int dim);  // truncated annihilation operator on dim Fock levels
DenseMatrix number(int dim);
}  // namespace ops

/// I kron ... kron local_op kron ... kron I, with local_op at `site`.
LabeledOperator embed(const DenseMatrix& local_op, int site, const SubsystemLayout& layout);

/// Superoperator of D[A,B] rho = 2 A rho B^dag - {B^dag A, rho}. Rate
/// prefactors are the caller's business.
Liouvillian lindblad_dissipator(const LabeledOperator& A, const LabeledOperator& B);

/// Superoperator of rho -> -i [H, rho].
Liouvillian hamiltonian_superop(const LabeledOperator& H);

/// Superoperator of rho -> A rho B^dag.
SparseMatrix sandwich_superop(const SparseMatrix& A, const SparseMatrix& B);

DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const int> keep);
DenseMatrix partial_trace(const DenseMatrix& rho, const SubsystemLayout& layout,
                          std::span<const int> keep);

cplx expectation(const LabeledOperator& op, const DensityMatrix& rho);

/// 0.5 * ||a - b||_1 for Hermitian a, b.
double trace_distance(const DenseMatrix& a, const DenseMatrix& b);

/// Flat basis index of a product state.
Index basis_index(const SubsystemLayout& layout, std::span<const int> indices);

}  // namespace purcell

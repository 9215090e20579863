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

#include "purcell/qop.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace purcell {

namespace {

SparseMatrix sparse_identity(Index n) {
  SparseMatrix I(n, n);
  I.setIdentity();
  return I;
}

DenseMatrix hermitian_part(const DenseMatrix& m) { return 0.5 * (m + m.adjoint()); }

}  // namespace

// ---------------------------------------------------------------- layout

SubsystemLayout::SubsystemLayout(std::vector<int> dims) : dims_(std::move(dims)) {
  if (dims_.empty()) throw LayoutError("layout needs at least one site");
  total_ = 1;
  for (int d : dims_) {
    if (d < 1) throw LayoutError("local dimensions must be positive");
    total_ *= d;
  }
}

int SubsystemLayout::dim(int site) const {
  if (site < 0 || site >= sites()) {
    throw LayoutError("site " + std::to_string(site) + " outside layout " + describe());
  }
  return dims_[static_cast<std::size_t>(site)];
}

std::string SubsystemLayout::describe() const {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < dims_.size(); ++i) os << (i ? "," : "") << dims_[i];
  os << ']';
  return os.str();
}

SubsystemLayout SubsystemLayout::select(std::span<const int> sites) const {
  std::vector<int> d;
  d.reserve(sites.size());
  for (int s : sites) d.push_back(dim(s));
  return SubsystemLayout(std::move(d));
}

void require_same_layout(const SubsystemLayout& a, const SubsystemLayout& b,
                         const char* context) {
  if (!(a == b)) {
    throw LayoutError(std::string(context) + ": layout mismatch " + a.describe() + " vs " +
                      b.describe());
  }
}

Index basis_index(const SubsystemLayout& layout, std::span<const int> indices) {
  if (static_cast<int>(indices.size()) != layout.sites()) {
    throw LayoutError("basis_index: expected one index per site");
  }
  Index idx = 0;
  for (int s = 0; s < layout.sites(); ++s) {
    const int i = indices[static_cast<std::size_t>(s)];
    if (i < 0 || i >= layout.dim(s)) throw LayoutError("basis_index: local index out of range");
    idx = idx * layout.dim(s) + i;
  }
  return idx;
}

// ---------------------------------------------------------------- operators

LabeledOperator::LabeledOperator(SubsystemLayout layout, const DenseMatrix& matrix)
    : layout_(std::move(layout)) {
  if (matrix.rows() != layout_.total_dim() || matrix.cols() != layout_.total_dim()) {
    throw LayoutError("operator matrix does not match layout " + layout_.describe());
  }
  if (layout_.total_dim() <= kDenseThreshold) {
    rep_ = matrix;
  } else {
    rep_ = SparseMatrix(matrix.sparseView());
  }
}

LabeledOperator::LabeledOperator(SubsystemLayout layout, const SparseMatrix& matrix)
    : layout_(std::move(layout)) {
  if (matrix.rows() != layout_.total_dim() || matrix.cols() != layout_.total_dim()) {
    throw LayoutError("operator matrix does not match layout " + layout_.describe());
  }
  if (layout_.total_dim() <= kDenseThreshold) {
    rep_ = DenseMatrix(matrix);
  } else {
    SparseMatrix m = matrix;
    m.makeCompressed();
    rep_ = std::move(m);
  }
}

LabeledOperator LabeledOperator::identity(const SubsystemLayout& layout) {
  return LabeledOperator(layout, sparse_identity(layout.total_dim()));
}

LabeledOperator LabeledOperator::zero(const SubsystemLayout& layout) {
  return LabeledOperator(layout, SparseMatrix(layout.total_dim(), layout.total_dim()));
}

DenseMatrix LabeledOperator::dense() const {
  if (const auto* d = std::get_if<DenseMatrix>(&rep_)) return *d;
  return DenseMatrix(std::get<SparseMatrix>(rep_));
}

SparseMatrix LabeledOperator::sparse() const {
  if (const auto* s = std::get_if<SparseMatrix>(&rep_)) return *s;
  SparseMatrix s = std::get<DenseMatrix>(rep_).sparseView();
  s.makeCompressed();
  return s;
}

LabeledOperator LabeledOperator::dagger() const {
  if (is_dense()) return LabeledOperator(layout_, DenseMatrix(std::get<DenseMatrix>(rep_).adjoint()));
  return LabeledOperator(layout_, SparseMatrix(std::get<SparseMatrix>(rep_).adjoint()));
}

bool LabeledOperator::is_hermitian(double tol) const {
  if (is_dense()) {
    const auto& m = std::get<DenseMatrix>(rep_);
    return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
  }
  const auto& m = std::get<SparseMatrix>(rep_);
  SparseMatrix diff = m - SparseMatrix(m.adjoint());
  double worst = 0.0;
  for (Index k = 0; k < diff.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(diff, k); it; ++it) worst = std::max(worst, std::abs(it.value()));
  }
  return worst <= tol;
}

double LabeledOperator::norm() const {
  if (is_dense()) return std::get<DenseMatrix>(rep_).norm();
  return std::get<SparseMatrix>(rep_).norm();
}

LabeledOperator& LabeledOperator::operator+=(const LabeledOperator& other) {
  require_same_layout(layout_, other.layout_, "operator +");
  if (is_dense()) {
    std::get<DenseMatrix>(rep_) += std::get<DenseMatrix>(other.rep_);
  } else {
    std::get<SparseMatrix>(rep_) += std::get<SparseMatrix>(other.rep_);
  }
  return *this;
}

LabeledOperator& LabeledOperator::operator-=(const LabeledOperator& other) {
  require_same_layout(layout_, other.layout_, "operator -");
  if (is_dense()) {
    std::get<DenseMatrix>(rep_) -= std::get<DenseMatrix>(other.rep_);
  } else {
    std::get<SparseMatrix>(rep_) -= std::get<SparseMatrix>(other.rep_);
  }
  return *this;
}

LabeledOperator& LabeledOperator::operator*=(cplx s) {
  std::visit([s](auto& m) { m *= s; }, rep_);
  return *this;
}

LabeledOperator operator*(const LabeledOperator& a, const LabeledOperator& b) {
  require_same_layout(a.layout_, b.layout_, "operator *");
  if (a.is_dense()) {
    return LabeledOperator(a.layout_,
                           DenseMatrix(std::get<DenseMatrix>(a.rep_) * std::get<DenseMatrix>(b.rep_)));
  }
  return LabeledOperator(
      a.layout_, SparseMatrix(std::get<SparseMatrix>(a.rep_) * std::get<SparseMatrix>(b.rep_)));
}

// ---------------------------------------------------------------- states

DensityMatrix::DensityMatrix(SubsystemLayout layout, DenseMatrix matrix, StateTolerance tol)
    : layout_(std::move(layout)), matrix_(std::move(matrix)) {
  const Index d = layout_.total_dim();
  if (matrix_.rows() != d || matrix_.cols() != d) {
    throw LayoutError("density matrix does not match layout " + layout_.describe());
  }
  if (!matrix_.allFinite()) throw InvalidState("density matrix has non-finite entries");
  const double herm = (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff();
  if (herm > tol.hermiticity) {
    throw InvalidState("density matrix not Hermitian (deviation " + std::to_string(herm) + ")");
  }
  const double tr_err = std::abs(matrix_.trace() - cplx(1.0));
  if (tr_err > tol.trace) {
    throw InvalidState("density matrix trace deviates from 1 by " + std::to_string(tr_err));
  }
  const double lmin = min_eigenvalue();
  if (lmin < tol.min_eigenvalue) {
    throw InvalidState("density matrix has eigenvalue " + std::to_string(lmin));
  }
}

DensityMatrix DensityMatrix::pure(const SubsystemLayout& layout, const Vector& psi) {
  if (psi.size() != layout.total_dim()) throw LayoutError("pure: vector does not match layout");
  const double n = psi.norm();
  if (n == 0.0) throw InvalidState("pure: zero vector");
  const Vector u = psi / n;
  return DensityMatrix(layout, u * u.adjoint());
}

DensityMatrix DensityMatrix::basis_state(const SubsystemLayout& layout,
                                         std::span<const int> indices) {
  DenseMatrix m = DenseMatrix::Zero(layout.total_dim(), layout.total_dim());
  const Index k = basis_index(layout, indices);
  m(k, k) = 1.0;
  return DensityMatrix(layout, std::move(m));
}

double DensityMatrix::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(hermitian_part(matrix_), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double DensityMatrix::purity() const { return (matrix_ * matrix_).trace().real(); }

// ---------------------------------------------------------------- superoperators

Liouvillian::Liouvillian(SubsystemLayout layout, SparseMatrix superop)
    : layout_(std::move(layout)), superop_(std::move(superop)) {
  const Index d2 = layout_.total_dim() * layout_.total_dim();
  if (superop_.rows() != d2 || superop_.cols() != d2) {
    throw LayoutError("superoperator does not match layout " + layout_.describe());
  }
  superop_.makeCompressed();
}

Liouvillian Liouvillian::zero(const SubsystemLayout& layout) {
  const Index d2 = layout.total_dim() * layout.total_dim();
  return Liouvillian(layout, SparseMatrix(d2, d2));
}

void Liouvillian::set_excitation_numbers(std::vector<int> n) {
  if (!n.empty() && static_cast<Index>(n.size()) != layout_.total_dim()) {
    throw LayoutError("excitation numbers must cover every basis state");
  }
  excitation_ = std::move(n);
}

DenseMatrix Liouvillian::apply(const DenseMatrix& rho) const {
  const Index d = layout_.total_dim();
  if (rho.rows() != d || rho.cols() != d) throw LayoutError("apply: state does not match layout");
  Vector v = superop_ * Eigen::Map<const Vector>(rho.data(), d * d);
  return Eigen::Map<const DenseMatrix>(v.data(), d, d);
}

Liouvillian& Liouvillian::operator+=(const Liouvillian& other) {
  require_same_layout(layout_, other.layout_, "Liouvillian +");
  superop_ += other.superop_;
  superop_.makeCompressed();
  if (excitation_ != other.excitation_) excitation_.clear();
  return *this;
}

Liouvillian operator*(double s, Liouvillian a) {
  a.superop_ *= cplx(s);
  return a;
}

namespace ops {

DenseMatrix identity(int d) { return DenseMatrix::Identity(d, d); }

DenseMatrix sigma_minus() {
  DenseMatrix m = DenseMatrix::Zero(2, 2);
  m(0, 1) = 1.0;
  return m;
}

DenseMatrix sigma_plus() { return sigma_minus().adjoint(); }

DenseMatrix sigma_z() { return 2.0 * sigma_plus() * sigma_minus() - identity(2); }

DenseMatrix sigma_y() {
  DenseMatrix m = DenseMatrix::Zero(2, 2);
  m(0, 1) = cplx(0, -1);
  m(1, 0) = cplx(0, 1);
  return m;
}

DenseMatrix destroy(int dim) {
  DenseMatrix a = DenseMatrix::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

DenseMatrix number(int dim) {
  DenseMatrix m = DenseMatrix::Zero(dim, dim);
  for (int n = 0; n < dim; ++n) m(n, n) = static_cast<double>(n);
  return m;
}

}  // namespace ops

LabeledOperator embed(const DenseMatrix& local_op, int site, const SubsystemLayout& layout) {
  const int d = layout.dim(site);
  if (local_op.rows() != d || local_op.cols() != d) {
    throw LayoutError("embed: local operator is " + std::to_string(local_op.rows()) + "x" +
                      std::to_string(local_op.cols()) + " but site " + std::to_string(site) +
                      " has dimension " + std::to_string(d));
  }
  Index left = 1, right = 1;
  for (int s = 0; s < site; ++s) left *= layout.dim(s);
  for (int s = site + 1; s < layout.sites(); ++s) right *= layout.dim(s);
  SparseMatrix local = local_op.sparseView();
  SparseMatrix out = Eigen::kroneckerProduct(
      sparse_identity(left),
      SparseMatrix(Eigen::kroneckerProduct(local, sparse_identity(right))));
  return LabeledOperator(layout, out);
}

SparseMatrix sandwich_superop(const SparseMatrix& A, const SparseMatrix& B) {
  SparseMatrix Bc = B.conjugate();
  return Eigen::kroneckerProduct(Bc, A);
}

Liouvillian lindblad_dissipator(const LabeledOperator& A, const LabeledOperator& B) {
  require_same_layout(A.layout(), B.layout(), "lindblad_dissipator");
  const Index d = A.layout().total_dim();
  const SparseMatrix a = A.sparse();
  const SparseMatrix b = B.sparse();
  const SparseMatrix bda = SparseMatrix(b.adjoint()) * a;
  const SparseMatrix I = sparse_identity(d);
  SparseMatrix L = 2.0 * sandwich_superop(a, b);
  L -= SparseMatrix(Eigen::kroneckerProduct(I, bda));
  L -= SparseMatrix(Eigen::kroneckerProduct(SparseMatrix(bda.transpose()), I));
  L.prune(cplx(0.0));
  return Liouvillian(A.layout(), std::move(L));
}

Liouvillian hamiltonian_superop(const LabeledOperator& H) {
  const Index d = H.layout().total_dim();
  const SparseMatrix h = H.sparse();
  const SparseMatrix I = sparse_identity(d);
  SparseMatrix L = SparseMatrix(Eigen::kroneckerProduct(I, h)) -
                   SparseMatrix(Eigen::kroneckerProduct(SparseMatrix(h.transpose()), I));
  L *= cplx(0.0, -1.0);
  L.prune(cplx(0.0));
  return Liouvillian(H.layout(), std::move(L));
}

// ---------------------------------------------------------------- reductions

DenseMatrix partial_trace(const DenseMatrix& rho, const SubsystemLayout& layout,
                          std::span<const int> keep) {
  if (keep.empty()) throw LayoutError("partial_trace: keep set is empty");
  std::vector<int> kept(keep.begin(), keep.end());
  std::sort(kept.begin(), kept.end());
  kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
  for (int s : kept) (void)layout.dim(s);

  const int n = layout.sites();
  std::vector<bool> is_kept(static_cast<std::size_t>(n), false);
  for (int s : kept) is_kept[static_cast<std::size_t>(s)] = true;

  const SubsystemLayout reduced = layout.select(kept);
  const Index D = layout.total_dim();
  if (rho.rows() != D || rho.cols() != D) throw LayoutError("partial_trace: state/layout mismatch");

  // Split every full index into (kept index, traced index).
  std::vector<Index> kept_of(static_cast<std::size_t>(D)), traced_of(static_cast<std::size_t>(D));
  std::vector<int> digits(static_cast<std::size_t>(n));
  for (Index idx = 0; idx < D; ++idx) {
    Index r = idx;
    for (int s = n - 1; s >= 0; --s) {
      digits[static_cast<std::size_t>(s)] = static_cast<int>(r % layout.dim(s));
      r /= layout.dim(s);
    }
    Index k = 0, t = 0;
    for (int s = 0; s < n; ++s) {
      if (is_kept[static_cast<std::size_t>(s)]) {
        k = k * layout.dim(s) + digits[static_cast<std::size_t>(s)];
      } else {
        t = t * layout.dim(s) + digits[static_cast<std::size_t>(s)];
      }
    }
    kept_of[static_cast<std::size_t>(idx)] = k;
    traced_of[static_cast<std::size_t>(idx)] = t;
  }

  DenseMatrix out = DenseMatrix::Zero(reduced.total_dim(), reduced.total_dim());
  for (Index c = 0; c < D; ++c) {
    const Index tc = traced_of[static_cast<std::size_t>(c)];
    const Index kc = kept_of[static_cast<std::size_t>(c)];
    for (Index r = 0; r < D; ++r) {
      if (traced_of[static_cast<std::size_t>(r)] == tc) {
        out(kept_of[static_cast<std::size_t>(r)], kc) += rho(r, c);
      }
    }
  }
  return out;
}

DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const int> keep) {
  std::vector<int> kept(keep.begin(), keep.end());
  std::sort(kept.begin(), kept.end());
  kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
  DenseMatrix m = partial_trace(rho.matrix(), rho.layout(), kept);
  // The input already passed validation; keep the reduced state within the
  // same accumulated rounding budget.
  return DensityMatrix(rho.layout().select(kept), std::move(m),
                       StateTolerance{1e-9, 1e-9, -1e-7});
}

cplx expectation(const LabeledOperator& op, const DensityMatrix& rho) {
  require_same_layout(op.layout(), rho.layout(), "expectation");
  if (op.is_dense()) return (op.dense() * rho.matrix()).trace();
  return (op.sparse() * rho.matrix()).trace();
}

double trace_distance(const DenseMatrix& a, const DenseMatrix& b) {
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(hermitian_part(a - b), Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

}  // namespace purcell

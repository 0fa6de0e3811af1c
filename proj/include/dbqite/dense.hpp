#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "dbqite/core.hpp"
#include "dbqite/pauli.hpp"
#include "dbqite/state.hpp"

namespace dbqite {

/// Square complex matrix of dimension 2^n with an optional Hermitian tag.
class DenseOperator {
 public:
  DenseOperator() = default;

  explicit DenseOperator(CMatrix m, bool hermitian = false) : m_(std::move(m)), hermitian_(hermitian) {
    if (m_.rows() != m_.cols()) throw std::invalid_argument("DenseOperator: matrix must be square");
    if (hermitian_) {
      const Real scale = std::max(1.0, m_.cwiseAbs().maxCoeff());
      const Real skew = (m_ - m_.adjoint()).cwiseAbs().maxCoeff();
      if (skew > 1e-12 * scale) {
        throw ContractViolation("DenseOperator: matrix tagged Hermitian deviates by " + std::to_string(skew));
      }
      m_ = (0.5 * (m_ + m_.adjoint())).eval();
    }
  }

  /// Tags as Hermitian if it is (within the tolerance), otherwise leaves it untagged.
  static DenseOperator detect(CMatrix m) {
    const Real scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    const bool herm = (m - m.adjoint()).cwiseAbs().maxCoeff() <= 1e-12 * scale;
    return DenseOperator(std::move(m), herm);
  }

  static DenseOperator identity(Eigen::Index dim) { return DenseOperator(CMatrix::Identity(dim, dim), true); }
  static DenseOperator zero(Eigen::Index dim) { return DenseOperator(CMatrix::Zero(dim, dim), true); }
  static DenseOperator projector(const StateVector& psi) {
    return DenseOperator(psi.amplitudes() * psi.amplitudes().adjoint(), true);
  }

  Eigen::Index dim() const { return m_.rows(); }
  bool is_hermitian() const { return hermitian_; }
  const CMatrix& matrix() const { return m_; }
  Complex operator()(Eigen::Index r, Eigen::Index c) const { return m_(r, c); }

  friend DenseOperator operator+(const DenseOperator& a, const DenseOperator& b) {
    check_dims(a, b);
    return DenseOperator(a.m_ + b.m_, a.hermitian_ && b.hermitian_);
  }
  friend DenseOperator operator-(const DenseOperator& a, const DenseOperator& b) {
    check_dims(a, b);
    return DenseOperator(a.m_ - b.m_, a.hermitian_ && b.hermitian_);
  }
  friend DenseOperator operator*(const DenseOperator& a, const DenseOperator& b) {
    check_dims(a, b);
    return DenseOperator(a.m_ * b.m_);
  }
  friend DenseOperator operator*(Real s, const DenseOperator& a) { return DenseOperator(s * a.m_, a.hermitian_); }

  static void check_dims(const DenseOperator& a, const DenseOperator& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("DenseOperator: dimension mismatch");
  }

 private:
  CMatrix m_;
  bool hermitian_ = false;
};

/// Dense matrix of a Pauli sum. Guarded to n <= kMaxDenseQubits.
inline DenseOperator to_dense(const PauliSum& h) {
  const int n = h.num_qubits();
  if (n > kMaxDenseQubits) {
    throw CapacityError("to_dense: " + std::to_string(n) + " qubits exceeds dense cap of " +
                        std::to_string(kMaxDenseQubits));
  }
  const auto dim = static_cast<Eigen::Index>(dim_of(n));
  CMatrix m = CMatrix::Zero(dim, dim);
  static constexpr Complex kIPow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  for (const auto& t : h.terms()) {
    const std::uint64_t x = t.x_mask();
    const std::uint64_t z = t.z_mask();
    const Complex c = t.coefficient() * kIPow[t.y_count() % 4];
    for (Eigen::Index b = 0; b < dim; ++b) {
      const auto ub = static_cast<std::uint64_t>(b);
      const Real sign = (std::popcount(ub & z) & 1) ? -1.0 : 1.0;
      m(static_cast<Eigen::Index>(ub ^ x), b) += sign * c;
    }
  }
  return DenseOperator(std::move(m), true);
}

/// Ascending eigenvalues with orthonormal eigenvector columns.
struct EigenSystem {
  RVector values;
  CMatrix vectors;

  Eigen::Index size() const { return values.size(); }
  int num_qubits() const { return static_cast<int>(std::lround(std::log2(static_cast<double>(values.size())))); }
  StateVector state(Eigen::Index k) const {
    if (k < 0 || k >= size()) throw std::out_of_range("EigenSystem: eigenindex " + std::to_string(k) + " out of range");
    return StateVector(num_qubits(), vectors.col(k));
  }
};

namespace detail {

inline constexpr Real kDegeneracyGap = 1e-9;
inline constexpr Real kNonzeroAmplitude = 1e-8;

inline Eigen::Index first_nonzero(const CVector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (std::abs(v[i]) > kNonzeroAmplitude) return i;
  return v.size();
}

/// Rotates v so its first non-negligible amplitude is real positive.
inline void fix_phase(Eigen::Ref<CVector> v) {
  const auto i = first_nonzero(v);
  if (i == v.size()) return;
  v *= std::conj(v[i]) / std::abs(v[i]);
}

/// Replaces an arbitrary basis of a degenerate eigenspace with a basis that depends
/// only on the subspace: pivoted Gram-Schmidt over projected computational basis vectors,
/// then ordered by first nonzero index (asc) and its magnitude (desc).
inline void canonicalize_cluster(CMatrix& vecs, Eigen::Index begin, Eigen::Index end) {
  const Eigen::Index m = end - begin;
  const CMatrix q = vecs.middleCols(begin, m);
  // Work in subspace coordinates: P e_j = Q y_j with y_j = Q^dagger e_j.
  const CMatrix y = q.adjoint();
  CMatrix w = CMatrix::Zero(m, m);
  for (Eigen::Index c = 0; c < m; ++c) {
    CMatrix r = y;
    if (c > 0) r -= w.leftCols(c) * (w.leftCols(c).adjoint() * y);
    const RVector norms = r.colwise().norm();
    const Real best = norms.maxCoeff();
    Eigen::Index pick = 0;
    while (norms[pick] < best - 1e-9) ++pick;
    CVector v = r.col(pick);
    if (c > 0) v -= w.leftCols(c) * (w.leftCols(c).adjoint() * v);
    w.col(c) = v.normalized();
  }
  CMatrix chosen = q * w;
  for (Eigen::Index c = 0; c < m; ++c) fix_phase(chosen.col(c));
  std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    const CVector va = chosen.col(a), vb = chosen.col(b);
    const auto ia = first_nonzero(va), ib = first_nonzero(vb);
    if (ia != ib) return ia < ib;
    return std::abs(va[ia]) > std::abs(vb[ib]) + 1e-12;
  });
  for (Eigen::Index c = 0; c < m; ++c) vecs.col(begin + c) = chosen.col(order[static_cast<std::size_t>(c)]);
}

}  // namespace detail

/// Hermitian eigendecomposition with reproducible eigenvector choice: every vector is
/// phase-fixed, and degenerate clusters (gap < 1e-9) get a canonical basis.
inline EigenSystem eigh(const DenseOperator& m) {
  if (!m.is_hermitian()) throw ContractViolation("eigh: operator is not tagged Hermitian");
  EigenSystem es;
  const CMatrix& a = m.matrix();
  if (a.imag().cwiseAbs().maxCoeff() == 0.0) {
    Eigen::SelfAdjointEigenSolver<RMatrix> solver(a.real());
    if (solver.info() != Eigen::Success) throw std::runtime_error("eigh: eigensolver failed");
    es.values = solver.eigenvalues();
    es.vectors = solver.eigenvectors().cast<Complex>();
  } else {
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(a);
    if (solver.info() != Eigen::Success) throw std::runtime_error("eigh: eigensolver failed");
    es.values = solver.eigenvalues();
    es.vectors = solver.eigenvectors();
  }
  const Eigen::Index dim = es.values.size();
  for (Eigen::Index begin = 0; begin < dim;) {
    Eigen::Index end = begin + 1;
    while (end < dim && es.values[end] - es.values[end - 1] < detail::kDegeneracyGap) ++end;
    if (end - begin > 1) {
      detail::canonicalize_cluster(es.vectors, begin, end);
    } else {
      detail::fix_phase(es.vectors.col(begin));
    }
    begin = end;
  }
  return es;
}

/// e^{i theta M} from a precomputed eigensystem.
inline DenseOperator exp_unitary(const EigenSystem& es, Real theta) {
  const CVector phases = (kI * theta * es.values.cast<Complex>()).array().exp();
  return DenseOperator(es.vectors * phases.asDiagonal() * es.vectors.adjoint());
}

inline DenseOperator exp_unitary(const DenseOperator& m, Real theta) {
  if (!m.is_hermitian()) throw ContractViolation("exp_unitary: operator is not tagged Hermitian");
  return exp_unitary(eigh(m), theta);
}

inline DenseOperator commutator(const DenseOperator& a, const DenseOperator& b) {
  DenseOperator::check_dims(a, b);
  return DenseOperator(a.matrix() * b.matrix() - b.matrix() * a.matrix());
}

inline Real hs_norm(const DenseOperator& m) { return m.matrix().norm(); }

/// Applies functions of a fixed Hermitian operator to vectors through its cached eigensystem.
class Propagator {
 public:
  explicit Propagator(const PauliSum& h) : Propagator(eigh(to_dense(h))) {}
  explicit Propagator(EigenSystem es) : es_(std::move(es)), n_(es_.num_qubits()) {}

  const EigenSystem& spectrum() const { return es_; }
  int num_qubits() const { return n_; }
  Real min_eigenvalue() const { return es_.values[0]; }
  Real max_eigenvalue() const { return es_.values[es_.size() - 1]; }

  /// Coefficients of v in the eigenbasis.
  CVector coefficients(const CVector& v) const { return es_.vectors.adjoint() * v; }
  CVector from_coefficients(const CVector& c) const { return es_.vectors * c; }

  /// e^{i theta H} v
  CVector exp_i(Real theta, const CVector& v) const {
    CVector c = coefficients(v);
    for (Eigen::Index i = 0; i < c.size(); ++i) c[i] *= std::polar(1.0, theta * es_.values[i]);
    return from_coefficients(c);
  }
  StateVector exp_i(Real theta, const StateVector& psi) const {
    return StateVector(psi.num_qubits(), exp_i(theta, psi.amplitudes()));
  }

  /// |<lambda_k|psi>|^2
  Real eigen_fidelity(const StateVector& psi, Eigen::Index k) const {
    if (k < 0 || k >= es_.size()) throw std::out_of_range("eigen_fidelity: index out of range");
    return std::clamp(std::norm(es_.vectors.col(k).dot(psi.amplitudes())), 0.0, 1.0);
  }

 private:
  EigenSystem es_;
  int n_;
};

}  // namespace dbqite

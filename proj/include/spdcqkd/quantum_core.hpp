#pragma once

// Two-qubit states, Pauli algebra and correlation-tensor analysis.
//
// Basis ordering of the two-qubit space is |HH>, |HV>, |VH>, |VV> everywhere,
// with the first factor belonging to mode A (Alice) unless an operation says
// otherwise. |H>, |V> are the sigma_z eigenvectors, so sigma_3 = |H><H| - |V><V|.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include "spdcqkd/error.hpp"

namespace spdcqkd {

using cplx = std::complex<double>;
using Matrix2c = Eigen::Matrix2cd;
using Matrix4c = Eigen::Matrix4cd;
using Vector4c = Eigen::Vector4cd;
using Matrix3 = Eigen::Matrix3d;
using Vector3 = Eigen::Vector3d;

namespace tolerance {
inline constexpr double kHermitian = 1e-12;
inline constexpr double kTrace = 1e-12;
inline constexpr double kPositivity = 1e-10;
inline constexpr double kUnitNorm = 1e-12;
}  // namespace tolerance

namespace detail {

template <int Dim>
using SquareMatrix = Eigen::Matrix<cplx, Dim, Dim>;

/// Eigenvalues of a Hermitian matrix in ascending order.
template <int Dim>
Eigen::Matrix<double, Dim, 1> hermitian_eigenvalues(const SquareMatrix<Dim>& m) {
  Eigen::SelfAdjointEigenSolver<SquareMatrix<Dim>> solver(m, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

/// Square root of a positive-semidefinite Hermitian matrix. Eigenvalues in
/// [-kPositivity, 0) are clipped to zero.
template <int Dim>
SquareMatrix<Dim> psd_sqrt(const SquareMatrix<Dim>& m) {
  Eigen::SelfAdjointEigenSolver<SquareMatrix<Dim>> solver(m);
  Eigen::Matrix<double, Dim, 1> root = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return solver.eigenvectors() * root.asDiagonal() * solver.eigenvectors().adjoint();
}

inline Matrix4c kron(const Matrix2c& a, const Matrix2c& b) {
  Matrix4c out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  return out;
}

}  // namespace detail

/// A density matrix on a Dim-dimensional space: Hermitian, unit trace and
/// positive semidefinite within the tolerances above. Immutable once built.
template <int Dim>
class QuantumState {
 public:
  using Matrix = detail::SquareMatrix<Dim>;

  /// Validates `m`; throws std::invalid_argument when an invariant fails.
  explicit QuantumState(const Matrix& m) : m_(m) { validate(m_); }

  /// Hermitizes and renormalizes an estimate that is PSD up to rounding
  /// (tomography iterates, Monte-Carlo perturbations). Still validated.
  static QuantumState from_estimate(const Matrix& m) {
    Matrix h = 0.5 * (m + m.adjoint());
    const double tr = h.trace().real();
    if (!(tr > 0.0)) throw std::invalid_argument("state estimate has non-positive trace");
    return QuantumState(h / tr);
  }

  static QuantumState from_pure(const Eigen::Matrix<cplx, Dim, 1>& psi) {
    const double n = psi.norm();
    if (n == 0.0) throw std::invalid_argument("zero state vector");
    const Eigen::Matrix<cplx, Dim, 1> unit = psi / n;
    return QuantumState(unit * unit.adjoint());
  }

  static QuantumState maximally_mixed() { return QuantumState(Matrix::Identity() / double(Dim)); }

  const Matrix& matrix() const { return m_; }
  cplx operator()(int r, int c) const { return m_(r, c); }

  /// Re Tr[rho * op].
  double expectation(const Matrix& op) const {
    return m_.cwiseProduct(op.transpose()).sum().real();
  }

  /// Eigenvalues ascending, negatives above -kPositivity clipped to zero.
  Eigen::Matrix<double, Dim, 1> spectrum() const {
    return detail::hermitian_eigenvalues<Dim>(m_).cwiseMax(0.0);
  }

 private:
  static void validate(const Matrix& m) {
    if (!m.allFinite()) throw std::invalid_argument("state has non-finite elements");
    if ((m - m.adjoint()).cwiseAbs().maxCoeff() > tolerance::kHermitian)
      throw std::invalid_argument("state is not Hermitian");
    if (std::abs(m.trace() - cplx(1.0, 0.0)) > tolerance::kTrace)
      throw std::invalid_argument("state does not have unit trace");
    if (detail::hermitian_eigenvalues<Dim>(m).minCoeff() < -tolerance::kPositivity)
      throw std::invalid_argument("state is not positive semidefinite");
  }

  Matrix m_;
};

using DensityMatrix = QuantumState<4>;
using SingleQubitState = QuantumState<2>;

/// Real 3-vector parameterizing a qubit observable x . sigma.
class BlochVector {
 public:
  BlochVector(double x1, double x2, double x3) : v_(x1, x2, x3) {}
  explicit BlochVector(const Vector3& v) : v_(v) {}

  /// Normalized copy of `v`; throws on the zero vector.
  static BlochVector normalized(const Vector3& v) {
    const double n = v.norm();
    if (!(n > 0.0)) throw std::invalid_argument("cannot normalize a zero Bloch vector");
    return BlochVector(v / n);
  }

  double x1() const { return v_(0); }
  double x2() const { return v_(1); }
  double x3() const { return v_(2); }
  const Vector3& vec() const { return v_; }

  bool is_unit(double tol = tolerance::kUnitNorm) const { return std::abs(v_.norm() - 1.0) <= tol; }

  /// Direction of the orthogonal pure state.
  BlochVector antipodal() const { return BlochVector(-v_); }

 private:
  Vector3 v_;
};

/// sigma_1 = sigma_x, sigma_2 = sigma_y, sigma_3 = sigma_z.
inline Matrix2c pauli(int i) {
  const cplx I(0.0, 1.0);
  Matrix2c s;
  switch (i) {
    case 1: s << 0, 1, 1, 0; break;
    case 2: s << 0, -I, I, 0; break;
    case 3: s << 1, 0, 0, -1; break;
    default: throw std::invalid_argument("Pauli index must be 1, 2 or 3, got " + std::to_string(i));
  }
  return s;
}

/// Pure-state projector (1 + x . sigma)/2 onto the direction x.
inline Matrix2c projector(const BlochVector& x) {
  if (!x.is_unit()) throw std::invalid_argument("measurement direction must be a unit Bloch vector");
  return 0.5 * (Matrix2c::Identity() + x.x1() * pauli(1) + x.x2() * pauli(2) + x.x3() * pauli(3));
}

/// Observable x . sigma.
inline Matrix2c observable(const Vector3& x) {
  return x(0) * pauli(1) + x(1) * pauli(2) + x(2) * pauli(3);
}

enum class BellState { PhiPlus, PhiMinus, PsiPlus, PsiMinus };

inline DensityMatrix bell_state(BellState kind) {
  const double r = 1.0 / std::sqrt(2.0);
  Vector4c psi = Vector4c::Zero();
  switch (kind) {
    case BellState::PhiPlus: psi << r, 0, 0, r; break;
    case BellState::PhiMinus: psi << r, 0, 0, -r; break;
    case BellState::PsiPlus: psi << 0, r, r, 0; break;
    case BellState::PsiMinus: psi << 0, r, -r, 0; break;
    default: throw std::invalid_argument("unknown Bell state label");
  }
  return DensityMatrix::from_pure(psi);
}

/// (1 - kappa) rho + kappa * 1/4.
inline DensityMatrix werner_mix(const DensityMatrix& rho, double kappa) {
  if (!(kappa >= 0.0 && kappa <= 1.0))
    throw std::invalid_argument("white-noise weight kappa must lie in [0, 1]");
  return DensityMatrix((1.0 - kappa) * rho.matrix() + kappa * Matrix4c::Identity() / 4.0);
}

enum class Subsystem { A, B };

/// Reduced state of the subsystem `keep`.
inline SingleQubitState partial_trace(const DensityMatrix& rho, Subsystem keep) {
  const Matrix4c& m = rho.matrix();
  Matrix2c r = Matrix2c::Zero();
  for (int i = 0; i < 2; ++i)
    for (int k = 0; k < 2; ++k)
      for (int j = 0; j < 2; ++j)
        r(i, k) += keep == Subsystem::A ? m(2 * i + j, 2 * k + j) : m(2 * j + i, 2 * j + k);
  return SingleQubitState::from_estimate(r);
}

/// Correlation tensor T_ij = Tr[rho (sigma_i x sigma_j)], U = T^T T and the
/// eigenpairs of U sorted by descending eigenvalue.
struct CorrelationAnalysis {
  Matrix3 T;
  Matrix3 U;
  std::array<double, 3> eigenvalues;
  std::array<Vector3, 3> eigenvectors;
};

namespace detail {

// First component with magnitude above 1e-12 made positive.
inline Vector3 fix_sign(Vector3 v) {
  for (int i = 0; i < 3; ++i) {
    if (std::abs(v(i)) > 1e-12) {
      if (v(i) < 0) v = -v;
      break;
    }
  }
  return v;
}

}  // namespace detail

inline Matrix3 correlation_tensor(const DensityMatrix& rho) {
  Matrix3 t;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) t(i, j) = rho.expectation(detail::kron(pauli(i + 1), pauli(j + 1)));
  return t;
}

inline CorrelationAnalysis correlation_analysis(const DensityMatrix& rho) {
  CorrelationAnalysis out;
  out.T = correlation_tensor(rho);
  out.U = out.T.transpose() * out.T;
  Eigen::SelfAdjointEigenSolver<Matrix3> solver(out.U);
  for (int k = 0; k < 3; ++k) {
    // Eigen sorts ascending.
    out.eigenvalues[k] = std::max(solver.eigenvalues()(2 - k), 0.0);
    out.eigenvectors[k] = detail::fix_sign(solver.eigenvectors().col(2 - k));
  }
  return out;
}

/// Wootters concurrence, computed from the Hermitian form
/// sqrt(rho) rho~ sqrt(rho), whose eigenvalues equal those of rho rho~.
inline double concurrence(const DensityMatrix& rho) {
  const Matrix4c yy = detail::kron(pauli(2), pauli(2));
  const Matrix4c flipped = yy * rho.matrix().conjugate() * yy;
  const Matrix4c root = detail::psd_sqrt<4>(rho.matrix());
  const Matrix4c m = root * flipped * root;
  Eigen::Vector4d mu = detail::hermitian_eigenvalues<4>(Matrix4c(0.5 * (m + m.adjoint())))
                           .cwiseMax(0.0)
                           .cwiseSqrt();
  // ascending: mu(3) is the largest
  return std::clamp(mu(3) - mu(2) - mu(1) - mu(0), 0.0, 1.0);
}

/// Uhlmann root fidelity Tr sqrt(sqrt(rho) sigma sqrt(rho)).
inline double root_fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  const Matrix4c root = detail::psd_sqrt<4>(rho.matrix());
  const Matrix4c m = root * sigma.matrix() * root;
  const Eigen::Vector4d ev = detail::hermitian_eigenvalues<4>(Matrix4c(0.5 * (m + m.adjoint())));
  return std::clamp(ev.cwiseMax(0.0).cwiseSqrt().sum(), 0.0, 1.0);
}

/// Squared (Jozsa) convention: F = (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2,
/// which reduces to <psi|sigma|psi> for a pure rho.
inline double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  const double f = root_fidelity(rho, sigma);
  return f * f;
}

}  // namespace spdcqkd

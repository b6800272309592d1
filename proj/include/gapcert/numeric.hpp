#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "errors.hpp"

namespace gapcert {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Complex = std::complex<double>;
using Index = Eigen::Index;

// Eigenvalues of a real square matrix, sorted by (real, imag).
// Conjugate pairs stay adjacent under this order.
inline std::vector<Complex> eigenvalues(const Matrix& m) {
  if (m.rows() != m.cols()) throw DomainError("eigenvalues: matrix not square");
  if (m.rows() == 0) return {};
  Eigen::EigenSolver<Matrix> es(m, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) throw NumericalError("eigenvalues: QR iteration failed");
  std::vector<Complex> vals(static_cast<size_t>(m.rows()));
  for (Index i = 0; i < m.rows(); ++i) vals[static_cast<size_t>(i)] = es.eigenvalues()(i);
  std::sort(vals.begin(), vals.end(), [](const Complex& a, const Complex& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return vals;
}

// Singular values in descending order; sv(0) is the induced 2-norm.
inline Vector singular_values(const Matrix& m) {
  if (m.size() == 0) return Vector(0);
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues();
}

inline double sigma_max(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Matrix>(m).singularValues()(0);
}

inline double sigma_max(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  return Eigen::JacobiSVD<CMatrix>(m).singularValues()(0);
}

inline std::vector<double> log_grid(double lo, double hi, int n) {
  if (!(lo > 0.0) || !(hi > lo) || n < 2) throw DomainError("log_grid: need 0 < lo < hi, n >= 2");
  std::vector<double> g(static_cast<size_t>(n));
  const double step = std::log(hi / lo) / (n - 1);
  for (int i = 0; i < n; ++i) g[static_cast<size_t>(i)] = lo * std::exp(step * i);
  return g;
}

namespace detail {

// Unitary swap of adjacent diagonal entries of a complex Schur form.
// After the call t(k,k) and t(k+1,k+1) are exchanged; u tracks the similarity.
inline void schur_swap_adjacent(CMatrix& t, CMatrix& u, Index k) {
  const Complex x1 = t(k, k + 1);
  const Complex x2 = t(k + 1, k + 1) - t(k, k);
  const double r = std::sqrt(std::norm(x1) + std::norm(x2));
  if (r < 1e-300) return; // coincident eigenvalues, swap is a no-op
  // G maps the eigenvector (x1, x2) of the trailing eigenvalue to r*e1.
  Eigen::Matrix2cd g;
  g << std::conj(x1) / r, std::conj(x2) / r, -x2 / r, x1 / r;
  t.middleRows(k, 2) = g * t.middleRows(k, 2);
  t.middleCols(k, 2) = t.middleCols(k, 2) * g.adjoint();
  u.middleCols(k, 2) = u.middleCols(k, 2) * g.adjoint();
  t(k + 1, k) = Complex(0.0, 0.0);
}

// Reorders a complex Schur form so that eigenvalues with negative real part
// come first. Bubble passes with unitary adjacent swaps.
inline void schur_stable_first(CMatrix& t, CMatrix& u) {
  const Index n = t.rows();
  bool moved = true;
  while (moved) {
    moved = false;
    for (Index k = 0; k + 1 < n; ++k) {
      if (t(k, k).real() >= 0.0 && t(k + 1, k + 1).real() < 0.0) {
        schur_swap_adjacent(t, u, k);
        moved = true;
      }
    }
  }
}

} // namespace detail

// Stabilizing solution of A'X + XA - XBR^{-1}B'X + Q = 0 via the stable
// invariant subspace of the Hamiltonian. Throws FactorizationError when the
// Hamiltonian has imaginary-axis eigenvalues or the subspace degenerates.
inline Matrix solve_care(const Matrix& a, const Matrix& b, const Matrix& q, const Matrix& r) {
  const Index n = a.rows();
  const Index m = b.cols();
  if (a.cols() != n || b.rows() != n || q.rows() != n || q.cols() != n)
    throw DomainError("solve_care: dimension mismatch");
  if (r.rows() != m || r.cols() != m) throw DomainError("solve_care: R dimension mismatch");
  if (n == 0) return Matrix(0, 0);

  Matrix g; // B R^{-1} B'
  if (m == 0) {
    g = Matrix::Zero(n, n);
  } else {
    Eigen::LLT<Matrix> llt(r);
    if (llt.info() != Eigen::Success) throw DomainError("solve_care: R not positive definite");
    g = b * llt.solve(b.transpose());
  }

  Matrix h(2 * n, 2 * n);
  h.topLeftCorner(n, n) = a;
  h.topRightCorner(n, n) = -g;
  h.bottomLeftCorner(n, n) = -q;
  h.bottomRightCorner(n, n) = -a.transpose();

  Eigen::ComplexSchur<CMatrix> schur(h.cast<Complex>());
  if (schur.info() != Eigen::Success) throw NumericalError("solve_care: Schur iteration failed");
  CMatrix t = schur.matrixT();
  CMatrix u = schur.matrixU();

  const double axis_tol = 1e-9 * std::max(1.0, h.norm());
  Index stable = 0;
  for (Index i = 0; i < 2 * n; ++i) {
    if (std::abs(t(i, i).real()) <= axis_tol)
      throw FactorizationError("solve_care: Hamiltonian eigenvalue on the imaginary axis");
    if (t(i, i).real() < 0.0) ++stable;
  }
  if (stable != n) throw FactorizationError("solve_care: stable subspace has wrong dimension");

  detail::schur_stable_first(t, u);

  const CMatrix u1 = u.topLeftCorner(n, n);
  const CMatrix u2 = u.bottomLeftCorner(n, n);
  Eigen::PartialPivLU<CMatrix> lu(u1);
  const CMatrix u1_inv = lu.inverse();
  if ((u1 * u1_inv - CMatrix::Identity(n, n)).norm() > 1e-7 * n)
    throw FactorizationError("solve_care: stable subspace basis is numerically singular");
  const CMatrix x_complex = u2 * u1_inv;
  if (x_complex.imag().norm() > 1e-6 * (1.0 + x_complex.real().norm()))
    throw FactorizationError("solve_care: solution has a large imaginary component");

  Matrix x = x_complex.real();
  x = 0.5 * (x + x.transpose()).eval();

  const Matrix residual = a.transpose() * x + x * a - x * g * x + q;
  if (residual.norm() > 1e-8 * (1.0 + x.norm() * x.norm()))
    throw FactorizationError("solve_care: residual exceeds tolerance");

  const Matrix acl = a - g * x;
  for (const Complex& ev : eigenvalues(acl)) {
    if (ev.real() >= 1e-8 * std::max(1.0, acl.norm()))
      throw FactorizationError("solve_care: closed loop not Hurwitz");
  }
  return x;
}

// Solution of A'X + XA + Q = 0 by the Kronecker linearization.
// Requires A Hurwitz; intended for the small dense systems used here.
inline Matrix solve_lyapunov(const Matrix& a, const Matrix& q) {
  const Index n = a.rows();
  if (a.cols() != n || q.rows() != n || q.cols() != n)
    throw DomainError("solve_lyapunov: dimension mismatch");
  if (n == 0) return Matrix(0, 0);
  for (const Complex& ev : eigenvalues(a)) {
    if (ev.real() >= -1e-12) throw DomainError("solve_lyapunov: A is not Hurwitz");
  }

  // vec(A'X + XA) = (I (x) A' + A' (x) I) vec(X), column-major vec.
  Matrix k = Matrix::Zero(n * n, n * n);
  const Matrix at = a.transpose();
  for (Index j = 0; j < n; ++j) {
    k.block(j * n, j * n, n, n) += at;
    for (Index i = 0; i < n; ++i) {
      for (Index l = 0; l < n; ++l) k(j * n + i, l * n + i) += at(j, l);
    }
  }
  Vector rhs(n * n);
  for (Index j = 0; j < n; ++j) rhs.segment(j * n, n) = -q.col(j);
  const Vector xv = k.partialPivLu().solve(rhs);

  Matrix x(n, n);
  for (Index j = 0; j < n; ++j) x.col(j) = xv.segment(j * n, n);

  const Matrix residual = a.transpose() * x + x * a + q;
  if (residual.norm() > 1e-8 * (1.0 + x.norm()))
    throw NumericalError("solve_lyapunov: residual exceeds tolerance");
  return x;
}

} // namespace gapcert

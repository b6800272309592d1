#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "numeric.hpp"

namespace gapcert {

// Continuous-time LTI system x' = Ax + Bu, y = Cx + Du.
// Invariants: A square n x n, B n x m, C l x n, D l x m.
struct StateSpace {
  Matrix A, B, C, D;

  Index nx() const { return A.rows(); }
  Index nu() const { return D.cols(); }
  Index ny() const { return D.rows(); }
};

inline StateSpace make_ss(Matrix a, Matrix b, Matrix c, Matrix d) {
  if (a.rows() != a.cols()) throw DomainError("make_ss: A not square");
  if (b.rows() != a.rows()) throw DomainError("make_ss: B row count mismatch");
  if (c.cols() != a.rows()) throw DomainError("make_ss: C column count mismatch");
  if (d.rows() != c.rows() || d.cols() != b.cols()) throw DomainError("make_ss: D dimension mismatch");
  return StateSpace{std::move(a), std::move(b), std::move(c), std::move(d)};
}

inline StateSpace static_gain(Matrix d) {
  const Index l = d.rows(), m = d.cols();
  return StateSpace{Matrix(0, 0), Matrix(0, m), Matrix(l, 0), std::move(d)};
}

// SISO rational transfer function, coefficients in descending powers of s.
struct RationalTF {
  std::vector<double> num, den;
};

namespace detail {

inline std::vector<double> strip_leading_zeros(const std::vector<double>& c) {
  size_t k = 0;
  while (k + 1 < c.size() && c[k] == 0.0) ++k;
  return std::vector<double>(c.begin() + static_cast<std::ptrdiff_t>(k), c.end());
}

} // namespace detail

// Controllable canonical realization. Proper transfer functions only.
inline StateSpace tf_to_ss(const RationalTF& tf) {
  if (tf.den.empty()) throw DomainError("tf_to_ss: empty denominator");
  std::vector<double> den = detail::strip_leading_zeros(tf.den);
  std::vector<double> num = tf.num.empty() ? std::vector<double>{0.0} : detail::strip_leading_zeros(tf.num);
  if (den[0] == 0.0) throw DomainError("tf_to_ss: zero denominator");
  if (num.size() > den.size()) throw DomainError("tf_to_ss: improper transfer function");

  const double lead = den[0];
  for (double& c : den) c /= lead;
  for (double& c : num) c /= lead;

  const Index n = static_cast<Index>(den.size()) - 1;
  std::vector<double> b(static_cast<size_t>(n) + 1, 0.0); // padded to b0 s^n + ... + bn
  const size_t pad = static_cast<size_t>(n) + 1 - num.size();
  for (size_t i = 0; i < num.size(); ++i) b[pad + i] = num[i];

  if (n == 0) return static_gain(Matrix::Constant(1, 1, b[0]));

  Matrix a = Matrix::Zero(n, n);
  for (Index i = 0; i + 1 < n; ++i) a(i, i + 1) = 1.0;
  for (Index j = 0; j < n; ++j) a(n - 1, j) = -den[static_cast<size_t>(n - j)];
  Matrix bm = Matrix::Zero(n, 1);
  bm(n - 1, 0) = 1.0;
  Matrix c(1, n);
  for (Index j = 0; j < n; ++j)
    c(0, j) = b[static_cast<size_t>(n - j)] - den[static_cast<size_t>(n - j)] * b[0];
  return StateSpace{std::move(a), std::move(bm), std::move(c), Matrix::Constant(1, 1, b[0])};
}

inline std::vector<Complex> poles(const StateSpace& s) { return eigenvalues(s.A); }

inline bool is_stable(const StateSpace& s) {
  if (s.nx() == 0) return true;
  for (const Complex& p : poles(s)) {
    if (p.real() >= -1e-12) return false;
  }
  return true;
}

// Evaluates C(sI - A)^{-1}B + D at an arbitrary complex point.
inline CMatrix eval_at(const StateSpace& s, Complex z) {
  if (s.nx() == 0) return s.D.cast<Complex>();
  CMatrix zi = z * CMatrix::Identity(s.nx(), s.nx()) - s.A.cast<Complex>();
  return s.C.cast<Complex>() * zi.partialPivLu().solve(s.B.cast<Complex>()) + s.D.cast<Complex>();
}

// Frequency response at omega in rad/s. Rejects frequencies within 1e-9 of a pole.
inline CMatrix freq_response(const StateSpace& s, double w) {
  if (s.nx() > 0) {
    for (const Complex& p : poles(s)) {
      if (std::abs(Complex(0.0, w) - p) < 1e-9)
        throw NumericalError("freq_response: frequency coincides with a pole");
    }
  }
  return eval_at(s, Complex(0.0, w));
}

// Spectral decomposition cached for repeated frequency evaluations.
// Falls back to dense solves when the eigenvector basis is ill conditioned.
class FreqEvaluator {
public:
  explicit FreqEvaluator(const StateSpace& s) : d_(s.D), n_(s.nx()) {
    if (n_ == 0) return;
    Eigen::ComplexEigenSolver<CMatrix> es(s.A.cast<Complex>());
    bool ok = es.info() == Eigen::Success;
    if (ok) {
      const CMatrix& v = es.eigenvectors();
      Eigen::JacobiSVD<CMatrix> svd(v);
      const double smin = svd.singularValues()(n_ - 1);
      ok = smin > 1e-8 * svd.singularValues()(0);
      if (ok) {
        lam_ = es.eigenvalues();
        vinv_b_ = v.partialPivLu().solve(s.B.cast<Complex>());
        c_v_ = s.C.cast<Complex>() * v;
      }
    }
    if (!ok) { // defective A, keep the full system for dense evaluation
      dense_a_ = s.A.cast<Complex>();
      dense_b_ = s.B.cast<Complex>();
      dense_c_ = s.C.cast<Complex>();
      dense_ = true;
    }
  }

  CMatrix at(double w) const {
    if (n_ == 0) return d_.cast<Complex>();
    const Complex jw(0.0, w);
    if (dense_) {
      CMatrix zi = jw * CMatrix::Identity(n_, n_) - dense_a_;
      return dense_c_ * zi.partialPivLu().solve(dense_b_) + d_.cast<Complex>();
    }
    CMatrix scaled = vinv_b_;
    for (Index i = 0; i < n_; ++i) scaled.row(i) /= (jw - lam_(i));
    return c_v_ * scaled + d_.cast<Complex>();
  }

private:
  Matrix d_;
  Index n_ = 0;
  bool dense_ = false;
  CVector lam_;
  CMatrix vinv_b_, c_v_;
  CMatrix dense_a_, dense_b_, dense_c_;
};

// y = q(p(u)); transfer Q(s) P(s).
inline StateSpace series(const StateSpace& p, const StateSpace& q) {
  if (q.nu() != p.ny()) throw DomainError("series: dimension mismatch");
  const Index np = p.nx(), nq = q.nx();
  Matrix a = Matrix::Zero(np + nq, np + nq);
  a.topLeftCorner(np, np) = p.A;
  a.bottomLeftCorner(nq, np) = q.B * p.C;
  a.bottomRightCorner(nq, nq) = q.A;
  Matrix b(np + nq, p.nu());
  b.topRows(np) = p.B;
  b.bottomRows(nq) = q.B * p.D;
  Matrix c(q.ny(), np + nq);
  c.leftCols(np) = q.D * p.C;
  c.rightCols(nq) = q.C;
  return StateSpace{std::move(a), std::move(b), std::move(c), q.D * p.D};
}

inline StateSpace parallel(const StateSpace& p, const StateSpace& q) {
  if (p.nu() != q.nu() || p.ny() != q.ny()) throw DomainError("parallel: dimension mismatch");
  const Index np = p.nx(), nq = q.nx();
  Matrix a = Matrix::Zero(np + nq, np + nq);
  a.topLeftCorner(np, np) = p.A;
  a.bottomRightCorner(nq, nq) = q.A;
  Matrix b(np + nq, p.nu());
  b.topRows(np) = p.B;
  b.bottomRows(nq) = q.B;
  Matrix c(p.ny(), np + nq);
  c.leftCols(np) = p.C;
  c.rightCols(nq) = q.C;
  return StateSpace{std::move(a), std::move(b), std::move(c), p.D + q.D};
}

// [P; Q] sharing one input.
inline StateSpace stack_rows(const StateSpace& p, const StateSpace& q) {
  if (p.nu() != q.nu()) throw DomainError("stack_rows: input dimension mismatch");
  const Index np = p.nx(), nq = q.nx();
  Matrix a = Matrix::Zero(np + nq, np + nq);
  a.topLeftCorner(np, np) = p.A;
  a.bottomRightCorner(nq, nq) = q.A;
  Matrix b(np + nq, p.nu());
  b.topRows(np) = p.B;
  b.bottomRows(nq) = q.B;
  Matrix c = Matrix::Zero(p.ny() + q.ny(), np + nq);
  c.topLeftCorner(p.ny(), np) = p.C;
  c.bottomRightCorner(q.ny(), nq) = q.C;
  Matrix d(p.ny() + q.ny(), p.nu());
  d.topRows(p.ny()) = p.D;
  d.bottomRows(q.ny()) = q.D;
  return StateSpace{std::move(a), std::move(b), std::move(c), std::move(d)};
}

// [P, Q] with stacked inputs and shared output space.
inline StateSpace stack_cols(const StateSpace& p, const StateSpace& q) {
  if (p.ny() != q.ny()) throw DomainError("stack_cols: output dimension mismatch");
  const Index np = p.nx(), nq = q.nx();
  Matrix a = Matrix::Zero(np + nq, np + nq);
  a.topLeftCorner(np, np) = p.A;
  a.bottomRightCorner(nq, nq) = q.A;
  Matrix b = Matrix::Zero(np + nq, p.nu() + q.nu());
  b.topLeftCorner(np, p.nu()) = p.B;
  b.bottomRightCorner(nq, q.nu()) = q.B;
  Matrix c(p.ny(), np + nq);
  c.leftCols(np) = p.C;
  c.rightCols(nq) = q.C;
  Matrix d(p.ny(), p.nu() + q.nu());
  d.leftCols(p.nu()) = p.D;
  d.rightCols(q.nu()) = q.D;
  return StateSpace{std::move(a), std::move(b), std::move(c), std::move(d)};
}

inline StateSpace scale_output(const StateSpace& s, const Matrix& t) {
  if (t.cols() != s.ny()) throw DomainError("scale_output: dimension mismatch");
  return StateSpace{s.A, s.B, t * s.C, t * s.D};
}

inline StateSpace scale_input(const StateSpace& s, const Matrix& t) {
  if (t.rows() != s.nu()) throw DomainError("scale_input: dimension mismatch");
  return StateSpace{s.A, s.B * t, s.C, s.D * t};
}

inline StateSpace negate(const StateSpace& s) { return StateSpace{s.A, s.B, -s.C, -s.D}; }

// r -> e with e = r + C P e; the transfer (I - CP)^{-1}.
// Throws on the algebraic loop I - D_C D_P singular.
inline StateSpace feedback_loop(const StateSpace& p, const StateSpace& c) {
  if (c.nu() != p.ny() || c.ny() != p.nu()) throw DomainError("feedback_loop: dimension mismatch");
  const Index m = p.nu();
  const Matrix loop = Matrix::Identity(m, m) - c.D * p.D;
  Eigen::FullPivLU<Matrix> lu(loop);
  if (!lu.isInvertible()) throw DomainError("feedback_loop: algebraic loop, I - Dc Dp singular");
  const Matrix e = lu.inverse();

  const Index np = p.nx(), nc = c.nx();
  // e = E r + E Dc Cp x_p + E Cc x_c
  Matrix zx(m, np + nc);
  zx.leftCols(np) = e * c.D * p.C;
  zx.rightCols(nc) = e * c.C;

  Matrix a = Matrix::Zero(np + nc, np + nc);
  a.topLeftCorner(np, np) = p.A;
  a.bottomLeftCorner(nc, np) = c.B * p.C;
  a.bottomRightCorner(nc, nc) = c.A;
  Matrix gain(np + nc, m);
  gain.topRows(np) = p.B;
  gain.bottomRows(nc) = c.B * p.D;
  a += gain * zx;

  Matrix b = gain * e;
  return StateSpace{std::move(a), std::move(b), std::move(zx), e};
}

} // namespace gapcert

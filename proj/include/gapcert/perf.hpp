#pragma once

#include <cmath>

#include "hinf.hpp"

namespace gapcert {

// parallel projection Q(P,C) = [P; I](I - CP)^{-1}[-C  I]
inline StateSpace closed_loop_Q(const StateSpace& p, const StateSpace& c) {
  if (p.ny() != c.nu() || p.nu() != c.ny())
    throw DomainError("closed_loop_Q: incompatible plant/controller dimensions");
  const Index np = p.nx();
  const Index nc = c.nx();
  const Index m = p.nu();
  const Index l = p.ny();

  const Matrix loop_d = Matrix::Identity(m, m) - c.D * p.D;
  Eigen::FullPivLU<Matrix> lu(loop_d);
  if (!lu.isInvertible()) throw DomainError("closed_loop_Q: algebraic loop");
  const Matrix e = lu.inverse();

  Matrix zx(m, np + nc);
  zx.leftCols(np) = e * c.D * p.C;
  zx.rightCols(nc) = e * c.C;
  Matrix zw(m, l + m);
  zw.leftCols(l) = -e * c.D;
  zw.rightCols(m) = e;

  Matrix gain(np + nc, m);
  gain.topRows(np) = p.B;
  gain.bottomRows(nc) = c.B * p.D;

  Matrix a = Matrix::Zero(np + nc, np + nc);
  a.topLeftCorner(np, np) = p.A;
  a.bottomLeftCorner(nc, np) = c.B * p.C;
  a.bottomRightCorner(nc, nc) = c.A;
  a += gain * zx;

  Matrix b = Matrix::Zero(np + nc, l + m);
  b.block(np, 0, nc, l) = -c.B;
  b += gain * zw;

  Matrix cm = Matrix::Zero(l + m, np + nc);
  cm.topLeftCorner(l, np) = p.C;
  Matrix dio(l + m, m);
  dio.topRows(l) = p.D;
  dio.bottomRows(m) = Matrix::Identity(m, m);
  cm += dio * zx;
  const Matrix d = dio * zw;

  return make_ss(a, b, cm, d);
}

// generalized stability margin; 0 encodes an unstable or ill-posed loop
inline double bpc(const StateSpace& p, const StateSpace& c) {
  StateSpace q;
  try {
    q = closed_loop_Q(p, c);
  } catch (const DomainError&) {
    return 0.0;
  }
  if (!is_stable(q)) return 0.0;
  return 1.0 / hinf_norm(q);
}

// complementary sensitivity T = PC(I - PC)^{-1}
inline StateSpace closed_loop_T(const StateSpace& p, const StateSpace& c) {
  const StateSpace lg = series(c, p); // P(s) C(s)
  const Index l = lg.ny();
  Eigen::FullPivLU<Matrix> lu(Matrix::Identity(l, l) - lg.D);
  if (!lu.isInvertible()) throw DomainError("closed_loop_T: algebraic loop");
  const Matrix e = lu.inverse();
  const StateSpace t = make_ss(lg.A + lg.B * e * lg.C, lg.B * e, e * lg.C, e * lg.D);
  if (!is_stable(t)) throw DomainError("closed_loop_T: unstable loop");
  return t;
}

inline double degradation_lb(double b_nominal, double gap) {
  if (!(b_nominal >= 0.0 && b_nominal <= 1.0 && gap >= 0.0 && gap <= 1.0))
    throw DomainError("degradation_lb: inputs outside [0,1]");
  return b_nominal - gap;
}

inline double deviation_ub(double gap, double b_perturbed, double b_nominal) {
  if (!(b_perturbed > 0.0 && b_nominal > 0.0)) throw DomainError("deviation_ub: zero margin");
  return gap / (b_perturbed * b_nominal);
}

inline double tzw_ub(double t_nominal, double gap) {
  if (!(gap < 1.0 - 1e-12)) throw DomainError("tzw_ub: gap at or above one");
  return (t_nominal + gap) / (1.0 - gap);
}

} // namespace gapcert

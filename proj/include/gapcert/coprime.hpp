#pragma once

#include <string>
#include <vector>

#include "family.hpp"
#include "hinf.hpp"
#include "state_space.hpp"

namespace gapcert {

// Stable inner realization of the stacked normalized factors [N; D]
// with P = N D^{-1}; the first n_rows_N output rows form N.
struct GraphSymbol {
  StateSpace g;
  Index n_rows_N = 0;
};

struct BezoutPair {
  StateSpace x, y;
};

namespace detail {

inline Matrix inverse_sqrt_spd(const Matrix& r) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(r);
  if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 0.0)
    throw NumericalError("inverse_sqrt_spd: matrix not positive definite");
  return es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
         es.eigenvectors().transpose();
}

} // namespace detail

// Normalized right coprime factorization by the Riccati-based state-space
// construction: F = -R^{-1}(B'X + D'C) renders A+BF stable and [N; D] inner.
inline GraphSymbol nrcf(const StateSpace& p) {
  const Index n = p.nx(), m = p.nu(), l = p.ny();
  const Matrix r = Matrix::Identity(m, m) + p.D.transpose() * p.D;
  const Matrix s = Matrix::Identity(l, l) + p.D * p.D.transpose();
  const Matrix r_inv = r.llt().solve(Matrix::Identity(m, m));
  const Matrix s_inv = s.llt().solve(Matrix::Identity(l, l));

  Matrix x;
  try {
    x = solve_care(p.A - p.B * r_inv * p.D.transpose() * p.C, p.B,
                   p.C.transpose() * s_inv * p.C, r);
  } catch (const FactorizationError& e) {
    throw FactorizationError(std::string("nrcf: ") + e.what());
  }

  const Matrix f = -r_inv * (p.B.transpose() * x + p.D.transpose() * p.C);
  const Matrix r_m12 = detail::inverse_sqrt_spd(r);

  Matrix c(l + m, n);
  c.topRows(l) = p.C + p.D * f;
  c.bottomRows(m) = f;
  Matrix d(l + m, m);
  d.topRows(l) = p.D * r_m12;
  d.bottomRows(m) = r_m12;
  return GraphSymbol{StateSpace{p.A + p.B * f, p.B * r_m12, std::move(c), std::move(d)}, l};
}

// Bezout pair X, Y with X N + Y D = I, built from an observer gain obtained
// through the dual Riccati equation. Works for any right gauge of gs because
// the plant data is recovered from the realization itself.
inline BezoutPair bezout_solve(const GraphSymbol& gs) {
  const Index l = gs.n_rows_N;
  const Index m = gs.g.nu();
  const Index n = gs.g.nx();
  if (l < 0 || l > gs.g.ny()) throw DomainError("bezout_solve: invalid split marker");

  const Matrix d_bot = gs.g.D.bottomRows(m);
  Eigen::FullPivLU<Matrix> lu(d_bot);
  if (!lu.isInvertible())
    throw FactorizationError("bezout_solve: denominator feedthrough is singular");
  const Matrix t = lu.inverse();

  const Matrix b = gs.g.B * t;
  const Matrix d_plant = gs.g.D.topRows(l) * t;
  const Matrix f = gs.g.C.bottomRows(m);
  const Matrix c_plant = gs.g.C.topRows(l) - d_plant * f;
  const Matrix a_plant = gs.g.A - b * f;

  Matrix x_dual;
  try {
    x_dual = solve_care(a_plant.transpose(), c_plant.transpose(),
                        b * b.transpose() + 1e-8 * Matrix::Identity(n, n),
                        Matrix::Identity(l, l));
  } catch (const FactorizationError& e) {
    throw FactorizationError(std::string("bezout_solve: degenerate stabilization, ") + e.what());
  }
  const Matrix gain = -x_dual * c_plant.transpose(); // A + gain*C is Hurwitz

  const Matrix a_obs = a_plant + gain * c_plant;
  StateSpace x{a_obs, gain, t * f, Matrix::Zero(m, l)};
  StateSpace y{a_obs, -(b + gain * d_plant), t * f, t};
  if (!is_stable(x)) throw FactorizationError("bezout_solve: observer dynamics not Hurwitz");
  return BezoutPair{std::move(x), std::move(y)};
}

// sup over a frequency grid of ||X N + Y D - I||.
inline double bezout_residual(const GraphSymbol& gs, const BezoutPair& bp, int grid_pts = 160) {
  const Index l = gs.n_rows_N;
  const Index m = gs.g.nu();
  FreqEvaluator fg(gs.g), fx(bp.x), fy(bp.y);
  std::vector<double> ws = log_grid(1e-4, 1e4, grid_pts);
  ws.push_back(0.0);
  double worst = 0.0;
  for (double w : ws) {
    const CMatrix g = fg.at(w);
    const CMatrix lhs = fx.at(w) * g.topRows(l) + fy.at(w) * g.bottomRows(m);
    worst = std::max(worst, sigma_max(CMatrix(lhs - CMatrix::Identity(m, m))));
  }
  return worst;
}

// H-infinity distance between two graph symbols after removing the constant
// orthogonal right gauge, fixed by the Procrustes fit of the DC values.
inline double coprime_perturbation(const GraphSymbol& nominal, const GraphSymbol& perturbed) {
  if (nominal.g.ny() != perturbed.g.ny() || nominal.g.nu() != perturbed.g.nu() ||
      nominal.n_rows_N != perturbed.n_rows_N)
    throw DomainError("coprime_perturbation: dimension mismatch");

  const Matrix gn0 = eval_at(nominal.g, Complex(0.0, 0.0)).real();
  const Matrix gp0 = eval_at(perturbed.g, Complex(0.0, 0.0)).real();
  Eigen::JacobiSVD<Matrix> svd(gp0.transpose() * gn0, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Matrix u = svd.matrixU() * svd.matrixV().transpose();

  const StateSpace diff = parallel(scale_input(perturbed.g, u), negate(nominal.g));
  return hinf_norm(diff);
}

// Fraction of sampled parameters for which the Bezout construction succeeds
// with residual at most 1e-6. Failures are counted, never raised.
inline double bezout_survival_rate(const PlantFamily& family, const GaussianSpec& spec, Index n,
                                   uint64_t seed) {
  if (n < 1) throw DomainError("bezout_survival_rate: need n >= 1");
  validate(family, spec.p());
  const std::vector<Vector> thetas = sample_theta(spec, n, seed);
  Index ok = 0;
  for (const Vector& theta : thetas) {
    try {
      const GraphSymbol gs = nrcf(realize_plant(family, theta));
      const BezoutPair bp = bezout_solve(gs);
      if (bezout_residual(gs, bp, 60) <= 1e-6) ++ok;
    } catch (const std::exception&) {
      // counted as a failure
    }
  }
  return static_cast<double>(ok) / static_cast<double>(n);
}

} // namespace gapcert

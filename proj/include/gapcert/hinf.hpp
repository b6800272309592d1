#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "state_space.hpp"

namespace gapcert {

struct HinfResult {
  double value = 0.0;
  double peak_w = 0.0; // frequency attaining the certified lower bound
};

inline double grid_norm(const StateSpace& s, const std::vector<double>& grid) {
  FreqEvaluator fe(s);
  double best = 0.0;
  for (double w : grid) best = std::max(best, sigma_max(fe.at(w)));
  return best;
}

namespace detail {

// Purely imaginary eigenvalue test of the level-gamma Hamiltonian.
// Returns the sorted nonnegative crossing frequencies; empty means
// sup sigma_max(G(jw)) < gamma.
inline std::vector<double> hamiltonian_crossings(const StateSpace& s, double gamma) {
  const Index n = s.nx();
  const Index m = s.nu();
  const Matrix r = gamma * gamma * Matrix::Identity(m, m) - s.D.transpose() * s.D;
  Eigen::LLT<Matrix> llt(r);
  if (llt.info() != Eigen::Success)
    throw NumericalError("hinf_norm: gamma below the feedthrough gain");
  const Matrix rinv_bt = llt.solve(s.B.transpose());
  const Matrix rinv_dt_c = llt.solve(s.D.transpose() * s.C);
  const Matrix a_hat = s.A + s.B * rinv_dt_c;

  Matrix h(2 * n, 2 * n);
  h.topLeftCorner(n, n) = a_hat;
  h.topRightCorner(n, n) = s.B * rinv_bt;
  h.bottomLeftCorner(n, n) = -s.C.transpose() * (s.C + s.D * rinv_dt_c);
  h.bottomRightCorner(n, n) = -a_hat.transpose();

  std::vector<double> ws;
  for (const Complex& ev : eigenvalues(h)) {
    if (std::abs(ev.real()) <= 1e-8 * std::max(1.0, std::abs(ev)) && ev.imag() >= 0.0)
      ws.push_back(ev.imag());
  }
  std::sort(ws.begin(), ws.end());
  // collapse near-duplicates from the +/- conjugate structure
  std::vector<double> out;
  for (double w : ws) {
    if (out.empty() || w - out.back() > 1e-9 * (1.0 + w)) out.push_back(w);
  }
  return out;
}

} // namespace detail

// H-infinity norm by Hamiltonian bisection with frequency-midpoint updates
// (Bruinsma-Steinbuch). Requires a stable realization.
inline HinfResult hinf_norm_certified(const StateSpace& s, double tol = 1e-6) {
  if (!(tol > 0.0) || tol >= 0.5) throw DomainError("hinf_norm: tolerance out of range");
  if (!is_stable(s)) throw DomainError("hinf_norm: unstable system");

  HinfResult res;
  res.value = sigma_max(s.D);
  if (s.nx() == 0 || s.B.norm() == 0.0 || s.C.norm() == 0.0) return res;

  FreqEvaluator fe(s);
  auto probe = [&](double w) {
    const double v = sigma_max(fe.at(w));
    if (v > res.value) {
      res.value = v;
      res.peak_w = w;
    }
  };
  probe(0.0);
  for (const Complex& p : poles(s)) probe(std::abs(p));
  for (double w : {1e-2, 1e-1, 1.0, 1e1, 1e2}) probe(w);

  double lb = res.value;
  if (lb < 1e-300) return HinfResult{0.0, 0.0}; // identically zero response

  for (int iter = 0; iter < 100; ++iter) {
    const double gamma = lb * (1.0 + 2.0 * tol);
    const std::vector<double> ws = detail::hamiltonian_crossings(s, gamma);
    if (ws.empty()) {
      res.value = lb * (1.0 + tol);
      return res;
    }
    double new_lb = lb;
    auto lift = [&](double w) {
      const double v = sigma_max(fe.at(w));
      if (v > new_lb) {
        new_lb = v;
        res.peak_w = w;
      }
    };
    if (ws.size() == 1) {
      lift(ws[0]);
    } else {
      for (size_t i = 0; i + 1 < ws.size(); ++i) lift(0.5 * (ws[i] + ws[i + 1]));
    }
    if (new_lb <= lb) {
      // tangency: the crossing band has collapsed below resolution
      res.value = gamma;
      return res;
    }
    lb = new_lb;
  }
  throw NumericalError("hinf_norm: bisection stall");
}

inline double hinf_norm(const StateSpace& s, double tol = 1e-6) {
  return hinf_norm_certified(s, tol).value;
}

} // namespace gapcert

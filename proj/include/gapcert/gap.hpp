#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "coprime.hpp"
#include "hinf.hpp"

namespace gapcert {

struct GapResult {
  double lower = 0.0;
  double upper = 1.0;
  double value = 1.0;
  int q_order = 0;
  bool converged = false;
  bool stalled = false;
};

struct GapOptions {
  double tol = 1e-3;
  int grid_points = 600;
  int max_order = 16; // all-pass chain length cap; swept 4, 8, 12, ...
  int lawson_iters = 30;
};

inline std::vector<double> gap_grid(int points) {
  std::vector<double> ws;
  ws.reserve(static_cast<size_t>(points) + 1);
  ws.push_back(0.0);
  for (double w : log_grid(1e-4, 1e4, points)) ws.push_back(w);
  return ws;
}

// graph symbol with cached frequency responses, reusable across many calls
struct SymbolGrid {
  GraphSymbol sym;
  FreqEvaluator fe;
  std::vector<double> ws;
  std::vector<CMatrix> fr;

  SymbolGrid(GraphSymbol s, const std::vector<double>& grid)
      : sym(std::move(s)), fe(sym.g), ws(grid) {
    fr.reserve(ws.size());
    for (double w : ws) fr.push_back(fe.at(w));
  }
};

namespace detail {

inline double projection_defect(const CMatrix& g1, const CMatrix& g2) {
  return sigma_max(CMatrix(g1 - g2 * (g2.adjoint() * g1)));
}

// sup_w of the projection defect on the cached grid, zoomed x3 at the argmax
inline double chordal_sup(const SymbolGrid& s1, const SymbolGrid& s2) {
  double best = 0.0;
  size_t arg = 0;
  for (size_t i = 0; i < s1.ws.size(); ++i) {
    const double v = projection_defect(s1.fr[i], s2.fr[i]);
    if (v > best) {
      best = v;
      arg = i;
    }
  }
  const size_t lo = arg > 0 ? arg - 1 : 0;
  const size_t hi = std::min(arg + 1, s1.ws.size() - 1);
  const double wl = s1.ws[lo];
  const double wh = s1.ws[hi];
  for (int k = 1; k <= 16; ++k) {
    const double w = wl + (wh - wl) * k / 17.0;
    best = std::max(best, projection_defect(s1.fe.at(w), s2.fe.at(w)));
  }
  return best;
}

// chain realization of Q(s) = sum_k C_k B(s)^k with B(s) = (s-1)/(s+1)
inline StateSpace realize_q(const std::vector<Matrix>& cs, Index m) {
  const Index kk = static_cast<Index>(cs.size()) - 1;
  Matrix d = Matrix::Zero(m, m);
  for (const Matrix& c : cs) d += c;
  if (kk == 0) return static_gain(d);
  Matrix a = Matrix::Zero(kk * m, kk * m);
  Matrix b = Matrix::Zero(kk * m, m);
  Matrix c = Matrix::Zero(m, kk * m);
  Matrix tail = Matrix::Zero(m, m);
  for (Index j = kk; j >= 1; --j) {
    tail += cs[static_cast<size_t>(j)];
    c.middleCols((j - 1) * m, m) = -2.0 * tail;
  }
  for (Index j = 0; j < kk; ++j) {
    a.block(j * m, j * m, m, m) = -Matrix::Identity(m, m);
    for (Index i = 0; i < j; ++i) a.block(j * m, i * m, m, m) = -2.0 * Matrix::Identity(m, m);
    b.middleRows(j * m, m) = Matrix::Identity(m, m);
  }
  return make_ss(a, b, c, d);
}

// Lawson-weighted least squares over the all-pass basis. Innerness of G2
// reduces the weighted normal matrix to a real symmetric Toeplitz form
// shared by all coefficient entries.
class DirectedGapSolver {
public:
  DirectedGapSolver(const SymbolGrid& s1, const SymbolGrid& s2, const GapOptions& opt)
      : s1_(s1), s2_(s2), opt_(opt), m_(s1.sym.g.nu()) {
    const size_t n = s1.ws.size();
    wts_ = Vector::Constant(static_cast<Index>(n), 1.0 / static_cast<double>(n));
    zs_.reserve(n);
    t_.reserve(n);
    for (size_t i = 0; i < n; ++i) add_point(s1.ws[i], s1.fr[i], s2.fr[i]);
  }

  GapResult solve(double lower) {
    GapResult r;
    r.lower = lower;
    r.upper = 1.0; // Q = 0 certificate: the numerator symbol is inner
    r.q_order = 0;
    double prev_cert = std::numeric_limits<double>::infinity();
    int no_improve = 0;
    for (int k = 4; k <= opt_.max_order; k += 4) {
      lawson(k, opt_.lawson_iters);
      auto [cert, peak] = certify();
      for (int ex = 0; ex < 2 && std::isfinite(cert) && cert > grid_max_ + 0.25 * opt_.tol;
           ++ex) {
        exchange_point(peak);
        lawson(k, opt_.lawson_iters / 2 + 2);
        const auto again = certify();
        if (again.first >= cert - 1e-12) {
          cert = std::min(cert, again.first);
          break;
        }
        cert = again.first;
        peak = again.second;
      }
      if (cert < r.upper) {
        r.upper = cert;
        r.q_order = k;
      }
      if (r.upper >= 1.0) {
        r.upper = 1.0;
        r.q_order = 0;
      }
      if (r.upper - r.lower <= opt_.tol || r.upper >= 1.0 - opt_.tol) break;
      if (cert >= prev_cert - 1e-9) {
        if (++no_improve >= 2) {
          r.stalled = true;
          break;
        }
      } else {
        no_improve = 0;
      }
      prev_cert = cert;
    }
    r.lower = std::min(r.lower, r.upper);
    r.value = std::min(r.upper, 1.0);
    r.converged = (r.upper - r.lower <= opt_.tol) || (r.upper >= 1.0 - opt_.tol);
    return r;
  }

private:
  void add_point(double w, const CMatrix& g1, const CMatrix& g2) {
    const Complex jw(0.0, w);
    zs_.push_back((jw - 1.0) / (jw + 1.0));
    CMatrix t = g2.adjoint() * g1;
    if (m_ == 1) {
      floor2_.push_back(g1.squaredNorm() - std::norm(t(0, 0)));
    } else {
      efloor_.push_back(g1.adjoint() * g1 - t.adjoint() * t);
    }
    t_.push_back(std::move(t));
  }

  void exchange_point(double w) {
    add_point(w, s1_.fe.at(w), s2_.fe.at(w));
    const Index n = static_cast<Index>(zs_.size());
    Vector nw(n);
    nw.head(n - 1) = wts_;
    nw(n - 1) = 1.0 / static_cast<double>(n);
    wts_ = nw / nw.sum();
  }

  void lawson(int order, int iters) {
    const Index n = static_cast<Index>(zs_.size());
    const Index kp = order + 1;
    Eigen::MatrixXcd pw(n, kp);
    for (Index i = 0; i < n; ++i) {
      Complex p(1.0, 0.0);
      for (Index k = 0; k < kp; ++k) {
        pw(i, k) = p;
        p *= zs_[static_cast<size_t>(i)];
      }
    }
    cs_.assign(static_cast<size_t>(kp), Matrix::Zero(m_, m_));
    double prev_max = std::numeric_limits<double>::infinity();
    int flat = 0;
    for (int it = 0; it < iters; ++it) {
      const CVector toep = pw.transpose() * wts_.cast<Complex>();
      Matrix nm(kp, kp);
      for (Index j = 0; j < kp; ++j)
        for (Index k = 0; k < kp; ++k) nm(j, k) = toep(std::abs(k - j)).real();
      nm.diagonal().array() += 1e-12;
      Eigen::LDLT<Matrix> ldlt(nm);
      for (Index a = 0; a < m_; ++a)
        for (Index b = 0; b < m_; ++b) {
          CVector u(n);
          for (Index i = 0; i < n; ++i) u(i) = wts_(i) * t_[static_cast<size_t>(i)](a, b);
          const Vector rhs = (pw.adjoint() * u).real();
          const Vector coef = ldlt.solve(rhs);
          for (Index k = 0; k < kp; ++k) cs_[static_cast<size_t>(k)](a, b) = coef(k);
        }
      grid_max_ = 0.0;
      double wsum = 0.0;
      if (m_ == 1) {
        CVector cvec(kp);
        for (Index k = 0; k < kp; ++k) cvec(k) = Complex(cs_[static_cast<size_t>(k)](0, 0), 0.0);
        const CVector qv = pw * cvec;
        for (Index i = 0; i < n; ++i) {
          const size_t si = static_cast<size_t>(i);
          const double e2 = std::norm(qv(i) - t_[si](0, 0)) + floor2_[si];
          const double e = std::sqrt(std::max(0.0, e2));
          grid_max_ = std::max(grid_max_, e);
          wts_(i) *= std::max(e, 1e-14);
          wsum += wts_(i);
        }
      } else {
        for (Index i = 0; i < n; ++i) {
          const size_t si = static_cast<size_t>(i);
          CMatrix q = CMatrix::Zero(m_, m_);
          for (Index k = 0; k < kp; ++k) q += pw(i, k) * cs_[static_cast<size_t>(k)];
          const CMatrix dq = q - t_[si];
          Eigen::SelfAdjointEigenSolver<CMatrix> es(dq.adjoint() * dq + efloor_[si]);
          const double e = std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
          grid_max_ = std::max(grid_max_, e);
          wts_(i) *= std::max(e, 1e-14);
          wsum += wts_(i);
        }
      }
      wts_ /= wsum;
      if (std::abs(grid_max_ - prev_max) <= 1e-4 * std::max(grid_max_, 1e-9)) {
        if (++flat >= 2) break;
      } else {
        flat = 0;
      }
      prev_max = grid_max_;
    }
  }

  // independent certificate: exact H-infinity norm of G1 - G2 Q
  std::pair<double, double> certify() const {
    try {
      const StateSpace q = realize_q(cs_, m_);
      const StateSpace err = parallel(s1_.sym.g, negate(series(q, s2_.sym.g)));
      const HinfResult h = hinf_norm_certified(err, 1e-5);
      return {h.value * (1.0 + 1e-5), h.peak_w};
    } catch (const NumericalError&) {
      return {std::numeric_limits<double>::infinity(), 0.0};
    }
  }

  const SymbolGrid& s1_;
  const SymbolGrid& s2_;
  GapOptions opt_;
  Index m_;
  Vector wts_;
  std::vector<Complex> zs_;
  std::vector<CMatrix> t_;      // projection targets G2* G1
  std::vector<double> floor2_;  // irreducible residual power, single-input case
  std::vector<CMatrix> efloor_; // irreducible residual Gram term, multi-input case
  std::vector<Matrix> cs_;
  double grid_max_ = 0.0;
};

} // namespace detail

inline double pointwise_lb(const GraphSymbol& g1, const GraphSymbol& g2, int grid_points = 600) {
  const std::vector<double> ws = gap_grid(grid_points);
  const SymbolGrid s1(g1, ws);
  const SymbolGrid s2(g2, ws);
  return detail::chordal_sup(s1, s2);
}

inline GapResult directed_gap_gridded(const SymbolGrid& s1, const SymbolGrid& s2,
                                      const GapOptions& opt, double lower = -1.0) {
  if (s1.sym.g.nu() != s2.sym.g.nu() || s1.sym.g.ny() != s2.sym.g.ny() ||
      s1.sym.n_rows_N != s2.sym.n_rows_N)
    throw DomainError("directed_gap: incompatible plant dimensions");
  if (lower < 0.0) lower = detail::chordal_sup(s1, s2);
  detail::DirectedGapSolver solver(s1, s2, opt);
  return solver.solve(lower);
}

inline GapResult directed_gap(const StateSpace& p1, const StateSpace& p2, const GapOptions& opt) {
  const std::vector<double> ws = gap_grid(opt.grid_points);
  const SymbolGrid s1(nrcf(p1), ws);
  const SymbolGrid s2(nrcf(p2), ws);
  return directed_gap_gridded(s1, s2, opt);
}

inline GapResult directed_gap(const StateSpace& p1, const StateSpace& p2, double tol = 1e-3) {
  GapOptions opt;
  opt.tol = tol;
  return directed_gap(p1, p2, opt);
}

// the defect sup is symmetric in its arguments, so one evaluation serves both
// directed problems as the shared lower bound
inline GapResult gap_metric_gridded(const SymbolGrid& s1, const SymbolGrid& s2,
                                    const GapOptions& opt) {
  const double lower = detail::chordal_sup(s1, s2);
  const GapResult d12 = directed_gap_gridded(s1, s2, opt, lower);
  const GapResult d21 = directed_gap_gridded(s2, s1, opt, lower);
  GapResult r = d21.upper > d12.upper ? d21 : d12;
  r.lower = std::min(std::max(d12.lower, d21.lower), r.upper);
  r.value = std::min(r.upper, 1.0);
  r.stalled = d12.stalled || d21.stalled;
  r.converged = (r.upper - r.lower <= opt.tol) || (r.upper >= 1.0 - opt.tol);
  return r;
}

inline GapResult gap_metric(const StateSpace& p1, const StateSpace& p2, const GapOptions& opt) {
  if (p1.nu() != p2.nu() || p1.ny() != p2.ny())
    throw DomainError("gap_metric: incompatible plant dimensions");
  const std::vector<double> ws = gap_grid(opt.grid_points);
  const SymbolGrid s1(nrcf(p1), ws);
  const SymbolGrid s2(nrcf(p2), ws);
  return gap_metric_gridded(s1, s2, opt);
}

inline GapResult gap_metric(const StateSpace& p1, const StateSpace& p2, double tol = 1e-3) {
  GapOptions opt;
  opt.tol = tol;
  return gap_metric(p1, p2, opt);
}

} // namespace gapcert

#pragma once

#include <complex>
#include <random>
#include <vector>

#include "gapcert/state_space.hpp"

namespace testutil {

using gapcert::Complex;
using gapcert::Matrix;
using gapcert::StateSpace;

// Deterministic generator for test fixtures only; library code never uses it.
inline std::mt19937& rng() {
  static std::mt19937 gen(0x5eed);
  return gen;
}

inline double uniform(double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  return d(rng());
}

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, double scale = 1.0) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = uniform(-scale, scale);
  return m;
}

// Random stable system: random A shifted left of the imaginary axis.
inline StateSpace random_stable_ss(Eigen::Index n, Eigen::Index m, Eigen::Index l,
                                   bool with_feedthrough = false) {
  Matrix a = random_matrix(n, n);
  if (n > 0) {
    double max_re = -1e300;
    for (const Complex& ev : gapcert::eigenvalues(a)) max_re = std::max(max_re, ev.real());
    a -= (max_re + uniform(0.3, 1.5)) * Matrix::Identity(n, n);
  }
  Matrix d = with_feedthrough ? random_matrix(l, m, 0.5) : Matrix::Zero(l, m);
  return gapcert::make_ss(a, random_matrix(n, m), random_matrix(l, n), d);
}

// Random plant with poles scattered on both sides of the axis.
inline StateSpace random_unstable_ss(Eigen::Index n, Eigen::Index m, Eigen::Index l) {
  Matrix a = random_matrix(n, n);
  a += uniform(0.1, 1.0) * Matrix::Identity(n, n);
  return gapcert::make_ss(a, random_matrix(n, m), random_matrix(l, n), Matrix::Zero(l, m));
}

inline Complex evalpoly(const std::vector<double>& coeffs, Complex s) {
  Complex acc(0.0, 0.0);
  for (double c : coeffs) acc = acc * s + c;
  return acc;
}

// Expands prod (s - r_i) for real roots into descending coefficients.
inline std::vector<double> poly_from_roots(const std::vector<double>& roots) {
  std::vector<double> c{1.0};
  for (double r : roots) {
    std::vector<double> nxt(c.size() + 1, 0.0);
    for (size_t i = 0; i < c.size(); ++i) {
      nxt[i] += c[i];
      nxt[i + 1] -= r * c[i];
    }
    c = nxt;
  }
  return c;
}

} // namespace testutil

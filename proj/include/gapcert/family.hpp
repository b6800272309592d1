#pragma once

#include <vector>

#include "rng.hpp"
#include "state_space.hpp"

namespace gapcert {

// Isotropic Gaussian parameter law theta ~ N(mu, sigma^2 I_p).
struct GaussianSpec {
  Vector mu;
  double sigma = 1.0;

  Index p() const { return mu.size(); }
};

inline void validate(const GaussianSpec& spec) {
  if (!(spec.sigma > 0.0)) throw ConfigError("GaussianSpec: sigma must be positive");
  if (spec.p() < 1) throw ConfigError("GaussianSpec: mu must have at least one coordinate");
}

enum class DeltaTarget { A, B, C };

// One rank-structured direction: M(theta) = M + theta_i * Delta_i.
struct FamilyDelta {
  DeltaTarget target = DeltaTarget::A;
  Index index = 0; // zero-based position in theta
  Matrix matrix;
};

struct PlantFamily {
  StateSpace nominal;
  std::vector<FamilyDelta> deltas;
};

inline void validate(const PlantFamily& family, Index p) {
  std::vector<bool> seen(static_cast<size_t>(p), false);
  for (const FamilyDelta& d : family.deltas) {
    if (d.index < 0 || d.index >= p) throw ConfigError("PlantFamily: delta index out of range");
    if (seen[static_cast<size_t>(d.index)])
      throw ConfigError("PlantFamily: duplicate delta for one parameter");
    seen[static_cast<size_t>(d.index)] = true;
    const Matrix* target = nullptr;
    switch (d.target) {
      case DeltaTarget::A: target = &family.nominal.A; break;
      case DeltaTarget::B: target = &family.nominal.B; break;
      case DeltaTarget::C: target = &family.nominal.C; break;
    }
    if (d.matrix.rows() != target->rows() || d.matrix.cols() != target->cols())
      throw ConfigError("PlantFamily: delta dimensions do not match the nominal");
  }
}

inline StateSpace realize_plant(const PlantFamily& family, const Vector& theta) {
  StateSpace s = family.nominal;
  for (const FamilyDelta& d : family.deltas) {
    if (d.index >= theta.size()) throw DomainError("realize_plant: theta too short");
    const double t = theta(d.index);
    switch (d.target) {
      case DeltaTarget::A: s.A += t * d.matrix; break;
      case DeltaTarget::B: s.B += t * d.matrix; break;
      case DeltaTarget::C: s.C += t * d.matrix; break;
    }
  }
  return s;
}

// Deterministic i.i.d. Gaussian samples; sample i is a pure function of
// (seed, i), independent of evaluation order.
inline std::vector<Vector> sample_theta(const GaussianSpec& spec, Index n, uint64_t seed) {
  validate(spec);
  if (n < 1) throw ConfigError("sample_theta: need n >= 1");
  std::vector<Vector> out(static_cast<size_t>(n));
  const Index p = spec.p();
  for (Index i = 0; i < n; ++i) {
    Vector t(p);
    for (Index j = 0; j < p; ++j)
      t(j) = spec.mu(j) +
             spec.sigma * normal_draw(seed, static_cast<uint64_t>(i), static_cast<uint32_t>(j));
    out[static_cast<size_t>(i)] = std::move(t);
  }
  return out;
}

} // namespace gapcert

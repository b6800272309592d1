#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "bounds.hpp"
#include "coprime.hpp"
#include "family.hpp"
#include "gap.hpp"
#include "perf.hpp"

namespace gapcert {

namespace detail {

// GAPCERT_THREADS caps worker count; unset falls back to the hardware.
inline int thread_budget() {
  if (const char* env = std::getenv("GAPCERT_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v >= 1) return static_cast<int>(std::min<long>(v, 64));
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(std::min(hw, 8u));
}

// Each index writes only its own slot, so results are identical for any
// thread count. body(i) must not throw.
template <typename F>
inline void parallel_for(long n, F&& body) {
  const long budget = std::min<long>(thread_budget(), n);
  if (budget <= 1) {
    for (long i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<long> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(budget));
  for (long t = 0; t < budget; ++t)
    pool.emplace_back([&] {
      for (;;) {
        const long i = next.fetch_add(1, std::memory_order_relaxed);
        if (i >= n) return;
        body(i);
      }
    });
  for (std::thread& th : pool) th.join();
}

} // namespace detail

struct GapSample {
  Vector theta;
  double gap = 1.0;
  bool stable = false; // false: clamped to 1 (unstable realization or failed solve)
  double b = 0.0;
  double t_norm = 0.0;
  bool loop_stable = false;
};

struct GapStatistics {
  std::vector<GapSample> samples;
  double e_gap_hat = 0.0;
  double l_gap_hat = 0.0;
  double alpha_hat = 0.0;
  uint64_t seed = 0;
};

struct Empirical {
  double p = 0.0;
  double se = 0.0;
  long count = 0;
  long n = 0;
};

inline Empirical empirical_probability(const std::vector<double>& values, double threshold,
                                       bool inclusive = false) {
  if (values.empty()) throw DomainError("empirical_probability: no samples");
  Empirical e;
  e.n = static_cast<long>(values.size());
  for (double v : values)
    if (v < threshold || (inclusive && v == threshold)) ++e.count;
  e.p = static_cast<double>(e.count) / static_cast<double>(e.n);
  e.se = std::sqrt(e.p * (1.0 - e.p) / static_cast<double>(e.n));
  return e;
}

// Difference-quotient Lipschitz estimate over 10n random pairs, internally
// seeded so repeated calls agree. The raw pairwise maximum is dominated by
// near-coincident parameter draws straddling a clamp, so the 85th percentile
// of the ratio distribution is used instead.
inline double estimate_lipschitz(const std::vector<Vector>& thetas,
                                 const std::vector<double>& values) {
  if (thetas.size() != values.size())
    throw DomainError("estimate_lipschitz: theta/value length mismatch");
  const uint64_t n = thetas.size();
  if (n < 2) throw DomainError("estimate_lipschitz: need at least two samples");

  constexpr uint64_t kPairSeed = 0x9E3779B97F4A7C15ull;
  std::vector<double> ratios;
  ratios.reserve(10 * n);
  for (uint64_t k = 0; k < 10 * n; ++k) {
    const uint64_t i =
        std::min<uint64_t>(n - 1, static_cast<uint64_t>(uniform_draw(kPairSeed, k, 0) * n));
    const uint64_t j =
        std::min<uint64_t>(n - 1, static_cast<uint64_t>(uniform_draw(kPairSeed, k, 1) * n));
    if (i == j) continue;
    const double dist = (thetas[i] - thetas[j]).norm();
    if (dist < 1e-9) continue;
    ratios.push_back(std::abs(values[i] - values[j]) / dist);
  }
  if (ratios.empty()) throw NumericalError("estimate_lipschitz: all sampled pairs degenerate");

  const size_t k85 = static_cast<size_t>(0.85 * static_cast<double>(ratios.size() - 1));
  std::nth_element(ratios.begin(), ratios.begin() + static_cast<long>(k85), ratios.end());
  return ratios[k85];
}

// Gap of each realization against the family nominal. Unstable realizations
// and failed solves are recorded as gap 1 with stable=false; they enter the
// mean and the maximum but not the Lipschitz estimate.
inline GapStatistics gap_sampling(const PlantFamily& family, const std::vector<Vector>& thetas,
                                  const GapOptions& opt = {}) {
  if (thetas.empty()) throw DomainError("gap_sampling: no parameter samples");
  validate(family, thetas.front().size());

  const std::vector<double> ws = gap_grid(opt.grid_points);
  const SymbolGrid anchor(nrcf(family.nominal), ws);

  GapStatistics out;
  out.samples.resize(thetas.size());
  const long n = static_cast<long>(thetas.size());
  detail::parallel_for(n, [&](long i) {
    GapSample& s = out.samples[static_cast<size_t>(i)];
    s.theta = thetas[static_cast<size_t>(i)];
    try {
      const StateSpace plant = realize_plant(family, s.theta);
      if (!is_stable(plant)) return; // keeps the gap-1 clamp
      const SymbolGrid sg(nrcf(plant), ws);
      const GapResult g = gap_metric_gridded(anchor, sg, opt);
      if (g.upper >= 1.0 - opt.tol) return;
      s.gap = g.value;
      s.stable = true;
    } catch (const std::exception&) {
      s.gap = 1.0;
      s.stable = false;
    }
  });

  double sum = 0.0;
  std::vector<Vector> clean_thetas;
  std::vector<double> clean_gaps;
  for (const GapSample& s : out.samples) {
    sum += s.gap;
    out.alpha_hat = std::max(out.alpha_hat, s.gap);
    if (s.stable) {
      clean_thetas.push_back(s.theta);
      clean_gaps.push_back(s.gap);
    }
  }
  out.e_gap_hat = sum / static_cast<double>(n);
  out.l_gap_hat = clean_thetas.size() >= 2 ? estimate_lipschitz(clean_thetas, clean_gaps) : 0.0;
  return out;
}

struct FqEstimate {
  double e_fq = 0.0;
  double l_q = 0.0;
  long excluded = 0;
};

// Mean and Lipschitz estimate of theta -> ||Q(Sigma(theta), C)||_inf over the
// realizations the controller stabilizes.
inline FqEstimate estimate_fQ(const PlantFamily& family, const StateSpace& controller,
                              const std::vector<Vector>& thetas) {
  if (thetas.empty()) throw DomainError("estimate_fQ: no parameter samples");
  validate(family, thetas.front().size());

  const long n = static_cast<long>(thetas.size());
  std::vector<double> fq(thetas.size(), -1.0); // -1 marks an unstabilized sample
  detail::parallel_for(n, [&](long i) {
    try {
      const double b = bpc(realize_plant(family, thetas[static_cast<size_t>(i)]), controller);
      if (b > 0.0) fq[static_cast<size_t>(i)] = 1.0 / b;
    } catch (const std::exception&) {
    }
  });

  FqEstimate out;
  std::vector<Vector> clean_thetas;
  std::vector<double> clean_fq;
  double sum = 0.0;
  for (size_t i = 0; i < fq.size(); ++i) {
    if (fq[i] < 0.0) {
      ++out.excluded;
      continue;
    }
    sum += fq[i];
    clean_thetas.push_back(thetas[i]);
    clean_fq.push_back(fq[i]);
  }
  if (!clean_fq.empty()) out.e_fq = sum / static_cast<double>(clean_fq.size());
  out.l_q = clean_fq.size() >= 2 ? estimate_lipschitz(clean_thetas, clean_fq) : 0.0;
  return out;
}

struct ExperimentConfig {
  PlantFamily family;
  StateSpace controller;
  GaussianSpec theta;
  long samples = 10000;
  uint64_t seed = 0;
  double beta = 0.01;
  double epsilon = 0.05;
  std::vector<double> gamma_grid;
  double gap_tol = 1e-3;
};

inline void validate(const ExperimentConfig& cfg) {
  validate(cfg.theta);
  validate(cfg.family, cfg.theta.p());
  if (cfg.controller.B.cols() != cfg.family.nominal.C.rows() ||
      cfg.controller.C.rows() != cfg.family.nominal.B.cols())
    throw ConfigError("ExperimentConfig: controller dimensions do not match the plant");
  if (cfg.samples < 1) throw ConfigError("ExperimentConfig: samples must be positive");
  if (!(cfg.beta > 0.0 && cfg.beta < 1.0)) throw ConfigError("ExperimentConfig: beta not in (0,1)");
  if (!(cfg.epsilon > 0.0 && cfg.epsilon < 1.0))
    throw ConfigError("ExperimentConfig: epsilon not in (0,1)");
  if (!(cfg.gap_tol > 0.0)) throw ConfigError("ExperimentConfig: gap_tol must be positive");
  for (double g : cfg.gamma_grid)
    if (!(g > 0.0)) throw ConfigError("ExperimentConfig: gamma grid entries must be positive");
}

struct GammaRow {
  double gamma = 0.0;
  BoundReport bound;
  double empirical = 0.0; // loop-unstable samples count as exceeding gamma
  double se = 0.0;
};

struct ExperimentResult {
  ExperimentConfig config;
  GapStatistics stats;
  double gap_at_mu = 1.0;
  double c_gap = 0.0;
  double b_nominal = 0.0;
  double t_nominal = 0.0;
  double e_t_hat = 0.0;
  long t_count = 0;
  double e_fq_hat = 0.0;
  double l_q_hat = 0.0;
  long fq_excluded = 0;
  Empirical p_gap_below_b;
  BoundReport stability_bound;     // from (e_gap_hat, b_nominal, sigma, l_gap_hat)
  BoundReport expected_hinf_bound; // from (b_nominal, c_gap, sigma, l_gap_hat)
  std::vector<GammaRow> perf_rows;
  long n_required = 0;
  bool certificate = false; // alpha_hat < b_nominal with a large enough run
  double inv_gap_mean = 0.0;
  double inv_gap_se = 0.0;
  long inv_gap_count = 0;
  std::vector<long> histogram; // 40 bins over [0,1]
};

inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);

  ExperimentResult res;
  res.config = cfg;

  res.b_nominal = bpc(cfg.family.nominal, cfg.controller);
  if (res.b_nominal <= 0.0)
    throw ConfigError("run_experiment: controller does not stabilize the nominal plant");
  res.t_nominal = hinf_norm(closed_loop_T(cfg.family.nominal, cfg.controller));

  const std::vector<Vector> thetas = sample_theta(cfg.theta, cfg.samples, cfg.seed);
  GapOptions opt;
  opt.tol = cfg.gap_tol;

  res.stats = gap_sampling(cfg.family, thetas, opt);
  res.stats.seed = cfg.seed;

  {
    const StateSpace at_mu = realize_plant(cfg.family, cfg.theta.mu);
    if (is_stable(at_mu)) {
      const GapResult g = gap_metric(cfg.family.nominal, at_mu, opt);
      res.gap_at_mu = g.upper >= 1.0 - opt.tol ? 1.0 : g.value;
    }
  }

  const long n = cfg.samples;
  detail::parallel_for(n, [&](long i) {
    GapSample& s = res.stats.samples[static_cast<size_t>(i)];
    try {
      const StateSpace plant = realize_plant(cfg.family, s.theta);
      s.b = bpc(plant, cfg.controller);
      if (s.b > 0.0) {
        s.t_norm = hinf_norm(closed_loop_T(plant, cfg.controller));
        s.loop_stable = true;
      }
    } catch (const std::exception&) {
      s.b = 0.0;
      s.t_norm = 0.0;
      s.loop_stable = false;
    }
  });

  // index-ordered reductions keep every statistic bit-identical across runs
  res.histogram.assign(40, 0);
  std::vector<double> gaps;
  std::vector<Vector> fq_thetas;
  std::vector<double> fq_values;
  double t_sum = 0.0;
  double fq_sum = 0.0;
  double inv_sum = 0.0;
  double inv_sq = 0.0;
  gaps.reserve(res.stats.samples.size());
  for (const GapSample& s : res.stats.samples) {
    gaps.push_back(s.gap);
    const size_t bin = std::min<size_t>(39, static_cast<size_t>(s.gap * 40.0));
    ++res.histogram[bin];
    if (s.loop_stable) {
      t_sum += s.t_norm;
      ++res.t_count;
      fq_sum += 1.0 / s.b;
      fq_thetas.push_back(s.theta);
      fq_values.push_back(1.0 / s.b);
    } else {
      ++res.fq_excluded;
    }
    if (s.gap < 1.0) {
      const double w = 1.0 / (1.0 - s.gap);
      inv_sum += w;
      inv_sq += w * w;
      ++res.inv_gap_count;
    }
  }
  if (res.t_count > 0) {
    res.e_t_hat = t_sum / static_cast<double>(res.t_count);
    res.e_fq_hat = fq_sum / static_cast<double>(res.t_count);
  }
  res.l_q_hat = fq_values.size() >= 2 ? estimate_lipschitz(fq_thetas, fq_values) : 0.0;
  if (res.inv_gap_count > 0) {
    const double m = static_cast<double>(res.inv_gap_count);
    res.inv_gap_mean = inv_sum / m;
    if (res.inv_gap_count > 1) {
      const double var = std::max(0.0, (inv_sq - m * res.inv_gap_mean * res.inv_gap_mean) / (m - 1.0));
      res.inv_gap_se = std::sqrt(var / m);
    }
  }

  res.p_gap_below_b = empirical_probability(gaps, res.b_nominal);

  const double l_bound = std::max(res.stats.l_gap_hat, 1e-12);
  const double sigma = cfg.theta.sigma;
  res.c_gap = expected_gap_ub(res.gap_at_mu, res.stats.l_gap_hat, sigma, cfg.theta.p());
  res.stability_bound = stability_prob_lb(res.stats.e_gap_hat, res.b_nominal, sigma, l_bound);

  {
    BoundReport& r = res.expected_hinf_bound;
    r.name = "expected_hinf_ub";
    const bool moment_ok = res.c_gap > 0.0 && res.c_gap < 1.0;
    const double c_inv = moment_ok ? inv_gap_moment_ub(res.c_gap, sigma, l_bound)
                                   : std::numeric_limits<double>::quiet_NaN();
    r.inputs = {{"b_bar", res.b_nominal}, {"c_inv", c_inv},          {"c_gap", res.c_gap},
                {"sigma", sigma},         {"l_gap", l_bound},        {"t_bar", res.t_nominal}};
    if (moment_ok) {
      r.value = expected_hinf_ub(res.b_nominal, c_inv);
      r.valid = res.t_nominal <= res.b_nominal;
      if (!r.valid) r.note = "nominal performance exceeds the stability margin";
    } else {
      r.value = 0.0;
      r.valid = false;
      r.note = "expected-gap bound reaches 1, reciprocal moment diverges";
    }
  }

  res.perf_rows.reserve(cfg.gamma_grid.size());
  for (double gamma : cfg.gamma_grid) {
    GammaRow row;
    row.gamma = gamma;
    row.bound = hinf_perf_prob_lb(gamma, res.t_nominal, res.stats.e_gap_hat, sigma, l_bound);
    long hit = 0;
    for (const GapSample& s : res.stats.samples)
      if (s.loop_stable && s.t_norm <= gamma) ++hit;
    row.empirical = static_cast<double>(hit) / static_cast<double>(n);
    row.se = std::sqrt(row.empirical * (1.0 - row.empirical) / static_cast<double>(n));
    res.perf_rows.push_back(row);
  }

  res.n_required = scenario_sample_size(cfg.beta, cfg.epsilon);
  res.certificate = res.stats.alpha_hat < res.b_nominal && cfg.samples >= res.n_required;
  return res;
}

} // namespace gapcert

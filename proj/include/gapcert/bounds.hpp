#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace gapcert {

// named certificate with its inputs; vacuous certificates carry valid=false
// instead of raising so sweeps stay total
struct BoundReport {
  std::string name;
  std::vector<std::pair<std::string, double>> inputs;
  double value = 0.0;
  bool valid = false;
  std::string note;
};

namespace detail {

inline double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }

inline void require_positive(double x, const char* what) {
  if (!(x > 0.0)) throw DomainError(std::string(what) + " must be positive");
}

} // namespace detail

inline double coprime_stability_prob_lb(double b, double l_delta, double sigma) {
  detail::require_positive(b, "coprime_stability_prob_lb: b");
  detail::require_positive(l_delta, "coprime_stability_prob_lb: L");
  detail::require_positive(sigma, "coprime_stability_prob_lb: sigma");
  const double s = l_delta * sigma;
  return detail::clamp01(1.0 - std::exp(-b * b / (2.0 * s * s)));
}

inline double gap_tail_ub(double eps, double sigma, double l) {
  if (eps < 0.0) throw DomainError("gap_tail_ub: eps must be nonnegative");
  detail::require_positive(sigma, "gap_tail_ub: sigma");
  detail::require_positive(l, "gap_tail_ub: L");
  const double s = sigma * l;
  return detail::clamp01(std::exp(-eps * eps / (2.0 * s * s)));
}

inline double jensen_norm_ub(double sigma, long p, double offset = 0.0) {
  detail::require_positive(sigma, "jensen_norm_ub: sigma");
  if (p < 1) throw DomainError("jensen_norm_ub: p must be at least 1");
  if (offset < 0.0) throw DomainError("jensen_norm_ub: offset must be nonnegative");
  return std::sqrt(sigma * sigma * static_cast<double>(p) + offset * offset);
}

inline double expected_gap_ub(double gap_at_mu, double l, double sigma, long p) {
  if (!(gap_at_mu >= 0.0 && gap_at_mu <= 1.0))
    throw DomainError("expected_gap_ub: gap_at_mu outside [0,1]");
  if (l < 0.0) throw DomainError("expected_gap_ub: L must be nonnegative");
  return gap_at_mu + l * jensen_norm_ub(sigma, p);
}

inline double expected_gap_ub_anchor(double l, double sigma, long p, double dist_mu_theta0) {
  if (l < 0.0) throw DomainError("expected_gap_ub_anchor: L must be nonnegative");
  return l * jensen_norm_ub(sigma, p, dist_mu_theta0);
}

inline BoundReport stability_prob_lb(double e_gap, double b, double sigma, double l) {
  detail::require_positive(sigma, "stability_prob_lb: sigma");
  detail::require_positive(l, "stability_prob_lb: L");
  if (e_gap < 0.0) throw DomainError("stability_prob_lb: E_gap must be nonnegative");
  BoundReport r;
  r.name = "stability_prob_lb";
  const double eps_tol = b - e_gap;
  r.inputs = {{"e_gap", e_gap}, {"b", b}, {"sigma", sigma}, {"l", l}, {"eps_tol", eps_tol}};
  if (eps_tol <= 0.0) {
    r.value = 0.0;
    r.valid = false;
    r.note = "vacuous: expected gap is not below the margin";
    return r;
  }
  const double s = sigma * l;
  r.value = detail::clamp01(1.0 - std::exp(-eps_tol * eps_tol / (2.0 * s * s)));
  r.valid = true;
  return r;
}

inline double required_expected_gap(double beta, double b, double sigma, double l) {
  if (!(beta > 0.0 && beta < 1.0)) throw DomainError("required_expected_gap: beta outside (0,1)");
  detail::require_positive(sigma, "required_expected_gap: sigma");
  if (l < 0.0) throw DomainError("required_expected_gap: L must be nonnegative");
  return b - l * std::sqrt(2.0 * sigma * sigma * std::log(1.0 / beta));
}

inline double deviation_eps(double beta, double sigma, double l) {
  if (!(beta > 0.0 && beta < 1.0)) throw DomainError("deviation_eps: beta outside (0,1)");
  detail::require_positive(sigma, "deviation_eps: sigma");
  if (l < 0.0) throw DomainError("deviation_eps: L must be nonnegative");
  return std::sqrt(2.0 * sigma * sigma * l * l * std::log(2.0 / beta));
}

inline double deviation_prob_ub(double e_gap, double eps_gap, double e_fq, double eps_q,
                                double b) {
  detail::require_positive(b, "deviation_prob_ub: b");
  if (e_gap < 0.0 || eps_gap < 0.0 || e_fq < 0.0 || eps_q < 0.0)
    throw DomainError("deviation_prob_ub: negative input");
  return (e_gap + eps_gap) * (e_fq + eps_q) / b;
}

inline BoundReport hinf_perf_certificate(double gamma, double t_bar, double e_gap, double sigma,
                                         double l, double beta) {
  detail::require_positive(gamma, "hinf_perf_certificate: gamma");
  if (t_bar < 0.0) throw DomainError("hinf_perf_certificate: T_bar must be nonnegative");
  detail::require_positive(sigma, "hinf_perf_certificate: sigma");
  detail::require_positive(l, "hinf_perf_certificate: L");
  if (!(beta > 0.0 && beta < 1.0)) throw DomainError("hinf_perf_certificate: beta outside (0,1)");
  BoundReport r;
  r.name = "hinf_perf_certificate";
  const double gamma_bar = (gamma - t_bar) / (1.0 + gamma) - e_gap;
  const double threshold = std::sqrt(2.0 * sigma * sigma * l * l * std::log(1.0 / beta));
  r.inputs = {{"gamma", gamma},     {"t_bar", t_bar},         {"e_gap", e_gap},
              {"sigma", sigma},     {"l", l},                 {"beta", beta},
              {"gamma_bar", gamma_bar}, {"threshold", threshold}};
  r.value = gamma_bar;
  r.valid = gamma > t_bar && gamma_bar >= threshold;
  if (!r.valid) r.note = "vacuous: certificate margin below the concentration threshold";
  return r;
}

inline BoundReport hinf_perf_prob_lb(double gamma, double t_bar, double e_gap, double sigma,
                                     double l) {
  detail::require_positive(gamma, "hinf_perf_prob_lb: gamma");
  if (t_bar < 0.0) throw DomainError("hinf_perf_prob_lb: T_bar must be nonnegative");
  detail::require_positive(sigma, "hinf_perf_prob_lb: sigma");
  detail::require_positive(l, "hinf_perf_prob_lb: L");
  BoundReport r;
  r.name = "hinf_perf_prob_lb";
  const double gamma_bar = (gamma - t_bar) / (1.0 + gamma) - e_gap;
  r.inputs = {{"gamma", gamma}, {"t_bar", t_bar}, {"e_gap", e_gap},
              {"sigma", sigma}, {"l", l},         {"gamma_bar", gamma_bar}};
  if (gamma_bar <= 0.0) {
    r.value = 0.0;
    r.valid = false;
    r.note = "vacuous: nonpositive certificate margin";
    return r;
  }
  const double s = sigma * l;
  r.value = detail::clamp01(1.0 - std::exp(-gamma_bar * gamma_bar / (2.0 * s * s)));
  r.valid = true;
  return r;
}

inline double reciprocal_moment_ub(double mu, double s) {
  if (!(mu > 0.0 && mu < 1.0)) throw DomainError("reciprocal_moment_ub: mu outside (0,1)");
  detail::require_positive(s, "reciprocal_moment_ub: s");
  const double gap = 1.0 - mu;
  const double s2 = s * s;
  return (1.0 + mu) / gap + (8.0 * s2 / gap) * std::exp(-gap * gap / (8.0 * s2));
}

inline double inv_gap_moment_ub(double c_gap, double sigma, double l) {
  if (!(c_gap > 0.0 && c_gap < 1.0)) throw DomainError("inv_gap_moment_ub: C_gap outside (0,1)");
  detail::require_positive(sigma, "inv_gap_moment_ub: sigma");
  detail::require_positive(l, "inv_gap_moment_ub: L");
  return reciprocal_moment_ub(c_gap, sigma * l);
}

inline double expected_hinf_ub(double b_bar, double c_inv) {
  if (!(b_bar >= 0.0 && b_bar <= 1.0)) throw DomainError("expected_hinf_ub: b outside [0,1]");
  if (c_inv < 1.0) throw DomainError("expected_hinf_ub: C_inv below 1");
  return (b_bar + 1.0) * c_inv;
}

inline long scenario_sample_size(double beta, double eps) {
  if (!(beta > 0.0 && beta < 1.0)) throw DomainError("scenario_sample_size: beta outside (0,1)");
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("scenario_sample_size: eps outside (0,1)");
  return static_cast<long>(std::ceil(std::log(1.0 / beta) / std::log(1.0 / (1.0 - eps))));
}

} // namespace gapcert

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "gapcert/bounds.hpp"

using namespace gapcert;

TEST_CASE("coprime stability probability lower bound") {
  REQUIRE(coprime_stability_prob_lb(1e6, 1.0, 0.25) == Catch::Approx(1.0).margin(1e-12));
  const double b_half = 1.0 * 0.25 * std::sqrt(2.0 * std::log(2.0));
  REQUIRE(coprime_stability_prob_lb(b_half, 1.0, 0.25) == Catch::Approx(0.5).margin(1e-12));
  REQUIRE(coprime_stability_prob_lb(0.7071, 1.0, 0.25) ==
          Catch::Approx(1.0 - std::exp(-4.0)).margin(1e-4));
  REQUIRE(coprime_stability_prob_lb(0.7071, 1.0, 0.25) == Catch::Approx(0.98168).margin(1e-4));
  REQUIRE_THROWS_AS(coprime_stability_prob_lb(0.0, 1.0, 0.25), DomainError);
}

TEST_CASE("gap tail upper bound") {
  REQUIRE(gap_tail_ub(0.0, 0.5, 1.0) == 1.0);
  const double eps10 = 0.5 * 1.0 * std::sqrt(2.0 * std::log(10.0));
  REQUIRE(gap_tail_ub(eps10, 0.5, 1.0) == Catch::Approx(0.1).margin(1e-12));
  REQUIRE(gap_tail_ub(0.2, 0.25, 1.2676) == Catch::Approx(0.8194).margin(1e-4));
  // strictly decreasing in eps
  double prev = 1.1;
  for (double eps : {0.1, 0.3, 0.5, 0.9, 1.5}) {
    const double v = gap_tail_ub(eps, 0.5, 1.0);
    REQUIRE(v < prev);
    prev = v;
  }
}

TEST_CASE("jensen norm bound") {
  REQUIRE(jensen_norm_ub(0.5, 2) == Catch::Approx(std::sqrt(0.5)).margin(1e-12));
  REQUIRE(jensen_norm_ub(0.5, 2) == Catch::Approx(0.7071).margin(1e-4));
  REQUIRE(jensen_norm_ub(0.25, 2, 0.559) == Catch::Approx(0.661423).margin(1e-5));
  REQUIRE_THROWS_AS(jensen_norm_ub(0.5, 0), DomainError);
}

TEST_CASE("expected gap upper bounds") {
  REQUIRE(expected_gap_ub(0.0270, 0.5308, 0.5, 2) == Catch::Approx(0.4023).margin(1e-4));
  REQUIRE(expected_gap_ub(0.123, 0.0, 0.5, 2) == Catch::Approx(0.123).margin(1e-15));
  REQUIRE(expected_gap_ub(0.0, 1.0, 1.0, 1) == Catch::Approx(1.0).margin(1e-12));

  REQUIRE(expected_gap_ub_anchor(1.2676, 0.25, 2, 0.559) ==
          Catch::Approx(0.838420).margin(1e-5));
  REQUIRE(expected_gap_ub_anchor(1.2676, 0.25, 2, 0.0) ==
          Catch::Approx(1.2676 * jensen_norm_ub(0.25, 2)).margin(1e-12));
  REQUIRE(expected_gap_ub_anchor(0.0, 0.25, 2, 0.559) == 0.0);
}

TEST_CASE("stability probability report") {
  const BoundReport r = stability_prob_lb(0.3032, 0.7071, 0.3169, 1.0);
  REQUIRE(r.valid);
  REQUIRE(r.value == Catch::Approx(0.5561).margin(1e-4));

  const BoundReport vac = stability_prob_lb(0.8, 0.7071, 0.3169, 1.0);
  REQUIRE_FALSE(vac.valid);
  REQUIRE(vac.value == 0.0);

  const BoundReport tight = stability_prob_lb(0.3, 0.7071, 1e-9, 1.0);
  REQUIRE(tight.valid);
  REQUIRE(tight.value == Catch::Approx(1.0).margin(1e-12));

  // increasing in b, decreasing in sigma*L
  REQUIRE(stability_prob_lb(0.3, 0.8, 0.3, 1.0).value >
          stability_prob_lb(0.3, 0.7, 0.3, 1.0).value);
  REQUIRE(stability_prob_lb(0.3, 0.7, 0.2, 1.0).value >
          stability_prob_lb(0.3, 0.7, 0.4, 1.0).value);
}

TEST_CASE("required expected gap and deviation thresholds") {
  REQUIRE(required_expected_gap(0.01, 0.8944, 0.25, 1.0) == Catch::Approx(0.1357).margin(1e-4));
  REQUIRE(required_expected_gap(0.999999, 0.8944, 0.25, 1.0) ==
          Catch::Approx(0.8944).margin(1e-2));
  REQUIRE(required_expected_gap(0.01, 0.1, 0.5, 1.0) < 0.0); // vacuous is representable

  REQUIRE(deviation_eps(2.0 * std::exp(-2.0), 0.5, 1.0) == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(deviation_eps(0.05, 0.5, 0.5308) == Catch::Approx(0.7209).margin(1e-4));
  REQUIRE(deviation_eps(0.05, 0.5, 0.0) == 0.0);

  REQUIRE(deviation_prob_ub(0.0, 0.0, 0.0, 0.0, 0.7071) == 0.0);
  REQUIRE(deviation_prob_ub(0.3, 0.1, 2.0, 0.2, 0.7071) == Catch::Approx(1.2445).margin(1e-4));
  REQUIRE(deviation_prob_ub(0.3, 0.1, 2.0, 0.2, 2.0 * 0.7071) ==
          Catch::Approx(1.2445 / 2.0).margin(1e-4));
}

TEST_CASE("performance certificate and probability bound") {
  const BoundReport cert = hinf_perf_certificate(3.0, 0.5, 0.3032, 0.3169, 1.0, 0.6);
  REQUIRE(cert.valid);
  REQUIRE(cert.value == Catch::Approx(0.3218).margin(1e-4));
  double threshold = 0.0;
  for (const auto& kv : cert.inputs)
    if (kv.first == "threshold") threshold = kv.second;
  REQUIRE(threshold == Catch::Approx(0.3203).margin(1e-4));

  const BoundReport degenerate = hinf_perf_certificate(0.5, 0.5, 0.3032, 0.3169, 1.0, 0.6);
  REQUIRE_FALSE(degenerate.valid);
  REQUIRE(degenerate.value == Catch::Approx(-0.3032).margin(1e-12));

  const BoundReport lb = hinf_perf_prob_lb(3.0, 0.5, 0.3032, 0.3169, 1.0);
  REQUIRE(lb.valid);
  REQUIRE(lb.value == Catch::Approx(0.4028).margin(1e-4));

  const BoundReport vac = hinf_perf_prob_lb(0.6, 0.5, 0.3032, 0.3169, 1.0);
  REQUIRE_FALSE(vac.valid);
  REQUIRE(vac.value == 0.0);
}

TEST_CASE("reciprocal moment bounds") {
  REQUIRE(reciprocal_moment_ub(0.5, 1e-6) == Catch::Approx(3.0).margin(1e-9));
  REQUIRE(reciprocal_moment_ub(0.5, 0.1) == Catch::Approx(3.00703).margin(1e-4));
  REQUIRE(reciprocal_moment_ub(1e-9, 1e-9) == Catch::Approx(1.0).margin(1e-6));

  REQUIRE(inv_gap_moment_ub(0.4023, 0.5, 0.5308) == Catch::Approx(2.8464).margin(2e-4));
  REQUIRE(inv_gap_moment_ub(0.4023, 1e-9, 0.5308) ==
          Catch::Approx(1.4023 / 0.5977).margin(1e-9));
}

TEST_CASE("expected hinf bound and the full pipeline") {
  REQUIRE(expected_hinf_ub(0.7071, 2.8464) == Catch::Approx(1.7071 * 2.8464).margin(1e-12));
  REQUIRE(expected_hinf_ub(0.7071, 2.8464) == Catch::Approx(4.8592).margin(5e-3));
  REQUIRE(expected_hinf_ub(0.0, 1.0) == 1.0);
  REQUIRE(expected_hinf_ub(0.5, 4.0) == Catch::Approx(2.0 * expected_hinf_ub(0.5, 2.0)).margin(1e-12));

  const double c_gap = expected_gap_ub(0.0270, 0.5308, 0.5, 2);
  const double c_inv = inv_gap_moment_ub(c_gap, 0.5, 0.5308);
  REQUIRE(expected_hinf_ub(0.7071, c_inv) == Catch::Approx(4.8592).margin(5e-3));
}

TEST_CASE("scenario sample size") {
  REQUIRE(scenario_sample_size(0.01, 0.05) == 90);
  REQUIRE(scenario_sample_size(0.5, 0.5) == 1);
  REQUIRE(scenario_sample_size(0.5, 0.999999) == 1);
  REQUIRE(scenario_sample_size(0.01, 0.10) <= scenario_sample_size(0.01, 0.05));
  REQUIRE(scenario_sample_size(0.001, 0.05) >= scenario_sample_size(0.01, 0.05));
  REQUIRE_THROWS_AS(scenario_sample_size(0.0, 0.05), DomainError);
  REQUIRE_THROWS_AS(scenario_sample_size(0.01, 1.0), DomainError);
}

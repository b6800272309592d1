#include <catch2/catch_amalgamated.hpp>

#include "gapcert/state_space.hpp"
#include "helpers.hpp"

using namespace gapcert;
using testutil::evalpoly;
using testutil::poly_from_roots;
using testutil::random_stable_ss;
using testutil::uniform;

namespace {

RationalTF random_stable_tf(int order) {
  std::vector<double> roots;
  for (int i = 0; i < order; ++i) roots.push_back(-uniform(0.2, 3.0));
  RationalTF tf;
  tf.den = poly_from_roots(roots);
  tf.num.resize(static_cast<size_t>(order) + 1);
  for (double& c : tf.num) c = uniform(-2.0, 2.0);
  return tf;
}

void require_tf_matches_ss(const RationalTF& tf, const StateSpace& ss, double tol) {
  for (double w : log_grid(1e-2, 1e2, 200)) {
    const Complex s(0.0, w);
    const Complex expected = evalpoly(tf.num, s) / evalpoly(tf.den, s);
    const Complex got = freq_response(ss, w)(0, 0);
    REQUIRE(std::abs(expected - got) <= tol * std::max(1.0, std::abs(expected)));
  }
}

} // namespace

TEST_CASE("tf_to_ss canonical forms") {
  const StateSpace first_order = tf_to_ss({{1.0}, {1.0, 1.0}});
  REQUIRE(first_order.A(0, 0) == Catch::Approx(-1.0));
  REQUIRE(first_order.B(0, 0) == Catch::Approx(1.0));
  REQUIRE(first_order.C(0, 0) == Catch::Approx(1.0));
  REQUIRE(first_order.D(0, 0) == Catch::Approx(0.0));

  const StateSpace constant = tf_to_ss({{2.0}, {1.0}});
  REQUIRE(constant.nx() == 0);
  REQUIRE(constant.D(0, 0) == Catch::Approx(2.0));

  const StateSpace biproper = tf_to_ss({{1.0, 2.0}, {2.0, 6.0}});
  REQUIRE(biproper.D(0, 0) == Catch::Approx(0.5));
  require_tf_matches_ss({{1.0, 2.0}, {2.0, 6.0}}, biproper, 1e-12);

  REQUIRE_THROWS_AS(tf_to_ss({{1.0, 0.0, 1.0}, {1.0, 1.0}}), DomainError);
}

TEST_CASE("tf and ss representations agree on a dense grid") {
  for (int trial = 0; trial < 20; ++trial) {
    const RationalTF tf = random_stable_tf(1 + trial % 4);
    require_tf_matches_ss(tf, tf_to_ss(tf), 1e-9);
  }
}

TEST_CASE("poles and stability flags") {
  const StateSpace stable = tf_to_ss({{1.0}, {1.0, 3.0, 2.0}});
  const auto p = poles(stable);
  REQUIRE(p.size() == 2);
  REQUIRE(p[0].real() == Catch::Approx(-2.0));
  REQUIRE(p[1].real() == Catch::Approx(-1.0));
  REQUIRE(is_stable(stable));

  REQUIRE_FALSE(is_stable(tf_to_ss({{1.0}, {1.0, -1.0}})));
  REQUIRE_FALSE(is_stable(tf_to_ss({{1.0}, {1.0, 0.0}}))); // integrator sits on the axis
  REQUIRE(is_stable(static_gain(Matrix::Constant(1, 1, 3.0))));
}

TEST_CASE("frequency response values and pole guard") {
  const StateSpace sys = tf_to_ss({{1.0}, {1.0, 1.0}});
  const Complex v = freq_response(sys, 1.0)(0, 0);
  REQUIRE(v.real() == Catch::Approx(0.5).margin(1e-12));
  REQUIRE(v.imag() == Catch::Approx(-0.5).margin(1e-12));

  const StateSpace integrator = tf_to_ss({{1.0}, {1.0, 0.0}});
  REQUIRE_THROWS_AS(freq_response(integrator, 1e-10), NumericalError);
}

TEST_CASE("freq evaluator matches freq_response including defective dynamics") {
  for (int trial = 0; trial < 10; ++trial) {
    const StateSpace sys = random_stable_ss(3, 2, 2, true);
    FreqEvaluator fe(sys);
    for (double w : {0.0, 0.3, 1.0, 7.5}) {
      REQUIRE((fe.at(w) - freq_response(sys, w)).norm() < 1e-9);
    }
  }
  // double pole forces the dense fallback
  const StateSpace repeated = tf_to_ss({{1.0}, {1.0, 2.0, 1.0}});
  FreqEvaluator fe(repeated);
  for (double w : {0.0, 0.5, 2.0}) {
    REQUIRE((fe.at(w) - freq_response(repeated, w)).norm() < 1e-9);
  }
}

TEST_CASE("interconnections compose frequency responses") {
  const StateSpace p = random_stable_ss(2, 1, 1);
  const StateSpace q = random_stable_ss(3, 1, 1, true);
  for (double w : {0.0, 0.4, 2.0, 30.0}) {
    const CMatrix pw = freq_response(p, w);
    const CMatrix qw = freq_response(q, w);
    REQUIRE((freq_response(series(p, q), w) - qw * pw).norm() < 1e-10);
    REQUIRE((freq_response(parallel(p, q), w) - (pw + qw)).norm() < 1e-10);

    const CMatrix rows = freq_response(stack_rows(p, q), w);
    REQUIRE((rows.topRows(1) - pw).norm() < 1e-10);
    REQUIRE((rows.bottomRows(1) - qw).norm() < 1e-10);

    const CMatrix cols = freq_response(stack_cols(p, q), w);
    REQUIRE((cols.leftCols(1) - pw).norm() < 1e-10);
    REQUIRE((cols.rightCols(1) - qw).norm() < 1e-10);
  }
}

TEST_CASE("feedback loop realizes the resolvent") {
  const StateSpace p = tf_to_ss({{1.0}, {1.0, 1.0}});
  const StateSpace c = static_gain(Matrix::Constant(1, 1, -1.0));
  const StateSpace loop = feedback_loop(p, c);
  const auto lp = poles(loop);
  REQUIRE(lp.size() == 1);
  REQUIRE(lp[0].real() == Catch::Approx(-2.0));
  for (double w : {0.0, 1.0, 10.0}) {
    const Complex pw = freq_response(p, w)(0, 0);
    const Complex expected = 1.0 / (1.0 + pw);
    REQUIRE(std::abs(freq_response(loop, w)(0, 0) - expected) < 1e-12);
  }

  // general pair cross-check against the pointwise formula
  const StateSpace pg = random_stable_ss(2, 2, 2, true);
  const StateSpace cg = random_stable_ss(2, 2, 2, true);
  const StateSpace fl = feedback_loop(pg, cg);
  for (double w : {0.1, 1.0, 5.0}) {
    const CMatrix pw = freq_response(pg, w);
    const CMatrix cw = freq_response(cg, w);
    const CMatrix expected = (CMatrix::Identity(2, 2) - cw * pw).inverse();
    REQUIRE((freq_response(fl, w) - expected).norm() < 1e-9);
  }
}

TEST_CASE("feedback loop rejects algebraic loops") {
  const StateSpace unit = static_gain(Matrix::Constant(1, 1, 1.0));
  REQUIRE_THROWS_AS(feedback_loop(unit, unit), DomainError);
}

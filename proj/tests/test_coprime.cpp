#include <catch2/catch_amalgamated.hpp>

#include "gapcert/coprime.hpp"
#include "helpers.hpp"

using namespace gapcert;
using testutil::random_stable_ss;
using testutil::random_unstable_ss;

namespace {

double inner_residual(const GraphSymbol& gs, int pts = 400) {
  FreqEvaluator fe(gs.g);
  std::vector<double> ws = log_grid(1e-4, 1e4, pts);
  ws.push_back(0.0);
  const Index m = gs.g.nu();
  double worst = 0.0;
  for (double w : ws) {
    const CMatrix g = fe.at(w);
    worst = std::max(worst, (g.adjoint() * g - CMatrix::Identity(m, m)).norm());
  }
  return worst;
}

double factor_reconstruction_error(const StateSpace& p, const GraphSymbol& gs, int pts = 60) {
  FreqEvaluator fg(gs.g);
  FreqEvaluator fp(p);
  const Index l = gs.n_rows_N;
  double worst = 0.0;
  for (double w : log_grid(1e-3, 1e3, pts)) {
    const CMatrix g = fg.at(w);
    const CMatrix nd = g.topRows(l) * g.bottomRows(g.rows() - l).inverse();
    worst = std::max(worst, (nd - fp.at(w)).norm());
  }
  return worst;
}

const PlantFamily& demo_family() {
  static const PlantFamily fam{
      make_ss(Matrix::Constant(1, 1, -1.0), Matrix::Constant(1, 1, 1.0),
              Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, 0.0)),
      {{DeltaTarget::A, 0, Matrix::Constant(1, 1, 1.0)},
       {DeltaTarget::C, 1, Matrix::Constant(1, 1, 1.0)}}};
  return fam;
}

} // namespace

TEST_CASE("nrcf of the first-order lag matches the closed form") {
  const GraphSymbol gs = nrcf(tf_to_ss({{1.0}, {1.0, 1.0}}));
  REQUIRE(gs.n_rows_N == 1);
  REQUIRE(is_stable(gs.g));

  // N = 1/(s + sqrt2), D = (s+1)/(s + sqrt2), up to a common sign
  const double root2 = std::sqrt(2.0);
  const double sign = freq_response(gs.g, 0.0)(0, 0).real() > 0.0 ? 1.0 : -1.0;
  for (double w : {0.0, 0.5, 1.0, 4.0, 50.0}) {
    const Complex s(0.0, w);
    const CMatrix g = freq_response(gs.g, w);
    REQUIRE(std::abs(sign * g(0, 0) - 1.0 / (s + root2)) < 1e-6);
    REQUIRE(std::abs(sign * g(1, 0) - (s + 1.0) / (s + root2)) < 1e-6);
  }
}

TEST_CASE("nrcf of the zero plant") {
  const GraphSymbol gs = nrcf(static_gain(Matrix::Zero(1, 1)));
  REQUIRE(gs.g.D(0, 0) == Catch::Approx(0.0));
  REQUIRE(gs.g.D(1, 0) == Catch::Approx(1.0));

  const StateSpace decayed = make_ss(Matrix::Constant(1, 1, -1.0), Matrix::Constant(1, 1, 1.0),
                                     Matrix::Zero(1, 1), Matrix::Zero(1, 1));
  const GraphSymbol gs2 = nrcf(decayed);
  for (double w : {0.0, 1.0, 10.0}) {
    REQUIRE(std::abs(freq_response(gs2.g, w)(0, 0)) < 1e-12);
  }
}

TEST_CASE("nrcf of an unstable plant yields a stable symbol with the right-half-plane zero") {
  const StateSpace p = tf_to_ss({{1.0}, {1.0, -1.0}});
  const GraphSymbol gs = nrcf(p);
  REQUIRE(is_stable(gs.g));
  REQUIRE(inner_residual(gs) <= 1e-7);
  // the denominator factor vanishes where the plant has its pole
  const CMatrix at_pole = eval_at(gs.g, Complex(1.0, 0.0));
  REQUIRE(std::abs(at_pole(1, 0)) < 1e-8);
}

TEST_CASE("graph symbols are inner and reproduce the plant") {
  for (int trial = 0; trial < 40; ++trial) {
    const Index n = 1 + trial % 4;
    const Index m = 1 + trial % 2;
    const Index l = 1 + (trial / 2) % 2;
    const StateSpace p = (trial % 3 == 0) ? random_unstable_ss(n, m, l)
                                          : random_stable_ss(n, m, l, trial % 2 == 1);
    GraphSymbol gs;
    try {
      gs = nrcf(p);
    } catch (const FactorizationError&) {
      continue; // degenerate random instance
    }
    REQUIRE(is_stable(gs.g));
    REQUIRE(inner_residual(gs) <= 1e-7);
    REQUIRE(factor_reconstruction_error(p, gs) <= 1e-7);
  }
}

TEST_CASE("bezout identity holds with stable factors") {
  for (int trial = 0; trial < 40; ++trial) {
    const Index n = 1 + trial % 4;
    const StateSpace p = (trial % 3 == 0) ? random_unstable_ss(n, 1, 1)
                                          : random_stable_ss(n, 2, 2, trial % 2 == 1);
    GraphSymbol gs;
    BezoutPair bp;
    try {
      gs = nrcf(p);
      bp = bezout_solve(gs);
    } catch (const FactorizationError&) {
      continue;
    }
    REQUIRE(is_stable(bp.x));
    REQUIRE(is_stable(bp.y));
    REQUIRE(bezout_residual(gs, bp, 400) <= 1e-6);
  }
}

TEST_CASE("bezout pair for trivial plants") {
  const GraphSymbol gs = nrcf(static_gain(Matrix::Zero(1, 1)));
  const BezoutPair bp = bezout_solve(gs);
  REQUIRE(bp.x.D(0, 0) == Catch::Approx(0.0));
  REQUIRE(bp.y.D(0, 0) == Catch::Approx(1.0));
  REQUIRE(bezout_residual(gs, bp) <= 1e-12);

  const GraphSymbol lag = nrcf(tf_to_ss({{1.0}, {1.0, 1.0}}));
  REQUIRE(bezout_residual(lag, bezout_solve(lag), 400) <= 1e-6);

  const GraphSymbol unstable = nrcf(tf_to_ss({{1.0}, {1.0, -1.0}}));
  REQUIRE(bezout_residual(unstable, bezout_solve(unstable), 400) <= 1e-6);
}

TEST_CASE("bezout construction is gauge invariant") {
  const GraphSymbol gs = nrcf(random_stable_ss(3, 2, 2, true));
  GraphSymbol flipped{scale_input(gs.g, -Matrix::Identity(2, 2)), gs.n_rows_N};
  const BezoutPair bp = bezout_solve(flipped);
  REQUIRE(bezout_residual(flipped, bp, 400) <= 1e-6);
}

TEST_CASE("coprime perturbation removes the orthogonal gauge") {
  const GraphSymbol gs = nrcf(tf_to_ss({{1.0, 0.5}, {1.0, 2.0, 2.0}}));
  REQUIRE(coprime_perturbation(gs, gs) < 2e-6);

  GraphSymbol flipped{scale_input(gs.g, -Matrix::Identity(1, 1)), gs.n_rows_N};
  REQUIRE(coprime_perturbation(gs, flipped) < 2e-6);

  // rotation gauge on a two-input plant
  const GraphSymbol mimo = nrcf(random_stable_ss(3, 2, 2));
  const double th = 0.7;
  Matrix rot(2, 2);
  rot << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
  GraphSymbol rotated{scale_input(mimo.g, rot), mimo.n_rows_N};
  REQUIRE(coprime_perturbation(mimo, rotated) < 2e-6);
}

TEST_CASE("coprime perturbation of a shifted lag") {
  const GraphSymbol nom = nrcf(tf_to_ss({{1.0}, {1.0, 1.0}}));
  const GraphSymbol prt = nrcf(tf_to_ss({{1.0}, {1.0, 1.5}}));
  REQUIRE(coprime_perturbation(nom, prt) == Catch::Approx(0.197075).margin(5e-4));
}

TEST_CASE("nrcf is consistent across representations of one plant") {
  const RationalTF tf{{2.0, 1.0}, {1.0, 3.0, 2.0}};
  const StateSpace canonical = tf_to_ss(tf);
  Matrix t(2, 2);
  t << 1.0, 0.4, -0.3, 2.0; // arbitrary similarity transform
  const Matrix t_inv = t.inverse();
  const StateSpace transformed =
      make_ss(t * canonical.A * t_inv, t * canonical.B, canonical.C * t_inv, canonical.D);
  REQUIRE(coprime_perturbation(nrcf(canonical), nrcf(transformed)) < 1e-6);
}

TEST_CASE("bezout survival rate on the demo family") {
  const GaussianSpec spec{(Vector(2) << 0.5, -0.25).finished(), 0.25};
  REQUIRE(bezout_survival_rate(demo_family(), spec, 2000, 11) >= 0.999);

  const PlantFamily frozen{demo_family().nominal, {}};
  const GaussianSpec one{(Vector(1) << 0.0).finished(), 1.0};
  REQUIRE(bezout_survival_rate(frozen, one, 50, 3) == 1.0);

  const double single = bezout_survival_rate(demo_family(), spec, 1, 42);
  REQUIRE((single == 0.0 || single == 1.0));
}

TEST_CASE("small coprime distance certifies closed-loop stability") {
  // controller u = -y; margin of the nominal loop is 1/sqrt2
  const double margin = 1.0 / std::sqrt(2.0);
  const StateSpace ctrl = static_gain(Matrix::Constant(1, 1, -1.0));
  const GraphSymbol nom = nrcf(demo_family().nominal);
  const GaussianSpec spec{(Vector(2) << 0.5, -0.25).finished(), 0.25};
  int checked = 0;
  for (const Vector& theta : sample_theta(spec, 200, 7)) {
    const StateSpace plant = realize_plant(demo_family(), theta);
    GraphSymbol gs;
    try {
      gs = nrcf(plant);
    } catch (const FactorizationError&) {
      continue;
    }
    if (coprime_perturbation(nom, gs) < margin) {
      REQUIRE(is_stable(feedback_loop(plant, ctrl)));
      ++checked;
    }
  }
  REQUIRE(checked > 100);
}

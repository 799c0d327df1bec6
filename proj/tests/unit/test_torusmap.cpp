#include <cmath>
#include <numbers>
#include <random>

#include "helpers.hpp"

using namespace semiconj;

namespace {

Eigen::VectorXd vec2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}

GridFunction sine_delta(double amp, int res) {
  return GridFunction::sample(2, 2, GridFunction::uniform_res(2, res),
                              [&](const Eigen::VectorXd& x) {
                                return vec2(amp * std::sin(2 * std::numbers::pi * x[1]),
                                            amp * std::sin(2 * std::numbers::pi * x[0]));
                              });
}

}  // namespace

TEST_CASE("lift evaluation: linear case and integer equivariance", "[torusmap]") {
  const IntMatrix A = parse_matrix("2,1;1,1");
  const TorusMap lin = TorusMap::linear(A);
  REQUIRE(lin.apply_lift(vec2(0.3, 0.4)) == A.to_real() * vec2(0.3, 0.4));
  REQUIRE(lin.apply_lift(vec2(2.0, -1.0)) == A.to_real() * vec2(2.0, -1.0));

  const TorusMap F(A, sine_delta(0.05, 64));
  const Eigen::VectorXd x = vec2(0.12, 0.77);
  const Eigen::VectorXd k = vec2(3.0, -2.0);
  const Eigen::VectorXd lhs = F.apply_lift(x + k) - F.apply_lift(x);
  REQUIRE((lhs - A.to_real() * k).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("composition: identity, linear, and the conjugation oracle", "[torusmap]") {
  const IntMatrix A = parse_matrix("1,2;0,1");
  const IntMatrix B = parse_matrix("1,0;2,1");
  const TorusMap ta = TorusMap::linear(A);
  const TorusMap tb = TorusMap::linear(B);

  // both linear: product matrix, trivial displacement
  const TorusMap tab = compose(ta, tb);
  REQUIRE(tab.matrix() == A * B);
  REQUIRE(tab.delta().sup_norm() == 0.0);

  // compose with the identity map reproduces the map at grid points
  const TorusMap F(A, sine_delta(0.05, 64));
  const TorusMap ident = TorusMap::linear(IntMatrix::identity(2));
  const TorusMap fi = compose(F, ident, 64);
  REQUIRE(fi.matrix() == A);
  REQUIRE(sup_distance(fi.delta(), F.delta()) < 1e-14);

  // conjugated a composed with conjugated b matches conjugated (ab) at nodes
  const int res = 64;
  const OracleAction oracle = make_conjugated_sanov(0.03, res);
  const TorusMap& fa = oracle.action.generators[0].map;
  const TorusMap& fb = oracle.action.generators[1].map;
  const TorusMap fafb = compose(fa, fb, res);

  const Conjugator h(2, {BumpSpec{0.03, {0, 1}, 0.0}, BumpSpec{0.03, {1, 0}, 0.0}});
  const IntMatrix AB = A * B;
  const Eigen::MatrixXd ABr = AB.to_real();
  double worst = 0.0;
  GridFunction probe(2, 1, GridFunction::uniform_res(2, res));
  for (std::int64_t node = 0; node < probe.node_count(); ++node) {
    const Eigen::VectorXd m = probe.node_point(node);
    const Eigen::VectorXd truth = h.inverse(ABr * (m + h.eta(m))) - ABr * m;
    const Eigen::VectorXd got = fafb.delta().eval(m);
    worst = std::max(worst, (truth - got).lpNorm<Eigen::Infinity>());
  }
  // error comes from interpolating fa's displacement at fb-image points
  const double budget = 10.0 * interp_error_estimate(fa.delta()) + 1e-10;
  REQUIRE(worst <= budget);
}

TEST_CASE("word maps: empty word, single letter, telescoping inverse", "[torusmap]") {
  const OracleAction oracle = make_conjugated_sanov(0.05, 64);
  const ActionSpec& action = oracle.action;

  const TorusMap e = word_map(action, Word{});
  REQUIRE(e.matrix() == IntMatrix::identity(2));
  REQUIRE(e.delta().sup_norm() == 0.0);

  const Word a{Sym{0, false}};
  const TorusMap fa = word_map(action, a, 64);
  REQUIRE(fa.matrix() == action.generators[0].map.matrix());
  REQUIRE(sup_distance(fa.delta(), action.generators[0].map.delta()) == 0.0);

  // unreduced "a a^-1": the cocycle must telescope to the identity map
  const Word aa_inv{Sym{0, false}, Sym{0, true}};
  const TorusMap tele = word_map(action, aa_inv, 64);
  REQUIRE(tele.matrix() == IntMatrix::identity(2));
  const double budget = 10.0 * kInvertTol + interp_error_estimate(fa.delta());
  REQUIRE(tele.delta().sup_norm() <= budget);
}

TEST_CASE("word map lift agrees with iterated lifts at random points", "[torusmap]") {
  const OracleAction oracle = make_conjugated_sanov(0.04, 96);
  const ActionSpec& action = oracle.action;
  const std::vector<std::string> names{"a", "b"};
  const Word w = parse_word("a b", names);
  const TorusMap wm = word_map(action, w, 96);

  std::mt19937 rng(kSeed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double budget = 20.0 * (interp_error_estimate(wm.delta()) +
                                interp_error_estimate(action.generators[0].map.delta())) +
                        10.0 * kInvertTol;
  for (int trial = 0; trial < 40; ++trial) {
    const Eigen::VectorXd x = vec2(uni(rng), uni(rng));
    // iterated: apply b first, then a, tracking the lift
    const TorusMap& fa = action.generators[0].map;
    const TorusMap& fb = action.generators[1].map;
    const Eigen::VectorXd yb = fb.apply_lift(x);
    const Eigen::VectorXd truth = fa.matrix().to_real() * yb + fa.delta().eval(mod1(yb));
    const Eigen::VectorXd got = wm.apply_lift(x);
    REQUIRE((truth - got).lpNorm<Eigen::Infinity>() <= budget);
  }
}

TEST_CASE("point inversion: linear, one-dimensional contraction, round trip", "[torusmap]") {
  const IntMatrix A = parse_matrix("2,1;1,1");
  const TorusMap lin = TorusMap::linear(A);
  const Eigen::VectorXd y = vec2(0.3, 0.9);
  const Eigen::VectorXd x = invert_point(lin, y);
  REQUIRE(torus_dist(lin.apply(x), mod1(y)) <= kInvertTol);

  // 1-dimensional analogue: A = (1), delta = 0.1 sin, contraction factor 0.1 * 2pi < 1
  GridFunction d1 = GridFunction::sample(1, 1, {256}, [](const Eigen::VectorXd& t) {
    return Eigen::VectorXd::Constant(1, 0.1 * std::sin(2 * std::numbers::pi * t[0]));
  });
  const TorusMap circle(IntMatrix::identity(1), std::move(d1));
  REQUIRE(homeo_condition(circle).sufficient);
  Eigen::VectorXd target(1);
  target << 0.4321;
  const Eigen::VectorXd pre = invert_point(circle, target);
  REQUIRE(torus_dist(circle.apply(pre), target) <= kInvertTol);

  // round trip on a strongly perturbed generator (Newton regime)
  const OracleAction oracle = make_conjugated_sanov(0.05, 128);
  const TorusMap& fa = oracle.action.generators[0].map;
  for (double t : {0.05, 0.37, 0.62, 0.91}) {
    const Eigen::VectorXd target2 = vec2(t, 1.0 - t);
    const Eigen::VectorXd pre2 = invert_point(fa, target2);
    REQUIRE(torus_dist(fa.apply(pre2), target2) <= kInvertTol);
  }
}

TEST_CASE("homeomorphism condition report", "[torusmap]") {
  const TorusMap lin = TorusMap::linear(IntMatrix::identity(2));
  const HomeoCondition triv = homeo_condition(lin);
  REQUIRE(triv.lip_delta == 0.0);
  REQUIRE(triv.sufficient);

  // amplitude 0.05 sine: Lipschitz about 0.1 pi < 1 against the identity
  const TorusMap gentle(IntMatrix::identity(2), sine_delta(0.05, 256));
  const HomeoCondition ok = homeo_condition(gentle);
  REQUIRE(ok.inv_norm == 1.0);
  REQUIRE(ok.lip_delta == Catch::Approx(0.1 * std::numbers::pi).epsilon(0.05));
  REQUIRE(ok.sufficient);

  const TorusMap wild(IntMatrix::identity(2), sine_delta(10.0, 256));
  REQUIRE_FALSE(homeo_condition(wild).sufficient);
}

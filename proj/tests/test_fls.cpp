#include <doctest.h>

#include <random>

#include "deltailc/errors.hpp"
#include "deltailc/fls.hpp"

using namespace deltailc;

TEST_CASE("basis is a partition of unity with positive strengths") {
  const FLSConfig c = FLSConfig::defaults();
  c.validate();
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> th(-0.6, 0.6), w(-2.0, 2.0);
  for (int n = 0; n < 2000; ++n) {
    Vec x(6);
    x << th(rng), th(rng), th(rng), w(rng), w(rng), w(rng);
    const Vec phi = basis(c, x);
    CHECK(std::abs(phi.sum() - 1.0) < 1e-12);
    CHECK(phi.minCoeff() > 0.0);
  }
}

TEST_CASE("membership functions") {
  const FLSConfig c = FLSConfig::defaults();
  // Interior rules peak at their center with value 1.
  CHECK(c.membership(0, 3, -0.15) == 1.0);
  CHECK(c.membership(0, 3, -0.15 + c.psi) == doctest::Approx(std::exp(-1.0)));
  // Edge rules are sigmoids equal to one half at the center.
  CHECK(c.membership(2, 0, -0.15) == doctest::Approx(0.5));
  CHECK(c.membership(2, 8, 0.3) == doctest::Approx(0.5));
  CHECK(c.membership(2, 0, -10.0) > 0.99);
  CHECK(c.membership(2, 0, 10.0) < 0.01);
}

TEST_CASE("configuration errors") {
  FLSConfig c = FLSConfig::defaults();
  c.centers.pop_back();
  CHECK_THROWS_AS(c.validate(), Error);
  c = FLSConfig::defaults();
  c.psi = 0.0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = FLSConfig::defaults();
  CHECK_THROWS_AS(basis(c, Vec::Zero(5)), Error);
  Vec far = Vec::Constant(6, 1e3);
  try {
    basis(c, far);
    FAIL("expected DegenerateBasis");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DegenerateBasis);
  }
}

TEST_CASE("approximation and saturation") {
  const FLSConfig c = FLSConfig::defaults();
  FLSWeights w = FLSWeights::zeros(c.rules);
  w.vartheta.setConstant(2.0);
  w.eps = Vec3(0.1, 0.2, 0.3);
  // Constant weights reproduce the constant thanks to normalisation.
  const Vec3 y = approximate(w, c, Vec::Constant(6, 0.05));
  CHECK((y - Vec3(2.1, 2.2, 2.3)).norm() < 1e-12);

  w.vartheta(0, 0) = 80.0;
  w.vartheta(1, 1) = -70.0;
  const FLSWeights s = saturate(w);
  CHECK(s.vartheta(0, 0) == 50.0);
  CHECK(s.vartheta(1, 1) == -50.0);
  CHECK(s.vartheta(2, 2) == 2.0);
  CHECK_THROWS_AS(FLSWeights::zeros(9, 1.0, -1.0), Error);
}

TEST_CASE("projection inequality holds for in-bound weights") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> inside(-50.0, 50.0), raw(-200.0, 200.0), g(0.1, 30.0);
  for (int n = 0; n < 2000; ++n) {
    Vec v(9), r(9), gamma(9);
    for (int j = 0; j < 9; ++j) {
      v[j] = inside(rng);
      r[j] = raw(rng);
      gamma[j] = g(rng);
    }
    CHECK(saturation_inequality(v, r, gamma, -50.0, 50.0) <= 0.0);
  }
  // Inside the box the inequality is an equality at zero.
  const Vec a = Vec::Constant(9, 3.0);
  CHECK(saturation_inequality(a, a, Vec::Ones(9), -50.0, 50.0) == 0.0);
}

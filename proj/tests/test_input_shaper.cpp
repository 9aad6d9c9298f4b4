#include <doctest.h>

#include <random>

#include "deltailc/errors.hpp"
#include "deltailc/input_shaper.hpp"

using namespace deltailc;

TEST_CASE("amplitudes sum to one and times are evenly spaced") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> f(5.0, 40.0), z(0.0, 0.3), k(0.01, 1.0);
  for (int n = 0; n < 200; ++n) {
    const ShaperSpec s = make_shaper(f(rng), z(rng), k(rng));
    CHECK(std::abs(s.A[0] + s.A[1] + s.A[2] - 1.0) < 1e-12);
    CHECK(s.t[0] == 0.0);
    CHECK(s.t[2] == doctest::Approx(2 * s.t[1]).epsilon(1e-14));
    CHECK_FALSE(s.degenerate);
  }
}

TEST_CASE("full half period spacing is the ZVD shaper") {
  const double f = 20.0, zeta = 0.075;
  const ShaperSpec s = make_shaper(f, zeta, 1.0);
  const double K = std::exp(-zeta * kPi / std::sqrt(1 - zeta * zeta));
  const double d = (1 + K) * (1 + K);
  CHECK(s.A[0] == doctest::Approx(1 / d).epsilon(1e-12));
  CHECK(s.A[1] == doctest::Approx(2 * K / d).epsilon(1e-12));
  CHECK(s.A[2] == doctest::Approx(K * K / d).epsilon(1e-12));
  const double wd = 2 * kPi * f * std::sqrt(1 - zeta * zeta);
  CHECK(s.t[1] == doctest::Approx(kPi / wd).epsilon(1e-12));
}

TEST_CASE("residual vanishes at the design mode for every spacing") {
  for (double k : {0.1, 0.37, 0.5, 0.86, 1.0}) {
    const ShaperSpec s = make_shaper(17.2, 0.075, k);
    CHECK(residual_percentage(s, 2 * kPi * 17.2, 0.075) < 1e-12);
    CHECK(residual_percentage(s, 2 * kPi * 25.0, 0.075) > 0.0);
  }
  // ZVD is also flat at the design frequency.
  const ShaperSpec zvd = make_shaper(20.0, 0.05, 1.0);
  const double w = 2 * kPi * 20.0, h = 1e-3 * w;
  const double slope = (residual_percentage(zvd, w + h, 0.05) - residual_percentage(zvd, w - h, 0.05)) / (2 * h);
  CHECK(std::abs(slope) < 1e-4);
}

TEST_CASE("degenerate shaper is a unit impulse") {
  const ShaperSpec s = make_shaper(20.0, 0.075, 0.0);
  CHECK(s.degenerate);
  CHECK(s.A[0] == 1.0);
  CHECK(residual_percentage(s, 2 * kPi * 13.0, 0.075) == doctest::Approx(1.0));
  Mat x(3, 2);
  x << 1, 2, 3, 4, 5, 6;
  CHECK(shape_samples(s, x, 1e-3) == x);
}

TEST_CASE("invalid shaper arguments") {
  CHECK_THROWS_AS(make_shaper(0.0, 0.1, 0.5), Error);
  CHECK_THROWS_AS(make_shaper(20.0, 1.0, 0.5), Error);
  CHECK_THROWS_AS(make_shaper(20.0, 0.1, 1.5), Error);
  CHECK_THROWS_AS(residual_percentage(make_shaper(20, 0.1, 0.5), 0.0, 0.1), Error);
}

TEST_CASE("weightings") {
  const auto u = uniform_weighting(16.0, 24.0);
  CHECK(u.size() == 801);
  CHECK(u.back().f_hz == doctest::Approx(24.0));

  const std::vector<FrequencyWeight> raw{{16.004, 1.0}, {16.006, 2.0}, {15.0, 5.0}, {24.5, 5.0}, {18.0, 0.0}};
  const auto b = binned_weighting(raw, 16.0, 24.0);
  REQUIRE(b.size() == 801);
  CHECK(b[0].weight == 1.0);
  CHECK(b[1].weight == 2.0);
  double total = 0.0;
  for (const auto& w : b) total += w.weight;
  CHECK(total == 3.0);

  try {
    objective(20.0, 0.5, binned_weighting({}, 16.0, 24.0));
    FAIL("expected EmptyWeighting");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EmptyWeighting);
  }
}

TEST_CASE("objective combines the worst case and the weighted mean") {
  ObjectiveSettings s;
  const auto w = uniform_weighting(s.f_min, s.f_max);
  const ShaperObjective o = objective(20.0, 0.6, w, s);
  const ShaperSpec sh = make_shaper(20.0, s.zeta_design, 0.6);
  double worst = 0.0, mean = 0.0;
  for (const auto& fw : w) {
    const double v = residual_percentage(sh, 2 * kPi * fw.f_hz, s.zeta_design);
    worst = std::max(worst, v);
    mean += v / w.size();
  }
  CHECK(o.J1 == doctest::Approx(worst).epsilon(1e-12));
  CHECK(o.J2 == doctest::Approx(mean).epsilon(1e-12));
  CHECK(o.J == doctest::Approx(0.5 * worst + 0.5 * mean).epsilon(1e-12));
  CHECK(o.J2 <= o.J1);

  ObjectiveSettings bad = s;
  bad.w1 = 0.7;
  CHECK_THROWS_AS(objective(20.0, 0.6, w, bad), Error);
}

TEST_CASE("grid search matches brute force and is thread independent") {
  ObjectiveSettings s;
  s.f_min = 18.0;
  s.f_max = 19.0;
  s.grid = 0.05;
  SearchGrid g;
  g.k_min = 0.5;
  g.k_max = 1.0;
  g.step = 0.05;
  const auto w = uniform_weighting(s.f_min, s.f_max, s.grid);
  const ShaperDesign d = optimize_shaper(w, s, g, 1);
  CHECK(d.f_count == 21);
  CHECK(d.k_count == 11);
  CHECK(d.surface.size() == 231);

  double best = 1e300, bf = 0, bk = 0;
  for (int i = 0; i < d.f_count; ++i) {
    for (int j = 0; j < d.k_count; ++j) {
      const double f = s.f_min + i * g.step, k = g.k_min + j * g.step;
      const double J = objective(f, k, w, s).J;
      if (J < best) {
        best = J;
        bf = f;
        bk = k;
      }
    }
  }
  CHECK(d.best.J == best);
  CHECK(d.shaper.f_n == bf);
  CHECK(d.shaper.k_t == bk);

  const ShaperDesign p = optimize_shaper(w, s, g, 3);
  CHECK(p.best_index == d.best_index);
  CHECK(p.best.J == d.best.J);
}

TEST_CASE("shaping samples") {
  const ShaperSpec s = make_shaper(20.0, 0.075, 0.8);
  const double dt = 1e-3;
  const int n2 = static_cast<int>(std::llround(s.t[1] / dt));
  Mat step = Mat::Ones(50, 1);
  step(0, 0) = 0.0;
  const Mat out = shape_samples(s, step, dt);
  REQUIRE(out.rows() == 50 + 2 * n2);
  CHECK(out(out.rows() - 1, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(out(0, 0) == 0.0);
  // Before the second impulse only the first amplitude acts.
  CHECK(out(n2 - 1, 0) == doctest::Approx(s.A[0]));

  const ShaperSpec tight = make_shaper(200.0, 0.0, 0.1);
  CHECK_THROWS_AS(shape_samples(tight, step, dt), Error);
}

// Starting-point construction: amplitude candidates, noise seed, and the
// triple-carrying particle filter that seeds the growth-process parameters.
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "cyclewarp/cir.hpp"
#include "cyclewarp/init.hpp"
#include "cyclewarp/model.hpp"
#include "cyclewarp/preprocess.hpp"
#include "cyclewarp/rng.hpp"

using namespace cyclewarp;

namespace {

ModelParams reference_params() {
  ModelParams p;
  p.A = 0.6;
  p.B = 0.4;
  p.b = pi / 20.0;
  p.a = 0.05;
  p.beta = 0.07;
  p.omega2 = 0.064;
  p.sigma2 = 0.09;
  p.refresh_derived(1.0);
  return p;
}

}  // namespace

TEST_SUITE_BEGIN("init");

TEST_CASE("amplitude candidates invert the extrema relations exactly") {
  // For A = 0.6, B = 0.4 the signal maximum is A + B = 1.0 and the minimum
  // is -B - A^2/(8B) = -0.5125; inverting from those extrema must return the
  // generating pair among the candidates.
  const AmplitudeCandidates c = init_amplitudes(1.0, -0.5125);
  REQUIRE(c.size() == 3);
  // Larger-B root first.
  CHECK(c.A[0] == doctest::Approx(0.6).epsilon(1e-9));
  CHECK(c.B[0] == doctest::Approx(0.4).epsilon(1e-9));
  CHECK(c.A[1] == doctest::Approx(13.0 / 18.0).epsilon(1e-9));
  CHECK(c.B[1] == doctest::Approx(5.0 / 18.0).epsilon(1e-9));
  CHECK(c.A[2] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(c.B[2] == 0.0);
  for (std::size_t i = 0; i < c.size(); ++i) {
    CHECK(c.A[i] > c.B[i]);
    CHECK(c.A[i] + c.B[i] == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("pure-sine extrema discard the A <= B root") {
  // ymax = 1, ymin = -1: roots B in {1, 1/9}; the (A, B) = (0, 1) root fails
  // the A > B screen, leaving the (8/9, 1/9) root and the pure-first-harmonic
  // fallback.
  const AmplitudeCandidates c = init_amplitudes(1.0, -1.0);
  REQUIRE(c.size() == 2);
  CHECK(c.A[0] == doctest::Approx(8.0 / 9.0).epsilon(1e-12));
  CHECK(c.B[0] == doctest::Approx(1.0 / 9.0).epsilon(1e-12));
  CHECK(c.A[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(c.B[1] == 0.0);
}

TEST_CASE("negative discriminant leaves only the first-harmonic candidate") {
  // Shallow minimum: (ymax - 4 ymin)^2 - 9 ymax^2 < 0 for ymax=1, ymin=-0.1.
  const AmplitudeCandidates c = init_amplitudes(1.0, -0.1);
  REQUIRE(c.size() == 1);
  CHECK(c.A[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(c.B[0] == 0.0);
}

TEST_CASE("nonpositive smoothed maximum cannot seed amplitudes") {
  CHECK_THROWS_AS((void)init_amplitudes(-0.2, -0.5), std::invalid_argument);
  CHECK_THROWS_AS((void)init_amplitudes(0.0, -0.5), std::invalid_argument);
}

TEST_CASE("noise seed is the mean squared smoothing residual") {
  std::vector<double> y{0.3, -0.1, 0.8, 0.2, -0.5, 0.6, 0.1, -0.2, 0.4};
  const Signal s(y, 1.0);

  SUBCASE("residual-free record gives zero") {
    CHECK(init_sigma2(s, y) == 0.0);
  }
  SUBCASE("constant offset c gives c squared") {
    std::vector<double> sm = y;
    for (double& v : sm) v -= 0.35;
    CHECK(init_sigma2(s, sm) == doctest::Approx(0.35 * 0.35).epsilon(1e-12));
  }
  SUBCASE("the first sample is excluded from the average") {
    // The average runs over the n steps after the origin.
    std::vector<double> sm = y;
    sm[0] += 100.0;
    CHECK(init_sigma2(s, sm) == 0.0);
  }
}

TEST_CASE("noise seed lands near the generating variance on a worked example") {
  // Reference-parameter record, sigma^2 = 0.09: after smoothing at the
  // default span the residual variance estimate stays inside [0.06, 0.12]
  // (the smoother absorbs part of the noise).
  const ModelParams p = reference_params();
  const SimulatedSignal sim =
      simulate_signal(p, 500, 1.0, 16, 0.0, derive_key(777, {1, 1}));
  const std::vector<double> sm =
      loess_smooth(sim.signal.x, sim.signal.y, 0.02);
  const double s2 = init_sigma2(sim.signal, sm);
  CHECK(s2 > 0.06);
  CHECK(s2 < 0.12);
}

TEST_CASE("collapsed cycle box pins the starting rate") {
  const ModelParams p = reference_params();
  const SimulatedSignal sim =
      simulate_signal(p, 500, 1.0, 16, 0.0, derive_key(4242, {1}));
  InitConfig cfg;
  cfg.c_min = 4.0;
  cfg.c_max = 4.0 + 1e-6;
  cfg.n_particles = 64;
  const ProcessTriple t = init_process_params(sim.signal, 0.6, 0.4, pi, 0.09,
                                              cfg, derive_key(4242, {2}));
  // Box width is ~1.3e-11 around 2*pi*4/500.
  CHECK(t.a == doctest::Approx(two_pi * 4.0 / 500.0).epsilon(1e-6));
  CHECK(t.beta > 0.01);
  CHECK(t.beta < 0.5);
  CHECK(2.0 * t.a * t.beta > t.omega2);
}

TEST_CASE("degenerate ensemble returns the only possible triple") {
  const ModelParams p = reference_params();
  const SimulatedSignal sim =
      simulate_signal(p, 400, 1.0, 16, 0.0, derive_key(4243, {1}));
  InitConfig cfg;
  cfg.c_min = 4.0;
  cfg.c_max = 4.0 + 1e-9;
  cfg.beta_lo = 0.3;
  cfg.beta_hi = 0.3 + 1e-9;
  cfg.omega2_lo = 0.01;
  cfg.omega2_hi = 0.01 + 1e-9;
  cfg.n_particles = 128;
  const double a_pin = two_pi * 4.0 / 400.0;  // 0.0628..., 2*a*beta = 0.0377 > 0.01
  for (std::uint64_t k = 0; k < 3; ++k) {
    const ProcessTriple t = init_process_params(sim.signal, 0.6, 0.4, pi, 0.09,
                                                cfg, derive_key(4243, {2, k}));
    CHECK(t.a == doctest::Approx(a_pin).epsilon(1e-7));
    CHECK(t.beta == doctest::Approx(0.3).epsilon(1e-7));
    CHECK(t.omega2 == doctest::Approx(0.01).epsilon(1e-6));
  }
}

TEST_CASE("emitted triples respect the boxes and the positivity constraint") {
  const ModelParams p = reference_params();
  const SimulatedSignal sim =
      simulate_signal(p, 500, 1.0, 16, 0.0, derive_key(555, {1}));
  InitConfig cfg;
  cfg.c_min = 2.0;
  cfg.c_max = 6.0;
  cfg.n_particles = 256;
  const double a_lo = two_pi * 2.0 / 500.0;
  const double a_hi = two_pi * 6.0 / 500.0;
  for (std::uint64_t k = 0; k < 30; ++k) {
    const ProcessTriple t = init_process_params(sim.signal, 0.6, 0.4, pi, 0.09,
                                                cfg, derive_key(555, {2, k}));
    CHECK(t.a > a_lo);
    CHECK(t.a < a_hi);
    CHECK(t.beta > 0.01);
    CHECK(t.beta < 0.5);
    CHECK(t.omega2 > 0.01);
    CHECK(t.omega2 < 0.3);
    CHECK(2.0 * t.a * t.beta > t.omega2);
  }
}

TEST_CASE("starting rate tracks the generating rate on the worked example") {
  // Reference-parameter records with a narrow prior (2 to 6 cycles):
  // the selected starting rate lies within 50% of the generating a = 0.05
  // in at least 80% of 50 seeded repetitions.
  const ModelParams p = reference_params();
  int hits = 0;
  for (std::uint64_t r = 0; r < 50; ++r) {
    const SimulatedSignal sim =
        simulate_signal(p, 500, 1.0, 16, p.a, derive_key(777, {1, r}));
    InitConfig cfg;
    cfg.c_min = 2.0;
    cfg.c_max = 6.0;
    const InitResult init =
        initialize(sim.signal, cfg, derive_key(777, {2, r}));
    CHECK(init.theta0.a > two_pi * 2.0 / 500.0);
    CHECK(init.theta0.a < two_pi * 6.0 / 500.0);
    if (init.theta0.a > 0.025 && init.theta0.a < 0.075) ++hits;
  }
  CHECK(hits >= 40);
}

TEST_CASE("full initialization yields a valid starting point") {
  const ModelParams p = reference_params();
  const SimulatedSignal sim =
      simulate_signal(p, 500, 1.0, 16, 0.0, derive_key(31415, {1}));
  InitConfig cfg;  // default auto c_max
  cfg.n_particles = 512;
  const InitResult init = initialize(sim.signal, cfg, derive_key(31415, {2}));

  CHECK_NOTHROW(init.theta0.validate(1.0));
  CHECK(init.theta0.b == pi);
  CHECK(init.a0 == init.theta0.a);
  CHECK(init.theta0.A > init.theta0.B);
  CHECK(init.theta0.sigma2 > 0.0);
  REQUIRE(init.smoothed.size() == sim.signal.size());
  const double ymax = *std::max_element(init.smoothed.begin(), init.smoothed.end());
  CHECK(init.theta0.A + init.theta0.B == doctest::Approx(ymax).epsilon(1e-12));
  CHECK(init.theta0.rho == doctest::Approx(std::exp(-init.theta0.beta)).epsilon(1e-14));
}

TEST_CASE("initialization is deterministic in the key") {
  const ModelParams p = reference_params();
  const SimulatedSignal sim =
      simulate_signal(p, 300, 1.0, 16, 0.0, derive_key(999, {1}));
  InitConfig cfg;
  cfg.n_particles = 256;
  const InitResult i1 = initialize(sim.signal, cfg, derive_key(999, {2}));
  const InitResult i2 = initialize(sim.signal, cfg, derive_key(999, {2}));
  CHECK(i1.theta0.A == i2.theta0.A);
  CHECK(i1.theta0.B == i2.theta0.B);
  CHECK(i1.theta0.a == i2.theta0.a);
  CHECK(i1.theta0.beta == i2.theta0.beta);
  CHECK(i1.theta0.omega2 == i2.theta0.omega2);
  CHECK(i1.theta0.sigma2 == i2.theta0.sigma2);

  const InitResult i3 = initialize(sim.signal, cfg, derive_key(999, {3}));
  CHECK(i3.theta0.a != i1.theta0.a);  // different stream, different filter run
}

TEST_CASE("configuration validation and the automatic cycle bound") {
  SUBCASE("defaults pass with the auto sentinel") {
    InitConfig cfg;
    CHECK_NOTHROW(cfg.validate());
  }
  SUBCASE("auto bound grows with the record") {
    InitConfig cfg;
    CHECK(cfg.resolved(500).c_max == doctest::Approx(25.0));
    CHECK(cfg.resolved(80).c_max == doctest::Approx(6.0));   // floor at 6
    CHECK(cfg.resolved(120).c_max == doctest::Approx(6.0));  // max(6, 6) == 6
    CHECK(cfg.resolved(200).c_max == doctest::Approx(10.0));
  }
  SUBCASE("explicit bound is kept") {
    InitConfig cfg;
    cfg.c_max = 10.0;
    CHECK(cfg.resolved(500).c_max == doctest::Approx(10.0));
  }
  SUBCASE("bad bounds are rejected") {
    InitConfig cfg;
    cfg.c_min = 1.9;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.c_min = 5.0;
    cfg.c_max = 3.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  }
  SUBCASE("bad knobs are rejected") {
    InitConfig cfg;
    cfg.span = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.span = 0.02;
    cfg.n_particles = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.n_particles = 100;
    cfg.beta_lo = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  }
}

TEST_SUITE_END();

// Acceptance harness: one pass/fail line per shipped guarantee.
//
// Usage:  acceptance [N ...]
// With no arguments every criterion runs in order; otherwise only the listed
// ones run.  The exit status is the number of failed criteria.
//
// Each criterion prints "[PASS]" or "[FAIL]" plus a one-line summary with
// the measured quantities, and indented detail lines while it works so a
// long run can be monitored.  Criterion 1 is the expensive one (a full
// desk-scale recovery study); the environment variable CYCLEWARP_ACCEPT_C1
// can shrink its signal count for smoke runs — the shipped default is the
// full 40.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <string>
#include <vector>

#include <boost/math/distributions/non_central_chi_squared.hpp>

#include "cyclewarp/aggregate.hpp"
#include "cyclewarp/bootstrap.hpp"
#include "cyclewarp/cir.hpp"
#include "cyclewarp/init.hpp"
#include "cyclewarp/model.hpp"
#include "cyclewarp/rng.hpp"
#include "cyclewarp/saem.hpp"
#include "cyclewarp/smc.hpp"
#include "cyclewarp/threads.hpp"

using namespace cyclewarp;

namespace {

int g_threads = 1;

double elapsed_s(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

/// Reference parameter set used throughout the examples: a unit-amplitude
/// two-harmonic shape over a slowly mean-reverting rate.
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

// ---------------------------------------------------------------------------
// 1. Cycle recovery on the simulation protocol's parameter boxes.
// ---------------------------------------------------------------------------
bool criterion_1(std::string& summary) {
  const auto t0 = std::chrono::steady_clock::now();
  std::size_t count = 40;
  if (const char* env = std::getenv("CYCLEWARP_ACCEPT_C1")) {
    const unsigned long v = std::strtoul(env, nullptr, 10);
    if (v >= 1) count = v;
  }
  const std::size_t n = 400;
  const std::uint64_t master = 424242;
  SimBoxes boxes;  // cycle bound auto-resolves to max(6, 0.05 n) = 20

  std::size_t within1 = 0, within3 = 0, failed = 0;
  for (std::size_t k = 0; k < count; ++k) {
    const std::uint64_t key = derive_key(master, {1, k});
    Rng box_rng(key, stream::boxes, 0, 0);
    const ModelParams truth = draw_sim_params(boxes, n, 1.0, box_rng);
    const SimulatedSignal sim = simulate_signal(truth, n, 1.0, 100, 0.0, key);
    const double cyc_true = cycle_count(sim.path);

    InitConfig icfg;  // defaults: 1500 particles, adaptive cycle bounds
    icfg.threads = g_threads;
    SAEMConfig scfg;  // defaults: 1500 particles, grid 20, cap 400
    scfg.threads = g_threads;
    double err = std::numeric_limits<double>::quiet_NaN();
    try {
      const InitResult ir = initialize(sim.signal, icfg, derive_key(key, {2}));
      const FitResult fr =
          fit(sim.signal, ir.theta0, ir.a0, scfg, derive_key(key, {3}));
      err = fr.cycles - cyc_true;
      if (std::abs(err) <= 1.0) ++within1;
      if (std::abs(err) <= 3.0) ++within3;
      std::printf("  signal %2zu/%zu: true %6.2f, est %6.2f, err %+5.2f, "
                  "%3zu iters, %7.1fs elapsed\n",
                  k + 1, count, cyc_true, fr.cycles, err, fr.iterations,
                  elapsed_s(t0));
    } catch (const std::exception& e) {
      ++failed;
      std::printf("  signal %2zu/%zu: true %6.2f, fit failed: %s\n", k + 1,
                  count, cyc_true, e.what());
    }
    std::fflush(stdout);
  }
  const double r1 = static_cast<double>(within1) / static_cast<double>(count);
  const double r3 = static_cast<double>(within3) / static_cast<double>(count);
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "cycle recovery on %zu protocol signals (n=400): %.0f%% within "
                "1 cycle (need >=80%%), %.0f%% within 3 (need >=95%%), "
                "%zu hard failures, %.0f s at %d thread(s)",
                count, 100.0 * r1, 100.0 * r3, failed, elapsed_s(t0),
                g_threads);
  summary = buf;
  return r1 >= 0.80 && r3 >= 0.95;
}

// ---------------------------------------------------------------------------
// 2. One-step transition law: Monte Carlo moments and KS distance.
// ---------------------------------------------------------------------------
bool criterion_2(std::string& summary) {
  struct Case {
    double a, beta, omega2, delta, xi;
    bool ks;  // run the distribution check (skipped for the huge-
              // noncentrality case, which only pins the moments)
  };
  const Case cases[] = {
      {0.05, 0.07, 0.064, 1.0, 0.05, true},   // reference, below 2 dof
      {0.05, 0.2, 0.01, 1.0, 0.05, true},     // mean-reverting, 4 dof
      {1.0, 1.0, 0.1, 0.5, 1.2, true},        // moderate noncentrality
      {1.0, 0.05, 0.001, 0.1, 1.2, false},    // huge noncentrality branch
  };
  bool ok = true;
  double worst_z = 0.0, worst_ks = 0.0;
  std::uint64_t case_idx = 0;
  for (const Case& cs : cases) {
    const TransitionLaw law(cs.a, cs.beta, cs.omega2, cs.delta);
    const double lambda = law.noncentrality(cs.xi);
    const double mean = law.mean(cs.xi);
    const double var = law.variance(cs.xi);
    // Central fourth moment of the scaled noncentral chi-square.
    const double scale4 = std::pow(2.0 * law.c, 4.0);
    const double mu4 =
        (12.0 * (law.nu + 2.0 * lambda) * (law.nu + 2.0 * lambda) +
         48.0 * (law.nu + 4.0 * lambda)) /
        scale4;

    const std::size_t n_mom = 1000000;
    const std::uint64_t key = derive_key(777, {case_idx++});
    Rng rng(key, stream::propagate, 0, 0);
    double sum = 0.0, sumsq = 0.0;
    for (std::size_t i = 0; i < n_mom; ++i) {
      const double v = transition_sample(law, cs.xi, rng);
      sum += v;
      sumsq += v * v;
    }
    const double m_hat = sum / n_mom;
    const double v_hat = sumsq / n_mom - m_hat * m_hat;
    const double se_mean = std::sqrt(var / n_mom);
    const double se_var = std::sqrt((mu4 - var * var) / n_mom);
    const double z_mean = std::abs(m_hat - mean) / se_mean;
    const double z_var = std::abs(v_hat - var) / se_var;
    worst_z = std::max({worst_z, z_mean, z_var});
    const bool mom_ok = z_mean <= 3.0 && z_var <= 3.0;

    bool ks_ok = true;
    double ks = 0.0;
    if (cs.ks) {
      const std::size_t n_ks = 100000;
      std::vector<double> draws(n_ks);
      Rng rng2(derive_key(key, {99}), stream::propagate, 0, 0);
      for (double& d : draws) d = transition_sample(law, cs.xi, rng2);
      std::sort(draws.begin(), draws.end());
      const boost::math::non_central_chi_squared dist(law.nu, lambda);
      for (std::size_t i = 0; i < n_ks; ++i) {
        const double F = boost::math::cdf(dist, draws[i] * 2.0 * law.c);
        ks = std::max(ks, std::abs(F - (i + 1.0) / n_ks));
        ks = std::max(ks, std::abs(F - static_cast<double>(i) / n_ks));
      }
      worst_ks = std::max(worst_ks, ks);
      ks_ok = ks < 0.01;
    }
    if (cs.ks)
      std::printf("  a=%.3g beta=%.3g omega2=%.3g delta=%.2g: |z_mean|=%.2f "
                  "|z_var|=%.2f KS=%.4f\n",
                  cs.a, cs.beta, cs.omega2, cs.delta, z_mean, z_var, ks);
    else
      std::printf("  a=%.3g beta=%.3g omega2=%.3g delta=%.2g: |z_mean|=%.2f "
                  "|z_var|=%.2f (moments only)\n",
                  cs.a, cs.beta, cs.omega2, cs.delta, z_mean, z_var);
    ok = ok && mom_ok && ks_ok;
  }
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "transition sampler: worst moment |z| = %.2f of 3 allowed at "
                "1e6 draws, worst KS = %.4f of 0.01 allowed at 1e5 draws "
                "(4 parameter sets)",
                worst_z, worst_ks);
  summary = buf;
  return ok;
}

// ---------------------------------------------------------------------------
// 3. Ergodic moments of long simulated trajectories.
// ---------------------------------------------------------------------------
bool criterion_3(std::string& summary) {
  struct Case {
    double a, beta, omega2;
  };
  const Case cases[] = {
      {1.0, 1.0, 0.5}, {0.5, 2.0, 0.3}, {2.0, 0.8, 1.0},
      {1.0, 3.0, 0.2}, {0.7, 1.5, 0.4},
  };
  bool ok = true;
  double worst_mean = 0.0, worst_var = 0.0;
  std::uint64_t k = 0;
  for (const Case& cs : cases) {
    ModelParams p;
    p.A = 0.6;
    p.B = 0.4;
    p.b = 0.0;
    p.a = cs.a;
    p.beta = cs.beta;
    p.omega2 = cs.omega2;
    p.sigma2 = 0.01;
    const double delta = 0.01;
    p.refresh_derived(delta);
    const std::size_t n = 1000000;
    const GrowthPath path =
        simulate_path(p, n, delta, 1, cs.a, derive_key(31415, {k++}));
    double sum = 0.0, sumsq = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
      sum += path.xi[i];
      sumsq += path.xi[i] * path.xi[i];
    }
    const double m_hat = sum / n;
    const double v_hat = sumsq / n - m_hat * m_hat;
    const double v_true = cs.a * cs.omega2 / (2.0 * cs.beta);
    const double e_mean = std::abs(m_hat / cs.a - 1.0);
    const double e_var = std::abs(v_hat / v_true - 1.0);
    worst_mean = std::max(worst_mean, e_mean);
    worst_var = std::max(worst_var, e_var);
    std::printf("  a=%.2g beta=%.2g omega2=%.2g: mean err %.2f%%, var err "
                "%.2f%%\n",
                cs.a, cs.beta, cs.omega2, 100.0 * e_mean, 100.0 * e_var);
    ok = ok && e_mean < 0.02 && e_var < 0.05;
  }
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "ergodic moments over 1e6 fine steps: worst mean error %.2f%% "
                "of 2%% allowed, worst variance error %.2f%% of 5%% allowed "
                "(5 parameter sets)",
                100.0 * worst_mean, 100.0 * worst_var);
  summary = buf;
  return ok;
}

// ---------------------------------------------------------------------------
// 4. Estimating-equation statistics recover the transition parameters.
// ---------------------------------------------------------------------------
bool criterion_4(std::string& summary) {
  struct Case {
    double a, beta, omega2, delta;
  };
  const Case cases[] = {
      {0.05, 0.2, 0.01, 1.0}, {1.0, 1.0, 0.5, 0.1}, {0.5, 0.8, 0.2, 0.5},
  };
  bool ok = true;
  double w1 = 0.0, w2 = 0.0, w3 = 0.0;
  std::uint64_t c = 0;
  for (const Case& cs : cases) {
    const std::size_t n = 100000;
    const TransitionLaw law(cs.a, cs.beta, cs.omega2, cs.delta);
    GrowthPath path;
    path.delta = cs.delta;
    path.xi.resize(n + 1);
    path.xi[0] = cs.a;
    Rng rng(derive_key(271828, {c++}), stream::propagate, 0, 0);
    for (std::size_t i = 1; i <= n; ++i)
      path.xi[i] = transition_sample(law, path.xi[i - 1], rng);
    path.g = accumulate_growth(path.xi, cs.delta);

    Signal s;
    s.delta = cs.delta;
    s.x.resize(n + 1);
    s.y.assign(n + 1, 0.0);
    for (std::size_t i = 0; i <= n; ++i) s.x[i] = cs.delta * i;

    const MartingaleStats st = statistics(s, path, 0.6, 0.4, 0.0);
    const double rho = std::exp(-cs.beta * cs.delta);
    const double e1 = std::abs(st.s1 / rho - 1.0);
    const double e2 = std::abs(st.s2 / cs.a - 1.0);
    const double e3 = std::abs(st.s3 / cs.omega2 - 1.0);
    w1 = std::max(w1, e1);
    w2 = std::max(w2, e2);
    w3 = std::max(w3, e3);
    std::printf("  a=%.2g beta=%.2g omega2=%.2g delta=%.2g: err rho %.2f%%, "
                "a %.2f%%, omega2 %.2f%%\n",
                cs.a, cs.beta, cs.omega2, cs.delta, 100.0 * e1, 100.0 * e2,
                100.0 * e3);
    ok = ok && st.s1_valid && st.s2_valid && st.s3_valid && e1 < 0.10 &&
         e2 < 0.05 && e3 < 0.15;
  }
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "statistics on 1e5-step exact trajectories: worst errors "
                "%.1f%%/%.1f%%/%.1f%% of 10%%/5%%/15%% allowed (3 parameter "
                "sets)",
                100.0 * w1, 100.0 * w2, 100.0 * w3);
  summary = buf;
  return ok;
}

// ---------------------------------------------------------------------------
// 5. Closed-form amplitude inversion from smoothed extrema.
// ---------------------------------------------------------------------------
bool criterion_5(std::string& summary) {
  const AmplitudeCandidates c = init_amplitudes(1.0, -0.5125);
  double best = 1e300;
  for (std::size_t i = 0; i < c.size(); ++i)
    best = std::min(best, std::max(std::abs(c.A[i] - 0.6),
                                   std::abs(c.B[i] - 0.4)));
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "amplitude inversion of extrema (1, -0.5125): root (0.6, 0.4) "
                "reproduced to %.2e (1e-9 allowed)",
                best);
  summary = buf;
  return best < 1e-9;
}

// ---------------------------------------------------------------------------
// 6. Constrained amplitude regression: exactness and clamps.
// ---------------------------------------------------------------------------
bool criterion_6(std::string& summary) {
  const std::size_t n = 200;
  GrowthPath path;
  path.delta = 1.0;
  path.xi.assign(n + 1, 0.21);
  path.g.resize(n + 1);
  for (std::size_t i = 0; i <= n; ++i) path.g[i] = 0.21 * i;
  const double b = 0.3;

  const auto make_signal = [&](double A_true) {
    Signal s;
    s.delta = 1.0;
    s.x.resize(n + 1);
    s.y.resize(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
      s.x[i] = static_cast<double>(i);
      const double u = path.g[i] + b;
      s.y[i] = A_true * std::sin(u) - (1.0 - A_true) * std::cos(2.0 * u);
    }
    return s;
  };

  const double rec = update_A(make_signal(0.8), path, b);
  const double lo = update_A(make_signal(0.2), path, b);   // below the floor
  const double hi = update_A(make_signal(1.3), path, b);   // above the cap
  const double floor_edge = update_A(make_signal(0.5), path, b);
  const double cap_edge = update_A(make_signal(1.0), path, b);
  const bool ok = std::abs(rec - 0.8) < 1e-10 && lo == 0.5 && hi == 1.0 &&
                  std::abs(floor_edge - 0.5) < 1e-10 &&
                  std::abs(cap_edge - 1.0) < 1e-10;
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "amplitude regression: noise-free recovery error %.2e (1e-10 "
                "allowed); clamps engage at both ends (0.2 -> %.2f, 1.3 -> "
                "%.2f)",
                std::abs(rec - 0.8), lo, hi);
  summary = buf;
  return ok;
}

// ---------------------------------------------------------------------------
// 7. Filter invariants: normalization, positivity, ESS range, determinism.
// ---------------------------------------------------------------------------
bool criterion_7(std::string& summary) {
  const ModelParams p = reference_params();
  const SimulatedSignal sim =
      simulate_signal(p, 500, 1.0, 100, 0.0, derive_key(555, {1}));
  const std::size_t np = 600;

  SmcOptions o1;
  o1.n_particles = np;
  o1.threads = 1;
  const ParticleEnsemble e1 = smc_filter(sim.signal, p, o1, 999);

  double wsum = 0.0;
  for (double w : e1.weights) wsum += w;
  const double norm_err = std::abs(wsum - 1.0);

  bool positive = true;
  for (double v : e1.xi) positive = positive && v > 0.0;

  bool ess_ok = e1.ess.size() == sim.signal.n_steps();
  double ess_lo = 1e300, ess_hi = 0.0;
  for (double v : e1.ess) {
    ess_lo = std::min(ess_lo, v);
    ess_hi = std::max(ess_hi, v);
    ess_ok = ess_ok && v >= 1.0 - 1e-9 && v <= np + 1e-9;
  }

  SmcOptions o4 = o1;
  o4.threads = 4;
  const ParticleEnsemble e4 = smc_filter(sim.signal, p, o4, 999);
  const bool det_filter = e1.xi == e4.xi && e1.weights == e4.weights &&
                          e1.ancestry == e4.ancestry && e1.ess == e4.ess;

  const GridResult g1 = smc_plus(sim.signal, p, 1, 50, 8, o1, 1234);
  const GridResult g4 = smc_plus(sim.signal, p, 1, 50, 8, o4, 1234);
  const bool det_grid = g1.b_star == g4.b_star && g1.index == g4.index &&
                        g1.path.xi == g4.path.xi && g1.loglik == g4.loglik;

  std::printf("  normalization |sum w - 1| = %.2e, min xi > 0: %s, ESS in "
              "[%.1f, %.1f] of [1, %zu], 1 vs 4 threads identical: %s/%s\n",
              norm_err, positive ? "yes" : "NO", ess_lo, ess_hi, np,
              det_filter ? "filter yes" : "filter NO",
              det_grid ? "grid yes" : "grid NO");
  const bool ok = norm_err < 1e-12 && positive && ess_ok && det_filter &&
                  det_grid;
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "filter invariants: weight normalization %.1e (1e-12 "
                "allowed), all rates positive, ESS within [1, %zu], thread "
                "count does not change results",
                norm_err, np);
  summary = buf;
  return ok;
}

// ---------------------------------------------------------------------------
// 8. Segment aggregation end to end, with calendar dating.
// ---------------------------------------------------------------------------
bool criterion_8(std::string& summary) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t n_seg = 12, n = 150;
  const double delta = 1.0;
  const std::uint64_t master = 808080;

  ModelParams p;
  p.A = 0.65;
  p.B = 0.35;
  p.a = two_pi * 4.5 / (n * delta);  // about 4.5 cycles per segment
  p.beta = 0.8;
  p.omega2 = 0.01;
  p.sigma2 = 0.04;
  p.refresh_derived(delta);

  std::vector<SegmentFit> segs;
  double total_true = 0.0;
  for (std::size_t j = 0; j < n_seg; ++j) {
    const std::uint64_t key = derive_key(master, {j});
    ModelParams pj = p;
    Rng rng(key, stream::boxes, 0, 0);
    pj.b = rng.uniform(0.0, two_pi);
    pj.refresh_derived(delta);
    const SimulatedSignal sim = simulate_signal(pj, n, delta, 100, 0.0, key);
    total_true += cycle_count(sim.path);

    InitConfig icfg;
    icfg.n_particles = 800;
    icfg.threads = g_threads;
    SAEMConfig scfg;
    scfg.n_particles = 700;
    scfg.grid_size = 12;
    scfg.max_iter = 250;
    scfg.threads = g_threads;
    const InitResult ir = initialize(sim.signal, icfg, derive_key(key, {2}));
    const FitResult fr =
        fit(sim.signal, ir.theta0, ir.a0, scfg, derive_key(key, {3}));
    std::printf("  segment %2zu: true %5.2f, est %5.2f cycles, %3zu iters, "
                "%6.1fs elapsed\n",
                j, cycle_count(sim.path), fr.cycles, fr.iterations,
                elapsed_s(t0));
    std::fflush(stdout);
    segs.push_back({static_cast<std::int64_t>(j), sim.signal, fr});
  }

  AggregateResult agg = aggregate(segs);
  date_observations(agg, 2010.0);
  const double err = agg.total_cycles - total_true;
  const double last_year = agg.rows.back().year;
  const double first_year = agg.rows.front().year;
  const double first_expect = 2010.0 - agg.total_cycles;
  std::printf("  total true %.2f, est %.2f (err %+.2f); last year %.6f, "
              "first year %.2f vs %.2f\n",
              total_true, agg.total_cycles, err, last_year, first_year,
              first_expect);
  const bool ok = std::abs(err) <= 2.0 && last_year == 2010.0 &&
                  std::abs(first_year - first_expect) <= 0.2;
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "12-segment aggregation: total %.1f vs true %.1f cycles "
                "(|err| %.2f of 2 allowed), final year == 2010 %s, first year "
                "%.1f, %.0f s",
                agg.total_cycles, total_true, std::abs(err),
                last_year == 2010.0 ? "exactly" : "VIOLATED", first_year,
                elapsed_s(t0));
  summary = buf;
  return ok;
}

// ---------------------------------------------------------------------------
// 9. Residual bootstrap around the reference-parameter signal.
// ---------------------------------------------------------------------------
bool criterion_9(std::string& summary) {
  const auto t0 = std::chrono::steady_clock::now();
  const ModelParams p = reference_params();
  // Fixed draw chosen to be a typical realization of the reference
  // parameters (a few cycles over the record, as in the worked example).
  const std::uint64_t sim_key = derive_key(909090, {4});
  const SimulatedSignal sim = simulate_signal(p, 500, 1.0, 100, 0.0, sim_key);
  std::printf("  realized cycles %.2f\n", cycle_count(sim.path));

  InitConfig icfg;
  icfg.n_particles = 800;
  icfg.threads = g_threads;
  SAEMConfig scfg;
  scfg.n_particles = 400;
  scfg.grid_size = 8;
  scfg.max_iter = 100;
  scfg.m0 = 25;
  scfg.threads = g_threads;

  const InitResult ir = initialize(sim.signal, icfg, derive_key(909090, {2}));
  const FitResult fr =
      fit(sim.signal, ir.theta0, ir.a0, scfg, derive_key(909090, {3}));
  std::printf("  base fit: %.2f cycles, %zu iters, %.1fs\n", fr.cycles,
              fr.iterations, elapsed_s(t0));
  std::fflush(stdout);

  BootstrapConfig bcfg;
  bcfg.replicates = 50;
  bcfg.warm_start = true;
  bcfg.ci_level = 0.95;
  bcfg.init = icfg;
  bcfg.saem = scfg;
  const std::uint64_t bkey = derive_key(909090, {5});
  const BootstrapResult br = residual_bootstrap(sim.signal, fr, bcfg, bkey);
  const ConfidenceInterval ci = percentile_ci(collect_cycles(br), 0.95);
  std::printf("  bootstrap: %zu estimates, %zu failures, CI [%.2f, %.2f] "
              "around %.2f, %.0fs\n",
              br.estimates.size(), br.failures.size(), ci.lo, ci.hi,
              fr.cycles, elapsed_s(t0));
  std::fflush(stdout);

  // Determinism: same key, small replicate count, bitwise-equal estimates.
  BootstrapConfig small = bcfg;
  small.replicates = 4;
  const BootstrapResult ra = residual_bootstrap(sim.signal, fr, small, bkey);
  const BootstrapResult rb = residual_bootstrap(sim.signal, fr, small, bkey);
  bool det = ra.estimates.size() == rb.estimates.size();
  for (std::size_t i = 0; det && i < ra.estimates.size(); ++i) {
    det = ra.estimates[i].cycles == rb.estimates[i].cycles &&
          ra.estimates[i].theta.A == rb.estimates[i].theta.A &&
          ra.estimates[i].theta.a == rb.estimates[i].theta.a &&
          ra.estimates[i].theta.sigma2 == rb.estimates[i].theta.sigma2;
  }

  const bool contains = ci.lo <= fr.cycles && fr.cycles <= ci.hi;
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "bootstrap around the reference signal: 95%% interval "
                "[%.2f, %.2f] %s the point estimate %.2f; %zu/50 replicates; "
                "reruns bitwise identical: %s; %.0f s",
                ci.lo, ci.hi, contains ? "contains" : "MISSES", fr.cycles,
                br.estimates.size(), det ? "yes" : "NO", elapsed_s(t0));
  summary = buf;
  return contains && det && br.estimates.size() == 50;
}

// ---------------------------------------------------------------------------
// 10. Step-size and search-window schedules, exact values.
// ---------------------------------------------------------------------------
bool criterion_10(std::string& summary) {
  // Exact equality against the formula as written; the power-of-two
  // identities (32^-0.8 = 2^-4, 1024^-0.8 = 2^-8) hold to one rounding of
  // the -0.8 exponent, so they are checked at 1e-15 relative.
  const auto near = [](double x, double y) {
    return std::abs(x - y) <= 1e-15 * std::abs(y);
  };
  bool ok = true;
  for (const std::size_t m0 : {std::size_t{50}, std::size_t{3}}) {
    ok = ok && sa_alpha(1, m0) == 1.0;
    ok = ok && sa_alpha(m0, m0) == 1.0;
    ok = ok && sa_alpha(m0 + 1, m0) == 1.0;  // 1^{-0.8}
    ok = ok && sa_alpha(m0 + 32, m0) == std::pow(32.0, -0.8);
    ok = ok && near(sa_alpha(m0 + 32, m0), 0.0625);
    ok = ok && sa_alpha(m0 + 1024, m0) == std::pow(1024.0, -0.8);
    ok = ok && near(sa_alpha(m0 + 1024, m0), std::pow(2.0, -8.0));
    ok = ok && phase_window(1, m0) == pi;
    ok = ok && phase_window(m0, m0) == pi;
    ok = ok && phase_window(m0 + 1, m0) == pi;
    ok = ok && phase_window(m0 + 32, m0) == pi * std::pow(32.0, -0.8);
    ok = ok && near(phase_window(m0 + 32, m0), pi * 0.0625);
    ok = ok && phase_window(m0 + 1024, m0) == pi * std::pow(1024.0, -0.8);
    ok = ok && near(phase_window(m0 + 1024, m0), pi / 256.0);
  }
  summary = "schedules: step size 1 through the burn-in then (m-m0)^-0.8, "
            "window pi then pi (m-m0)^-0.8; formula reproduced exactly and "
            "power-of-two identities to 1e-15 at m in {1, m0, m0+1, m0+32, "
            "m0+1024} for two m0 values";
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  g_threads = effective_threads(0);
  std::vector<int> which;
  for (int i = 1; i < argc; ++i) {
    const int v = std::atoi(argv[i]);
    if (v >= 1 && v <= 10) which.push_back(v);
  }
  if (which.empty()) which = {2, 3, 4, 5, 6, 7, 10, 9, 8, 1};  // cheap first

  using Fn = bool (*)(std::string&);
  const Fn fns[10] = {criterion_1, criterion_2, criterion_3, criterion_4,
                      criterion_5, criterion_6, criterion_7, criterion_8,
                      criterion_9, criterion_10};
  int failures = 0;
  for (const int k : which) {
    std::string summary;
    bool ok = false;
    try {
      ok = fns[k - 1](summary);
    } catch (const std::exception& e) {
      summary = std::string("unexpected error: ") + e.what();
    }
    std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", k,
                summary.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  return failures;
}

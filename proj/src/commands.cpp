#include "cyclewarp/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cyclewarp/aggregate.hpp"
#include "cyclewarp/bootstrap.hpp"
#include "cyclewarp/cir.hpp"
#include "cyclewarp/init.hpp"
#include "cyclewarp/io.hpp"
#include "cyclewarp/preprocess.hpp"
#include "cyclewarp/rng.hpp"
#include "cyclewarp/saem.hpp"
#include "cyclewarp/smc.hpp"
#include "cyclewarp/threads.hpp"

namespace cyclewarp {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

/// Key-derivation tags for the pipeline stages of one run.
namespace stage {
enum : std::uint64_t {
  simulate = 1,
  init = 2,
  fit = 3,
  bootstrap = 4,
  seg_fit = 5,
  seg_boot = 6,
  combo = 7,
  bench = 8,
};
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
  return (fs::path(cfg.out) / name).string();
}

void ensure_outdir(const RunConfig& cfg) {
  std::error_code ec;
  fs::create_directories(cfg.out, ec);
  if (ec)
    throw std::invalid_argument("cannot create output directory '" + cfg.out +
                                "': " + ec.message());
}

/// Copy the configuration with thread counts resolved for every stage.
RunConfig resolve_threads(const RunConfig& cfg) {
  RunConfig c = cfg;
  const int t = effective_threads(cfg.threads);
  c.threads = t;
  c.init.threads = t;
  c.saem.threads = t;
  c.bootstrap.init.threads = t;
  c.bootstrap.saem.threads = t;
  return c;
}

json theta_json(const ModelParams& p) {
  return json{{"A", p.A},         {"B", p.B},           {"b", p.b},
              {"a", p.a},         {"beta", p.beta},     {"rho", p.rho},
              {"omega2", p.omega2}, {"sigma2", p.sigma2}, {"gamma2", p.gamma2}};
}

json ci_json(const ConfidenceInterval& ci) {
  return json{{"lo", ci.lo}, {"hi", ci.hi}, {"level", ci.level}};
}

Signal read_input_signal(const RunConfig& cfg, const char* cmd) {
  if (cfg.input.empty())
    throw std::invalid_argument(std::string(cmd) + ": an input CSV is required "
                                                   "(config key 'input' or --input)");
  return read_signal_csv(cfg.input);
}

/// True when the file's header row names a segment column, i.e. the input
/// is a multi-record file rather than a single x,y series.
bool input_is_segmented(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open input file '" + path + "'");
  std::string header;
  std::getline(in, header);
  if (!header.empty() && header.back() == '\r') header.pop_back();
  return header.rfind("segment,", 0) == 0;
}

struct Pipeline {
  Signal work;
  InitResult ir;
  FitResult fr;
};

/// Preprocess, initialize and fit one record with stage-derived keys.
Pipeline run_pipeline(const Signal& raw, const RunConfig& cfg, std::uint64_t key) {
  Pipeline p;
  p.work = cfg.normalize ? normalize_amplitude(raw, cfg.window_fraction) : raw;
  p.ir = initialize(p.work, cfg.init, derive_key(key, {stage::init}));
  p.fr = fit(p.work, p.ir.theta0, p.ir.a0, cfg.saem, derive_key(key, {stage::fit}));
  return p;
}

json fit_report(const RunConfig& cfg, const Pipeline& p) {
  json rep;
  rep["seed"] = cfg.seed;
  rep["threads"] = cfg.threads;
  rep["input"] = cfg.input;
  rep["preprocess"] = {{"normalized", p.work.preproc.normalized},
                       {"ybar", p.work.preproc.ybar},
                       {"window", p.work.preproc.window}};
  rep["init"] = {{"theta0", theta_json(p.ir.theta0)}, {"a0", p.ir.a0}};
  rep["estimate"] = theta_json(p.fr.theta);
  rep["cycles"] = p.fr.cycles;
  rep["converged"] = p.fr.converged;
  rep["iterations"] = p.fr.iterations;
  return rep;
}

void write_fit_outputs(const RunConfig& cfg, const Pipeline& p) {
  write_fitted_csv(out_path(cfg, "fitted.csv"), p.work, p.fr);
  write_trace_csv(out_path(cfg, "trace.csv"), p.fr.trace);
  write_path_csv(out_path(cfg, "path.csv"), p.fr.path);
  write_diagnostics_csv(out_path(cfg, "diagnostics.csv"), diagnostics(p.work, p.fr));
}

/// Interval for the phase: replicates are compared to the base phase by
/// signed arc, and the interval is reported around the base value (its
/// endpoints may leave [0, 2 pi) when the distribution straddles the wrap).
ConfidenceInterval phase_ci(const BootstrapResult& r, double b_base, double level) {
  std::vector<double> dev;
  dev.reserve(r.estimates.size());
  for (const auto& e : r.estimates)
    dev.push_back(std::remainder(e.theta.b - b_base, two_pi));
  ConfidenceInterval ci = percentile_ci(std::move(dev), level);
  ci.lo += b_base;
  ci.hi += b_base;
  return ci;
}

ConfidenceInterval field_ci(const BootstrapResult& r, double level,
                            double ModelParams::*field) {
  std::vector<double> v;
  v.reserve(r.estimates.size());
  for (const auto& e : r.estimates) v.push_back(e.theta.*field);
  return percentile_ci(std::move(v), level);
}

}  // namespace

int cmd_simulate(const RunConfig& cfg_in) {
  const RunConfig cfg = resolve_threads(cfg_in);
  const SimulateSection& sim = cfg.simulate;
  if (sim.n == 0) throw std::invalid_argument("simulate: n must be positive");
  if (!(sim.delta > 0.0))
    throw std::invalid_argument("simulate: delta must be positive");
  if (sim.substeps == 0)
    throw std::invalid_argument("simulate: substeps must be positive");
  if (sim.count == 0) throw std::invalid_argument("simulate: count must be positive");
  if (sim.xi0 < 0.0) throw std::invalid_argument("simulate: xi0 must be nonnegative");
  ensure_outdir(cfg);

  json signals = json::array();
  for (std::size_t k = 0; k < sim.count; ++k) {
    const std::uint64_t key = derive_key(cfg.seed, {stage::simulate, k});
    ModelParams params;
    if (sim.has_params) {
      params = sim.params;
      params.b = wrap_phase(params.b);
      params.refresh_derived(sim.delta);
      params.validate(sim.delta);
    } else {
      Rng rng(key, stream::boxes, 0, 0);
      params = draw_sim_params(sim.boxes, sim.n, sim.delta, rng);
    }
    const SimulatedSignal s =
        simulate_signal(params, sim.n, sim.delta, sim.substeps, sim.xi0, key);
    const std::string sig_name = "signal_" + std::to_string(k) + ".csv";
    const std::string path_name = "path_" + std::to_string(k) + ".csv";
    write_signal_csv(out_path(cfg, sig_name), s.signal);
    write_path_csv(out_path(cfg, path_name), s.path);
    signals.push_back({{"index", k},
                       {"params", theta_json(s.params)},
                       {"cycles", cycle_count(s.path)},
                       {"signal_file", sig_name},
                       {"path_file", path_name}});
  }

  json rep;
  rep["seed"] = cfg.seed;
  rep["count"] = sim.count;
  rep["n"] = sim.n;
  rep["delta"] = sim.delta;
  rep["substeps"] = sim.substeps;
  rep["xi0"] = sim.xi0;
  rep["signals"] = signals;
  write_text_file(out_path(cfg, "simulation.json"), rep.dump(2) + "\n");
  std::cout << "simulate: wrote " << sim.count << " signal(s) to " << cfg.out
            << std::endl;
  return 0;
}

int cmd_fit(const RunConfig& cfg_in) {
  const RunConfig cfg = resolve_threads(cfg_in);
  if (cfg.input.empty())
    throw std::invalid_argument("fit: an input CSV is required "
                                "(config key 'input' or --input)");

  if (!input_is_segmented(cfg.input)) {
    const Signal raw = read_signal_csv(cfg.input);
    ensure_outdir(cfg);
    const Pipeline p = run_pipeline(raw, cfg, cfg.seed);
    write_fit_outputs(cfg, p);
    write_text_file(out_path(cfg, "report.json"), fit_report(cfg, p).dump(2) + "\n");
    std::cout << "fit: cycles=" << format_double(p.fr.cycles)
              << " converged=" << (p.fr.converged ? "true" : "false")
              << " iterations=" << p.fr.iterations << " -> " << cfg.out << std::endl;
    return 0;
  }

  // Multi-record input: fit every segment independently, in file order,
  // isolating failures so the remaining segments still produce estimates.
  // The per-segment keys match the ones cmd_aggregate uses, so fitting a
  // segments file and aggregating it at the same seed agree exactly.
  const auto raw_segments = read_segments_csv(cfg.input);
  ensure_outdir(cfg);

  json seg_report = json::array();
  std::size_t failed = 0;
  for (std::size_t j = 0; j < raw_segments.size(); ++j) {
    const auto& [id, raw] = raw_segments[j];
    const std::string tag = "_" + std::to_string(id);
    try {
      const Pipeline p =
          run_pipeline(raw, cfg, derive_key(cfg.seed, {stage::seg_fit, j}));
      write_fitted_csv(out_path(cfg, "fitted" + tag + ".csv"), p.work, p.fr);
      write_trace_csv(out_path(cfg, "trace" + tag + ".csv"), p.fr.trace);
      write_path_csv(out_path(cfg, "path" + tag + ".csv"), p.fr.path);
      write_diagnostics_csv(out_path(cfg, "diagnostics" + tag + ".csv"),
                            diagnostics(p.work, p.fr));
      seg_report.push_back({{"id", id},
                            {"n", p.work.n_steps()},
                            {"cycles", p.fr.cycles},
                            {"converged", p.fr.converged},
                            {"iterations", p.fr.iterations},
                            {"estimate", theta_json(p.fr.theta)}});
      std::cout << "fit: segment " << id << " cycles="
                << format_double(p.fr.cycles)
                << " converged=" << (p.fr.converged ? "true" : "false")
                << " iterations=" << p.fr.iterations << std::endl;
    } catch (const std::exception& e) {
      ++failed;
      seg_report.push_back({{"id", id}, {"error", e.what()}});
      std::cerr << "fit: segment " << id << " failed: " << e.what() << std::endl;
    }
  }

  json rep;
  rep["seed"] = cfg.seed;
  rep["threads"] = cfg.threads;
  rep["input"] = cfg.input;
  rep["segments"] = seg_report;
  rep["n_segments"] = raw_segments.size();
  rep["n_failed"] = failed;
  write_text_file(out_path(cfg, "report.json"), rep.dump(2) + "\n");
  std::cout << "fit: " << (raw_segments.size() - failed) << "/"
            << raw_segments.size() << " segment(s) fitted -> " << cfg.out
            << std::endl;
  return failed == 0 ? 0 : 2;
}

int cmd_bootstrap(const RunConfig& cfg_in) {
  const RunConfig cfg = resolve_threads(cfg_in);
  const Signal raw = read_input_signal(cfg, "bootstrap");
  ensure_outdir(cfg);

  const Pipeline p = run_pipeline(raw, cfg, cfg.seed);
  if (!p.fr.converged)
    std::cerr << "bootstrap: warning: base fit did not converge within "
              << p.fr.iterations << " iterations; resampling around it anyway"
              << std::endl;
  write_fit_outputs(cfg, p);

  const BootstrapResult br = residual_bootstrap(
      p.work, p.fr, cfg.bootstrap, derive_key(cfg.seed, {stage::bootstrap}));
  write_bootstrap_csv(out_path(cfg, "bootstrap.csv"), br);
  write_reldiff_csv(out_path(cfg, "reldiff.csv"),
                    replicate_rel_diffs(br, p.fr.theta, p.fr.cycles));

  const double level = cfg.bootstrap.ci_level;
  json ci;
  ci["A"] = ci_json(field_ci(br, level, &ModelParams::A));
  ci["B"] = ci_json(field_ci(br, level, &ModelParams::B));
  ci["b"] = ci_json(phase_ci(br, p.fr.theta.b, level));
  ci["a"] = ci_json(field_ci(br, level, &ModelParams::a));
  ci["beta"] = ci_json(field_ci(br, level, &ModelParams::beta));
  ci["rho"] = ci_json(field_ci(br, level, &ModelParams::rho));
  ci["omega2"] = ci_json(field_ci(br, level, &ModelParams::omega2));
  ci["sigma2"] = ci_json(field_ci(br, level, &ModelParams::sigma2));
  ci["cycles"] = ci_json(percentile_ci(collect_cycles(br), level));

  json failures = json::array();
  for (const auto& f : br.failures)
    failures.push_back({{"replicate", f.replicate}, {"error", f.error}});

  json rep = fit_report(cfg, p);
  rep["bootstrap"] = {{"replicates", cfg.bootstrap.replicates},
                      {"warm_start", cfg.bootstrap.warm_start},
                      {"ci_level", level},
                      {"n_estimates", br.estimates.size()},
                      {"n_failures", br.failures.size()},
                      {"failures", failures}};
  rep["ci"] = ci;
  write_text_file(out_path(cfg, "report.json"), rep.dump(2) + "\n");
  std::cout << "bootstrap: " << br.estimates.size() << "/"
            << cfg.bootstrap.replicates << " replicates, cycles "
            << format_double(ci["cycles"]["lo"].get<double>()) << ".."
            << format_double(ci["cycles"]["hi"].get<double>()) << " -> " << cfg.out
            << std::endl;
  return 0;
}

int cmd_aggregate(const RunConfig& cfg_in) {
  const RunConfig cfg = resolve_threads(cfg_in);
  if (cfg.input.empty())
    throw std::invalid_argument("aggregate: an input CSV is required "
                                "(config key 'input' or --input)");
  if (!cfg.aggregate.has_death_year)
    throw std::invalid_argument("aggregate: config key aggregate.death_year is required");
  const auto raw_segments = read_segments_csv(cfg.input);
  ensure_outdir(cfg);

  std::vector<SegmentFit> segs;
  std::vector<std::vector<double>> pools;
  json seg_report = json::array();
  segs.reserve(raw_segments.size());

  for (std::size_t j = 0; j < raw_segments.size(); ++j) {
    const auto& [id, raw] = raw_segments[j];
    const std::uint64_t key = derive_key(cfg.seed, {stage::seg_fit, j});
    Pipeline p = run_pipeline(raw, cfg, key);
    json sj = {{"id", id},
               {"n", p.work.n_steps()},
               {"cycles", p.fr.cycles},
               {"converged", p.fr.converged},
               {"iterations", p.fr.iterations},
               {"estimate", theta_json(p.fr.theta)}};
    if (cfg.aggregate.ci) {
      const BootstrapResult br =
          residual_bootstrap(p.work, p.fr, cfg.bootstrap,
                             derive_key(cfg.seed, {stage::seg_boot, j}));
      pools.push_back(collect_cycles(br));
      sj["bootstrap"] = {{"n_estimates", br.estimates.size()},
                        {"n_failures", br.failures.size()}};
    }
    segs.push_back({id, std::move(p.work), std::move(p.fr)});
    seg_report.push_back(std::move(sj));
  }

  AggregateResult agg = aggregate(segs);
  date_observations(agg, cfg.aggregate.death_year);
  write_timeline_csv(out_path(cfg, "timeline.csv"), agg);

  json rep;
  rep["seed"] = cfg.seed;
  rep["threads"] = cfg.threads;
  rep["input"] = cfg.input;
  rep["death_year"] = cfg.aggregate.death_year;
  rep["total_cycles"] = agg.total_cycles;
  rep["total_growth"] = agg.total_growth;
  rep["segment_cycles"] = agg.segment_cycles;
  rep["segments"] = seg_report;
  if (cfg.aggregate.ci) {
    const AgeCi ci = age_ci(agg.total_cycles, pools, cfg.aggregate.ci_level,
                            cfg.aggregate.n_combinations,
                            derive_key(cfg.seed, {stage::combo}));
    rep["age_ci"] = {{"age", ci.age},
                     {"lo", ci.lo},
                     {"hi", ci.hi},
                     {"level", ci.level},
                     {"n_combinations", ci.n_combinations}};
  }
  write_text_file(out_path(cfg, "report.json"), rep.dump(2) + "\n");
  std::cout << "aggregate: " << segs.size() << " segment(s), total cycles "
            << format_double(agg.total_cycles) << " -> " << cfg.out << std::endl;
  return 0;
}

int cmd_bench(const RunConfig& cfg_in) {
  const RunConfig cfg = resolve_threads(cfg_in);
  if (cfg.bench.count == 0) throw std::invalid_argument("bench: count must be positive");
  if (cfg.bench.n == 0) throw std::invalid_argument("bench: n must be positive");
  ensure_outdir(cfg);

  using clock = std::chrono::steady_clock;
  const auto secs = [](clock::time_point t0, clock::time_point t1) {
    return std::chrono::duration<double>(t1 - t0).count();
  };

  std::string csv = "run,n,seconds_simulate,seconds_init,seconds_fit,iterations,"
                    "converged,cycles_true,cycles_est\n";
  std::printf("%4s %8s %10s %10s %10s %6s %10s %10s\n", "run", "n", "sim_s",
              "init_s", "fit_s", "iters", "cyc_true", "cyc_est");
  std::size_t within_one = 0;
  for (std::size_t k = 0; k < cfg.bench.count; ++k) {
    const std::uint64_t sim_key = derive_key(cfg.seed, {stage::simulate, k});
    const std::uint64_t run_key = derive_key(cfg.seed, {stage::bench, k});

    const auto t0 = clock::now();
    Rng rng(sim_key, stream::boxes, 0, 0);
    const ModelParams truth =
        draw_sim_params(cfg.simulate.boxes, cfg.bench.n, cfg.simulate.delta, rng);
    const SimulatedSignal s =
        simulate_signal(truth, cfg.bench.n, cfg.simulate.delta,
                        cfg.simulate.substeps, cfg.simulate.xi0, sim_key);
    const auto t1 = clock::now();
    const Signal work = cfg.normalize
                            ? normalize_amplitude(s.signal, cfg.window_fraction)
                            : s.signal;
    const InitResult ir = initialize(work, cfg.init, derive_key(run_key, {stage::init}));
    const auto t2 = clock::now();
    const FitResult fr =
        fit(work, ir.theta0, ir.a0, cfg.saem, derive_key(run_key, {stage::fit}));
    const auto t3 = clock::now();

    const double cyc_true = cycle_count(s.path);
    if (std::abs(fr.cycles - cyc_true) <= 1.0) ++within_one;
    char line[256];
    std::snprintf(line, sizeof(line), "%zu,%zu,%.6f,%.6f,%.6f,%zu,%d,%.6f,%.6f\n",
                  k, cfg.bench.n, secs(t0, t1), secs(t1, t2), secs(t2, t3),
                  fr.iterations, fr.converged ? 1 : 0, cyc_true, fr.cycles);
    csv += line;
    std::printf("%4zu %8zu %10.3f %10.3f %10.3f %6zu %10.3f %10.3f\n", k,
                cfg.bench.n, secs(t0, t1), secs(t1, t2), secs(t2, t3),
                fr.iterations, cyc_true, fr.cycles);
  }
  write_text_file(out_path(cfg, "bench.csv"), csv);
  std::cout << "bench: within 1 cycle: " << within_one << "/" << cfg.bench.count
            << " (rate " << format_double(static_cast<double>(within_one) /
                                          static_cast<double>(cfg.bench.count))
            << ")" << std::endl;
  std::cout << "bench: " << cfg.bench.count << " run(s) -> " << cfg.out << std::endl;
  return 0;
}

}  // namespace cyclewarp

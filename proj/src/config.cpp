#include "cyclewarp/config.hpp"

#include <cmath>
#include <initializer_list>
#include <limits>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "cyclewarp/io.hpp"

namespace cyclewarp {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::string& where,
                std::initializer_list<const char*> allowed) {
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* k : allowed)
      if (item.key() == k) {
        ok = true;
        break;
      }
    if (!ok)
      throw std::invalid_argument("config: unknown key '" + item.key() + "' in " +
                                  where);
  }
}

double get_num(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number())
    throw std::invalid_argument(std::string("config: '") + key + "' must be a number");
  return v.get<double>();
}

/// Number, or the strings "inf"/"infinity" (JSON has no infinity literal).
double get_num_or_inf(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "inf" || s == "infinity")
      return std::numeric_limits<double>::infinity();
    throw std::invalid_argument(std::string("config: '") + key +
                                "' accepts a number or \"inf\"");
  }
  if (!v.is_number())
    throw std::invalid_argument(std::string("config: '") + key + "' must be a number");
  return v.get<double>();
}

std::size_t get_size(const json& j, const char* key, std::size_t fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
    throw std::invalid_argument(std::string("config: '") + key +
                                "' must be a nonnegative integer");
  return v.get<std::size_t>();
}

bool get_bool(const json& j, const char* key, bool fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_boolean())
    throw std::invalid_argument(std::string("config: '") + key + "' must be a boolean");
  return v.get<bool>();
}

std::string get_string(const json& j, const char* key, const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_string())
    throw std::invalid_argument(std::string("config: '") + key + "' must be a string");
  return v.get<std::string>();
}

void get_range(const json& j, const char* key, double& lo, double& hi) {
  if (!j.contains(key)) return;
  const auto& v = j.at(key);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    throw std::invalid_argument(std::string("config: '") + key +
                                "' must be an array [lo, hi]");
  lo = v[0].get<double>();
  hi = v[1].get<double>();
}

Quadrature parse_quadrature(const json& j, const char* key, Quadrature fallback) {
  if (!j.contains(key)) return fallback;
  const std::string s = get_string(j, key, "");
  if (s == "trapezoid") return Quadrature::trapezoid;
  if (s == "rectangle") return Quadrature::rectangle;
  throw std::invalid_argument(
      "config: quadrature must be \"trapezoid\" or \"rectangle\"");
}

void parse_init(const json& j, InitConfig& c) {
  check_keys(j, "init", {"c_min", "c_max", "span", "n_particles", "beta_range",
                         "omega2_range", "max_rejects"});
  c.c_min = get_num(j, "c_min", c.c_min);
  c.c_max = get_num(j, "c_max", c.c_max);
  c.span = get_num(j, "span", c.span);
  c.n_particles = get_size(j, "n_particles", c.n_particles);
  get_range(j, "beta_range", c.beta_lo, c.beta_hi);
  get_range(j, "omega2_range", c.omega2_lo, c.omega2_hi);
  c.max_rejects = get_size(j, "max_rejects", c.max_rejects);
}

void parse_saem(const json& j, SAEMConfig& c) {
  check_keys(j, "saem",
             {"m0", "max_iter", "stop_threshold", "stop_consecutive", "n_particles",
              "grid_size", "quadrature", "a_clamp", "max_failures"});
  c.m0 = get_size(j, "m0", c.m0);
  c.max_iter = get_size(j, "max_iter", c.max_iter);
  c.stop_threshold = get_num_or_inf(j, "stop_threshold", c.stop_threshold);
  c.stop_consecutive = get_size(j, "stop_consecutive", c.stop_consecutive);
  c.n_particles = get_size(j, "n_particles", c.n_particles);
  c.grid_size = get_size(j, "grid_size", c.grid_size);
  c.rule = parse_quadrature(j, "quadrature", c.rule);
  get_range(j, "a_clamp", c.a_clamp_lo, c.a_clamp_hi);
  c.max_failures = get_size(j, "max_failures", c.max_failures);
}

void parse_simulate(const json& j, SimulateSection& c) {
  check_keys(j, "simulate",
             {"n", "delta", "substeps", "count", "xi0", "params", "boxes"});
  c.n = get_size(j, "n", c.n);
  c.delta = get_num(j, "delta", c.delta);
  c.substeps = get_size(j, "substeps", c.substeps);
  c.count = get_size(j, "count", c.count);
  c.xi0 = get_num(j, "xi0", c.xi0);
  if (j.contains("params") && j.contains("boxes"))
    throw std::invalid_argument("config: give either simulate.params or simulate.boxes");
  if (j.contains("params")) {
    const auto& p = j.at("params");
    check_keys(p, "simulate.params", {"A", "B", "b", "a", "beta", "omega2", "sigma2"});
    for (const char* k : {"A", "B", "b", "a", "beta", "omega2", "sigma2"})
      if (!p.contains(k))
        throw std::invalid_argument(std::string("config: simulate.params needs '") +
                                    k + "'");
    c.params.A = get_num(p, "A", 0.0);
    c.params.B = get_num(p, "B", 0.0);
    c.params.b = get_num(p, "b", 0.0);
    c.params.a = get_num(p, "a", 0.0);
    c.params.beta = get_num(p, "beta", 0.0);
    c.params.omega2 = get_num(p, "omega2", 0.0);
    c.params.sigma2 = get_num(p, "sigma2", 0.0);
    c.has_params = true;
  }
  if (j.contains("boxes")) {
    const auto& b = j.at("boxes");
    check_keys(b, "simulate.boxes",
               {"c_min", "c_max", "beta_range", "omega_range", "sigma_range",
                "A_range", "max_rejects"});
    c.boxes.c_min = get_num(b, "c_min", c.boxes.c_min);
    c.boxes.c_max = get_num(b, "c_max", c.boxes.c_max);
    get_range(b, "beta_range", c.boxes.beta_lo, c.boxes.beta_hi);
    get_range(b, "omega_range", c.boxes.omega_lo, c.boxes.omega_hi);
    get_range(b, "sigma_range", c.boxes.sigma_lo, c.boxes.sigma_hi);
    get_range(b, "A_range", c.boxes.A_lo, c.boxes.A_hi);
    c.boxes.max_rejects = get_size(b, "max_rejects", c.boxes.max_rejects);
  }
}

}  // namespace

RunConfig default_config() { return RunConfig{}; }

RunConfig parse_config(const std::string& json_text, const std::string& origin) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(origin + ": " + e.what());
  }
  if (!j.is_object())
    throw std::invalid_argument(origin + ": configuration must be a JSON object");

  RunConfig cfg;
  try {
    check_keys(j, "configuration",
               {"seed", "threads", "out", "input", "preprocess", "init", "saem",
                "bootstrap", "aggregate", "simulate", "bench"});
    if (j.contains("seed")) {
      const auto& v = j.at("seed");
      if (!v.is_number_integer() && !v.is_number_unsigned())
        throw std::invalid_argument("config: 'seed' must be an integer");
      cfg.seed = v.get<std::uint64_t>();
    }
    if (j.contains("threads")) {
      const auto& v = j.at("threads");
      if (!v.is_number_integer())
        throw std::invalid_argument("config: 'threads' must be an integer");
      cfg.threads = v.get<int>();
    }
    cfg.out = get_string(j, "out", cfg.out);
    cfg.input = get_string(j, "input", cfg.input);

    if (j.contains("preprocess")) {
      const auto& p = j.at("preprocess");
      check_keys(p, "preprocess", {"normalize", "window_fraction"});
      cfg.normalize = get_bool(p, "normalize", cfg.normalize);
      cfg.window_fraction = get_num(p, "window_fraction", cfg.window_fraction);
    }
    if (j.contains("init")) parse_init(j.at("init"), cfg.init);
    if (j.contains("saem")) parse_saem(j.at("saem"), cfg.saem);
    if (j.contains("bootstrap")) {
      const auto& b = j.at("bootstrap");
      check_keys(b, "bootstrap", {"replicates", "warm_start", "ci_level"});
      cfg.bootstrap.replicates = get_size(b, "replicates", cfg.bootstrap.replicates);
      cfg.bootstrap.warm_start = get_bool(b, "warm_start", cfg.bootstrap.warm_start);
      cfg.bootstrap.ci_level = get_num(b, "ci_level", cfg.bootstrap.ci_level);
    }
    if (j.contains("aggregate")) {
      const auto& a = j.at("aggregate");
      check_keys(a, "aggregate", {"death_year", "ci", "ci_level", "n_combinations"});
      if (a.contains("death_year")) {
        cfg.aggregate.death_year = get_num(a, "death_year", 0.0);
        cfg.aggregate.has_death_year = true;
      }
      cfg.aggregate.ci = get_bool(a, "ci", cfg.aggregate.ci);
      cfg.aggregate.ci_level = get_num(a, "ci_level", cfg.aggregate.ci_level);
      cfg.aggregate.n_combinations =
          get_size(a, "n_combinations", cfg.aggregate.n_combinations);
    }
    if (j.contains("simulate")) parse_simulate(j.at("simulate"), cfg.simulate);
    if (j.contains("bench")) {
      const auto& b = j.at("bench");
      check_keys(b, "bench", {"count", "n"});
      cfg.bench.count = get_size(b, "count", cfg.bench.count);
      cfg.bench.n = get_size(b, "n", cfg.bench.n);
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(origin + ": " + e.what());
  }

  // The replicate fits reuse the initialization and fit settings.
  cfg.bootstrap.init = cfg.init;
  cfg.bootstrap.saem = cfg.saem;
  cfg.init.rule = cfg.saem.rule;
  cfg.bootstrap.init.rule = cfg.saem.rule;
  return cfg;
}

RunConfig load_config(const std::string& path) {
  return parse_config(read_text_file(path), path);
}

std::string config_to_json_text(const RunConfig& cfg) {
  json j;
  j["seed"] = cfg.seed;
  j["threads"] = cfg.threads;
  j["out"] = cfg.out;
  j["input"] = cfg.input;
  j["preprocess"] = {{"normalize", cfg.normalize},
                     {"window_fraction", cfg.window_fraction}};
  j["init"] = {{"c_min", cfg.init.c_min},
               {"c_max", cfg.init.c_max},
               {"span", cfg.init.span},
               {"n_particles", cfg.init.n_particles},
               {"beta_range", {cfg.init.beta_lo, cfg.init.beta_hi}},
               {"omega2_range", {cfg.init.omega2_lo, cfg.init.omega2_hi}},
               {"max_rejects", cfg.init.max_rejects}};
  json saem = {{"m0", cfg.saem.m0},
               {"max_iter", cfg.saem.max_iter},
               {"stop_consecutive", cfg.saem.stop_consecutive},
               {"n_particles", cfg.saem.n_particles},
               {"grid_size", cfg.saem.grid_size},
               {"quadrature",
                cfg.saem.rule == Quadrature::trapezoid ? "trapezoid" : "rectangle"},
               {"a_clamp", {cfg.saem.a_clamp_lo, cfg.saem.a_clamp_hi}},
               {"max_failures", cfg.saem.max_failures}};
  if (std::isfinite(cfg.saem.stop_threshold))
    saem["stop_threshold"] = cfg.saem.stop_threshold;
  else
    saem["stop_threshold"] = "inf";
  j["saem"] = saem;
  j["bootstrap"] = {{"replicates", cfg.bootstrap.replicates},
                    {"warm_start", cfg.bootstrap.warm_start},
                    {"ci_level", cfg.bootstrap.ci_level}};
  json agg = {{"ci", cfg.aggregate.ci},
              {"ci_level", cfg.aggregate.ci_level},
              {"n_combinations", cfg.aggregate.n_combinations}};
  if (cfg.aggregate.has_death_year) agg["death_year"] = cfg.aggregate.death_year;
  j["aggregate"] = agg;
  json sim = {{"n", cfg.simulate.n},
              {"delta", cfg.simulate.delta},
              {"substeps", cfg.simulate.substeps},
              {"count", cfg.simulate.count},
              {"xi0", cfg.simulate.xi0}};
  if (cfg.simulate.has_params) {
    sim["params"] = {{"A", cfg.simulate.params.A},
                     {"B", cfg.simulate.params.B},
                     {"b", cfg.simulate.params.b},
                     {"a", cfg.simulate.params.a},
                     {"beta", cfg.simulate.params.beta},
                     {"omega2", cfg.simulate.params.omega2},
                     {"sigma2", cfg.simulate.params.sigma2}};
  } else {
    sim["boxes"] = {{"c_min", cfg.simulate.boxes.c_min},
                    {"c_max", cfg.simulate.boxes.c_max},
                    {"beta_range", {cfg.simulate.boxes.beta_lo, cfg.simulate.boxes.beta_hi}},
                    {"omega_range", {cfg.simulate.boxes.omega_lo, cfg.simulate.boxes.omega_hi}},
                    {"sigma_range", {cfg.simulate.boxes.sigma_lo, cfg.simulate.boxes.sigma_hi}},
                    {"A_range", {cfg.simulate.boxes.A_lo, cfg.simulate.boxes.A_hi}},
                    {"max_rejects", cfg.simulate.boxes.max_rejects}};
  }
  j["simulate"] = sim;
  j["bench"] = {{"count", cfg.bench.count}, {"n", cfg.bench.n}};
  return j.dump(2) + "\n";
}

}  // namespace cyclewarp

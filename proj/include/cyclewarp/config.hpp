#pragma once
// Run configuration: one JSON document drives every subcommand.  Unknown
// keys are rejected so typos surface as configuration errors instead of
// silently falling back to defaults.

#include <cstdint>
#include <string>

#include "cyclewarp/bootstrap.hpp"
#include "cyclewarp/cir.hpp"
#include "cyclewarp/init.hpp"
#include "cyclewarp/model.hpp"
#include "cyclewarp/saem.hpp"

namespace cyclewarp {

struct SimulateSection {
  std::size_t n = 500;
  double delta = 1.0;
  std::size_t substeps = 100;
  std::size_t count = 1;
  double xi0 = 0.0;
  bool has_params = false;  ///< explicit parameters given (otherwise boxes)
  ModelParams params;
  SimBoxes boxes;
};

struct AggregateSection {
  bool has_death_year = false;
  double death_year = 0.0;
  bool ci = false;  ///< bootstrap every segment and build an age interval
  double ci_level = 0.95;
  std::size_t n_combinations = 100000;
};

struct BenchSection {
  std::size_t count = 3;
  std::size_t n = 200;
};

struct RunConfig {
  std::uint64_t seed = 1;
  int threads = 0;  ///< 0 = resolve from environment/hardware
  std::string out = "out";
  std::string input;
  // Preprocessing.
  bool normalize = true;
  double window_fraction = 0.10;
  // Stages.
  InitConfig init;
  SAEMConfig saem;
  BootstrapConfig bootstrap;  ///< its init/saem mirror the sections above
  SimulateSection simulate;
  AggregateSection aggregate;
  BenchSection bench;
};

/// All defaults, nothing read from disk.
RunConfig default_config();

/// Parse a JSON document; `origin` names the source in error messages.
/// Throws std::invalid_argument on malformed JSON, unknown keys, or values
/// of the wrong type.
RunConfig parse_config(const std::string& json_text, const std::string& origin);

/// Load a JSON configuration file.
RunConfig load_config(const std::string& path);

/// Serialize the resolved configuration back to JSON text (used to echo the
/// effective settings into reports).
std::string config_to_json_text(const RunConfig& cfg);

}  // namespace cyclewarp

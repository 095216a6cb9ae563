#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"

#include "erlq/rpg.hpp"
#include "erlq/sbrpg.hpp"
#include "erlq/system.hpp"

namespace erlq {

struct SolverConfig {
  double are_tol = 1e-14;
  int max_iter = 100000;
};

struct GradcheckConfig {
  int samples = 20;
  double step = 1e-6;
};

struct BoundsConfig {
  double epsilon = 0.1;
  double kappa = 0.05;
  double growth_constant = 10.0;
  bool schedule = true;  // also evaluate the full sample-size schedule
};

struct OutputConfig {
  std::string dir = ".";
  bool csv = true;
  bool svg = true;
  int record_every = 1;
};

// Fully resolved experiment description. Every run-shaping knob lives here;
// command-line flags only override the seed, output dir, thread count and
// coefficient mode.
struct ExperimentConfig {
  SystemParams system;
  Vec k0;      // initial (and evaluation) gain; zeros by default
  Mat sigma0;  // initial covariance; 0.5 I by default
  SolverConfig solver;
  RpgConfig rpg;
  SbrpgConfig sbrpg;
  GradcheckConfig gradcheck;
  BoundsConfig bounds;
  OutputConfig output;
  std::uint64_t seed = 1;
  bool has_seed = false;  // true when the file itself named a seed
};

// Parses a config document. Unknown keys, wrong types, missing required keys
// and dimension mismatches all throw ConfigError naming the offending key
// path (e.g. "system.d: expected a 3x3 matrix").
ExperimentConfig parse_config(const nlohmann::json& root);

// Reads and parses a config file; file-system problems become ConfigError.
ExperimentConfig load_config(const std::string& path);

// Canonical serialization; parse_config(config_to_json(c)) reproduces c.
nlohmann::json config_to_json(const ExperimentConfig& cfg);

// Built-in reference configuration: the bundled three-input benchmark system
// with desk-scale optimizer settings, used by the `paper-exp` subcommand and
// throughout the test suite.
ExperimentConfig reference_experiment();

}  // namespace erlq

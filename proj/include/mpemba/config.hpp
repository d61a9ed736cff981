#pragma once

#include <optional>
#include <string>

#include "mpemba/simulate.hpp"

namespace mpemba {

struct ScanBlock {
  double eta_min = 0.0;
  double eta_max = 0.0;
  int n_samples = 33;
};

struct ScheduleBlock {
  double a = 0.0;         // <= 0: derive from the landscape at argmin c
  double k = -1.0;        // < 0: derive from the landscape at argmin c
  double eta_star = 0.0;  // <= 0: take the optimal plateau from the scan
  double warmup = 0.0;
  double r_low = 3.0;
  double r_high = 1.0;
  double horizon = 0.0;   // <= 0: 10/a
  int n_check = 64;
  double steps_per_unit_time = 100.0;
};

struct SimBlock {
  SimConfig cfg;
  MpembaExperimentOptions::Engine engine = MpembaExperimentOptions::Engine::kEffective1d;
  // protocol: one of constant / quench / recommended schedule
  std::string protocol_type = "constant";  // "constant" | "quench"
  double protocol_eta = 0.1;
  double quench_eta_start = 0.1;
  double quench_t = 0.0;
  double eta_h = 0.0;  // mpemba-experiment triple
  double eta_l = 0.0;
};

struct OutputBlock {
  std::string directory = ".";
  bool csv = true;
  bool json = true;
  bool svg = false;
};

struct ExperimentConfig {
  LandscapeSpec landscape;
  int grid_points = 1201;
  double eta_b = 0.0;
  std::optional<ScanBlock> scan;
  std::optional<ScheduleBlock> schedule;
  std::optional<SimBlock> sim;
  OutputBlock output;
};

/// Strict parse: unknown keys are rejected with their full path; missing or
/// ill-typed values raise ConfigError naming the offending key.
ExperimentConfig parse_experiment_config(const std::string& json_text);

ExperimentConfig load_experiment_config(const std::string& path);

}  // namespace mpemba

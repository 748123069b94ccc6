// Experiment configuration: a human-editable sectioned key-value file; one
// config describes one reproducible experiment.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lyh/background.hpp"

namespace lyh {

struct ExperimentConfig {
  BackgroundSpec background;
  std::string phi0_preset = "zero";   // zero | cos_x | cos_xy
  double phi0_amplitude = 0.05;

  std::vector<std::string> suites;
  std::map<std::string, std::vector<double>> schedules;

  double tol_c1 = 1.0;  // discretization-zero model: c1 h^2 + c2 dt
  double tol_c2 = 1.0;
  std::map<std::string, double> tol_overrides;

  std::string out_dir = "out";
  std::uint64_t seed = 0;
  double budget_seconds = 600.0;
  std::string inject_fault;  // test hook, e.g. "negate_cell"

  // Fields participating in the compatibility hash (everything except
  // resolution, tolerances and output location).
  std::string compat_text;
  std::string canonical_text;  // full canonical form, hashed into config_hash

  void finalize();  // builds background.phi0 from the preset, canonical texts
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

std::uint64_t fnv1a_hash(const std::string& s);

// Schedule accessor with a fallback default.
std::vector<double> schedule_or(const ExperimentConfig& cfg, const std::string& name,
                                std::vector<double> def);

}  // namespace lyh

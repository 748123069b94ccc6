// Experiment orchestration: suite registry, batch execution with artifact
// persistence, regression comparison against stored baselines.
#pragma once

#include "lyh/config.hpp"
#include "lyh/report.hpp"

namespace lyh {

struct Metric {
  std::string name;
  double value = 0.0;
  // Baseline-comparison semantics: "exact" (drift-checked at equal
  // resolution), "residual:<order>" (expected to shrink with the declared
  // order under refinement), "info" (recorded only).
  std::string kind = "exact";
};

struct SuiteResult {
  std::string name;
  bool pass = true;
  std::vector<Metric> metrics;
  std::vector<HarnackReport> rows;
  std::vector<MonotonicityCurve> curves;
  std::vector<std::string> notes;
};

struct ReportBundle {
  std::string code_version;
  std::string config_hash;
  std::string compat_hash;
  std::string background;
  int resolution = 0;
  std::uint64_t seed = 0;
  std::vector<SuiteResult> suites;
  bool global_pass = true;
  bool error = false;  // solver blow-up / budget exceeded (still reported)
  double wall_seconds = 0.0;
};

// Known suite names, in execution order.
std::vector<std::string> known_suites();

// Runs every selected suite compatible with the config's background, writes
// bundle.json plus one CSV per suite under cfg.out_dir.
ReportBundle run_experiment(const ExperimentConfig& cfg);

void write_bundle(const ReportBundle& bundle, const std::string& out_dir);

struct DiffEntry {
  std::string suite;
  std::string metric;
  double baseline = 0.0;
  double current = 0.0;
  double drift = 0.0;  // relative
  bool ok = true;
  std::string note;
};

struct DiffReport {
  bool compatible = true;
  bool pass = true;
  double max_drift = 0.0;
  std::vector<DiffEntry> entries;
  std::vector<std::string> verdict_changes;
};

// Compares two bundle.json files; threshold is the allowed relative drift
// for exact metrics at equal resolution.  Bundles with different resolutions
// check residual-tagged metrics against their declared convergence order.
DiffReport compare_baseline(const std::string& bundle_path,
                            const std::string& baseline_path, double threshold);

// Cache of expensive artifacts, keyed by the compat hash.  Disabled unless a
// directory is configured (flag or LYHLAB_CACHE_DIR).
std::string cache_dir_or_empty(const std::string& override_dir);
int cache_build(const ExperimentConfig& cfg, const std::string& dir);
int cache_clear(const std::string& dir);

extern const char* kCodeVersion;

}  // namespace lyh

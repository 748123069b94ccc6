// Command-line driver: run experiment configs, compare bundles against
// baselines, and manage the artifact cache.
#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"
#include "lyh/harness.hpp"

namespace {

int do_run(const std::string& config_path, int resolution, const std::string& out,
           const std::vector<std::string>& suites, long long seed, double budget) {
  lyh::ExperimentConfig cfg = lyh::parse_config_file(config_path);
  if (resolution > 0) {
    if (cfg.background.is_grid_kind())
      cfg.background.res = resolution;
    else
      cfg.background.zonal_res = resolution;
  }
  if (!out.empty()) cfg.out_dir = out;
  if (!suites.empty()) cfg.suites = suites;
  if (seed >= 0) cfg.seed = (std::uint64_t)seed;
  if (budget > 0) cfg.budget_seconds = budget;
  cfg.finalize();

  const lyh::ReportBundle bundle = lyh::run_experiment(cfg);
  for (const auto& s : bundle.suites) {
    std::cout << (s.pass ? "PASS " : "FAIL ") << s.name << '\n';
    for (const auto& note : s.notes) std::cout << "  " << note << '\n';
  }
  std::cout << (bundle.global_pass ? "PASS" : "FAIL") << " bundle -> " << cfg.out_dir
            << "/bundle.json (" << bundle.wall_seconds << " s)\n";
  if (bundle.error) return 2;
  return bundle.global_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for differential Harnack inequalities"};
  app.require_subcommand(1);

  std::string config_path, out_dir, baseline, bundle, cache_dir;
  std::vector<std::string> suites;
  int resolution = 0;
  long long seed = -1;
  double budget = 0.0, threshold = 0.01;

  auto* run = app.add_subcommand("run", "run an experiment config");
  run->add_option("config", config_path, "experiment config file")->required();
  run->add_option("--resolution", resolution, "grid cells per side override");
  run->add_option("--out", out_dir, "output directory override");
  run->add_option("--suite", suites, "suite selection (repeatable)");
  run->add_option("--seed", seed, "random seed override");
  run->add_option("--budget-seconds", budget, "wall-clock budget");

  auto* cmp = app.add_subcommand("compare", "compare a bundle against a baseline");
  cmp->add_option("bundle", bundle, "bundle.json to check")->required();
  cmp->add_option("baseline", baseline, "baseline bundle.json")->required();
  cmp->add_option("--threshold", threshold, "allowed relative drift (default 1%)");

  auto* cache = app.add_subcommand("cache", "manage the artifact cache");
  std::string cache_op;
  cache->add_option("op", cache_op, "build|clear")->required();
  cache->add_option("config", config_path, "config (for build)");
  cache->add_option("--dir", cache_dir, "cache directory (or LYHLAB_CACHE_DIR)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return do_run(config_path, resolution, out_dir, suites, seed, budget);
    if (*cmp) {
      const lyh::DiffReport rep = lyh::compare_baseline(bundle, baseline, threshold);
      if (!rep.compatible) {
        std::cerr << "incompatible configs (compat hash differs)\n";
        return 2;
      }
      for (const auto& e : rep.entries)
        if (!e.ok || !e.note.empty())
          std::cout << (e.ok ? "  ok " : "DRIFT ") << e.suite << '/' << e.metric
                    << " base=" << e.baseline << " cur=" << e.current
                    << " drift=" << e.drift << ' ' << e.note << '\n';
      for (const auto& v : rep.verdict_changes)
        std::cout << "VERDICT " << v << '\n';
      std::cout << "max drift " << rep.max_drift << '\n';
      return rep.pass ? 0 : 1;
    }
    if (*cache) {
      const std::string dir = lyh::cache_dir_or_empty(cache_dir);
      if (cache_op == "clear") return lyh::cache_clear(dir);
      if (cache_op == "build") {
        lyh::ExperimentConfig cfg = lyh::parse_config_file(config_path);
        return lyh::cache_build(cfg, dir);
      }
      std::cerr << "unknown cache op: " << cache_op << '\n';
      return 2;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}

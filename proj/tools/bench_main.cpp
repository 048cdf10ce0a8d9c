#include <algorithm>
#include <filesystem>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "pushplan/bench.hpp"

namespace fs = std::filesystem;
using namespace pushplan;

namespace {

std::vector<std::string> collect_cases(const std::string& dir) {
  std::vector<std::string> paths;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".json") paths.push_back(entry.path().string());
  }
  std::sort(paths.begin(), paths.end());
  return paths;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Batched push-to-grasp planning benchmark"};
  app.set_config("--config", "", "Config file mirroring every flag (TOML-style key=value)");
  app.require_subcommand(1);

  // --- run ---
  auto* run = app.add_subcommand("run", "Run the episode benchmark over a case directory");
  std::string cases_dir;
  bench::BenchmarkConfig cfg;
  double budget_s = 60.0;
  long iters = 0;
  int cap = 16;
  long seed = 0;
  run->add_option("--cases", cases_dir, "Directory of case JSON files")->required();
  run->add_option("--planner", cfg.planner, "serial|pmbs")
      ->check(CLI::IsMember({"serial", "pmbs"}))
      ->capture_default_str();
  run->add_option("--envs", cfg.search.n_envs, "Parallel environments N_e")->capture_default_str();
  auto* budget_opt = run->add_option("--budget", budget_s, "Per-step time budget, seconds");
  auto* iters_opt = run->add_option("--iters", iters, "Per-step iteration budget (deterministic)");
  budget_opt->excludes(iters_opt);
  run->add_option("--trials", cfg.trials, "Trials per case")->capture_default_str();
  run->add_option("--seed", seed, "Base seed")->capture_default_str();
  run->add_option("--c", cfg.search.c_explore, "UCB exploration constant")->capture_default_str();
  run->add_option("--gamma", cfg.search.gamma, "Discount factor")->capture_default_str();
  run->add_option("--dt", cfg.search.tree_depth, "Max tree depth d_T")->capture_default_str();
  run->add_option("--ds", cfg.search.rollout_depth, "Max rollout depth d_s")->capture_default_str();
  run->add_option("--cap", cap, "Action cap per episode")->capture_default_str();
  run->add_option("--out", cfg.out_path, "Output CSV path (default stdout)");
  run->add_option("--workers", cfg.search.worker_threads, "Worker pool size")
      ->capture_default_str();
  run->add_option("--na", cfg.search.pushes_per_object, "Push samples per object N_a")
      ->capture_default_str();
  run->add_option("--log-dir", cfg.log_dir, "Write per-episode JSONL logs here");
  run->add_flag("!--no-leaf-parallel", cfg.search.leaf_parallel, "Disable leaf parallelization");

  // --- gen ---
  auto* gen = app.add_subcommand("gen", "Generate a case file");
  int n_objects = 8;
  long gen_seed = 0;
  std::string gen_out = "case.json";
  std::string motif = "random";
  double polygon_frac = 0.0;
  gen->add_option("--n-objects", n_objects, "Object count")->capture_default_str();
  gen->add_option("--seed", gen_seed, "Generator seed")->required();
  gen->add_option("--out", gen_out, "Output path")->capture_default_str();
  gen->add_option("--motif", motif, "random|ring|wall")
      ->check(CLI::IsMember({"random", "ring", "wall"}))
      ->capture_default_str();
  gen->add_option("--polygon-frac", polygon_frac, "Fraction of polygon objects")
      ->capture_default_str();

  // --- replay ---
  auto* replay = app.add_subcommand("replay", "Verify an episode JSONL log");
  std::string log_path;
  replay->add_option("--log", log_path, "Episode log file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      cfg.case_paths = collect_cases(cases_dir);
      cfg.action_cap = cap;
      cfg.seed_base = static_cast<uint64_t>(seed);
      cfg.search.budget = iters_opt->count() > 0 ? mcts::Budget::iterations(iters)
                                                 : mcts::Budget::seconds(budget_s);
      if (cfg.search.worker_threads <= 0)
        cfg.search.worker_threads =
            std::max(1u, std::thread::hardware_concurrency());
      bench::run_benchmark(cfg);
    } else if (*gen) {
      const bench::Motif m = motif == "ring"   ? bench::Motif::Ring
                             : motif == "wall" ? bench::Motif::Wall
                                               : bench::Motif::Random;
      const WorldState scene = bench::generate_case_motif(
          m, n_objects, bench::ShapeMix{polygon_frac}, static_cast<uint64_t>(gen_seed));
      save_scene(scene, gen_out);
      std::cout << "wrote " << gen_out << " (" << scene.objects.size() << " objects)\n";
    } else if (*replay) {
      return bench::replay_log(log_path, std::cout) ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

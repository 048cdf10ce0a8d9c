#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "pushplan/pmbs.hpp"

namespace pushplan::bench {

class BenchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EpisodeResult {
  std::string case_id;
  int trial = 0;
  std::string planner;           // "serial" or "pmbs"
  int actions_used = 0;          // pushes + final grasp attempt
  double planning_time_s = 0.0;  // summed tree-search wall time
  bool completed = false;        // target retrieved within the action cap
  bool grasp_success = false;    // the grasp attempt found a feasible pose
  bool grasp_attempted = false;
  bool threshold_marginal = false;  // feasible pose existed below the threshold
};

struct BenchmarkConfig {
  std::vector<std::string> case_paths;
  std::string planner = "pmbs";
  pmbs::ParallelConfig search;
  int trials = 5;
  int action_cap = 16;
  uint64_t seed_base = 0;
  std::string out_path;  // CSV; empty -> stdout
  std::string log_dir;   // optional JSONL episode logs
};

/// Per-episode deterministic seed.
uint64_t episode_seed(uint64_t seed_base, const std::string& case_id, int trial);

/// One episode of the main loop: grasp when the graspability threshold is
/// met, otherwise plan and execute one push; abort as incomplete at the
/// action cap. An optional stream receives the JSONL step log.
EpisodeResult run_episode(const WorldState& scene, const std::string& case_id, int trial,
                          const BenchmarkConfig& cfg, uint64_t seed, std::ostream* log = nullptr);

/// trials x cases episodes; one CSV row per episode streamed as it finishes,
/// then a summary block with the four metric means.
void run_benchmark(const BenchmarkConfig& cfg);

std::string csv_header();
std::string csv_row(const EpisodeResult& r, const BenchmarkConfig& cfg);

struct ShapeMix {
  double polygon_fraction = 0.0;  // remainder are discs
};

enum class Motif { Random, Ring, Wall };

/// Rejection-samples a non-overlapping clutter clustered around the workspace
/// center with a central target. Deterministic per seed; the result satisfies
/// all scene invariants. Throws BenchError after 10,000 rejected attempts.
WorldState generate_case(int n_objects, const ShapeMix& mix, uint64_t seed);

/// Motif variants used for the shipped case corpus: a blocking ring around
/// the target or a wall pinning it near the boundary, plus filler clutter.
WorldState generate_case_motif(Motif motif, int n_objects, const ShapeMix& mix, uint64_t seed);

/// Verifies a JSONL episode log by re-folding the recorded actions through
/// the simulator and comparing state digests. Returns true when consistent.
bool replay_log(const std::string& path, std::ostream& report);

}  // namespace pushplan::bench

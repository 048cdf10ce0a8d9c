#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "pushplan/bench.hpp"
#include "support/scenes.hpp"

using namespace pushplan;
using namespace pushplan::bench;
using pushplan::testing::arc_ring;
using pushplan::testing::lone_disc;
using pushplan::testing::packed_clutter;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("bench_test_" + std::to_string(::getpid()) + "_" +
                                        std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

BenchmarkConfig fast_config() {
  BenchmarkConfig cfg;
  cfg.search.budget = mcts::Budget::iterations(40);
  cfg.search.n_envs = 8;
  cfg.search.worker_threads = 1;
  return cfg;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

std::string read_all(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::vector<std::string> split_csv(const std::string& row) {
  std::vector<std::string> cells;
  std::stringstream ss(row);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  return cells;
}

}  // namespace

TEST_CASE("episode_seed is deterministic and sensitive to every input") {
  CHECK(episode_seed(1, "case_a", 0) == episode_seed(1, "case_a", 0));
  CHECK(episode_seed(1, "case_a", 0) != episode_seed(1, "case_a", 1));
  CHECK(episode_seed(1, "case_a", 0) != episode_seed(1, "case_b", 0));
  CHECK(episode_seed(1, "case_a", 0) != episode_seed(2, "case_a", 0));
}

TEST_CASE("run_episode grasps an unobstructed disc in one action") {
  const BenchmarkConfig cfg = fast_config();
  const EpisodeResult r = run_episode(lone_disc(), "lone", 0, cfg, 7);
  CHECK(r.actions_used == 1);
  CHECK(r.grasp_attempted);
  CHECK(r.grasp_success);
  CHECK(r.completed);
  CHECK(r.planning_time_s == 0.0);  // no search happened
}

TEST_CASE("run_episode solves the arc pocket with one push plus the grasp") {
  BenchmarkConfig cfg = fast_config();
  cfg.search.budget = mcts::Budget::iterations(200);
  cfg.search.n_envs = 64;
  const EpisodeResult r = run_episode(arc_ring(), "arc", 0, cfg, 3);
  CHECK(r.actions_used == 2);
  CHECK(r.completed);
  CHECK(r.grasp_success);
}

TEST_CASE("run_episode stops incomplete at the action cap, deterministically") {
  BenchmarkConfig cfg = fast_config();
  cfg.action_cap = 3;
  const EpisodeResult a = run_episode(packed_clutter(), "packed", 0, cfg, 11);
  CHECK_FALSE(a.completed);
  CHECK(a.actions_used <= 3);

  const EpisodeResult b = run_episode(packed_clutter(), "packed", 0, cfg, 11);
  CHECK(a.actions_used == b.actions_used);
  CHECK(a.completed == b.completed);
  CHECK(a.grasp_success == b.grasp_success);
  CHECK(a.grasp_attempted == b.grasp_attempted);
}

TEST_CASE("episode log replays cleanly and tampering is caught") {
  TempDir dir;
  BenchmarkConfig cfg = fast_config();
  cfg.search.budget = mcts::Budget::iterations(150);
  cfg.search.n_envs = 64;

  const std::string log_path = dir.file("episode.jsonl");
  {
    std::ofstream log(log_path);
    const EpisodeResult r = run_episode(arc_ring(), "arc", 0, cfg, 3, &log);
    REQUIRE(r.completed);
  }
  std::ostringstream report;
  CHECK(replay_log(log_path, report));
  CHECK(report.str().find("replay ok") != std::string::npos);

  // Corrupt one digit of a digest in the push record.
  std::string text = read_all(log_path);
  const size_t pos = text.find("\"post\":\"");
  REQUIRE(pos != std::string::npos);
  text[pos + 8] = text[pos + 8] == '1' ? '2' : '1';
  const std::string bad_path = dir.file("tampered.jsonl");
  std::ofstream(bad_path) << text;

  std::ostringstream bad_report;
  CHECK_FALSE(replay_log(bad_path, bad_report));
  CHECK(bad_report.str().find("mismatch") != std::string::npos);

  std::ostringstream missing;
  CHECK_FALSE(replay_log(dir.file("absent.jsonl"), missing));
}

TEST_CASE("csv_row formats every column; iteration budgets zero the time") {
  EpisodeResult r;
  r.case_id = "case_07";
  r.trial = 2;
  r.planner = "pmbs";
  r.actions_used = 4;
  r.planning_time_s = 1.23456;
  r.completed = true;
  r.grasp_success = true;

  BenchmarkConfig cfg;
  cfg.search.n_envs = 16;
  cfg.search.budget = mcts::Budget::iterations(500);
  CHECK(csv_header() ==
        "case_id,trial,planner,n_envs,budget,actions_used,planning_time_s,completed,"
        "grasp_success");
  CHECK(csv_row(r, cfg) == "case_07,2,pmbs,16,500i,4,0.000,1,1");

  cfg.search.budget = mcts::Budget::seconds(2.0);
  CHECK(csv_row(r, cfg) == "case_07,2,pmbs,16,2s,4,1.235,1,1");

  r.completed = false;
  r.grasp_success = false;
  CHECK(csv_row(r, cfg) == "case_07,2,pmbs,16,2s,4,1.235,0,0");
}

TEST_CASE("run_benchmark writes rows plus a summary and is byte-reproducible") {
  TempDir dir;
  save_scene(lone_disc(), dir.file("easy.json"));
  save_scene(arc_ring(), dir.file("arc.json"));

  BenchmarkConfig cfg = fast_config();
  cfg.case_paths = {dir.file("easy.json"), dir.file("arc.json")};
  cfg.trials = 2;
  cfg.search.budget = mcts::Budget::iterations(150);
  cfg.search.n_envs = 64;
  cfg.out_path = dir.file("out.csv");
  run_benchmark(cfg);

  const auto lines = read_lines(cfg.out_path);
  REQUIRE(lines.size() == 6);  // header + 2 cases x 2 trials + summary
  CHECK(lines[0] == csv_header());
  CHECK(lines[5].rfind("SUMMARY,", 0) == 0);

  // Recompute the summary means from the rows.
  double sum_actions = 0.0;
  int completed = 0;
  for (int i = 1; i <= 4; ++i) {
    const auto cells = split_csv(lines[i]);
    REQUIRE(cells.size() == 9);
    CHECK(cells[2] == "pmbs");
    CHECK(cells[3] == "64");
    CHECK(cells[4] == "150i");
    sum_actions += std::stod(cells[5]);
    completed += std::stoi(cells[7]);
  }
  const auto summary = split_csv(lines[5]);
  REQUIRE(summary.size() == 9);
  CHECK(std::stod(summary[5]) == doctest::Approx(sum_actions / 4.0).epsilon(1e-3));
  CHECK(std::stod(summary[7]) == doctest::Approx(completed / 4.0).epsilon(1e-3));

  cfg.out_path = dir.file("out2.csv");
  run_benchmark(cfg);
  CHECK(read_all(dir.file("out.csv")) == read_all(dir.file("out2.csv")));
}

TEST_CASE("run_benchmark rejects an empty case list") {
  BenchmarkConfig cfg = fast_config();
  CHECK_THROWS_AS(run_benchmark(cfg), BenchError);
}

TEST_CASE("generate_case produces valid deterministic scenes") {
  const WorldState one = generate_case(1, {}, 5);
  CHECK(one.objects.size() == 1);
  CHECK(one.target_index == 0);

  const WorldState a = generate_case(9, {}, 123);
  const WorldState b = generate_case(9, {}, 123);
  CHECK(state_digest(a) == state_digest(b));
  CHECK(state_digest(a) != state_digest(generate_case(9, {}, 124)));

  CHECK_THROWS_AS(generate_case(0, {}, 1), BenchError);

  for (uint64_t seed = 0; seed < 40; ++seed) {
    const WorldState s = generate_case(8, {}, seed);
    CHECK(s.objects.size() == 8);
    s.validate();  // throws on any invariant violation
    // Target sits near the center by construction.
    CHECK(std::abs(s.target().pose.x) <= 0.01);
    CHECK(std::abs(s.target().pose.y) <= 0.01);
  }
}

TEST_CASE("generate_case honors the polygon fraction") {
  ShapeMix all_polygons{1.0};
  int polygons = 0, total = 0;
  for (uint64_t seed = 0; seed < 10; ++seed) {
    for (const PlacedObject& obj : generate_case(8, all_polygons, seed).objects) {
      ++total;
      if (obj.shape.kind == ObjectShape::Kind::ConvexPolygon) ++polygons;
    }
  }
  CHECK(polygons > total * 3 / 4);  // rare degenerate jitter falls back to discs

  for (const PlacedObject& obj : generate_case(8, ShapeMix{0.0}, 3).objects) {
    CHECK(obj.shape.kind == ObjectShape::Kind::Disc);
  }
}

TEST_CASE("motif generators build their structures around a valid scene") {
  const WorldState ring = generate_case_motif(Motif::Ring, 10, {}, 7);
  ring.validate();
  CHECK(ring.objects.size() == 10);
  // Ring blockers hug the central target.
  int close = 0;
  for (size_t i = 1; i < ring.objects.size(); ++i) {
    if (object_object_distance(ring.target(), ring.objects[i]) < 0.006) ++close;
  }
  CHECK(close >= 4);

  const WorldState wall = generate_case_motif(Motif::Wall, 10, {}, 7);
  wall.validate();
  CHECK(wall.objects.size() == 10);
  CHECK(wall.target().pose.y < -0.1);  // pinned near the lower boundary

  const WorldState rnd = generate_case_motif(Motif::Random, 6, {}, 7);
  CHECK(state_digest(rnd) == state_digest(generate_case(6, {}, 7)));
}

#include "pushplan/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "json.hpp"
#include "pushplan/rng.hpp"

namespace pushplan::bench {

namespace {

using nlohmann::json;

uint64_t fnv1a(const std::string& s) {
  uint64_t h = 1469598103934665603ull;
  for (const unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string budget_label(const mcts::Budget& b) {
  std::ostringstream out;
  if (b.mode == mcts::Budget::Mode::Iterations) {
    out << b.max_iterations << "i";
  } else {
    out << b.max_seconds << "s";
  }
  return out.str();
}

json sim_params_json(const pmbs::ParallelConfig& cfg) {
  return json{{"push_distance", cfg.sim.push_distance},
              {"substeps", cfg.sim.substeps},
              {"max_projection_iters", cfg.sim.max_projection_iters},
              {"eps_pen", cfg.sim.eps_pen},
              {"rotation_gain", cfg.sim.rotation_gain},
              {"tip", {cfg.tip.radius, cfg.tip.clearance}}};
}

}  // namespace

uint64_t episode_seed(uint64_t seed_base, const std::string& case_id, int trial) {
  return seed_base + mix_keys(fnv1a(case_id), static_cast<uint64_t>(trial));
}

EpisodeResult run_episode(const WorldState& scene, const std::string& case_id, int trial,
                          const BenchmarkConfig& cfg, uint64_t seed, std::ostream* log) {
  EpisodeResult result;
  result.case_id = case_id;
  result.trial = trial;
  result.planner = cfg.planner;

  WorldState live = scene;
  if (log) {
    json init{{"type", "init"},
              {"case_id", case_id},
              {"trial", trial},
              {"planner", cfg.planner},
              {"sim", sim_params_json(cfg.search)},
              {"state", json::parse(scene_to_json_text(scene))}};
    *log << init.dump() << "\n";
  }

  int step = 0;
  while (result.actions_used < cfg.action_cap) {
    const GraspReport report = graspable(live, cfg.search.grasp, cfg.search.margin_threshold);
    if (!report.graspable && report.best) result.threshold_marginal = true;
    if (report.graspable) {
      result.grasp_attempted = true;
      result.actions_used += 1;
      const auto pose = best_grasp(live, cfg.search.grasp);
      result.grasp_success = pose.has_value();
      result.completed = result.grasp_success;
      if (log) {
        json rec{{"type", "grasp"}, {"success", result.grasp_success}};
        if (pose) {
          rec["x"] = pose->x;
          rec["y"] = pose->y;
          rec["angle_index"] = pose->angle_index;
        }
        *log << rec.dump() << "\n";
      }
      break;
    }

    pmbs::ParallelConfig step_cfg = cfg.search;
    step_cfg.rng_seed = mix_keys(seed, static_cast<uint64_t>(step));
    mcts::SearchResult plan;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      plan = cfg.planner == "serial" ? mcts::run_serial_mcts(live, step_cfg)
                                     : pmbs::run_pmbs(live, step_cfg);
    } catch (const mcts::SearchError&) {
      break;  // no legal pushes: incomplete episode
    }
    result.planning_time_s +=
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const uint64_t pre = state_digest(live);
    bool applied = true;
    try {
      live = resolve_push(live, plan.action, cfg.search.tip, cfg.search.sim);
    } catch (const SimError&) {
      applied = false;  // jammed push executes as a no-op
    }
    result.actions_used += 1;
    ++step;
    if (log) {
      json rec{{"type", "push"},
               {"action", {plan.action.x_s, plan.action.y_s, plan.action.x_e, plan.action.y_e}},
               {"applied", applied},
               {"pre", std::to_string(pre)},
               {"post", std::to_string(state_digest(live))}};
      *log << rec.dump() << "\n";
    }
  }
  return result;
}

std::string csv_header() {
  return "case_id,trial,planner,n_envs,budget,actions_used,planning_time_s,completed,"
         "grasp_success";
}

std::string csv_row(const EpisodeResult& r, const BenchmarkConfig& cfg) {
  std::ostringstream out;
  // Iteration-budget runs report zero planning time so output is
  // byte-reproducible across runs and machines.
  const bool iter_mode = cfg.search.budget.mode == mcts::Budget::Mode::Iterations;
  out << r.case_id << ',' << r.trial << ',' << r.planner << ',' << cfg.search.n_envs << ','
      << budget_label(cfg.search.budget) << ',' << r.actions_used << ',';
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", iter_mode ? 0.0 : r.planning_time_s);
  out << buf << ',' << (r.completed ? 1 : 0) << ',' << (r.grasp_success ? 1 : 0);
  return out.str();
}

void run_benchmark(const BenchmarkConfig& cfg) {
  if (cfg.case_paths.empty()) throw BenchError("run_benchmark: no cases");
  std::ofstream file;
  std::ostream* out = &std::cout;
  if (!cfg.out_path.empty()) {
    file.open(cfg.out_path);
    if (!file) throw BenchError("cannot write CSV: " + cfg.out_path);
    out = &file;
  }
  *out << csv_header() << "\n" << std::flush;

  double sum_actions = 0.0, sum_time = 0.0;
  long completed = 0, grasp_ok = 0, grasp_attempts = 0, episodes = 0;
  const bool iter_mode = cfg.search.budget.mode == mcts::Budget::Mode::Iterations;

  for (const std::string& path : cfg.case_paths) {
    const WorldState scene = load_scene(path);
    const std::string case_id = std::filesystem::path(path).stem().string();
    for (int trial = 0; trial < cfg.trials; ++trial) {
      std::ofstream log_file;
      std::ostream* log = nullptr;
      if (!cfg.log_dir.empty()) {
        std::filesystem::create_directories(cfg.log_dir);
        log_file.open(cfg.log_dir + "/" + case_id + "_t" + std::to_string(trial) + ".jsonl");
        log = &log_file;
      }
      const uint64_t seed = episode_seed(cfg.seed_base, case_id, trial);
      const EpisodeResult r = run_episode(scene, case_id, trial, cfg, seed, log);
      *out << csv_row(r, cfg) << "\n" << std::flush;
      sum_actions += r.actions_used;
      sum_time += iter_mode ? 0.0 : r.planning_time_s;
      completed += r.completed ? 1 : 0;
      if (r.grasp_attempted) {
        ++grasp_attempts;
        grasp_ok += r.grasp_success ? 1 : 0;
      }
      ++episodes;
    }
  }

  char buf[160];
  std::snprintf(buf, sizeof buf, "SUMMARY,,%s,%d,%s,%.4f,%.3f,%.4f,%.4f", cfg.planner.c_str(),
                cfg.search.n_envs, budget_label(cfg.search.budget).c_str(),
                sum_actions / episodes, sum_time / episodes,
                static_cast<double>(completed) / episodes,
                grasp_attempts > 0 ? static_cast<double>(grasp_ok) / grasp_attempts : 0.0);
  *out << buf << "\n" << std::flush;
}

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

ObjectShape random_shape(std::mt19937_64& rng, const ShapeMix& mix) {
  const double r = uniform(rng, 0.013, 0.021);
  if (uniform(rng, 0.0, 1.0) >= mix.polygon_fraction) return ObjectShape::disc(r);
  // Slightly irregular convex n-gon of comparable size.
  const int sides = std::uniform_int_distribution<int>(5, 7)(rng);
  Polygon verts;
  for (int i = 0; i < sides; ++i) {
    const double a = 2.0 * M_PI * i / sides + uniform(rng, -0.1, 0.1);
    const double rr = r * uniform(rng, 0.85, 1.0);
    verts.push_back({rr * std::cos(a), rr * std::sin(a)});
  }
  const ObjectShape shape = ObjectShape::polygon(verts);
  try {
    shape.validate();
  } catch (const SceneError&) {
    return ObjectShape::disc(r);  // rare degenerate jitter
  }
  return shape;
}

bool placeable(const WorldState& state, const PlacedObject& candidate, double gap) {
  const double h = state.workspace.half_extent();
  const Vec2 c = candidate.pose.position();
  const double br = candidate.shape.bounding_radius();
  if (std::abs(c.x) + br > h - 0.004 || std::abs(c.y) + br > h - 0.004) return false;
  for (const PlacedObject& other : state.objects) {
    if (object_object_distance(candidate, other) < gap) return false;
  }
  return true;
}

}  // namespace

WorldState generate_case(int n_objects, const ShapeMix& mix, uint64_t seed) {
  if (n_objects < 1) throw BenchError("generate_case: n_objects must be >= 1");
  std::mt19937_64 rng = keyed_rng(seed, 0xCA5E);
  WorldState state;
  state.target_index = 0;

  PlacedObject target;
  target.shape = random_shape(rng, mix);
  target.pose = {uniform(rng, -0.01, 0.01), uniform(rng, -0.01, 0.01), 0.0};
  state.objects.push_back(target);

  int attempts = 0;
  while (static_cast<int>(state.objects.size()) < n_objects) {
    if (++attempts > 10000) throw BenchError("generate_case: rejection sampling exhausted");
    PlacedObject obj;
    obj.shape = random_shape(rng, mix);
    const double radius = std::abs(uniform(rng, 0.0, 0.055)) + 0.03;
    const double angle = uniform(rng, -M_PI, M_PI);
    obj.pose = {radius * std::cos(angle), radius * std::sin(angle),
                wrap_angle(uniform(rng, -M_PI, M_PI))};
    if (!placeable(state, obj, 0.0015)) continue;
    state.objects.push_back(obj);
  }
  state.validate();
  return state;
}

WorldState generate_case_motif(Motif motif, int n_objects, const ShapeMix& mix, uint64_t seed) {
  if (motif == Motif::Random) return generate_case(n_objects, mix, seed);
  std::mt19937_64 rng = keyed_rng(seed, 0x30F1F);
  WorldState state;
  state.target_index = 0;

  PlacedObject target;
  target.shape = ObjectShape::disc(uniform(rng, 0.014, 0.018));
  int placed;
  if (motif == Motif::Ring) {
    target.pose = {uniform(rng, -0.008, 0.008), uniform(rng, -0.008, 0.008), 0.0};
    state.objects.push_back(target);
    const int ring = std::min(n_objects - 1, 6);
    const double phase = uniform(rng, -M_PI, M_PI);
    for (int i = 0; i < ring; ++i) {
      PlacedObject obj;
      obj.shape = ObjectShape::disc(uniform(rng, 0.014, 0.019));
      const double a = phase + 2.0 * M_PI * i / ring + uniform(rng, -0.06, 0.06);
      const double d = target.shape.radius + obj.shape.radius + uniform(rng, 0.002, 0.005);
      obj.pose = {target.pose.x + d * std::cos(a), target.pose.y + d * std::sin(a), 0.0};
      if (placeable(state, obj, 0.0012)) state.objects.push_back(obj);
    }
    placed = static_cast<int>(state.objects.size());
  } else {  // Wall: target pinned near a boundary behind a line of blockers
    const double h = 0.144;
    target.pose = {uniform(rng, -0.02, 0.02), -(h - target.shape.radius - 0.012), 0.0};
    state.objects.push_back(target);
    const int wall = std::min(n_objects - 1, 5);
    for (int i = 0; i < wall; ++i) {
      PlacedObject obj;
      obj.shape = ObjectShape::disc(uniform(rng, 0.015, 0.02));
      const double x = target.pose.x + (i - (wall - 1) / 2.0) * 0.037 + uniform(rng, -0.002, 0.002);
      const double y = target.pose.y + target.shape.radius + obj.shape.radius +
                       uniform(rng, 0.0015, 0.004);
      obj.pose = {x, y, 0.0};
      if (placeable(state, obj, 0.0012)) state.objects.push_back(obj);
    }
    placed = static_cast<int>(state.objects.size());
  }

  // Filler clutter away from the motif core.
  int attempts = 0;
  while (static_cast<int>(state.objects.size()) < n_objects) {
    if (++attempts > 10000) throw BenchError("generate_case_motif: rejection sampling exhausted");
    PlacedObject obj;
    obj.shape = random_shape(rng, mix);
    const double radius = uniform(rng, 0.06, 0.11);
    const double angle = uniform(rng, -M_PI, M_PI);
    obj.pose = {radius * std::cos(angle), radius * std::sin(angle),
                wrap_angle(uniform(rng, -M_PI, M_PI))};
    if (!placeable(state, obj, 0.003)) continue;
    state.objects.push_back(obj);
  }
  (void)placed;
  state.validate();
  return state;
}

bool replay_log(const std::string& path, std::ostream& report) {
  std::ifstream in(path);
  if (!in) {
    report << "cannot open log: " << path << "\n";
    return false;
  }
  std::string line;
  if (!std::getline(in, line)) {
    report << "empty log\n";
    return false;
  }
  json init = json::parse(line);
  if (init.at("type") != "init") {
    report << "first record is not init\n";
    return false;
  }
  WorldState live = scene_from_json_text(init.at("state").dump());
  SimParams sim;
  GripperTip tip;
  if (init.contains("sim")) {
    const json& js = init.at("sim");
    sim.push_distance = js.at("push_distance");
    sim.substeps = js.at("substeps");
    sim.max_projection_iters = js.at("max_projection_iters");
    sim.eps_pen = js.at("eps_pen");
    sim.rotation_gain = js.at("rotation_gain");
    tip.radius = js.at("tip").at(0);
    tip.clearance = js.at("tip").at(1);
  }

  int step = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json rec = json::parse(line);
    const std::string type = rec.at("type");
    if (type == "push") {
      ++step;
      if (std::to_string(state_digest(live)) != rec.at("pre").get<std::string>()) {
        report << "pre-state digest mismatch at push " << step << "\n";
        return false;
      }
      const auto& a = rec.at("action");
      const PushAction push{a.at(0), a.at(1), a.at(2), a.at(3)};
      if (rec.value("applied", true)) {
        live = resolve_push(live, push, tip, sim);
      }
      if (std::to_string(state_digest(live)) != rec.at("post").get<std::string>()) {
        report << "post-state digest mismatch at push " << step << "\n";
        return false;
      }
    } else if (type == "grasp") {
      report << "replay ok: " << step << " pushes, grasp "
             << (rec.at("success").get<bool>() ? "succeeded" : "failed") << "\n";
      return true;
    }
  }
  report << "replay ok: " << step << " pushes, no grasp record\n";
  return true;
}

}  // namespace pushplan::bench

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>

#include "doctest.h"
#include "pushplan/actions.hpp"
#include "pushplan/push_sim.hpp"
#include "pushplan/rng.hpp"
#include "pushplan/worker_pool.hpp"
#include "pushplan/world.hpp"
#include "support/scenes.hpp"

using namespace pushplan;
using pushplan::testing::lone_disc;
using pushplan::testing::random_scene;
using pushplan::testing::two_discs_row;

namespace {

// Reference resolver for disc-only scenes, written independently of the
// production simulator: 4096 sweep substeps, tip and pairwise projection,
// boundary clamping. Used as the oracle for multi-body pushes.
WorldState reference_resolve(const WorldState& state, const PushAction& push,
                             const GripperTip& tip) {
  constexpr int kSubsteps = 4096;
  WorldState out = state;
  const double h = out.workspace.half_extent() - 1e-9;
  for (int step = 1; step <= kSubsteps; ++step) {
    const double t = static_cast<double>(step) / kSubsteps;
    const Vec2 tc{push.x_s + (push.x_e - push.x_s) * t, push.y_s + (push.y_e - push.y_s) * t};
    for (int iter = 0; iter < 256; ++iter) {
      double worst = 0.0;
      for (PlacedObject& obj : out.objects) {
        const Vec2 d = obj.pose.position() - tc;
        const double pen = tip.radius + obj.shape.radius - d.norm();
        if (pen > 0.0) {
          const Vec2 dir = d.norm() > 0.0 ? d * (1.0 / d.norm()) : Vec2{1.0, 0.0};
          obj.pose.x += dir.x * pen;
          obj.pose.y += dir.y * pen;
          worst = std::max(worst, pen);
        }
      }
      for (size_t i = 0; i + 1 < out.objects.size(); ++i) {
        for (size_t j = i + 1; j < out.objects.size(); ++j) {
          PlacedObject& a = out.objects[i];
          PlacedObject& b = out.objects[j];
          const Vec2 d = b.pose.position() - a.pose.position();
          const double pen = a.shape.radius + b.shape.radius - d.norm();
          if (pen > 0.0) {
            const Vec2 dir = d.norm() > 0.0 ? d * (1.0 / d.norm()) : Vec2{1.0, 0.0};
            a.pose.x -= dir.x * pen / 2.0;
            a.pose.y -= dir.y * pen / 2.0;
            b.pose.x += dir.x * pen / 2.0;
            b.pose.y += dir.y * pen / 2.0;
            worst = std::max(worst, pen);
          }
        }
      }
      for (PlacedObject& obj : out.objects) {
        obj.pose.x = std::clamp(obj.pose.x, -h, h);
        obj.pose.y = std::clamp(obj.pose.y, -h, h);
      }
      if (worst <= 1e-7) break;
    }
  }
  return out;
}

PushAction sampled_push(const WorldState& state, uint64_t seed) {
  const auto pushes = sample_pushes(state, 16, GripperTip{});
  REQUIRE(!pushes.empty());
  std::mt19937_64 rng = keyed_rng(seed, 0);
  return pushes[std::uniform_int_distribution<size_t>(0, pushes.size() - 1)(rng)];
}

}  // namespace

TEST_CASE("workspace containment is strict") {
  const Workspace ws;
  CHECK(ws.half_extent() == doctest::Approx(0.144));
  CHECK(ws.cell_size() == doctest::Approx(0.002));
  CHECK(ws.contains_point({0.0, 0.0}));
  CHECK_FALSE(ws.contains_point({0.144, 0.0}));
  CHECK(ws.contains_point({0.1439999, 0.0}));
}

TEST_CASE("shape and scene validation") {
  CHECK_THROWS_AS(ObjectShape::disc(0.0).validate(), SceneError);
  CHECK_THROWS_AS(ObjectShape::disc(-1.0).validate(), SceneError);
  CHECK_NOTHROW(ObjectShape::disc(0.02).validate());

  Polygon cw = {{-0.01, -0.01}, {-0.01, 0.01}, {0.01, 0.01}, {0.01, -0.01}};
  CHECK_THROWS_AS(ObjectShape::polygon(cw).validate(), SceneError);
  Polygon off = {{0.01, 0.01}, {0.03, 0.01}, {0.03, 0.03}, {0.01, 0.03}};  // origin outside
  CHECK_THROWS_AS(ObjectShape::polygon(off).validate(), SceneError);

  WorldState bad = lone_disc();
  bad.target_index = 3;
  CHECK_THROWS_AS(bad.validate(), SceneError);

  WorldState overlap = two_discs_row(0.001);
  overlap.objects[1].pose.x -= 0.01;  // 9 mm penetration
  CHECK_THROWS_AS(overlap.validate(), SceneError);
}

TEST_CASE("push_action_valid checks length and endpoints") {
  const Workspace ws;
  CHECK(push_action_valid({0.0, 0.0, 0.05, 0.0}, 0.05, ws));
  CHECK_FALSE(push_action_valid({0.0, 0.0, 0.06, 0.0}, 0.05, ws));
  CHECK_FALSE(push_action_valid({0.12, 0.0, 0.17, 0.0}, 0.05, ws));  // end outside
  CHECK_FALSE(push_action_valid({0.144, 0.0, 0.094, 0.0}, 0.05, ws));  // start on the line
}

TEST_CASE("in_bounds is strict on centers") {
  WorldState s = lone_disc();
  CHECK(in_bounds(s));
  s.objects[0].pose.x = 0.144;  // exactly on the boundary line
  CHECK_FALSE(in_bounds(s));
  s.objects[0].pose.x = 0.145;  // 1 mm past
  CHECK_FALSE(in_bounds(s));
  s.objects[0].pose.x = 0.1435;
  CHECK(in_bounds(s));
}

TEST_CASE("collides_gripper_start") {
  const WorldState s = lone_disc(0.016);
  const GripperTip tip;
  CHECK_FALSE(collides_gripper_start(s, {0.1, 0.1, 0.05, 0.1}, tip));
  CHECK(collides_gripper_start(s, {0.0, 0.0, 0.05, 0.0}, tip));
  // Touching at exactly radius + tip.radius + clearance is an open
  // intersection and therefore free (1e-9 guards the summation ulp).
  const double d = 0.016 + tip.radius + tip.clearance + 1e-9;
  CHECK_FALSE(collides_gripper_start(s, {d, 0.0, d + 0.05, 0.0}, tip));
  CHECK(collides_gripper_start(s, {d - 1e-6, 0.0, d + 0.05, 0.0}, tip));
  // Tip disc poking out of the workspace also counts as a collision.
  CHECK(collides_gripper_start(s, {0.1435, 0.0, 0.0935, 0.0}, tip));
}

TEST_CASE("state digest is bit-exact identity") {
  const WorldState a = random_scene(42, 7);
  const WorldState b = random_scene(42, 7);
  CHECK(state_digest(a) == state_digest(b));
  WorldState c = a;
  c.objects[2].pose.x += 1e-15;
  CHECK(state_digest(a) != state_digest(c));
}

TEST_CASE("scene JSON round trip") {
  const WorldState original = random_scene(7, 8);
  const std::string text = scene_to_json_text(original);
  const WorldState loaded = scene_from_json_text(text);
  CHECK(loaded == original);
  CHECK(state_digest(loaded) == state_digest(original));

  const std::string path = (std::filesystem::temp_directory_path() / "pushplan_rt.json").string();
  save_scene(original, path);
  CHECK(load_scene(path) == original);
  std::remove(path.c_str());

  CHECK_THROWS_AS(scene_from_json_text("{"), SceneError);
  CHECK_THROWS_AS(scene_from_json_text("{\"objects\": [], \"target_index\": 0}"), SceneError);
  // Loader rejects overlapping scenes.
  WorldState bad = two_discs_row(0.002);
  bad.objects[1].pose.x = 0.02;
  CHECK_THROWS_AS(scene_from_json_text(scene_to_json_text(bad)), SceneError);
}

TEST_CASE("single disc push: closed-form translation") {
  const double r = 0.016;
  const WorldState s = lone_disc(r);
  const GripperTip tip;
  const double gap = 0.004;  // tip surface to disc surface at the start
  const double sx = -(r + tip.radius + gap);
  const PushAction push{sx, 0.0, sx + 0.05, 0.0};
  REQUIRE_FALSE(collides_gripper_start(s, push, tip));
  const WorldState out = resolve_push(s, push, tip);
  CHECK(out.objects[0].pose.x == doctest::Approx(0.05 - gap).epsilon(1e-12));
  CHECK(out.objects[0].pose.y == doctest::Approx(0.0));
  CHECK(out.objects[0].pose.theta == 0.0);  // discs never rotate
}

TEST_CASE("push that touches nothing is the identity") {
  const WorldState s = random_scene(3, 6);
  const PushAction push{0.125, 0.125, 0.075, 0.125};  // far corner, clear of the cluster
  REQUIRE_FALSE(collides_gripper_start(s, push, GripperTip{}));
  const WorldState out = resolve_push(s, push, GripperTip{});
  CHECK(state_digest(out) == state_digest(s));
}

TEST_CASE("two touching discs match the fine-substep reference") {
  const WorldState s = two_discs_row(0.0005);
  const GripperTip tip;
  const double sx = -(0.016 + tip.radius + 0.003);
  const PushAction push{sx, 0.0, sx + 0.05, 0.0};
  const WorldState coarse = resolve_push(s, push, tip);
  const WorldState fine = reference_resolve(s, push, tip);
  for (size_t i = 0; i < s.objects.size(); ++i) {
    CHECK(std::abs(coarse.objects[i].pose.x - fine.objects[i].pose.x) < 1e-3);
    CHECK(std::abs(coarse.objects[i].pose.y - fine.objects[i].pose.y) < 1e-3);
  }
  // Both translated, order along the axis preserved, no residual overlap.
  CHECK(coarse.objects[0].pose.x > 0.0);
  CHECK(coarse.objects[1].pose.x > coarse.objects[0].pose.x);
  CHECK(max_pairwise_penetration(coarse) <= 1e-4);
}

TEST_CASE("random multi-disc pushes match the reference resolver") {
  for (uint64_t seed = 0; seed < 8; ++seed) {
    const WorldState s = random_scene(seed + 100, 6);
    const PushAction push = sampled_push(s, seed);
    WorldState coarse;
    try {
      coarse = resolve_push(s, push, GripperTip{});
    } catch (const SimError&) {
      continue;  // jammed configuration; convergence is tested elsewhere
    }
    const WorldState fine = reference_resolve(s, push, GripperTip{});
    for (size_t i = 0; i < s.objects.size(); ++i) {
      CHECK(std::abs(coarse.objects[i].pose.x - fine.objects[i].pose.x) < 1e-3);
      CHECK(std::abs(coarse.objects[i].pose.y - fine.objects[i].pose.y) < 1e-3);
    }
  }
}

TEST_CASE("resolve_push rejects a colliding start pose") {
  const WorldState s = lone_disc();
  CHECK_THROWS_AS(resolve_push(s, {0.0, 0.0, 0.05, 0.0}, GripperTip{}), SimError);
}

TEST_CASE("determinism, non-penetration, containment" * doctest::description("property")) {
  for (uint64_t seed = 0; seed < 20; ++seed) {
    const WorldState s = random_scene(seed, 4 + static_cast<int>(seed % 6));
    const PushAction push = sampled_push(s, seed);
    WorldState a;
    try {
      a = resolve_push(s, push, GripperTip{});
    } catch (const SimError&) {
      continue;
    }
    const WorldState b = resolve_push(s, push, GripperTip{});
    CHECK(state_digest(a) == state_digest(b));  // pure function, bitwise
    CHECK(max_pairwise_penetration(a) <= 1e-4);
    CHECK(in_bounds(a));
  }
}

TEST_CASE("locality: far objects are untouched bitwise" * doctest::description("property")) {
  int checked = 0;
  for (uint64_t seed = 0; seed < 20; ++seed) {
    WorldState s = random_scene(seed + 50, 6);
    // Two small satellites far outside any contact chain's reach.
    s.objects.push_back({ObjectShape::disc(0.01), {0.13, 0.13, 0.0}});
    s.objects.push_back({ObjectShape::disc(0.01), {-0.13, -0.13, 0.0}});
    s.validate();
    const PushAction push = sampled_push(s, seed);
    double max_diam = 0.0;
    for (const PlacedObject& obj : s.objects)
      max_diam = std::max(max_diam, 2.0 * obj.shape.bounding_radius());
    const double reach = 0.05 + GripperTip{}.radius + 2.0 * max_diam;
    WorldState out;
    try {
      out = resolve_push(s, push, GripperTip{});
    } catch (const SimError&) {
      continue;
    }
    for (size_t i = 0; i < s.objects.size(); ++i) {
      const double d = dist_point_segment(s.objects[i].pose.position(), push.start(), push.end()) -
                       s.objects[i].shape.bounding_radius();
      if (d > reach) {
        CHECK(out.objects[i] == s.objects[i]);
        ++checked;
      }
    }
  }
  CHECK(checked > 0);  // the property must actually have been exercised
}

TEST_CASE("batch_resolve equals element-wise resolve_push") {
  std::vector<WorldState> states;
  std::vector<PushAction> pushes;
  for (uint64_t seed = 0; seed < 64; ++seed) {
    const WorldState s = random_scene(seed + 900, 5);
    states.push_back(s);
    pushes.push_back(sampled_push(s, seed));
  }

  const auto inline_results = batch_resolve(states, pushes, GripperTip{}, {}, nullptr);
  WorkerPool pool1(1), pool8(8);
  const auto r1 = batch_resolve(states, pushes, GripperTip{}, {}, &pool1);
  const auto r8 = batch_resolve(states, pushes, GripperTip{}, {}, &pool8);

  for (size_t i = 0; i < states.size(); ++i) {
    WorldState expected;
    bool ok = true;
    try {
      expected = resolve_push(states[i], pushes[i], GripperTip{});
    } catch (const SimError&) {
      ok = false;
    }
    CHECK(inline_results[i].ok() == ok);
    CHECK(r1[i].ok() == ok);
    CHECK(r8[i].ok() == ok);
    if (ok) {
      CHECK(state_digest(*inline_results[i].state) == state_digest(expected));
      CHECK(state_digest(*r1[i].state) == state_digest(expected));
      CHECK(state_digest(*r8[i].state) == state_digest(expected));
    }
  }

  // Degenerate batch of one and N identical pairs.
  const auto single = batch_resolve({&states[0], 1}, {&pushes[0], 1}, GripperTip{}, {}, nullptr);
  CHECK(single.size() == 1);
  const std::vector<WorldState> same(8, states[0]);
  const std::vector<PushAction> same_p(8, pushes[0]);
  const auto rep = batch_resolve(same, same_p, GripperTip{}, {}, &pool8);
  for (const auto& r : rep) CHECK(state_digest(*r.state) == state_digest(*rep[0].state));
}

TEST_CASE("batch_resolve reports per-element errors without aborting siblings") {
  const WorldState good = lone_disc();
  std::vector<WorldState> states{good, good};
  std::vector<PushAction> pushes{{0.0, 0.0, 0.05, 0.0},  // starts inside the disc
                                 sampled_push(good, 1)};
  const auto results = batch_resolve(states, pushes, GripperTip{}, {}, nullptr);
  CHECK_FALSE(results[0].ok());
  CHECK(!results[0].error.empty());
  CHECK(results[1].ok());
}

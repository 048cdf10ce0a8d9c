#include "pushplan/push_sim.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pushplan/worker_pool.hpp"

namespace pushplan {

namespace {

Overlap tip_object_overlap(Vec2 tip_center, double tip_radius, const PlacedObject& obj) {
  if (obj.shape.kind == ObjectShape::Kind::Disc) {
    return disc_disc_overlap(tip_center, tip_radius, obj.pose.position(), obj.shape.radius);
  }
  return disc_polygon_overlap(tip_center, tip_radius, obj.world_polygon());
}

Overlap object_pair_overlap(const PlacedObject& a, const PlacedObject& b) {
  const bool da = a.shape.kind == ObjectShape::Kind::Disc;
  const bool db = b.shape.kind == ObjectShape::Kind::Disc;
  if (da && db)
    return disc_disc_overlap(a.pose.position(), a.shape.radius, b.pose.position(), b.shape.radius);
  if (da) return disc_polygon_overlap(a.pose.position(), a.shape.radius, b.world_polygon());
  if (db) {
    Overlap o = disc_polygon_overlap(b.pose.position(), b.shape.radius, a.world_polygon());
    o.dir = -o.dir;
    return o;
  }
  return polygon_polygon_overlap(a.world_polygon(), b.world_polygon());
}

// Translate an object and, for polygons, rotate about the pose origin by the
// tangential component of the contact displacement over the lever arm.
void apply_contact_motion(PlacedObject& obj, Vec2 translation, Vec2 contact, double gain) {
  obj.pose.x += translation.x;
  obj.pose.y += translation.y;
  if (obj.shape.kind != ObjectShape::Kind::ConvexPolygon || gain == 0.0) return;
  const Vec2 lever = contact - obj.pose.position();
  const double lever2 = lever.norm2();
  if (lever2 < 1e-12) return;
  double dtheta = gain * lever.cross(translation) / lever2;
  dtheta = std::clamp(dtheta, -0.2, 0.2);
  obj.pose.theta = wrap_angle(obj.pose.theta + dtheta);
}

void clamp_to_boundary(WorldState& state) {
  const double h = state.workspace.half_extent() - state.workspace.boundary_margin - 1e-9;
  for (PlacedObject& obj : state.objects) {
    obj.pose.x = std::clamp(obj.pose.x, -h, h);
    obj.pose.y = std::clamp(obj.pose.y, -h, h);
  }
}

}  // namespace

WorldState resolve_push(const WorldState& state, const PushAction& push,
                        const GripperTip& tip, const SimParams& params) {
  if (collides_gripper_start(state, push, tip)) {
    throw SimError("resolve_push: gripper start pose collides or leaves the workspace");
  }

  WorldState out = state;
  const size_t n = out.objects.size();
  const Vec2 start = push.start();
  const Vec2 delta = (push.end() - start) * (1.0 / params.substeps);
  const double sweep_reach = params.push_distance + tip.radius;

  // Objects that can never be reached by the sweep or by contact chains are
  // skipped wholesale; everything else participates in projection.
  std::vector<char> active(n, 0);
  {
    double max_diam = 0.0;
    for (const PlacedObject& obj : out.objects)
      max_diam = std::max(max_diam, 2.0 * obj.shape.bounding_radius());
    const double reach = sweep_reach + 2.0 * max_diam;
    for (size_t i = 0; i < n; ++i) {
      const double d = dist_point_segment(out.objects[i].pose.position(), start, push.end());
      active[i] = d <= reach + out.objects[i].shape.bounding_radius() ? 1 : 0;
    }
  }

  double residual = 0.0;
  for (int step = 1; step <= params.substeps; ++step) {
    const Vec2 tip_center = start + delta * step;
    for (int iter = 0; iter < params.max_projection_iters; ++iter) {
      double max_pen = 0.0;
      residual = 0.0;
      for (size_t i = 0; i < n; ++i) {
        if (!active[i]) continue;
        PlacedObject& obj = out.objects[i];
        const double reach = tip.radius + obj.shape.bounding_radius();
        if ((obj.pose.position() - tip_center).norm2() > reach * reach) continue;
        const Overlap o = tip_object_overlap(tip_center, tip.radius, obj);
        if (o.depth > 0.0) {
          apply_contact_motion(obj, o.dir * o.depth, o.contact, params.rotation_gain);
          max_pen = std::max(max_pen, o.depth);
        }
      }
      for (size_t i = 0; i + 1 < n; ++i) {
        if (!active[i]) continue;
        for (size_t j = i + 1; j < n; ++j) {
          if (!active[j]) continue;
          PlacedObject& a = out.objects[i];
          PlacedObject& b = out.objects[j];
          const double reach = a.shape.bounding_radius() + b.shape.bounding_radius();
          if ((a.pose.position() - b.pose.position()).norm2() > reach * reach) continue;
          const Overlap o = object_pair_overlap(a, b);
          if (o.depth > 0.0) {
            apply_contact_motion(a, -o.dir * (0.5 * o.depth), o.contact, params.rotation_gain);
            apply_contact_motion(b, o.dir * (0.5 * o.depth), o.contact, params.rotation_gain);
            max_pen = std::max(max_pen, o.depth);
            residual = std::max(residual, o.depth);
          }
        }
      }
      clamp_to_boundary(out);
      if (max_pen <= params.eps_pen) break;
    }
  }

  const double final_pen = max_pairwise_penetration(out);
  if (final_pen > params.eps_pen) {
    std::ostringstream msg;
    msg << "resolve_push: projection did not converge, residual penetration " << final_pen << " m";
    throw SimError(msg.str());
  }
  return out;
}

std::vector<PushResult> batch_resolve(std::span<const WorldState> states,
                                      std::span<const PushAction> pushes,
                                      const GripperTip& tip, const SimParams& params,
                                      WorkerPool* pool) {
  if (states.size() != pushes.size())
    throw SimError("batch_resolve: states and pushes must have equal length");
  std::vector<PushResult> results(states.size());
  const auto run_one = [&](int i) {
    try {
      results[i].state = resolve_push(states[i], pushes[i], tip, params);
    } catch (const std::exception& e) {
      results[i].error = e.what();
    }
  };
  if (pool) {
    pool->parallel_for(static_cast<int>(states.size()), run_one);
  } else {
    for (int i = 0; i < static_cast<int>(states.size()); ++i) run_one(i);
  }
  return results;
}

}  // namespace pushplan

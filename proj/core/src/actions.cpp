#include "pushplan/actions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pushplan {

namespace {

// Distance from the object center to its contour along direction d.
double contour_radius(const PlacedObject& obj, Vec2 d) {
  if (obj.shape.kind == ObjectShape::Kind::Disc) return obj.shape.radius;
  // Ray from the pose origin; the local origin is inside the polygon.
  const Vec2 dl = d.rotated(-obj.pose.theta);
  double best = 0.0;
  const Polygon& poly = obj.shape.vertices;
  const size_t n = poly.size();
  for (size_t i = 0; i < n; ++i) {
    const Vec2 a = poly[i];
    const Vec2 b = poly[(i + 1) % n];
    const Vec2 e = b - a;
    const double denom = dl.cross(e);
    if (std::abs(denom) < 1e-15) continue;
    const double t = a.cross(e) / denom;   // along the ray
    const double s = a.cross(dl) / denom;  // along the edge
    if (t > 0.0 && s >= -1e-12 && s <= 1.0 + 1e-12) best = std::max(best, t);
  }
  return best;
}

double rect_min_wall_clearance(const Polygon& rect, const Workspace& ws) {
  const double h = ws.half_extent();
  double best = std::numeric_limits<double>::infinity();
  for (const Vec2& p : rect) {
    best = std::min(best, std::min(h - std::abs(p.x), h - std::abs(p.y)));
  }
  return best;
}

double rect_object_distance(const Polygon& rect, const PlacedObject& obj) {
  if (obj.shape.kind == ObjectShape::Kind::Disc) {
    const double sd = signed_dist_point_polygon(obj.pose.position(), rect);
    return std::max(0.0, sd - obj.shape.radius);
  }
  return dist_polygon_polygon(rect, obj.world_polygon());
}

}  // namespace

std::vector<PushAction> sample_pushes(const WorldState& state, int n_per_object,
                                      const GripperTip& tip, double push_distance) {
  std::vector<PushAction> pushes;
  if (n_per_object < 1) return pushes;
  const double offset = tip.radius + tip.clearance + 1e-9;
  for (const PlacedObject& obj : state.objects) {
    const Vec2 center = obj.pose.position();
    for (int k = 0; k < n_per_object; ++k) {
      const double angle = 2.0 * M_PI * k / n_per_object;
      const Vec2 d{std::cos(angle), std::sin(angle)};
      const double cr = contour_radius(obj, d);
      if (cr <= 0.0) continue;
      const Vec2 start = center + d * (cr + offset);
      const Vec2 dir = (center - start).normalized();
      const Vec2 end = start + dir * push_distance;
      PushAction push{start.x, start.y, end.x, end.y};
      if (!push_action_valid(push, push_distance, state.workspace)) continue;
      if (collides_gripper_start(state, push, tip)) continue;
      pushes.push_back(push);
    }
  }
  return pushes;
}

FingerPair grasp_fingers(const WorldState& state, const GraspGeometry& geom, int angle_index) {
  const PlacedObject& target = state.target();
  const double angle = 2.0 * M_PI * angle_index / kGraspAngles;
  const Vec2 u{std::cos(angle), std::sin(angle)};
  const Vec2 v = u.perp();

  double lo_u, hi_u, lo_v, hi_v;
  if (target.shape.kind == ObjectShape::Kind::Disc) {
    const double cu = target.pose.position().dot(u);
    const double cv = target.pose.position().dot(v);
    lo_u = cu - target.shape.radius;
    hi_u = cu + target.shape.radius;
    lo_v = cv - target.shape.radius;
    hi_v = cv + target.shape.radius;
  } else {
    const Polygon poly = target.world_polygon();
    hi_u = support_extent(poly, u);
    lo_u = -support_extent(poly, -u);
    hi_v = support_extent(poly, v);
    lo_v = -support_extent(poly, -v);
  }

  FingerPair fp;
  fp.extent = hi_u - lo_u;
  fp.center = u * ((lo_u + hi_u) / 2.0) + v * ((lo_v + hi_v) / 2.0);

  const double ht = geom.finger_thickness / 2.0;
  const double hw = geom.finger_width / 2.0;
  const auto rect_at = [&](double offset_u) {
    const Vec2 c = fp.center + u * offset_u;
    return Polygon{c - u * ht - v * hw, c + u * ht - v * hw,
                   c + u * ht + v * hw, c - u * ht + v * hw};
  };
  fp.a = rect_at(-(geom.opening / 2.0 + ht));
  fp.b = rect_at(geom.opening / 2.0 + ht);
  return fp;
}

GraspReport graspable(const WorldState& state, const GraspGeometry& geom,
                      double margin_threshold) {
  GraspReport report;
  double best_margin = -1.0;
  std::optional<GraspAction> best;
  for (int k = 0; k < kGraspAngles; ++k) {
    const FingerPair fp = grasp_fingers(state, geom, k);
    if (!(fp.extent < geom.opening - 2.0 * geom.approach_clearance)) continue;
    if (std::min(rect_min_wall_clearance(fp.a, state.workspace),
                 rect_min_wall_clearance(fp.b, state.workspace)) <= 0.0)
      continue;  // a finger exits the workspace: infeasible, but not a margin term
    double margin = state.workspace.side_length;  // cap when unobstructed
    bool feasible = true;
    for (int i = 0; i < static_cast<int>(state.objects.size()); ++i) {
      if (i == state.target_index) continue;
      const double d = std::min(rect_object_distance(fp.a, state.objects[i]),
                                rect_object_distance(fp.b, state.objects[i]));
      if (d <= 0.0) {
        feasible = false;
        break;
      }
      margin = std::min(margin, d);
    }
    if (feasible && margin > best_margin) {
      best_margin = margin;
      best = GraspAction{fp.center.x, fp.center.y, k};
    }
  }
  if (best) {
    report.margin = best_margin;
    report.best = best;
    report.graspable = best_margin >= margin_threshold;
  }
  return report;
}

std::optional<GraspAction> best_grasp(const WorldState& state, const GraspGeometry& geom) {
  return graspable(state, geom, 0.0).best;
}

}  // namespace pushplan

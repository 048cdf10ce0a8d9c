#pragma once

#include <optional>
#include <vector>

#include "pushplan/push_sim.hpp"
#include "pushplan/world.hpp"

namespace pushplan {

inline constexpr int kGraspAngles = 16;  // discretized gripper rotations

struct GraspAction {
  double x = 0.0;
  double y = 0.0;
  int angle_index = 0;  // in [0, kGraspAngles)

  double angle() const { return 2.0 * M_PI * angle_index / kGraspAngles; }
};

struct GraspGeometry {
  double finger_width = 0.02;       // along the jaw face
  double finger_thickness = 0.01;   // along the closing axis
  double opening = 0.085;           // jaw separation
  double approach_clearance = 0.003;
};

struct GraspReport {
  bool graspable = false;
  double margin = 0.0;  // min clearance over the best feasible pose, 0 if none
  std::optional<GraspAction> best;
};

/// Contour push sampling: for each object, n_per_object start points evenly
/// spaced by angle about the object center on the contour offset outward by
/// tip.radius + tip.clearance, each aimed at the object center and trimmed to
/// push_distance. Candidates that collide at the start pose or leave the
/// workspace are discarded. Output order is (object index, angle index).
std::vector<PushAction> sample_pushes(const WorldState& state, int n_per_object,
                                      const GripperTip& tip, double push_distance = 0.05);

/// Geometric graspability sweep over kGraspAngles closing axes: a pose is
/// feasible when the target extent fits inside the opening and neither finger
/// rectangle touches an obstacle or leaves the workspace. margin is the best
/// pose's minimum finger-to-obstacle distance (capped at the workspace side
/// when unobstructed); ties break toward the lowest angle index.
GraspReport graspable(const WorldState& state, const GraspGeometry& geom,
                      double margin_threshold);

/// The pose achieving the maximal margin, or nullopt when no pose is feasible.
std::optional<GraspAction> best_grasp(const WorldState& state, const GraspGeometry& geom);

/// The two finger rectangles (world frame) for a grasp pose on the target.
/// Exposed for oracles and rendering.
struct FingerPair {
  Polygon a;
  Polygon b;
  Vec2 center;      // grasp center point
  double extent;    // target extent along the closing axis
};
FingerPair grasp_fingers(const WorldState& state, const GraspGeometry& geom, int angle_index);

}  // namespace pushplan

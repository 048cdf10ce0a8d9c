#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "pushplan/geometry.hpp"

namespace pushplan {

class SceneError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Workspace {
  double side_length = 0.288;    // meters, centered on the origin
  double boundary_margin = 0.0;  // meters
  int grid_resolution = 144;     // cells per side, rasterized queries only

  double half_extent() const { return side_length / 2.0; }
  double cell_size() const { return side_length / grid_resolution; }
  bool contains_point(Vec2 p) const {
    const double h = half_extent();
    return p.x > -h && p.x < h && p.y > -h && p.y < h;
  }
  void validate() const;
  bool operator==(const Workspace&) const = default;
};

struct ObjectShape {
  enum class Kind { Disc, ConvexPolygon };
  Kind kind = Kind::Disc;
  double radius = 0.0;    // disc only
  Polygon vertices;       // polygon only, CCW in local frame, contains origin

  static ObjectShape disc(double r);
  static ObjectShape polygon(Polygon verts);

  /// Radius of a circumscribing circle about the local origin.
  double bounding_radius() const;
  void validate() const;
};

struct Pose {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;  // radians in [-pi, pi)

  Vec2 position() const { return {x, y}; }
  void validate() const;
};

struct PlacedObject {
  ObjectShape shape;
  Pose pose;

  Polygon world_polygon() const;  // polygon shapes only
  bool operator==(const PlacedObject&) const = default;
};

bool operator==(const ObjectShape& a, const ObjectShape& b);
bool operator==(const Pose& a, const Pose& b);

struct WorldState {
  std::vector<PlacedObject> objects;
  int target_index = 0;
  Workspace workspace;

  const PlacedObject& target() const { return objects.at(target_index); }
  /// Throws SceneError on invariant violation (overlap beyond eps_pen,
  /// out-of-bounds center, bad target index, invalid shape).
  void validate(double eps_pen = 1e-4) const;
  bool operator==(const WorldState&) const = default;
};

struct PushAction {
  double x_s = 0.0, y_s = 0.0, x_e = 0.0, y_e = 0.0;

  Vec2 start() const { return {x_s, y_s}; }
  Vec2 end() const { return {x_e, y_e}; }
  bool operator==(const PushAction&) const = default;
};

struct GripperTip {
  double radius = 0.012;
  double clearance = 0.002;
};

/// Segment length matches push_distance within 1e-9 and both endpoints
/// are strictly inside the workspace.
bool push_action_valid(const PushAction& push, double push_distance, const Workspace& ws);

/// True iff every object center lies strictly inside the boundary minus margin.
bool in_bounds(const WorldState& state);

/// True iff the tip disc (radius + clearance) at the push start intersects any
/// object (open intersection) or is not contained in the workspace.
bool collides_gripper_start(const WorldState& state, const PushAction& push, const GripperTip& tip);

/// Pairwise overlap depth and tip-free penetration diagnostics.
double max_pairwise_penetration(const WorldState& state);

/// Distance from the boundary of a placed object to a point, 0 when inside.
double object_point_distance(const PlacedObject& obj, Vec2 p);
/// Boundary distance between two placed objects, 0 when overlapping.
double object_object_distance(const PlacedObject& a, const PlacedObject& b);

/// FNV-1a over the poses, shapes and target index; bit-exact state identity.
uint64_t state_digest(const WorldState& state);

/// JSON scene files (see docs/schema in README). Loader validates invariants.
WorldState load_scene(const std::string& path);
WorldState scene_from_json_text(const std::string& text);
std::string scene_to_json_text(const WorldState& state);
void save_scene(const WorldState& state, const std::string& path);

}  // namespace pushplan

#include "pushplan/world.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace pushplan {

void Workspace::validate() const {
  if (!(side_length > 0.0)) throw SceneError("workspace side_length must be > 0");
  if (grid_resolution < 16) throw SceneError("workspace grid_resolution must be >= 16");
  if (boundary_margin < 0.0 || boundary_margin >= half_extent())
    throw SceneError("workspace boundary_margin out of range");
}

ObjectShape ObjectShape::disc(double r) {
  ObjectShape s;
  s.kind = Kind::Disc;
  s.radius = r;
  return s;
}

ObjectShape ObjectShape::polygon(Polygon verts) {
  ObjectShape s;
  s.kind = Kind::ConvexPolygon;
  s.vertices = std::move(verts);
  return s;
}

double ObjectShape::bounding_radius() const {
  if (kind == Kind::Disc) return radius;
  double best = 0.0;
  for (const Vec2& v : vertices) best = std::max(best, v.norm());
  return best;
}

void ObjectShape::validate() const {
  if (kind == Kind::Disc) {
    if (!(radius > 0.0) || !std::isfinite(radius)) throw SceneError("disc radius must be > 0");
  } else {
    if (!is_ccw_convex(vertices))
      throw SceneError("polygon must be convex, non-degenerate and counter-clockwise");
    if (!point_in_convex({0.0, 0.0}, vertices))
      throw SceneError("polygon must contain its local origin");
    for (const Vec2& v : vertices)
      if (!std::isfinite(v.x) || !std::isfinite(v.y)) throw SceneError("polygon vertex not finite");
  }
}

void Pose::validate() const {
  if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(theta))
    throw SceneError("pose values must be finite");
}

Polygon PlacedObject::world_polygon() const {
  Polygon out;
  out.reserve(shape.vertices.size());
  for (const Vec2& v : shape.vertices) out.push_back(pose.position() + v.rotated(pose.theta));
  return out;
}

bool operator==(const ObjectShape& a, const ObjectShape& b) {
  return a.kind == b.kind && a.radius == b.radius && a.vertices == b.vertices;
}

bool operator==(const Pose& a, const Pose& b) {
  return a.x == b.x && a.y == b.y && a.theta == b.theta;
}

void WorldState::validate(double eps_pen) const {
  workspace.validate();
  if (objects.empty()) throw SceneError("scene has no objects");
  if (target_index < 0 || target_index >= static_cast<int>(objects.size()))
    throw SceneError("target_index out of range");
  for (const PlacedObject& obj : objects) {
    obj.shape.validate();
    obj.pose.validate();
  }
  if (!in_bounds(*this)) throw SceneError("object center outside workspace boundary");
  if (max_pairwise_penetration(*this) > eps_pen)
    throw SceneError("objects overlap beyond penetration tolerance");
}

bool push_action_valid(const PushAction& push, double push_distance, const Workspace& ws) {
  const double len = (push.end() - push.start()).norm();
  if (std::abs(len - push_distance) > 1e-9) return false;
  return ws.contains_point(push.start()) && ws.contains_point(push.end());
}

bool in_bounds(const WorldState& state) {
  const double h = state.workspace.half_extent() - state.workspace.boundary_margin;
  for (const PlacedObject& obj : state.objects) {
    const Vec2 c = obj.pose.position();
    if (!(std::abs(c.x) < h && std::abs(c.y) < h)) return false;
  }
  return true;
}

double object_point_distance(const PlacedObject& obj, Vec2 p) {
  if (obj.shape.kind == ObjectShape::Kind::Disc) {
    return std::max(0.0, (p - obj.pose.position()).norm() - obj.shape.radius);
  }
  const Polygon poly = obj.world_polygon();
  return std::max(0.0, signed_dist_point_polygon(p, poly));
}

double object_object_distance(const PlacedObject& a, const PlacedObject& b) {
  const bool da = a.shape.kind == ObjectShape::Kind::Disc;
  const bool db = b.shape.kind == ObjectShape::Kind::Disc;
  if (da && db) {
    return std::max(0.0, (a.pose.position() - b.pose.position()).norm() -
                             a.shape.radius - b.shape.radius);
  }
  if (da) return dist_disc_polygon(a.pose.position(), a.shape.radius, b.world_polygon());
  if (db) return dist_disc_polygon(b.pose.position(), b.shape.radius, a.world_polygon());
  return dist_polygon_polygon(a.world_polygon(), b.world_polygon());
}

namespace {

Overlap object_overlap_impl(const PlacedObject& a, const PlacedObject& b) {
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

}  // namespace

double max_pairwise_penetration(const WorldState& state) {
  double worst = 0.0;
  const size_t n = state.objects.size();
  for (size_t i = 0; i + 1 < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      const PlacedObject& a = state.objects[i];
      const PlacedObject& b = state.objects[j];
      const double reach = a.shape.bounding_radius() + b.shape.bounding_radius();
      if ((a.pose.position() - b.pose.position()).norm2() > reach * reach) continue;
      worst = std::max(worst, object_overlap_impl(a, b).depth);
    }
  }
  return worst;
}

bool collides_gripper_start(const WorldState& state, const PushAction& push,
                            const GripperTip& tip) {
  const double r = tip.radius + tip.clearance;
  const Vec2 p = push.start();
  const double h = state.workspace.half_extent();
  if (p.x - r < -h || p.x + r > h || p.y - r < -h || p.y + r > h) return true;
  for (const PlacedObject& obj : state.objects) {
    if (object_point_distance(obj, p) < r) return true;
  }
  return false;
}

uint64_t state_digest(const WorldState& state) {
  uint64_t h = 1469598103934665603ull;
  const auto mix = [&h](const void* data, size_t len) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < len; ++i) {
      h ^= p[i];
      h *= 1099511628211ull;
    }
  };
  const auto mix_d = [&mix](double v) { mix(&v, sizeof v); };
  mix(&state.target_index, sizeof state.target_index);
  mix_d(state.workspace.side_length);
  for (const PlacedObject& obj : state.objects) {
    const int kind = static_cast<int>(obj.shape.kind);
    mix(&kind, sizeof kind);
    mix_d(obj.shape.radius);
    for (const Vec2& v : obj.shape.vertices) {
      mix_d(v.x);
      mix_d(v.y);
    }
    mix_d(obj.pose.x);
    mix_d(obj.pose.y);
    mix_d(obj.pose.theta);
  }
  return h;
}

namespace {

using nlohmann::json;

WorldState scene_from_json(const json& doc) {
  WorldState state;
  if (doc.contains("workspace")) {
    const json& w = doc.at("workspace");
    if (w.contains("side_length")) state.workspace.side_length = w.at("side_length").get<double>();
    if (w.contains("boundary_margin"))
      state.workspace.boundary_margin = w.at("boundary_margin").get<double>();
    if (w.contains("grid_resolution"))
      state.workspace.grid_resolution = w.at("grid_resolution").get<int>();
  }
  for (const json& jo : doc.at("objects")) {
    PlacedObject obj;
    const std::string kind = jo.at("kind").get<std::string>();
    if (kind == "disc") {
      obj.shape = ObjectShape::disc(jo.at("radius").get<double>());
    } else if (kind == "polygon") {
      Polygon verts;
      for (const json& jv : jo.at("vertices"))
        verts.push_back({jv.at(0).get<double>(), jv.at(1).get<double>()});
      obj.shape = ObjectShape::polygon(std::move(verts));
    } else {
      throw SceneError("unknown object kind: " + kind);
    }
    const json& jp = jo.at("pose");
    obj.pose = {jp.at(0).get<double>(), jp.at(1).get<double>(),
                wrap_angle(jp.at(2).get<double>())};
    state.objects.push_back(std::move(obj));
  }
  state.target_index = doc.at("target_index").get<int>();
  state.validate();
  return state;
}

json scene_to_json(const WorldState& state) {
  json doc;
  doc["workspace"] = {{"side_length", state.workspace.side_length}};
  if (state.workspace.boundary_margin != 0.0)
    doc["workspace"]["boundary_margin"] = state.workspace.boundary_margin;
  if (state.workspace.grid_resolution != 144)
    doc["workspace"]["grid_resolution"] = state.workspace.grid_resolution;
  doc["objects"] = json::array();
  for (const PlacedObject& obj : state.objects) {
    json jo;
    if (obj.shape.kind == ObjectShape::Kind::Disc) {
      jo["kind"] = "disc";
      jo["radius"] = obj.shape.radius;
    } else {
      jo["kind"] = "polygon";
      jo["vertices"] = json::array();
      for (const Vec2& v : obj.shape.vertices) jo["vertices"].push_back({v.x, v.y});
    }
    jo["pose"] = {obj.pose.x, obj.pose.y, obj.pose.theta};
    doc["objects"].push_back(std::move(jo));
  }
  doc["target_index"] = state.target_index;
  return doc;
}

}  // namespace

WorldState scene_from_json_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw SceneError(std::string("scene parse error: ") + e.what());
  }
  try {
    return scene_from_json(doc);
  } catch (const json::exception& e) {
    throw SceneError(std::string("scene schema error: ") + e.what());
  }
}

WorldState load_scene(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SceneError("cannot open scene file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return scene_from_json_text(buf.str());
}

std::string scene_to_json_text(const WorldState& state) {
  return scene_to_json(state).dump(2);
}

void save_scene(const WorldState& state, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw SceneError("cannot write scene file: " + path);
  out << scene_to_json_text(state) << "\n";
}

}  // namespace pushplan

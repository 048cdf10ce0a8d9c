#pragma once

#include <cmath>
#include <vector>

namespace pushplan {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2 operator-() const { return {-x, -y}; }
  Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
  Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
  bool operator==(const Vec2&) const = default;

  double dot(Vec2 o) const { return x * o.x + y * o.y; }
  double cross(Vec2 o) const { return x * o.y - y * o.x; }
  double norm2() const { return x * x + y * y; }
  double norm() const { return std::sqrt(norm2()); }
  Vec2 perp() const { return {-y, x}; }
  Vec2 normalized() const {
    const double n = norm();
    return n > 0.0 ? Vec2{x / n, y / n} : Vec2{0.0, 0.0};
  }
  Vec2 rotated(double theta) const {
    const double c = std::cos(theta), s = std::sin(theta);
    return {c * x - s * y, s * x + c * y};
  }
};

/// Wrap an angle into [-pi, pi).
double wrap_angle(double theta);

/// Closest point on segment [a, b] to p.
Vec2 closest_point_on_segment(Vec2 p, Vec2 a, Vec2 b);
double dist_point_segment(Vec2 p, Vec2 a, Vec2 b);
double dist_segment_segment(Vec2 a0, Vec2 a1, Vec2 b0, Vec2 b1);

/// Convex polygon, counter-clockwise vertex order.
using Polygon = std::vector<Vec2>;

bool is_ccw_convex(const Polygon& poly);
bool point_in_convex(Vec2 p, const Polygon& poly);
Vec2 polygon_centroid(const Polygon& poly);
double support_extent(const Polygon& poly, Vec2 dir);  // max of v.dot(dir)

/// Closest point on the boundary of poly to p (p may be inside).
Vec2 closest_point_on_polygon(Vec2 p, const Polygon& poly);

/// Signed distance from point to convex polygon: negative inside.
double signed_dist_point_polygon(Vec2 p, const Polygon& poly);

/// Positive penetration depth plus unit direction that moves B out of A.
/// depth <= 0 means no overlap (depth is then the negated separation).
struct Overlap {
  double depth = 0.0;
  Vec2 dir;  // unit, direction to translate B away from A
  Vec2 contact;  // representative contact point (world)
};

Overlap disc_disc_overlap(Vec2 ca, double ra, Vec2 cb, double rb);
Overlap disc_polygon_overlap(Vec2 c, double r, const Polygon& poly);
Overlap polygon_polygon_overlap(const Polygon& a, const Polygon& b);

/// Distance between shape boundaries; 0 when overlapping.
double dist_polygon_polygon(const Polygon& a, const Polygon& b);
double dist_disc_polygon(Vec2 c, double r, const Polygon& poly);

bool polygons_intersect(const Polygon& a, const Polygon& b);

}  // namespace pushplan

#include "pushplan/geometry.hpp"

#include <algorithm>
#include <limits>

namespace pushplan {

double wrap_angle(double theta) {
  const double two_pi = 2.0 * M_PI;
  double t = std::fmod(theta + M_PI, two_pi);
  if (t < 0.0) t += two_pi;
  return t - M_PI;
}

Vec2 closest_point_on_segment(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = ab.norm2();
  if (len2 == 0.0) return a;
  double t = (p - a).dot(ab) / len2;
  t = std::clamp(t, 0.0, 1.0);
  return a + ab * t;
}

double dist_point_segment(Vec2 p, Vec2 a, Vec2 b) {
  return (p - closest_point_on_segment(p, a, b)).norm();
}

double dist_segment_segment(Vec2 a0, Vec2 a1, Vec2 b0, Vec2 b1) {
  // Segments intersect -> 0.
  const auto orient = [](Vec2 p, Vec2 q, Vec2 r) {
    return (q - p).cross(r - p);
  };
  const double d1 = orient(a0, a1, b0);
  const double d2 = orient(a0, a1, b1);
  const double d3 = orient(b0, b1, a0);
  const double d4 = orient(b0, b1, a1);
  if (((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0))) return 0.0;
  return std::min(std::min(dist_point_segment(b0, a0, a1), dist_point_segment(b1, a0, a1)),
                  std::min(dist_point_segment(a0, b0, b1), dist_point_segment(a1, b0, b1)));
}

bool is_ccw_convex(const Polygon& poly) {
  const size_t n = poly.size();
  if (n < 3) return false;
  double area2 = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % n];
    const Vec2& c = poly[(i + 2) % n];
    if ((b - a).cross(c - b) <= 0.0) return false;
    area2 += a.cross(b);
  }
  return area2 > 0.0;
}

bool point_in_convex(Vec2 p, const Polygon& poly) {
  const size_t n = poly.size();
  for (size_t i = 0; i < n; ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % n];
    if ((b - a).cross(p - a) < 0.0) return false;
  }
  return true;
}

Vec2 polygon_centroid(const Polygon& poly) {
  double area2 = 0.0;
  Vec2 c;
  const size_t n = poly.size();
  for (size_t i = 0; i < n; ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % n];
    const double w = a.cross(b);
    area2 += w;
    c += (a + b) * w;
  }
  if (area2 == 0.0) return poly.empty() ? Vec2{} : poly[0];
  return c * (1.0 / (3.0 * area2));
}

double support_extent(const Polygon& poly, Vec2 dir) {
  double best = -std::numeric_limits<double>::infinity();
  for (const Vec2& v : poly) best = std::max(best, v.dot(dir));
  return best;
}

Vec2 closest_point_on_polygon(Vec2 p, const Polygon& poly) {
  Vec2 best;
  double best_d = std::numeric_limits<double>::infinity();
  const size_t n = poly.size();
  for (size_t i = 0; i < n; ++i) {
    const Vec2 q = closest_point_on_segment(p, poly[i], poly[(i + 1) % n]);
    const double d = (p - q).norm2();
    if (d < best_d) {
      best_d = d;
      best = q;
    }
  }
  return best;
}

double signed_dist_point_polygon(Vec2 p, const Polygon& poly) {
  const double d = (p - closest_point_on_polygon(p, poly)).norm();
  return point_in_convex(p, poly) ? -d : d;
}

Overlap disc_disc_overlap(Vec2 ca, double ra, Vec2 cb, double rb) {
  Overlap o;
  const Vec2 d = cb - ca;
  const double dist = d.norm();
  o.depth = ra + rb - dist;
  o.dir = dist > 0.0 ? d * (1.0 / dist) : Vec2{1.0, 0.0};
  o.contact = ca + o.dir * ra;
  return o;
}

Overlap disc_polygon_overlap(Vec2 c, double r, const Polygon& poly) {
  Overlap o;
  const Vec2 q = closest_point_on_polygon(c, poly);
  const Vec2 d = q - c;
  const double dist = d.norm();
  o.contact = q;
  if (point_in_convex(c, poly)) {
    // Disc center inside the polygon: push the polygon out past the center.
    o.depth = r + dist;
    o.dir = dist > 0.0 ? d * (1.0 / dist) : Vec2{1.0, 0.0};
  } else {
    o.depth = r - dist;
    o.dir = dist > 0.0 ? d * (1.0 / dist) : Vec2{1.0, 0.0};
  }
  return o;
}

namespace {

// SAT overlap along the edge normals of `a`; returns the minimum overlap.
bool sat_min_overlap(const Polygon& a, const Polygon& b, double& depth, Vec2& axis) {
  const size_t n = a.size();
  for (size_t i = 0; i < n; ++i) {
    const Vec2 edge = a[(i + 1) % n] - a[i];
    const Vec2 normal = Vec2{edge.y, -edge.x}.normalized();  // outward for CCW
    const double a_max = support_extent(a, normal);
    const double b_min = -support_extent(b, -normal);
    const double o = a_max - b_min;
    if (o < depth) {
      depth = o;
      axis = normal;
    }
    if (o <= 0.0) return false;
  }
  return true;
}

}  // namespace

Overlap polygon_polygon_overlap(const Polygon& a, const Polygon& b) {
  Overlap o;
  double depth = std::numeric_limits<double>::infinity();
  Vec2 axis;
  const bool ab = sat_min_overlap(a, b, depth, axis);
  const bool ba = ab && sat_min_overlap(b, a, depth, axis);
  if (!ab || !ba) {
    o.depth = -dist_polygon_polygon(a, b);
    o.dir = (polygon_centroid(b) - polygon_centroid(a)).normalized();
    return o;
  }
  o.depth = depth;
  // Orient the axis so it moves B away from A.
  const Vec2 sep = polygon_centroid(b) - polygon_centroid(a);
  o.dir = sep.dot(axis) >= 0.0 ? axis : -axis;
  o.contact = (closest_point_on_polygon(polygon_centroid(b), a) +
               closest_point_on_polygon(polygon_centroid(a), b)) * 0.5;
  return o;
}

double dist_polygon_polygon(const Polygon& a, const Polygon& b) {
  if (polygons_intersect(a, b)) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  const size_t n = a.size(), m = b.size();
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < m; ++j)
      best = std::min(best, dist_segment_segment(a[i], a[(i + 1) % n], b[j], b[(j + 1) % m]));
  return best;
}

double dist_disc_polygon(Vec2 c, double r, const Polygon& poly) {
  const double sd = signed_dist_point_polygon(c, poly);
  return std::max(0.0, sd - r);
}

bool polygons_intersect(const Polygon& a, const Polygon& b) {
  double depth = std::numeric_limits<double>::infinity();
  Vec2 axis;
  return sat_min_overlap(a, b, depth, axis) && sat_min_overlap(b, a, depth, axis);
}

}  // namespace pushplan

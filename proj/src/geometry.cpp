#include "isocluster/geometry.hpp"

#include <algorithm>

namespace isocluster {

double polar_angle(Vec2 v) {
  double a = std::atan2(v.y, v.x);
  if (a < 0.0) a += kTwoPi;
  if (a >= kTwoPi) a -= kTwoPi;
  return a;
}

double angle_between(Vec2 a, Vec2 b) {
  return std::atan2(std::abs(cross(a, b)), dot(a, b));
}

double ccw_angle(Vec2 a, Vec2 b) {
  double t = std::atan2(cross(a, b), dot(a, b));
  if (t < 0.0) t += kTwoPi;
  return t;
}

double signed_area(const Polyline& polygon) {
  double s = 0.0;
  const std::size_t n = polygon.size();
  for (std::size_t i = 0; i < n; ++i) s += cross(polygon[i], polygon[(i + 1) % n]);
  return 0.5 * s;
}

SegmentHit intersect_segments(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  SegmentHit out;
  const Vec2 r = b - a, s = d - c, q = c - a;
  const double denom = cross(r, s);
  const double scale = std::max({norm(r) * norm(s), norm(q) * norm(s), norm(q) * norm(r), 1e-300});
  if (std::abs(denom) <= 1e-14 * scale) {
    if (std::abs(cross(q, r)) > 1e-14 * scale) return out;
    // Collinear: overlap test on the projection onto r (or s when r is degenerate).
    const Vec2 axis = dot(r, r) > 0.0 ? r : s;
    const double rr = dot(axis, axis);
    if (rr == 0.0) {
      out.hit = (a == c);
      out.collinear = out.hit;
      return out;
    }
    const double t0 = dot(c - a, axis) / rr, t1 = dot(d - a, axis) / rr;
    const double rlen = dot(r, axis) / rr;
    const double lo = std::max(0.0, std::min(t0, t1)), hi = std::min(rlen, std::max(t0, t1));
    if (lo <= hi + 1e-14) {
      out.hit = true;
      out.collinear = true;
      out.t = lo;
    }
    return out;
  }
  const double t = cross(q, s) / denom;
  const double u = cross(q, r) / denom;
  constexpr double kTol = 1e-12;
  if (t < -kTol || t > 1.0 + kTol || u < -kTol || u > 1.0 + kTol) return out;
  out.hit = true;
  out.t = std::clamp(t, 0.0, 1.0);
  out.u = std::clamp(u, 0.0, 1.0);
  return out;
}

bool point_in_polygon(const Polyline& polygon, Vec2 p) {
  bool inside = false;
  const std::size_t n = polygon.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2 a = polygon[i], b = polygon[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double xs = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < xs) inside = !inside;
    }
  }
  return inside;
}

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 == 0.0) return distance(p, a);
  const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return distance(p, a + ab * t);
}

}  // namespace isocluster

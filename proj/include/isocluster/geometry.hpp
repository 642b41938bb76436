#pragma once

#include <cmath>
#include <vector>

namespace isocluster {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2() = default;
  constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

  constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator-() const { return {-x, -y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
  Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
  Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
  Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
  constexpr bool operator==(const Vec2&) const = default;
};

constexpr Vec2 operator*(double s, Vec2 v) { return v * s; }

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }

// Quarter turns. rotate_cw((x,y)) = (y,-x).
constexpr Vec2 rotate_cw(Vec2 v) { return {v.y, -v.x}; }
constexpr Vec2 rotate_ccw(Vec2 v) { return {-v.y, v.x}; }

inline Vec2 rotate(Vec2 v, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

inline Vec2 unit(double angle) { return {std::cos(angle), std::sin(angle)}; }

inline Vec2 normalized(Vec2 v) { return v / norm(v); }

// Angle of v in [0, 2pi).
double polar_angle(Vec2 v);

// Unsigned angle between two nonzero vectors, in [0, pi].
double angle_between(Vec2 a, Vec2 b);

// Counterclockwise angle from a to b, in [0, 2pi).
double ccw_angle(Vec2 a, Vec2 b);

using Polyline = std::vector<Vec2>;

double signed_area(const Polyline& polygon);

// Segment intersection. Returns true when the closed segments [a,b] and [c,d]
// share a point; t and u are the parameters on each segment when the
// intersection is a single point.
struct SegmentHit {
  bool hit = false;
  bool collinear = false;
  double t = 0.0;
  double u = 0.0;
};
SegmentHit intersect_segments(Vec2 a, Vec2 b, Vec2 c, Vec2 d);

bool point_in_polygon(const Polyline& polygon, Vec2 p);

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b);

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

inline double deg_to_rad(double d) { return d * kPi / 180.0; }
inline double rad_to_deg(double r) { return r * 180.0 / kPi; }

}  // namespace isocluster

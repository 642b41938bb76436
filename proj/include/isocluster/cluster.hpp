#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "isocluster/gauge.hpp"
#include "isocluster/geometry.hpp"

namespace isocluster {

struct Edge {
  std::vector<std::size_t> path;  // vertex indices
  int left = 0;                   // chamber on the left of travel
  int right = 0;
};

// Polygonal cluster: chambers 1..m, exterior 0. Labels listed in `white` are
// treated as uncolored by the perimeter conventions; 0 is always white.
struct Cluster {
  int m = 1;
  std::vector<Vec2> vertices;
  std::vector<Edge> edges;
  std::vector<int> white{0};

  bool is_white(int label) const;
  Polyline edge_points(std::size_t e) const;
};

using VolumeVector = std::vector<double>;

struct Disk {
  Vec2 center;
  double radius = 1.0;
};

// Empty iff the cluster is a valid planar subdivision.
std::vector<std::string> validate(const Cluster& c);

// Per-chamber integral of g. Supported orders: 1, 2 and 5 (others round up to
// the next supported rule; orders above 5 also subdivide each triangle).
VolumeVector weighted_volume(const Cluster& c, const Density& d, int order = 5);

// Integral of g over the fan triangle (domain middle, a, b), signed by
// orientation, with the same rule as weighted_volume.
double fan_triangle_volume(const Density& d, Vec2 a, Vec2 b, int order = 5);

// Weight of one straight piece with vector v whose midpoint is x, given which
// side is colored.
double interface_weight(const Density& d, Vec2 x, Vec2 v, bool left_colored, bool right_colored);

// Sum over segments of interface weights, h at midpoints. `subdivisions`
// splits every segment into equal pieces before evaluation.
double weighted_perimeter(const Cluster& c, const Density& d, int subdivisions = 1);
std::vector<double> perimeter_by_edge(const Cluster& c, const Density& d, int subdivisions = 1);

// Perimeter of the edge portions inside (or outside, with complement) a disk,
// segments clipped exactly at the circle.
double relative_perimeter(const Cluster& c, const Density& d, const Disk& region, bool complement = false);

// Perimeter with the segments lying on a wall polygon left out.
double interior_perimeter(const Cluster& c, const Density& d, const Polyline& wall);
bool segment_on_wall(Vec2 a, Vec2 b, const Polyline& wall, double tol);

// Integral of g over a disk by polar Gauss-Legendre quadrature.
double ball_volume(const Density& d, const Disk& ball);

struct GrowthFit {
  double c_vol = 0.0;
  double eta = 0.0;
  std::vector<double> radii;
  std::vector<double> volumes;  // max over centers, per radius
};

// centers[k] are the ball centers used at radii[k]; a single list is reused
// for every radius.
GrowthFit growth_estimate(const Density& d, const Disk& domain, const std::vector<double>& radii,
                          const std::vector<std::vector<Vec2>>& centers);

struct IsoperimetricCheck {
  bool holds = false;
  double slack = 0.0;
  double perimeter = 0.0;
  double bound = 0.0;
  double volume = 0.0;
};

IsoperimetricCheck isoperimetric_check(const Polyline& polygon, const Density& d, double c_vol, double eta);

// One-chamber cluster bounded by a closed polygon (either orientation).
Cluster single_chamber(const Polyline& polygon);

// Signed shoelace area of each chamber 1..m.
std::vector<double> chamber_areas(const Cluster& c);

// Pairs of segments that intersect away from shared vertices. Segments are
// given as vertex index pairs; the result lists index pairs into `segments`.
std::vector<std::pair<std::size_t, std::size_t>> find_crossings(
    const std::vector<Vec2>& vertices, const std::vector<std::pair<std::size_t, std::size_t>>& segments,
    bool stop_at_first = false);

}  // namespace isocluster

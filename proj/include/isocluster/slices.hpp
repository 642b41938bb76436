#pragma once

#include <string>
#include <vector>

#include "isocluster/gauge.hpp"
#include "isocluster/steiner.hpp"

namespace isocluster {

// Radii of the unit disk around the origin. colors[k] labels the sector from
// radius k to radius k+1 counterclockwise; kWhite marks the exterior.
struct SliceConfig {
  std::vector<double> angles;  // radians, strictly increasing, span < 2pi
  std::vector<int> colors;
  Gauge gauge = Gauge::euclidean();  // frozen normal density at the center

  // Checks the input and merges adjacent white sectors.
  static SliceConfig make(std::vector<double> angles, std::vector<int> colors, Gauge gauge);
  static SliceConfig from_degrees(const std::vector<double>& degrees, std::vector<int> colors, Gauge gauge);

  int size() const { return static_cast<int>(angles.size()); }
  Vec2 point(int k) const;  // endpoint on the unit circle
};

// Piecewise coloring of the disk: sectors around `center` bounded by the rays
// to `ends`, then triangles painted over in order (the last one wins).
struct Coloring {
  struct Triangle {
    Vec2 a, b, c;
    int color = kWhite;
  };
  Vec2 center;
  std::vector<Vec2> ends;
  std::vector<int> sector_colors;
  std::vector<Triangle> overrides;

  // Label at p, or its limit from the side of direction n when p lies on a
  // boundary line.
  int at(Vec2 p, Vec2 n = {0, 0}) const;
};

struct NetworkSegment {
  Vec2 a, b;
  int left = kWhite;
  int right = kWhite;
  double weight = 0.0;
};

enum class MoveFamily {
  none = 0,
  chord = 1,          // small-angle chord across one sector
  white_join = 2,     // chord joining two white sectors
  radius_tilt = 3,    // one radius between colored sectors tilted to eps*neighbor
  white_tilt = 4,     // radius next to a white sector: eps*B or the H/W competitor
  tripod = 5,         // two radii replaced by a triple point at eps*(B+C)
  junction_shift = 6, // center moved to eps*u
};

std::string to_string(MoveFamily f);

struct CompetitorNetwork {
  MoveFamily family = MoveFamily::none;
  int index = -1;
  double eps = 0.0;
  std::vector<NetworkSegment> segments;  // pieces with nonzero weight
  std::vector<Vec2> interior_points;     // the new points (O_eps, H, W, ...)
  double perimeter = 0.0;
  Coloring coloring;
};

struct ImproveResult {
  CompetitorNetwork best;
  double original = 0.0;
  double delta = 0.0;  // original - best.perimeter
  bool kinked = false;
  bool non_strictly_convex = false;
  int candidates = 0;
};

double slice_perimeter(const SliceConfig& config);

// The configuration itself as a network.
CompetitorNetwork slice_network(const SliceConfig& config);

// Best competitor over all move families and the dyadic eps grid, with no
// hypothesis on the number of radii.
ImproveResult best_competitor(const SliceConfig& config);

// Same as best_competitor but requires at least four radii.
ImproveResult improve(const SliceConfig& config);

// Injective path from P to Q inside the region enclosed by tau1 (P to Q) and
// tau2 (Q to P) with len(tau) + len(reverse tau) <= len(tau1) + len(tau2).
Polyline shortcut_path(const Polyline& tau1, const Polyline& tau2, const Gauge& gauge);

}  // namespace isocluster

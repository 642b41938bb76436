#pragma once

#include "isocluster/cluster.hpp"

namespace isocluster {

// Regular n-gon of the given circumradius as a one-chamber cluster.
Cluster regular_polygon(Vec2 center, double radius, int n);

// Standard equal double bubble with arcs of radius r, interior interface on
// the y-axis. Chamber 1 is on the right. `n` segments per outer arc.
Cluster double_bubble(double r, int n_arc, int n_mid);

// Square [-1,1]^2 split into four chambers by straight arms from `junction`
// to the corners; n segments per arm. Chambers 1..4 are east, north, west,
// south. The square sides are edges against the exterior.
Cluster diagonal_cross(Vec2 junction, int n_arm);

// Three chambers in a disk of radius 1: straight arms from `junction` to the
// boundary points at the given angles, closed by a polygonal circle with
// about `n_wall` vertices. Chamber k lies between arm k and arm k+1 (ccw).
Cluster pinned_tripod(Vec2 junction, const double (&angles)[3], int n_arm, int n_wall);

// Vertex positions on the wall polygon used by pinned_tripod.
Polyline tripod_wall(const double (&angles)[3], int n_wall);

Polyline square_wall();

}  // namespace isocluster

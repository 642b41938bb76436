#include "isocluster/builders.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace isocluster {

Cluster regular_polygon(Vec2 center, double radius, int n) {
  if (n < 3) throw std::invalid_argument("regular_polygon needs n >= 3");
  Polyline p;
  for (int k = 0; k < n; ++k) p.push_back(center + unit(kTwoPi * k / n) * radius);
  return single_chamber(p);
}

Cluster double_bubble(double r, int n_arc, int n_mid) {
  if (n_arc < 3 || n_mid < 1) throw std::invalid_argument("double_bubble needs n_arc >= 3, n_mid >= 1");
  Cluster c;
  c.m = 2;
  const double a = r * std::sqrt(3.0) / 2.0;
  c.vertices.push_back({0.0, a});   // 0: top junction
  c.vertices.push_back({0.0, -a});  // 1: bottom junction
  auto add = [&](Vec2 p) {
    c.vertices.push_back(p);
    return c.vertices.size() - 1;
  };
  // Right arc around (r/2, 0), bottom to top counterclockwise (240 degrees).
  Edge right{{1}, 1, 0};
  const Vec2 cr{r / 2, 0.0};
  const double start = polar_angle(c.vertices[1] - cr);
  for (int k = 1; k < n_arc; ++k) right.path.push_back(add(cr + unit(start + (4.0 * kPi / 3.0) * k / n_arc) * r));
  right.path.push_back(0);
  // Left arc around (-r/2, 0), top to bottom counterclockwise.
  Edge left{{0}, 2, 0};
  const Vec2 cl{-r / 2, 0.0};
  const double start_l = polar_angle(c.vertices[0] - cl);
  for (int k = 1; k < n_arc; ++k) left.path.push_back(add(cl + unit(start_l + (4.0 * kPi / 3.0) * k / n_arc) * r));
  left.path.push_back(1);
  // Interface, top to bottom: chamber 1 on the left of travel.
  Edge mid{{0}, 1, 2};
  for (int k = 1; k < n_mid; ++k) mid.path.push_back(add({0.0, a - 2.0 * a * k / n_mid}));
  mid.path.push_back(1);
  c.edges = {right, left, mid};
  return c;
}

Polyline square_wall() { return {{-1, -1}, {1, -1}, {1, 1}, {-1, 1}}; }

Cluster diagonal_cross(Vec2 junction, int n_arm) {
  if (n_arm < 1) throw std::invalid_argument("diagonal_cross needs n_arm >= 1");
  if (!(std::abs(junction.x) < 1.0 && std::abs(junction.y) < 1.0))
    throw std::invalid_argument("diagonal_cross junction must lie inside the square");
  Cluster c;
  c.m = 4;
  c.vertices = {{1, -1}, {1, 1}, {-1, 1}, {-1, -1}, junction};
  const std::size_t j = 4;
  // Sides: east, north, west, south chambers on the left.
  c.edges.push_back({{0, 1}, 1, 0});
  c.edges.push_back({{1, 2}, 2, 0});
  c.edges.push_back({{2, 3}, 3, 0});
  c.edges.push_back({{3, 0}, 4, 0});
  // Arms from the junction to corners NE, NW, SW, SE.
  const std::size_t corner[4] = {1, 2, 3, 0};
  const int left_of[4] = {2, 3, 4, 1};
  const int right_of[4] = {1, 2, 3, 4};
  for (int a = 0; a < 4; ++a) {
    Edge e{{j}, left_of[a], right_of[a]};
    const Vec2 p = c.vertices[corner[a]];
    for (int k = 1; k < n_arm; ++k) {
      c.vertices.push_back(junction + (p - junction) * (static_cast<double>(k) / n_arm));
      e.path.push_back(c.vertices.size() - 1);
    }
    e.path.push_back(corner[a]);
    c.edges.push_back(e);
  }
  return c;
}

Polyline tripod_wall(const double (&angles)[3], int n_wall) {
  std::vector<double> a;
  for (int k = 0; k < n_wall; ++k) a.push_back(kTwoPi * k / n_wall);
  for (double t : angles) {
    double u = std::fmod(t, kTwoPi);
    if (u < 0) u += kTwoPi;
    // Drop grid angles too close to a pin so segments stay comparable.
    a.erase(std::remove_if(a.begin(), a.end(),
                           [&](double x) {
                             const double d = std::abs(std::remainder(x - u, kTwoPi));
                             return d < 0.3 * kTwoPi / n_wall;
                           }),
            a.end());
    a.push_back(u);
  }
  std::sort(a.begin(), a.end());
  Polyline out;
  for (double t : a) out.push_back(unit(t));
  return out;
}

Cluster pinned_tripod(Vec2 junction, const double (&angles)[3], int n_arm, int n_wall) {
  const Polyline wall = tripod_wall(angles, n_wall);
  Cluster c;
  c.m = 3;
  c.vertices = wall;
  std::size_t pin[3];
  for (int k = 0; k < 3; ++k) {
    const Vec2 p = unit(angles[k]);
    std::size_t best = 0;
    for (std::size_t i = 0; i < wall.size(); ++i)
      if (distance(wall[i], p) < distance(wall[best], p)) best = i;
    pin[k] = best;
  }
  if (!(pin[0] < pin[1] && pin[1] < pin[2]))
    throw std::invalid_argument("pinned_tripod angles must be increasing in [0, 2pi)");
  c.vertices.push_back(junction);
  const std::size_t j = c.vertices.size() - 1;
  const std::size_t n = wall.size();
  for (int k = 0; k < 3; ++k) {
    // Wall arc from pin k to pin k+1 counterclockwise bounds chamber k+1.
    Edge w{{}, k + 1, 0};
    for (std::size_t i = pin[k];; i = (i + 1) % n) {
      w.path.push_back(i);
      if (i == pin[(k + 1) % 3]) break;
    }
    c.edges.push_back(w);
  }
  for (int k = 0; k < 3; ++k) {
    // Arm k: chamber k+1 on its left (ccw side), chamber k on its right.
    Edge e{{j}, k + 1, ((k + 2) % 3) + 1};
    const Vec2 p = wall[pin[k]];
    for (int s = 1; s < n_arm; ++s) {
      c.vertices.push_back(junction + (p - junction) * (static_cast<double>(s) / n_arm));
      e.path.push_back(c.vertices.size() - 1);
    }
    e.path.push_back(pin[k]);
    c.edges.push_back(e);
  }
  return c;
}

}  // namespace isocluster

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "isocluster/geometry.hpp"

namespace isocluster {

enum class GaugeKind {
  euclidean,
  lp,
  ellipse,
  smoothed_l1,
  shifted_disk,
  tabulated,
  profile,
  transformed,
  symmetrized,
  scaled,
};

struct Subgradient {
  Vec2 value;
  bool kink = false;
};

namespace detail {
struct GaugeModel;
}

// Convex, positively 1-homogeneous function on the plane. Immutable; copies
// share the underlying model.
class Gauge {
 public:
  static Gauge euclidean();
  // p in [1, inf]; pass INFINITY for the max-norm.
  static Gauge lp(double p);
  static Gauge max_norm();
  // sqrt(v^T M v) with M = [[a, b], [b, c]] positive definite.
  static Gauge ellipse(double a, double b, double c);
  // Four circular arcs of curvature kappa through (+-1, +-1).
  static Gauge smoothed_l1(double kappa);
  // Gauge whose unit ball is the disk B(center, radius); needs |center| < radius.
  static Gauge shifted_disk(Vec2 center, double radius);
  // Periodic cubic interpolation of the profile theta -> value; angles in
  // radians, strictly increasing, spanning less than 2pi.
  static Gauge tabulated(std::vector<double> angles, std::vector<double> values);
  // 1-homogeneous extension of a positive profile on the unit circle.
  static Gauge from_profile(std::function<double(Vec2)> profile, bool symmetric);

  double eval(Vec2 v) const;
  // Gradient at v != 0; at kinks returns a subgradient. Throws on v = 0.
  Vec2 grad(Vec2 v) const;
  Subgradient subgradient(Vec2 v) const;

  GaugeKind kind() const;
  std::string describe() const;
  bool is_c1() const;
  bool is_strictly_convex() const;
  bool is_symmetric() const;

  // v -> eval(M v) with M = [[m00, m01], [m10, m11]].
  Gauge precompose(double m00, double m01, double m10, double m11) const;
  // Gauge whose unit ball is this one's rotated counterclockwise by angle.
  Gauge rotated(double angle) const;
  Gauge scaled(double factor) const;

 private:
  friend Gauge symmetrized(const Gauge& g);
  explicit Gauge(std::shared_ptr<const detail::GaugeModel> m) : model_(std::move(m)) {}
  std::shared_ptr<const detail::GaugeModel> model_;
};

// The tangent gauge v -> h(rotate_cw(v)).
Gauge tangent_gauge(const Gauge& h);
// v -> (g(v) + g(-v)) / 2.
Gauge symmetrized(const Gauge& g);

struct Domain {
  enum class Shape { rectangle, disk };
  Shape shape = Shape::rectangle;
  Vec2 lo{-1.0, -1.0};
  Vec2 hi{1.0, 1.0};
  Vec2 center{0.0, 0.0};
  double radius = 1.0;

  static Domain rectangle(Vec2 lo, Vec2 hi);
  static Domain disk(Vec2 center, double radius);

  bool contains(Vec2 p, double tol = 1e-12) const;
  double diameter() const;
  Vec2 middle() const;
  Vec2 bbox_lo() const;
  Vec2 bbox_hi() const;
};

// Perimeter density h(x, nu) and volume density g(x) on a domain.
class Density {
 public:
  using Field = std::function<double(Vec2)>;
  using Anisotropic = std::function<double(Vec2, Vec2)>;

  // h(x, nu) = factor(x) * base(nu).
  Density(Gauge base, Field factor, Field g, Domain domain);
  static Density uniform(Gauge base, double g = 1.0, Domain domain = Domain::rectangle({-10, -10}, {10, 10}));
  // Fully general h; frozen gauges use finite-difference gradients.
  static Density general(Anisotropic h, Field g, Domain domain);

  double h(Vec2 x, Vec2 nu) const;
  double g(Vec2 x) const;
  Gauge frozen(Vec2 x) const;
  double h_min() const { return h_min_; }
  double h_max() const { return h_max_; }
  const Domain& domain() const { return domain_; }
  bool spatially_constant() const { return constant_h_; }
  bool separable() const { return separable_; }
  const Gauge& base() const { return base_; }

  // Multiplies h by sh and g by sg.
  Density scaled(double sh, double sg) const;

 private:
  Density() = default;
  void compute_bounds();

  Gauge base_ = Gauge::euclidean();
  Field factor_;
  Anisotropic general_;
  Field g_;
  Domain domain_;
  bool separable_ = true;
  bool constant_h_ = false;
  double h_min_ = 0.0;
  double h_max_ = 0.0;
};

// Closed polyline of n points with eval = 1, counterclockwise.
Polyline unit_ball_boundary(const Gauge& g, int n);

struct GridProbe {
  double value = 0.0;
  int resolution = 0;
};

GridProbe strict_convexity_margin(const Gauge& g, int resolution);
GridProbe roundedness_constant(const Gauge& g, int resolution);

double path_length(const Gauge& g, const Polyline& path, bool reversed = false);

// Monte-Carlo lower estimate of the modulus of continuity of h on the domain.
double estimate_modulus(const Density& d, double t, int samples, std::uint64_t seed = 1);

double dini_partial_sum(const std::function<double(double)>& phi, double c, int n);

}  // namespace isocluster

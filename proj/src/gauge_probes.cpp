#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "isocluster/gauge.hpp"

namespace isocluster {

Polyline unit_ball_boundary(const Gauge& g, int n) {
  if (n < 3) throw std::invalid_argument("unit_ball_boundary needs at least 3 samples");
  Polyline out;
  out.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const Vec2 u = unit(kTwoPi * k / n);
    out.push_back(u / g.eval(u));
  }
  return out;
}

namespace {

double profile_scale(const Gauge& g, int n) {
  double s = 0.0;
  for (int k = 0; k < n; ++k) s = std::max(s, g.eval(unit(kTwoPi * k / n)));
  return s;
}

}  // namespace

GridProbe strict_convexity_margin(const Gauge& g, int resolution) {
  if (resolution < 16) throw std::invalid_argument("strict_convexity_margin needs resolution >= 16");
  std::vector<Vec2> dirs(static_cast<std::size_t>(resolution));
  std::vector<double> vals(dirs.size());
  for (int k = 0; k < resolution; ++k) {
    dirs[k] = unit(kTwoPi * k / resolution);
    vals[k] = g.eval(dirs[k]);
  }
  double margin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < resolution; ++i)
    for (int j = i + 1; j < resolution; ++j) {
      const double gap = 0.5 * (vals[i] + vals[j]) - g.eval((dirs[i] + dirs[j]) * 0.5);
      const double a = angle_between(dirs[i], dirs[j]);
      margin = std::min(margin, gap / (a * a));
    }
  if (margin < 1e-12 * profile_scale(g, resolution)) margin = 0.0;
  return {margin, resolution};
}

GridProbe roundedness_constant(const Gauge& g, int resolution) {
  if (resolution < 16) throw std::invalid_argument("roundedness_constant needs resolution >= 16");
  double c = std::numeric_limits<double>::infinity();
  for (int i = 0; i < resolution; ++i) {
    const Vec2 nu = unit(kTwoPi * i / resolution);
    const Vec2 w = rotate_ccw(nu);
    const double base = g.eval(nu);
    for (int k = 1; k <= resolution; ++k) {
      const double t = static_cast<double>(k) / resolution;
      const double val = (0.5 * (g.eval(nu + w * t) + g.eval(nu - w * t)) - base) / (t * t);
      c = std::min(c, val);
    }
  }
  if (c < 1e-12 * profile_scale(g, resolution)) c = 0.0;
  return {c, resolution};
}

double path_length(const Gauge& g, const Polyline& path, bool reversed) {
  double s = 0.0;
  for (std::size_t k = 0; k + 1 < path.size(); ++k) {
    const Vec2 v = path[k + 1] - path[k];
    s += g.eval(reversed ? -v : v);
  }
  return s;
}

double dini_partial_sum(const std::function<double(double)>& phi, double c, int n) {
  if (!(c > 1.0)) throw std::invalid_argument("dini_partial_sum needs C > 1");
  if (n < 0) throw std::invalid_argument("dini_partial_sum needs N >= 0");
  double s = 0.0, t = 1.0;
  for (int k = 0; k <= n; ++k) {
    s += phi(t);
    t /= c;
  }
  return s;
}

}  // namespace isocluster

#include "isocluster/cluster.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace isocluster {

bool Cluster::is_white(int label) const {
  return std::find(white.begin(), white.end(), label) != white.end();
}

Polyline Cluster::edge_points(std::size_t e) const {
  Polyline out;
  out.reserve(edges[e].path.size());
  for (std::size_t v : edges[e].path) out.push_back(vertices[v]);
  return out;
}

namespace {

std::string fmt_point(Vec2 p) {
  std::ostringstream s;
  s.precision(6);
  s << "(" << p.x << ", " << p.y << ")";
  return s.str();
}

bool segments_cross(const std::vector<Vec2>& v, std::pair<std::size_t, std::size_t> s1,
                    std::pair<std::size_t, std::size_t> s2) {
  const auto [a, b] = s1;
  const auto [c, d] = s2;
  const int shared = (a == c) + (a == d) + (b == c) + (b == d);
  if (shared >= 2) return true;
  if (shared == 1) {
    const std::size_t p = (a == c || a == d) ? a : b;
    const std::size_t q1 = (p == a) ? b : a;
    const std::size_t q2 = (p == c) ? d : c;
    const Vec2 u = v[q1] - v[p], w = v[q2] - v[p];
    const double scale = norm(u) * norm(w);
    return std::abs(cross(u, w)) <= 1e-12 * scale && dot(u, w) > 0.0;
  }
  return intersect_segments(v[a], v[b], v[c], v[d]).hit;
}

}  // namespace

std::vector<std::pair<std::size_t, std::size_t>> find_crossings(
    const std::vector<Vec2>& vertices, const std::vector<std::pair<std::size_t, std::size_t>>& segments,
    bool stop_at_first) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  if (segments.size() < 2) return out;
  Vec2 lo = vertices[segments[0].first], hi = lo;
  double total = 0.0;
  for (const auto& [a, b] : segments) {
    for (Vec2 p : {vertices[a], vertices[b]}) {
      lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
      hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
    }
    total += distance(vertices[a], vertices[b]);
  }
  const double extent = std::max({hi.x - lo.x, hi.y - lo.y, 1e-300});
  double cell = std::max(total / static_cast<double>(segments.size()), extent / 512.0);
  const int nx = std::max(1, static_cast<int>(std::ceil((hi.x - lo.x) / cell)) + 1);
  const int ny = std::max(1, static_cast<int>(std::ceil((hi.y - lo.y) / cell)) + 1);
  std::vector<std::vector<std::size_t>> grid(static_cast<std::size_t>(nx) * ny);
  auto cell_of = [&](double x, double lo_, int n) {
    return std::clamp(static_cast<int>(std::floor((x - lo_) / cell)), 0, n - 1);
  };
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const Vec2 p = vertices[segments[i].first], q = vertices[segments[i].second];
    const int x0 = cell_of(std::min(p.x, q.x) - 1e-12 * extent, lo.x, nx);
    const int x1 = cell_of(std::max(p.x, q.x) + 1e-12 * extent, lo.x, nx);
    const int y0 = cell_of(std::min(p.y, q.y) - 1e-12 * extent, lo.y, ny);
    const int y1 = cell_of(std::max(p.y, q.y) + 1e-12 * extent, lo.y, ny);
    for (int gx = x0; gx <= x1; ++gx)
      for (int gy = y0; gy <= y1; ++gy) grid[static_cast<std::size_t>(gx) * ny + gy].push_back(i);
  }
  std::unordered_set<std::uint64_t> seen;
  for (const auto& bucket : grid)
    for (std::size_t i = 0; i < bucket.size(); ++i)
      for (std::size_t j = i + 1; j < bucket.size(); ++j) {
        const std::size_t a = std::min(bucket[i], bucket[j]), b = std::max(bucket[i], bucket[j]);
        const std::uint64_t key = (static_cast<std::uint64_t>(a) << 32) | b;
        if (!seen.insert(key).second) continue;
        if (segments_cross(vertices, segments[a], segments[b])) {
          out.emplace_back(a, b);
          if (stop_at_first) return out;
        }
      }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> chamber_areas(const Cluster& c) {
  std::vector<double> area(static_cast<std::size_t>(c.m) + 1, 0.0);
  for (const Edge& e : c.edges)
    for (std::size_t k = 0; k + 1 < e.path.size(); ++k) {
      const double a = 0.5 * cross(c.vertices[e.path[k]], c.vertices[e.path[k + 1]]);
      if (e.left >= 0 && e.left <= c.m) area[e.left] += a;
      if (e.right >= 0 && e.right <= c.m) area[e.right] -= a;
    }
  return {area.begin() + 1, area.end()};
}

std::vector<std::string> validate(const Cluster& c) {
  std::vector<std::string> out;
  if (c.m < 1) {
    out.push_back("cluster: chamber count must be at least 1");
    return out;
  }
  if (!c.is_white(0)) out.push_back("cluster: label 0 (exterior) must be declared white");
  for (int w : c.white)
    if (w < 0 || w > c.m) out.push_back("cluster: white label " + std::to_string(w) + " out of range");

  bool structural = true;
  for (std::size_t e = 0; e < c.edges.size(); ++e) {
    const Edge& ed = c.edges[e];
    const std::string tag = "edge " + std::to_string(e) + ": ";
    if (ed.path.size() < 2) {
      out.push_back(tag + "needs at least two vertices");
      structural = false;
      continue;
    }
    for (std::size_t v : ed.path)
      if (v >= c.vertices.size()) {
        out.push_back(tag + "vertex index " + std::to_string(v) + " out of range");
        structural = false;
      }
    if (ed.left < 0 || ed.left > c.m || ed.right < 0 || ed.right > c.m) {
      out.push_back(tag + "label out of range");
      structural = false;
    }
    if (ed.left == ed.right) out.push_back(tag + "left label equals right label (" + std::to_string(ed.left) + ")");
  }
  if (!structural) return out;

  for (std::size_t e = 0; e < c.edges.size(); ++e)
    for (std::size_t k = 0; k + 1 < c.edges[e].path.size(); ++k)
      if (c.vertices[c.edges[e].path[k]] == c.vertices[c.edges[e].path[k + 1]])
        out.push_back("edge " + std::to_string(e) + ": zero-length segment at position " + std::to_string(k));

  // Crossings, reported once per pair of edges.
  std::vector<std::pair<std::size_t, std::size_t>> segs;
  std::vector<std::size_t> owner;
  for (std::size_t e = 0; e < c.edges.size(); ++e)
    for (std::size_t k = 0; k + 1 < c.edges[e].path.size(); ++k) {
      segs.emplace_back(c.edges[e].path[k], c.edges[e].path[k + 1]);
      owner.push_back(e);
    }
  std::map<std::pair<std::size_t, std::size_t>, Vec2> crossed;
  for (const auto& [i, j] : find_crossings(c.vertices, segs)) {
    const auto key = std::minmax(owner[i], owner[j]);
    if (!crossed.count(key)) crossed[key] = (c.vertices[segs[i].first] + c.vertices[segs[i].second]) * 0.5;
  }
  for (const auto& [key, where] : crossed) {
    if (key.first == key.second)
      out.push_back("edge " + std::to_string(key.first) + ": self-crossing near " + fmt_point(where));
    else
      out.push_back("edges " + std::to_string(key.first) + " and " + std::to_string(key.second) + " cross near " +
                    fmt_point(where));
  }

  // Angular consistency at every vertex.
  struct Spoke {
    double angle;
    int ccw;
    int cw;
    std::size_t edge;
  };
  std::vector<std::vector<Spoke>> spokes(c.vertices.size());
  for (std::size_t e = 0; e < c.edges.size(); ++e) {
    const Edge& ed = c.edges[e];
    const std::size_t n = ed.path.size();
    for (std::size_t k = 0; k < n; ++k) {
      const Vec2 p = c.vertices[ed.path[k]];
      if (k + 1 < n) spokes[ed.path[k]].push_back({polar_angle(c.vertices[ed.path[k + 1]] - p), ed.left, ed.right, e});
      if (k > 0) spokes[ed.path[k]].push_back({polar_angle(c.vertices[ed.path[k - 1]] - p), ed.right, ed.left, e});
    }
  }
  for (std::size_t v = 0; v < spokes.size(); ++v) {
    auto& sp = spokes[v];
    if (sp.empty()) continue;
    if (sp.size() == 1) {
      out.push_back("vertex " + std::to_string(v) + ": dangling end of edge " + std::to_string(sp[0].edge));
      continue;
    }
    std::sort(sp.begin(), sp.end(), [](const Spoke& a, const Spoke& b) { return a.angle < b.angle; });
    for (std::size_t i = 0; i < sp.size(); ++i) {
      const Spoke& a = sp[i];
      const Spoke& b = sp[(i + 1) % sp.size()];
      if (a.ccw != b.cw) {
        out.push_back("vertex " + std::to_string(v) + ": inconsistent labels between edges " + std::to_string(a.edge) +
                      " and " + std::to_string(b.edge) + " (" + std::to_string(a.ccw) + " vs " +
                      std::to_string(b.cw) + ")");
        break;
      }
    }
  }

  const auto areas = chamber_areas(c);
  for (int i = 1; i <= c.m; ++i)
    if (!(areas[i - 1] > 0.0)) out.push_back("chamber " + std::to_string(i) + ": non-positive area");
  return out;
}

namespace {

void require_valid(const Cluster& c) {
  const auto v = validate(c);
  if (!v.empty()) throw std::invalid_argument("invalid cluster: " + v.front());
}

struct TriRule {
  std::vector<std::array<double, 3>> bary;
  std::vector<double> w;
};

const TriRule& rule_for(int order) {
  static const TriRule r1{{{1.0 / 3, 1.0 / 3, 1.0 / 3}}, {1.0}};
  static const TriRule r2{{{2.0 / 3, 1.0 / 6, 1.0 / 6}, {1.0 / 6, 2.0 / 3, 1.0 / 6}, {1.0 / 6, 1.0 / 6, 2.0 / 3}},
                          {1.0 / 3, 1.0 / 3, 1.0 / 3}};
  static const TriRule r5 = [] {
    TriRule r;
    r.bary.push_back({1.0 / 3, 1.0 / 3, 1.0 / 3});
    r.w.push_back(0.225);
    const double a1 = 0.059715871789770, b1 = 0.470142064105115, w1 = 0.132394152788506;
    const double a2 = 0.797426985353087, b2 = 0.101286507323456, w2 = 0.125939180544827;
    for (int k = 0; k < 3; ++k) {
      std::array<double, 3> p{b1, b1, b1};
      p[k] = a1;
      r.bary.push_back(p);
      r.w.push_back(w1);
    }
    for (int k = 0; k < 3; ++k) {
      std::array<double, 3> p{b2, b2, b2};
      p[k] = a2;
      r.bary.push_back(p);
      r.w.push_back(w2);
    }
    return r;
  }();
  if (order <= 1) return r1;
  if (order == 2) return r2;
  return r5;
}

double triangle_integral(const Density& d, Vec2 a, Vec2 b, Vec2 c, const TriRule& rule, int depth) {
  if (depth > 0) {
    const Vec2 ab = (a + b) * 0.5, bc = (b + c) * 0.5, ca = (c + a) * 0.5;
    return triangle_integral(d, a, ab, ca, rule, depth - 1) + triangle_integral(d, ab, b, bc, rule, depth - 1) +
           triangle_integral(d, ca, bc, c, rule, depth - 1) + triangle_integral(d, ab, bc, ca, rule, depth - 1);
  }
  const double area = 0.5 * cross(b - a, c - a);
  if (area == 0.0) return 0.0;
  double s = 0.0;
  for (std::size_t k = 0; k < rule.w.size(); ++k) {
    const auto& l = rule.bary[k];
    s += rule.w[k] * d.g(a * l[0] + b * l[1] + c * l[2]);
  }
  return area * s;
}

}  // namespace

VolumeVector weighted_volume(const Cluster& c, const Density& d, int order) {
  require_valid(c);
  const TriRule& rule = rule_for(order);
  const int depth = order > 5 ? 1 : 0;
  const Vec2 center = d.domain().middle();
  VolumeVector vol(static_cast<std::size_t>(c.m), 0.0);
  for (const Edge& e : c.edges)
    for (std::size_t k = 0; k + 1 < e.path.size(); ++k) {
      const double t = triangle_integral(d, center, c.vertices[e.path[k]], c.vertices[e.path[k + 1]], rule, depth);
      if (e.left > 0) vol[e.left - 1] += t;
      if (e.right > 0) vol[e.right - 1] -= t;
    }
  return vol;
}

double fan_triangle_volume(const Density& d, Vec2 a, Vec2 b, int order) {
  return triangle_integral(d, d.domain().middle(), a, b, rule_for(order), order > 5 ? 1 : 0);
}

double interface_weight(const Density& d, Vec2 x, Vec2 v, bool left_colored, bool right_colored) {
  if (left_colored && right_colored) return 0.5 * (d.h(x, rotate_cw(v)) + d.h(x, rotate_ccw(v)));
  if (left_colored) return d.h(x, rotate_cw(v));
  if (right_colored) return d.h(x, rotate_ccw(v));
  return 0.0;
}

namespace {

double segment_weight(const Cluster& c, const Density& d, const Edge& e, Vec2 a, Vec2 b, int subdivisions) {
  if (e.left == e.right) return 0.0;
  const bool lc = !c.is_white(e.left), rc = !c.is_white(e.right);
  if (!lc && !rc) return 0.0;
  const Vec2 step = (b - a) / subdivisions;
  double s = 0.0;
  for (int i = 0; i < subdivisions; ++i) s += interface_weight(d, a + step * (i + 0.5), step, lc, rc);
  return s;
}

}  // namespace

std::vector<double> perimeter_by_edge(const Cluster& c, const Density& d, int subdivisions) {
  require_valid(c);
  if (subdivisions < 1) throw std::invalid_argument("subdivisions must be at least 1");
  std::vector<double> out(c.edges.size(), 0.0);
  for (std::size_t i = 0; i < c.edges.size(); ++i) {
    const Edge& e = c.edges[i];
    for (std::size_t k = 0; k + 1 < e.path.size(); ++k)
      out[i] += segment_weight(c, d, e, c.vertices[e.path[k]], c.vertices[e.path[k + 1]], subdivisions);
  }
  return out;
}

double weighted_perimeter(const Cluster& c, const Density& d, int subdivisions) {
  double s = 0.0;
  for (double v : perimeter_by_edge(c, d, subdivisions)) s += v;
  return s;
}

double relative_perimeter(const Cluster& c, const Density& d, const Disk& region, bool complement) {
  require_valid(c);
  constexpr double kTangency = 1e-12;
  double s = 0.0;
  for (const Edge& e : c.edges) {
    const bool lc = !c.is_white(e.left), rc = !c.is_white(e.right);
    if (e.left == e.right || (!lc && !rc)) continue;
    for (std::size_t k = 0; k + 1 < e.path.size(); ++k) {
      const Vec2 a = c.vertices[e.path[k]], b = c.vertices[e.path[k + 1]];
      const Vec2 v = b - a, w = a - region.center;
      // |w + t v|^2 = r^2
      const double qa = dot(v, v), qb = 2.0 * dot(w, v), qc = dot(w, w) - region.radius * region.radius;
      double t0 = 1.0, t1 = 0.0;  // empty inside-interval by default
      const double disc = qb * qb - 4.0 * qa * qc;
      if (disc > kTangency * qa * region.radius * region.radius) {
        const double sq = std::sqrt(disc);
        const double q = -0.5 * (qb + (qb >= 0.0 ? sq : -sq));
        double r0 = q / qa, r1 = (q != 0.0) ? qc / q : -r0;
        if (r0 > r1) std::swap(r0, r1);
        t0 = std::max(r0, 0.0);
        t1 = std::min(r1, 1.0);
      }
      std::vector<std::pair<double, double>> pieces;
      if (!complement) {
        if (t1 > t0) pieces.emplace_back(t0, t1);
      } else if (!(t1 > t0)) {
        pieces.emplace_back(0.0, 1.0);
      } else {
        if (t0 > 0.0) pieces.emplace_back(0.0, t0);
        if (t1 < 1.0) pieces.emplace_back(t1, 1.0);
      }
      for (const auto& [p0, p1] : pieces) {
        const Vec2 piece = v * (p1 - p0);
        s += interface_weight(d, a + v * (0.5 * (p0 + p1)), piece, lc, rc);
      }
    }
  }
  return s;
}

bool segment_on_wall(Vec2 a, Vec2 b, const Polyline& wall, double tol) {
  const std::size_t n = wall.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 p = wall[i], q = wall[(i + 1) % n];
    if (point_segment_distance(a, p, q) <= tol && point_segment_distance(b, p, q) <= tol) return true;
  }
  return false;
}

double interior_perimeter(const Cluster& c, const Density& d, const Polyline& wall) {
  require_valid(c);
  double diam = 0.0;
  for (const Vec2& p : wall) diam = std::max(diam, norm(p - wall.front()));
  const double tol = 1e-9 * std::max(diam, 1e-300);
  double s = 0.0;
  for (const Edge& e : c.edges)
    for (std::size_t k = 0; k + 1 < e.path.size(); ++k) {
      const Vec2 a = c.vertices[e.path[k]], b = c.vertices[e.path[k + 1]];
      if (segment_on_wall(a, b, wall, tol)) continue;
      s += segment_weight(c, d, e, a, b, 1);
    }
  return s;
}

namespace {

// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

}  // namespace

double ball_volume(const Density& d, const Disk& ball) {
  constexpr int kRadial = 48, kAngular = 96;
  static const auto nodes = [] {
    std::pair<std::vector<double>, std::vector<double>> xw;
    gauss_legendre(kRadial, xw.first, xw.second);
    return xw;
  }();
  double s = 0.0;
  for (int i = 0; i < kRadial; ++i) {
    const double rho = 0.5 * ball.radius * (nodes.first[i] + 1.0);
    const double wr = 0.5 * ball.radius * nodes.second[i] * rho;
    double ring = 0.0;
    for (int j = 0; j < kAngular; ++j) ring += d.g(ball.center + unit(kTwoPi * (j + 0.5) / kAngular) * rho);
    s += wr * ring * (kTwoPi / kAngular);
  }
  return s;
}

GrowthFit growth_estimate(const Density& d, const Disk& domain, const std::vector<double>& radii,
                          const std::vector<std::vector<Vec2>>& centers) {
  if (radii.size() < 3) throw std::invalid_argument("growth_estimate needs at least 3 radii");
  if (centers.size() != 1 && centers.size() != radii.size())
    throw std::invalid_argument("growth_estimate needs one center list or one per radius");
  GrowthFit fit;
  for (std::size_t k = 0; k < radii.size(); ++k) {
    const double r = radii[k];
    if (!(r > 0.0)) throw std::invalid_argument("growth_estimate radii must be positive");
    const auto& cs = centers.size() == 1 ? centers[0] : centers[k];
    if (cs.empty()) throw std::invalid_argument("growth_estimate needs at least one center per radius");
    double vmax = 0.0;
    for (const Vec2& c : cs) {
      if (distance(c, domain.center) + r > domain.radius * (1.0 + 1e-12))
        throw std::invalid_argument("growth_estimate ball leaves the domain");
      vmax = std::max(vmax, ball_volume(d, {c, r}));
    }
    fit.radii.push_back(r);
    fit.volumes.push_back(vmax);
  }
  const std::size_t n = radii.size();
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < n; ++k) {
    mx += std::log(fit.radii[k]) / n;
    my += std::log(fit.volumes[k]) / n;
  }
  double sxy = 0, sxx = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double dx = std::log(fit.radii[k]) - mx;
    sxy += dx * (std::log(fit.volumes[k]) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) throw std::invalid_argument("growth_estimate needs distinct radii");
  fit.eta = sxy / sxx;
  for (std::size_t k = 0; k < n; ++k) fit.c_vol = std::max(fit.c_vol, fit.volumes[k] / std::pow(fit.radii[k], fit.eta));
  return fit;
}

Cluster single_chamber(const Polyline& polygon) {
  if (polygon.size() < 3) throw std::invalid_argument("a chamber polygon needs at least 3 vertices");
  Cluster c;
  c.m = 1;
  c.vertices = polygon;
  if (signed_area(polygon) < 0.0) std::reverse(c.vertices.begin(), c.vertices.end());
  Edge e;
  for (std::size_t i = 0; i < c.vertices.size(); ++i) e.path.push_back(i);
  e.path.push_back(0);
  e.left = 1;
  e.right = 0;
  c.edges.push_back(e);
  return c;
}

IsoperimetricCheck isoperimetric_check(const Polyline& polygon, const Density& d, double c_vol, double eta) {
  if (!(c_vol > 0.0 && eta > 0.0)) throw std::invalid_argument("isoperimetric_check needs C_vol > 0 and eta > 0");
  for (const Vec2& p : polygon)
    if (!d.domain().contains(p)) throw std::invalid_argument("isoperimetric_check polygon leaves the domain");
  const Cluster c = single_chamber(polygon);
  IsoperimetricCheck out;
  out.perimeter = weighted_perimeter(c, d);
  out.volume = weighted_volume(c, d)[0];
  out.bound = d.h_min() / std::pow(c_vol, 1.0 / eta) * std::pow(out.volume, 1.0 / eta);
  out.slack = out.perimeter - out.bound;
  out.holds = out.slack >= 0.0;
  return out;
}

}  // namespace isocluster

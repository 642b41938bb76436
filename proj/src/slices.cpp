#include "isocluster/slices.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <thread>

namespace isocluster {

namespace {

constexpr double kLineTol = 1e-13;
constexpr int kEpsSteps = 20;

double sector_angle(const SliceConfig& c, int k) {
  const int n = c.size();
  const double a = c.angles[k], b = k + 1 < n ? c.angles[k + 1] : c.angles[0] + kTwoPi;
  return b - a;
}

// Side test of p against the directed line a->b, resolved by direction n
// when p is on the line. Returns +1 left, -1 right, 0 undecidable.
int side(Vec2 a, Vec2 b, Vec2 p, Vec2 n) {
  const Vec2 e = b - a;
  const double len = norm(e);
  if (!(len > 0.0)) return 0;
  const double s = cross(e, p - a) / len;
  if (s > kLineTol) return 1;
  if (s < -kLineTol) return -1;
  const double t = cross(e, n);
  return t > 0.0 ? 1 : (t < 0.0 ? -1 : 0);
}

bool in_triangle(const Coloring::Triangle& t, Vec2 p, Vec2 n) {
  const double area = cross(t.b - t.a, t.c - t.a);
  if (std::abs(area) <= 1e-300) return false;
  const int o = area > 0.0 ? 1 : -1;
  return side(t.a, t.b, p, n) == o && side(t.b, t.c, p, n) == o && side(t.c, t.a, p, n) == o;
}

int mod(int a, int n) { return ((a % n) + n) % n; }

}  // namespace

int Coloring::at(Vec2 p, Vec2 n) const {
  for (auto it = overrides.rbegin(); it != overrides.rend(); ++it)
    if (in_triangle(*it, p, n)) return it->color;
  const int m = static_cast<int>(ends.size());
  Vec2 v = p - center;
  if (norm(v) <= kLineTol) v = n;
  for (int k = 0; k < m; ++k) {
    const Vec2 r = ends[k] - center;
    const double nr = norm(r);
    if (std::abs(cross(r, v)) / nr <= kLineTol && dot(r, v) > 0.0)
      return cross(r, n) > 0.0 ? sector_colors[k] : sector_colors[mod(k - 1, m)];
  }
  for (int k = 0; k < m; ++k) {
    const Vec2 r0 = ends[k] - center, r1 = ends[(k + 1) % m] - center;
    if (ccw_angle(r0, v) < ccw_angle(r0, r1)) return sector_colors[k];
  }
  return sector_colors[0];
}

SliceConfig SliceConfig::make(std::vector<double> angles, std::vector<int> colors, Gauge gauge) {
  if (angles.size() < 2) throw std::invalid_argument("slice config needs at least two radii");
  if (colors.size() != angles.size()) throw std::invalid_argument("slice config needs one color per sector");
  for (std::size_t k = 0; k + 1 < angles.size(); ++k)
    if (!(angles[k + 1] > angles[k])) throw std::invalid_argument("slice angles must be strictly increasing");
  if (!(angles.back() - angles.front() < kTwoPi)) throw std::invalid_argument("slice angles must span less than a full turn");
  for (int c : colors)
    if (c < 0) throw std::invalid_argument("slice colors must be nonnegative");
  // Merge adjacent white sectors by dropping the radius between them.
  for (bool changed = true; changed && angles.size() > 1;) {
    changed = false;
    const int n = static_cast<int>(angles.size());
    for (int k = 0; k < n; ++k) {
      if (colors[k] == kWhite && colors[mod(k - 1, n)] == kWhite && n > 1) {
        angles.erase(angles.begin() + k);
        colors.erase(colors.begin() + k);
        changed = true;
        break;
      }
    }
  }
  if (angles.size() < 2) throw std::invalid_argument("slice config has fewer than two radii after merging white sectors");
  SliceConfig out;
  out.angles = std::move(angles);
  out.colors = std::move(colors);
  out.gauge = std::move(gauge);
  return out;
}

SliceConfig SliceConfig::from_degrees(const std::vector<double>& degrees, std::vector<int> colors, Gauge gauge) {
  std::vector<double> a;
  for (double d : degrees) a.push_back(deg_to_rad(d));
  return make(std::move(a), std::move(colors), std::move(gauge));
}

Vec2 SliceConfig::point(int k) const { return unit(angles[mod(k, size())]); }

std::string to_string(MoveFamily f) {
  switch (f) {
    case MoveFamily::none: return "none";
    case MoveFamily::chord: return "chord";
    case MoveFamily::white_join: return "white_join";
    case MoveFamily::radius_tilt: return "radius_tilt";
    case MoveFamily::white_tilt: return "white_tilt";
    case MoveFamily::tripod: return "tripod";
    case MoveFamily::junction_shift: return "junction_shift";
  }
  return "unknown";
}

namespace {

struct Candidate {
  MoveFamily family = MoveFamily::none;
  int index = -1;
  double eps = 0.0;
  Coloring coloring;
  std::vector<std::pair<Vec2, Vec2>> segments;
  std::vector<Vec2> points;
};

double interface_weight(const Gauge& hh, const Gauge& hs, int left, int right, Vec2 v) {
  if (left == right) return 0.0;
  if (left != kWhite && right != kWhite) return hs.eval(v);
  return left != kWhite ? hh.eval(v) : hh.eval(-v);
}

// Splits every segment at all intersections, removes duplicates, and labels
// each piece from the coloring.
CompetitorNetwork evaluate(const Candidate& cand, const Gauge& hh, const Gauge& hs) {
  const auto& segs = cand.segments;
  std::vector<std::pair<Vec2, Vec2>> pieces;
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const auto [a, b] = segs[i];
    const Vec2 r = b - a;
    const double rr = dot(r, r);
    if (!(rr > 0.0)) continue;
    std::vector<double> ts{0.0, 1.0};
    for (std::size_t j = 0; j < segs.size(); ++j) {
      if (j == i) continue;
      const auto [c, d] = segs[j];
      for (Vec2 e : {c, d})
        if (point_segment_distance(e, a, b) <= kLineTol) ts.push_back(std::clamp(dot(e - a, r) / rr, 0.0, 1.0));
      const SegmentHit hit = intersect_segments(a, b, c, d);
      if (hit.hit && !hit.collinear) ts.push_back(hit.t);
    }
    std::sort(ts.begin(), ts.end());
    for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
      const Vec2 p = a + r * ts[k], q = a + r * ts[k + 1];
      if (distance(p, q) <= 1e-15) continue;
      pieces.emplace_back(p, q);
    }
  }
  // Canonical orientation, then drop duplicates.
  for (auto& [p, q] : pieces)
    if (q.x < p.x || (q.x == p.x && q.y < p.y)) std::swap(p, q);
  std::vector<std::pair<Vec2, Vec2>> unique;
  for (const auto& pc : pieces) {
    bool dup = false;
    for (const auto& u : unique)
      if (distance(u.first, pc.first) <= 1e-14 && distance(u.second, pc.second) <= 1e-14) {
        dup = true;
        break;
      }
    if (!dup) unique.push_back(pc);
  }
  CompetitorNetwork net;
  net.family = cand.family;
  net.index = cand.index;
  net.eps = cand.eps;
  net.coloring = cand.coloring;
  net.interior_points = cand.points;
  for (const auto& [p, q] : unique) {
    const Vec2 v = q - p;
    const Vec2 nl = rotate_ccw(v / norm(v));
    const Vec2 mid = (p + q) * 0.5;
    const int left = cand.coloring.at(mid, nl), right = cand.coloring.at(mid, -nl);
    const double w = interface_weight(hh, hs, left, right, v);
    if (w == 0.0) continue;
    net.segments.push_back({p, q, left, right, w});
    net.perimeter += w;
  }
  return net;
}

Candidate base_candidate(const SliceConfig& c, Vec2 center) {
  Candidate out;
  out.coloring.center = center;
  for (int k = 0; k < c.size(); ++k) {
    out.coloring.ends.push_back(c.point(k));
    out.segments.emplace_back(center, c.point(k));
  }
  out.coloring.sector_colors = c.colors;
  return out;
}

void paint(Candidate& cand, Vec2 a, Vec2 b, Vec2 c, int color) {
  cand.coloring.overrides.push_back({a, b, c, color});
  cand.segments.emplace_back(a, b);
  cand.segments.emplace_back(b, c);
  cand.segments.emplace_back(c, a);
}

double eps_at(int k) { return std::ldexp(1.0, -k); }

// Every move of every family, in tie-break order.
std::vector<Candidate> enumerate(const SliceConfig& c) {
  const int n = c.size();
  const Vec2 o{0, 0};
  std::vector<Candidate> out;
  auto col = [&](int k) { return c.colors[mod(k, n)]; };
  auto small = [&](int k) { return sector_angle(c, mod(k, n)) < kPi - 1e-12; };

  for (int k = 0; k < n; ++k) {
    if (!small(k)) continue;
    for (int side = 0; side < 2; ++side) {
      const int paint_color = side == 0 ? col(k - 1) : col(k + 1);
      if (paint_color == col(k)) continue;
      Candidate cand = base_candidate(c, o);
      cand.family = MoveFamily::chord;
      cand.index = 2 * k + side;
      paint(cand, o, c.point(k), c.point(k + 1), paint_color);
      out.push_back(std::move(cand));
    }
  }

  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j || col(i) != kWhite || col(j) != kWhite) continue;
      bool clean = true;
      for (int k = i + 1; mod(k, n) != j; ++k)
        if (col(k) == kWhite) clean = false;
      const Vec2 s = c.point(i + 1), p = c.point(j);
      if (!clean || ccw_angle(s, p) >= kPi - 1e-12 || ccw_angle(s, p) <= 1e-12) continue;
      Candidate cand = base_candidate(c, o);
      cand.family = MoveFamily::white_join;
      cand.index = i * n + j;
      paint(cand, o, s, p, kWhite);
      out.push_back(std::move(cand));
    }

  for (int fam = 3; fam <= 4; ++fam)
    for (int r = 0; r < n; ++r) {
      const bool colored = col(r - 1) != kWhite && col(r) != kWhite;
      if ((fam == 3) != colored) continue;
      const Vec2 b = c.point(r), prev = c.point(r - 1), next = c.point(r + 1);
      for (int variant = 0; variant < 4; ++variant)
        for (int e = 1; e <= kEpsSteps; ++e) {
          const double eps = eps_at(e);
          Candidate cand = base_candidate(c, o);
          cand.family = fam == 3 ? MoveFamily::radius_tilt : MoveFamily::white_tilt;
          cand.index = 4 * r + variant;
          cand.eps = eps;
          if (variant == 0) {
            if (!small(r) || col(r - 1) == col(r)) break;
            const Vec2 oe = next * eps;
            paint(cand, o, oe, b, col(r - 1));
            cand.points = {oe};
          } else if (variant == 1) {
            if (!small(r - 1) || col(r - 1) == col(r)) break;
            const Vec2 oe = prev * eps;
            paint(cand, o, oe, b, col(r));
            cand.points = {oe};
          } else {
            // H/W competitor: the white sector sits on one side of radius r.
            const bool before = variant == 2;
            if (col(before ? r - 1 : r) != kWhite || col(before ? r : r - 1) == kWhite) break;
            const Vec2 far = before ? next : prev, near = before ? prev : next;
            if (sector_angle(c, mod(r - 1, n)) + sector_angle(c, r) >= kPi - 1e-12) break;
            const Vec2 h = near * (-eps);
            const SegmentHit hit = intersect_segments(h, b, o, far);
            if (!hit.hit || hit.collinear || hit.u <= 0.0) continue;
            const Vec2 w = far * hit.u;
            paint(cand, o, w, b, kWhite);
            cand.points = {h, w};
          }
          out.push_back(std::move(cand));
        }
    }

  for (int r = 0; r < n; ++r) {
    if (!small(r)) continue;
    const Vec2 b = c.point(r), cc = c.point(r + 1);
    for (int e = 1; e <= kEpsSteps; ++e) {
      const double eps = eps_at(e);
      const Vec2 w = (b + cc) * eps;
      Candidate cand = base_candidate(c, o);
      cand.family = MoveFamily::tripod;
      cand.index = r;
      cand.eps = eps;
      paint(cand, o, b, w, col(r - 1));
      paint(cand, o, w, cc, col(r + 1));
      cand.points = {w};
      out.push_back(std::move(cand));
    }
  }

  constexpr int kShiftDirections = 16;
  for (int q = 0; q < kShiftDirections; ++q)
    for (int e = 1; e <= kEpsSteps; ++e) {
      const double eps = eps_at(e);
      const Vec2 d = unit(kTwoPi * q / kShiftDirections) * eps;
      double turn = 0.0;
      for (int k = 0; k < n; ++k) turn += ccw_angle(c.point(k) - d, c.point(k + 1) - d);
      if (std::abs(turn - kTwoPi) > 1e-9) continue;
      Candidate cand = base_candidate(c, d);
      cand.family = MoveFamily::junction_shift;
      cand.index = q;
      cand.eps = eps;
      cand.points = {d};
      out.push_back(std::move(cand));
    }
  return out;
}

}  // namespace

CompetitorNetwork slice_network(const SliceConfig& config) {
  const Gauge hh = tangent_gauge(config.gauge);
  return evaluate(base_candidate(config, {0, 0}), hh, symmetrized(hh));
}

double slice_perimeter(const SliceConfig& config) { return slice_network(config).perimeter; }

ImproveResult best_competitor(const SliceConfig& config) {
  const Gauge hh = tangent_gauge(config.gauge);
  const Gauge hs = symmetrized(hh);
  ImproveResult res;
  res.kinked = !config.gauge.is_c1();
  res.non_strictly_convex = !config.gauge.is_strictly_convex();
  const CompetitorNetwork original = evaluate(base_candidate(config, {0, 0}), hh, hs);
  res.original = original.perimeter;

  const std::vector<Candidate> cands = enumerate(config);
  res.candidates = static_cast<int>(cands.size());
  std::vector<CompetitorNetwork> nets(cands.size());
  const unsigned workers = std::max(1u, std::min(8u, std::thread::hardware_concurrency()));
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < cands.size(); i += workers) nets[i] = evaluate(cands[i], hh, hs);
      });
  }
  // Deterministic argmin: enumeration order already follows the tie-break.
  int best = -1;
  for (std::size_t i = 0; i < nets.size(); ++i)
    if (best < 0 || nets[i].perimeter < nets[best].perimeter) best = static_cast<int>(i);
  res.best = best >= 0 ? nets[best] : original;
  res.delta = res.original - res.best.perimeter;
  return res;
}

ImproveResult improve(const SliceConfig& config) {
  if (config.size() < 4) throw std::invalid_argument("hypothesis not met: improve needs at least four radii");
  return best_competitor(config);
}

namespace {

struct Poly {
  Polyline tau1, tau2;
};

double diameter_of(const Polyline& a, const Polyline& b) {
  double lo_x = a[0].x, hi_x = a[0].x, lo_y = a[0].y, hi_y = a[0].y;
  for (const Polyline* p : {&a, &b})
    for (Vec2 v : *p) {
      lo_x = std::min(lo_x, v.x);
      hi_x = std::max(hi_x, v.x);
      lo_y = std::min(lo_y, v.y);
      hi_y = std::max(hi_y, v.y);
    }
  return std::hypot(hi_x - lo_x, hi_y - lo_y);
}

// Closed boundary: tau1 followed by the interior of tau2.
Polyline boundary(const Poly& p) {
  Polyline out = p.tau1;
  out.insert(out.end(), p.tau2.begin() + 1, p.tau2.end() - 1);
  return out;
}

bool simple_polygon(const Polyline& poly, double tol) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i)
    if (distance(poly[i], poly[(i + 1) % n]) <= tol) return false;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
      const Vec2 a = poly[i], b = poly[(i + 1) % n], c = poly[j], d = poly[(j + 1) % n];
      const SegmentHit hit = intersect_segments(a, b, c, d);
      if (!hit.hit) continue;
      if (!adjacent || hit.collinear) return false;
    }
  return true;
}

// Open segment from poly[i] to poly[j] strictly inside the polygon.
bool interior_chord(const Polyline& poly, std::size_t i, std::size_t j, double tol) {
  const std::size_t n = poly.size();
  const Vec2 a = poly[i], b = poly[j];
  if (distance(a, b) <= tol) return false;
  for (std::size_t k = 0; k < n; ++k) {
    if (k == i || k == j) continue;
    if (point_segment_distance(poly[k], a, b) <= tol) return false;
  }
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t k1 = (k + 1) % n;
    const Vec2 c = poly[k], d = poly[k1];
    const bool shares = k == i || k == j || k1 == i || k1 == j;
    const SegmentHit hit = intersect_segments(a, b, c, d);
    if (!hit.hit) continue;
    if (!shares || hit.collinear) return false;
    // Touching only at the shared endpoint is fine.
    const double t = hit.t;
    if (t > 1e-12 && t < 1.0 - 1e-12) return false;
  }
  return point_in_polygon(poly, (a + b) * 0.5);
}

Polyline shortcut_rec(Poly p, double tol, int depth);

Polyline reversed(Polyline p) {
  std::reverse(p.begin(), p.end());
  return p;
}

// Tries the parallel cut at every convex interior vertex of tau1.
bool parallel_cut(const Poly& p, double tol, int depth, Polyline& out) {
  const Polyline poly = boundary(p);
  const double orient = signed_area(poly) > 0.0 ? 1.0 : -1.0;
  const std::size_t m1 = p.tau1.size();
  for (std::size_t k = 1; k + 1 < m1; ++k) {
    const Vec2 a = p.tau1[k - 1], b = p.tau1[k], c = p.tau1[k + 1];
    if (cross(b - a, c - b) * orient <= tol * tol) continue;
    // Vertex strictly inside ABC closest to B along the normal of AC.
    const Vec2 nac = rotate_ccw(normalized(c - a));
    const double hb = dot(b - a, nac);
    const Coloring::Triangle tri{a, b, c, 0};
    int best = -1;
    double best_h = 0.0;
    for (std::size_t q = 0; q < poly.size(); ++q) {
      if (q + 1 == k || q == k || q == k + 1) continue;
      if (!in_triangle(tri, poly[q], {0, 0})) continue;
      if (point_segment_distance(poly[q], a, b) <= tol || point_segment_distance(poly[q], b, c) <= tol) continue;
      const double hq = dot(poly[q] - a, nac) / hb;
      if (best < 0 || hq > best_h) {
        best = static_cast<int>(q);
        best_h = hq;
      }
    }
    if (best < 0) continue;
    // D must be on tau2 and alone on the cut line.
    const std::size_t d_idx = static_cast<std::size_t>(best);
    if (d_idx < m1) continue;
    bool alone = true;
    for (std::size_t q = 0; q < poly.size(); ++q)
      if (q != d_idx && std::abs(dot(poly[q] - a, nac) / hb - best_h) * std::abs(hb) <= tol && in_triangle(tri, poly[q], {0, 0}))
        alone = false;
    if (!alone) continue;
    const double t = 1.0 - best_h;  // fraction from B towards A and C
    const Vec2 at = b + (a - b) * t, ct = b + (c - b) * t;
    const Vec2 d = poly[d_idx];
    const std::size_t j = d_idx - m1 + 1;  // index of D within tau2
    Poly first, second;
    first.tau1.assign(p.tau1.begin(), p.tau1.begin() + k);
    first.tau1.push_back(at);
    first.tau1.push_back(d);
    first.tau2.assign(p.tau2.begin() + j, p.tau2.end());
    second.tau1 = {d, ct};
    second.tau1.insert(second.tau1.end(), p.tau1.begin() + k + 1, p.tau1.end());
    second.tau2.assign(p.tau2.begin(), p.tau2.begin() + j + 1);
    if (!simple_polygon(boundary(first), tol) || !simple_polygon(boundary(second), tol)) continue;
    Polyline t1 = shortcut_rec(first, tol, depth + 1);
    const Polyline t2 = shortcut_rec(second, tol, depth + 1);
    t1.insert(t1.end(), t2.begin() + 1, t2.end());
    out = std::move(t1);
    return true;
  }
  return false;
}

Polyline shortcut_rec(Poly p, double tol, int depth) {
  if (depth > 10000) throw std::runtime_error("shortcut_path recursion did not terminate");
  if (p.tau1.size() == 2 || p.tau2.size() == 2) return {p.tau1.front(), p.tau1.back()};
  const Polyline poly = boundary(p);
  const std::size_t m1 = p.tau1.size(), n = poly.size();
  // Interior chord between two vertices of tau1, or of tau2 (P and Q included).
  for (std::size_t i = 0; i < m1; ++i)
    for (std::size_t j = m1 - 1; j >= i + 2; --j) {
      if (interior_chord(poly, i, j, tol)) {
        Poly q = p;
        q.tau1.assign(p.tau1.begin(), p.tau1.begin() + i + 1);
        q.tau1.insert(q.tau1.end(), p.tau1.begin() + j, p.tau1.end());
        return shortcut_rec(q, tol, depth + 1);
      }
    }
  const std::size_t m2 = p.tau2.size();
  for (std::size_t i = 0; i < m2; ++i)
    for (std::size_t j = m2 - 1; j >= i + 2; --j) {
      // tau2 vertex s sits at polygon index m1 - 1 + s (mod n).
      const std::size_t pi = (m1 - 1 + i) % n, pj = (m1 - 1 + j) % n;
      if (interior_chord(poly, pi, pj, tol)) {
        Poly q = p;
        q.tau2.assign(p.tau2.begin(), p.tau2.begin() + i + 1);
        q.tau2.insert(q.tau2.end(), p.tau2.begin() + j, p.tau2.end());
        return shortcut_rec(q, tol, depth + 1);
      }
    }
  Polyline out;
  if (parallel_cut(p, tol, depth, out)) return out;
  // Same construction with the roles of the two paths exchanged.
  Poly swapped{p.tau2, p.tau1};
  if (parallel_cut(swapped, tol, depth, out)) return reversed(out);
  throw std::runtime_error("shortcut_path found no admissible cut (degenerate polygon)");
}

}  // namespace

Polyline shortcut_path(const Polyline& tau1, const Polyline& tau2, const Gauge& gauge) {
  (void)gauge;  // the construction is gauge independent; the bound holds for every convex gauge
  if (tau1.size() < 2 || tau2.size() < 2) throw std::invalid_argument("shortcut_path needs two paths with at least two points");
  if (tau1.front() != tau2.back() || tau1.back() != tau2.front())
    throw std::invalid_argument("shortcut_path needs tau1(0) = tau2(1) and tau1(1) = tau2(0)");
  const double tol = 1e-12 * std::max(diameter_of(tau1, tau2), 1e-300);
  if (tau1.size() == 2 && tau2.size() == 2) throw std::invalid_argument("shortcut_path paths coincide");
  Poly p{tau1, tau2};
  if (!simple_polygon(boundary(p), tol)) throw std::invalid_argument("shortcut_path inputs cross or touch");
  return shortcut_rec(p, tol, 0);
}

}  // namespace isocluster

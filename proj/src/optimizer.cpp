#include "isocluster/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <random>
#include <stdexcept>
#include <thread>

namespace isocluster {

namespace {

enum class Kind { free, fixed, slide };

struct VertexInfo {
  Kind kind = Kind::free;
  Vec2 side_a, side_b;  // wall side for sliding vertices
  bool pinned = false;  // never removed by resampling
};

struct Seg {
  std::size_t a, b;
  int left, right;
  bool lc, rc;
  bool wall;
};

using Vec = std::vector<double>;

double dotv(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void axpy(double a, const Vec& x, Vec& y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

// Solves the small Gram system A z = b in place (partial pivoting). A tiny
// ridge keeps dependent constraints solvable, e.g. chambers that fill a wall.
bool solve_dense(std::vector<std::vector<double>> a, std::vector<double>& b) {
  const std::size_t n = b.size();
  double diag = 0.0;
  for (std::size_t i = 0; i < n; ++i) diag = std::max(diag, a[i][i]);
  for (std::size_t i = 0; i < n; ++i) a[i][i] += 1e-12 * diag;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    if (!(std::abs(a[piv][c]) > 1e-300)) return false;
    std::swap(a[c], a[piv]);
    std::swap(b[c], b[piv]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  for (std::size_t c = n; c-- > 0;) {
    for (std::size_t k = c + 1; k < n; ++k) b[c] -= a[c][k] * b[k];
    b[c] /= a[c][c];
  }
  return true;
}

double polyline_length(const Polyline& p) {
  double s = 0.0;
  for (std::size_t k = 0; k + 1 < p.size(); ++k) s += distance(p[k], p[k + 1]);
  return s;
}

double wall_diameter(const Polyline& wall) {
  double d = 0.0;
  for (const Vec2& p : wall)
    for (const Vec2& q : wall) d = std::max(d, distance(p, q));
  return d;
}

class Solver {
 public:
  Solver(const OptimizationProblem& pb, int start) : pb_(pb), d_(pb.density), opt_(pb.options), start_(start) {
    c_ = pb.initial;
    const double diam = opt_.wall.empty() ? 1.0 : wall_diameter(opt_.wall);
    wall_tol_ = 1e-9 * std::max(diam, 1e-300);
    info_.assign(c_.vertices.size(), {});
    for (std::size_t f : opt_.fixed) {
      if (f >= info_.size()) throw std::invalid_argument("fixed vertex index out of range");
      info_[f].kind = Kind::fixed;
      info_[f].pinned = true;
    }
    for (const Edge& e : c_.edges) {
      info_[e.path.front()].pinned = true;
      info_[e.path.back()].pinned = true;
    }
    classify_wall();
    rebuild();
    spacing_ = opt_.spacing > 0.0 ? opt_.spacing : median_length();
  }

  SolveReport run();

 private:
  const OptimizationProblem& pb_;
  const Density& d_;
  const SolveOptions& opt_;
  int start_;
  Cluster c_;
  std::vector<VertexInfo> info_;
  std::vector<Seg> segs_;
  std::vector<std::vector<std::size_t>> incident_;
  double wall_tol_ = 0.0;
  double spacing_ = 0.0;
  SolveReport rep_;
  int iterations_ = 0;
  bool recording_ = true;

  std::size_t nv() const { return c_.vertices.size(); }
  std::size_t nc() const { return static_cast<std::size_t>(c_.m); }

  void classify_wall() {
    const Polyline& w = opt_.wall;
    if (w.empty()) return;
    for (std::size_t v = 0; v < nv(); ++v) {
      if (info_[v].kind == Kind::fixed) continue;
      const Vec2 p = c_.vertices[v];
      bool corner = false;
      for (const Vec2& q : w)
        if (distance(p, q) <= wall_tol_) corner = true;
      if (corner) {
        info_[v].kind = Kind::fixed;
        info_[v].pinned = true;
        continue;
      }
      for (std::size_t i = 0; i < w.size(); ++i) {
        const Vec2 a = w[i], b = w[(i + 1) % w.size()];
        if (point_segment_distance(p, a, b) <= wall_tol_) {
          info_[v].kind = Kind::slide;
          info_[v].side_a = a;
          info_[v].side_b = b;
          info_[v].pinned = true;
          break;
        }
      }
    }
  }

  void rebuild() {
    segs_.clear();
    incident_.assign(nv(), {});
    for (const Edge& e : c_.edges)
      for (std::size_t k = 0; k + 1 < e.path.size(); ++k) {
        Seg s{e.path[k], e.path[k + 1], e.left, e.right, !c_.is_white(e.left), !c_.is_white(e.right), false};
        if (!opt_.wall.empty())
          s.wall = segment_on_wall(c_.vertices[s.a], c_.vertices[s.b], opt_.wall, wall_tol_);
        incident_[s.a].push_back(segs_.size());
        incident_[s.b].push_back(segs_.size());
        segs_.push_back(s);
      }
  }

  double median_length() const {
    std::vector<double> l;
    for (const Seg& s : segs_) l.push_back(distance(c_.vertices[s.a], c_.vertices[s.b]));
    if (l.empty()) return 1.0;
    std::nth_element(l.begin(), l.begin() + l.size() / 2, l.end());
    return l[l.size() / 2];
  }

  double seg_weight(const Seg& s, Vec2 a, Vec2 b) const {
    if (s.wall || s.left == s.right) return 0.0;
    return interface_weight(d_, (a + b) * 0.5, b - a, s.lc, s.rc);
  }

  Vec2 pos(const Vec& x, std::size_t v) const { return {x[2 * v], x[2 * v + 1]}; }

  Vec to_vec() const {
    Vec x(2 * nv());
    for (std::size_t v = 0; v < nv(); ++v) {
      x[2 * v] = c_.vertices[v].x;
      x[2 * v + 1] = c_.vertices[v].y;
    }
    return x;
  }

  void from_vec(const Vec& x) {
    for (std::size_t v = 0; v < nv(); ++v) c_.vertices[v] = pos(x, v);
  }

  double perimeter(const Vec& x) const {
    double p = 0.0;
    for (const Seg& s : segs_) p += seg_weight(s, pos(x, s.a), pos(x, s.b));
    return p;
  }

  // Relative volume residuals V_i / T_i - 1.
  std::vector<double> residuals(const Vec& x) const {
    std::vector<double> v(nc(), 0.0);
    for (const Seg& s : segs_) {
      const double t = fan_triangle_volume(d_, pos(x, s.a), pos(x, s.b));
      if (s.left > 0) v[s.left - 1] += t;
      if (s.right > 0) v[s.right - 1] -= t;
    }
    for (std::size_t i = 0; i < nc(); ++i) v[i] = v[i] / pb_.targets[i] - 1.0;
    return v;
  }

  static double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double a : v) m = std::max(m, std::abs(a));
    return m;
  }

  double local_length(const Vec& x, std::size_t v) const {
    double l = 0.0;
    for (std::size_t s : incident_[v]) l = std::max(l, distance(pos(x, segs_[s].a), pos(x, segs_[s].b)));
    return l > 0.0 ? l : spacing_;
  }

  double shortest_length(const Vec& x, std::size_t v) const {
    double l = std::numeric_limits<double>::infinity();
    for (std::size_t s : incident_[v]) l = std::min(l, distance(pos(x, segs_[s].a), pos(x, segs_[s].b)));
    return std::isfinite(l) && l > 0.0 ? l : spacing_;
  }

  // Finite-difference gradients of P and of the residuals, projected onto the
  // admissible motions of each vertex.
  void gradients(const Vec& x, Vec& gp, std::vector<Vec>& gc) const {
    gp.assign(x.size(), 0.0);
    gc.assign(nc(), Vec(x.size(), 0.0));
    Vec xx = x;
    for (std::size_t v = 0; v < nv(); ++v) {
      if (info_[v].kind == Kind::fixed) continue;
      const double h = 1e-6 * shortest_length(x, v);
      for (int dim = 0; dim < 2; ++dim) {
        double wp = 0.0, wm = 0.0;
        std::vector<double> tp(nc(), 0.0), tm(nc(), 0.0);
        for (int sign = -1; sign <= 1; sign += 2) {
          xx[2 * v + dim] = x[2 * v + dim] + sign * h;
          double& w = sign > 0 ? wp : wm;
          std::vector<double>& t = sign > 0 ? tp : tm;
          for (std::size_t si : incident_[v]) {
            const Seg& s = segs_[si];
            const Vec2 a = pos(xx, s.a), b = pos(xx, s.b);
            w += seg_weight(s, a, b);
            const double tri = fan_triangle_volume(d_, a, b);
            if (s.left > 0) t[s.left - 1] += tri;
            if (s.right > 0) t[s.right - 1] -= tri;
          }
        }
        xx[2 * v + dim] = x[2 * v + dim];
        gp[2 * v + dim] = (wp - wm) / (2 * h);
        for (std::size_t i = 0; i < nc(); ++i) gc[i][2 * v + dim] = (tp[i] - tm[i]) / (2 * h) / pb_.targets[i];
      }
    }
    project(gp, x);
    for (Vec& g : gc) project(g, x);
  }

  // Unit normal at a free vertex inside an arc.
  bool arc_normal(const Vec& x, std::size_t v, Vec2& n) const {
    if (info_[v].kind != Kind::free || incident_[v].size() != 2) return false;
    const Seg& s0 = segs_[incident_[v][0]];
    const Seg& s1 = segs_[incident_[v][1]];
    const Vec2 p = pos(x, s0.a == v ? s0.b : s0.a), q = pos(x, s1.a == v ? s1.b : s1.a);
    if (!(distance(p, q) > 0.0)) return false;
    n = rotate_ccw(normalized(q - p));
    return true;
  }

  void project(Vec& g, const Vec& x) const {
    for (std::size_t v = 0; v < nv(); ++v) {
      const VertexInfo& in = info_[v];
      Vec2 n;
      if (arc_normal(x, v, n)) {
        const double s = g[2 * v] * n.x + g[2 * v + 1] * n.y;
        g[2 * v] = s * n.x;
        g[2 * v + 1] = s * n.y;
      } else if (in.kind == Kind::fixed) {
        g[2 * v] = g[2 * v + 1] = 0.0;
      } else if (in.kind == Kind::slide) {
        const Vec2 t = normalized(in.side_b - in.side_a);
        const double s = g[2 * v] * t.x + g[2 * v + 1] * t.y;
        g[2 * v] = s * t.x;
        g[2 * v + 1] = s * t.y;
      }
    }
  }

  // Keeps sliding vertices on their wall side; false if one left it.
  bool snap(Vec& x) const {
    for (std::size_t v = 0; v < nv(); ++v) {
      const VertexInfo& in = info_[v];
      if (in.kind != Kind::slide) continue;
      const Vec2 a = in.side_a, t = in.side_b - in.side_a;
      const double u = dot(pos(x, v) - a, t) / dot(t, t);
      if (u <= 0.0 || u >= 1.0) return false;
      const Vec2 p = a + t * u;
      x[2 * v] = p.x;
      x[2 * v + 1] = p.y;
    }
    return true;
  }

  bool crossing_free(const Vec& x) const {
    std::vector<Vec2> pts(nv());
    for (std::size_t v = 0; v < nv(); ++v) pts[v] = pos(x, v);
    std::vector<std::pair<std::size_t, std::size_t>> s;
    s.reserve(segs_.size());
    for (const Seg& g : segs_) s.emplace_back(g.a, g.b);
    return find_crossings(pts, s, true).empty();
  }

  // Largest step that moves no vertex more than a fraction of its local length.
  double step_cap(const Vec& x, const Vec& d) const {
    double cap = std::numeric_limits<double>::infinity();
    for (std::size_t v = 0; v < nv(); ++v) {
      const double m = std::hypot(d[2 * v], d[2 * v + 1]);
      if (m > 0.0) cap = std::min(cap, 0.1 * local_length(x, v) / m);
    }
    return cap;
  }

  double gradient_scale(const Vec& x) const {
    double len = 0.0;
    for (const Seg& s : segs_)
      if (!s.wall && s.left != s.right) len += distance(pos(x, s.a), pos(x, s.b));
    const double p = perimeter(x);
    return len > 0.0 && p > 0.0 ? p / len : 1.0;
  }

  // Largest per-vertex gradient, keeping only the normal part at free
  // vertices inside an arc: sliding a vertex along its arc only
  // reparametrizes the curve.
  double shape_norm(const Vec& x, const Vec& g) const {
    double m = 0.0;
    for (std::size_t v = 0; v < nv(); ++v) {
      Vec2 gv{g[2 * v], g[2 * v + 1]}, n;
      if (arc_normal(x, v, n)) gv = n * dot(gv, n);
      m = std::max(m, norm(gv));
    }
    return m;
  }

  static double vertex_inf_norm(const Vec& g) {
    double m = 0.0;
    for (std::size_t i = 0; i + 1 < g.size(); i += 2) m = std::max(m, std::hypot(g[i], g[i + 1]));
    return m;
  }

  void record(double p, double err) {
    if (!recording_) return;
    rep_.perimeter_trace.push_back(p);
    rep_.volume_error_trace.push_back(err);
  }

  // Gauss-Newton projection onto the volume constraints.
  bool restore(Vec& x, double tol) const {
    for (int it = 0; it < 12; ++it) {
      const std::vector<double> r = residuals(x);
      if (max_abs(r) <= tol) return true;
      Vec gp;
      std::vector<Vec> j;
      gradients(x, gp, j);
      std::vector<std::vector<double>> g(nc(), std::vector<double>(nc()));
      for (std::size_t a = 0; a < nc(); ++a)
        for (std::size_t b = 0; b < nc(); ++b) g[a][b] = dotv(j[a], j[b]);
      std::vector<double> z = r;
      if (!solve_dense(g, z)) return false;
      for (std::size_t a = 0; a < nc(); ++a) axpy(-z[a], j[a], x);
      if (!snap(x)) return false;
    }
    return max_abs(residuals(x)) <= tol;
  }

  bool remesh_without_increase(Vec& x, double& p);
  bool phase1(Vec& x);
  void phase2(Vec& x, double gradient_tol);
  enum class Remesh { maintain, halve, coarsen };
  void resample(Vec& x, Remesh mode);
  void perturb(Vec& x);
};

void Solver::perturb(Vec& x) {
  std::mt19937_64 gen(opt_.seed + 7919ULL * static_cast<std::uint64_t>(start_));
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vec d(x.size(), 0.0);
  for (std::size_t v = 0; v < nv(); ++v) {
    const double l = opt_.perturbation * local_length(x, v);
    d[2 * v] = u(gen) * l;
    d[2 * v + 1] = u(gen) * l;
  }
  project(d, x);
  for (int k = 0; k < 30; ++k) {
    Vec t = x;
    axpy(1.0, d, t);
    if (snap(t) && crossing_free(t)) {
      x = t;
      return;
    }
    for (double& a : d) a *= 0.5;
  }
}

// Remeshes the edge paths. maintain splits segments longer than 2 spacing and
// drops free vertices next to segments shorter than spacing/2; halve splits
// every segment at its midpoint; coarsen redistributes the free vertices
// between consecutive kept vertices evenly by arc length. Junctions, fixed and
// wall vertices always stay.
void Solver::resample(Vec& x, Remesh mode) {
  from_vec(x);
  Cluster nc_ = c_;
  std::vector<VertexInfo> ninfo = info_;
  auto add_point = [&](Vec2 p, std::size_t from, std::size_t to) {
    nc_.vertices.push_back(p);
    VertexInfo in;
    const Vec2 a = nc_.vertices[from], b = nc_.vertices[to];
    if (!opt_.wall.empty() && segment_on_wall(a, b, opt_.wall, wall_tol_)) {
      in.kind = Kind::slide;
      in.pinned = true;
      const VertexInfo& src = ninfo[from].kind == Kind::slide ? ninfo[from] : ninfo[to];
      in.side_a = src.kind == Kind::slide ? src.side_a : a;
      in.side_b = src.kind == Kind::slide ? src.side_b : b;
    }
    ninfo.push_back(in);
    return nc_.vertices.size() - 1;
  };
  for (Edge& e : nc_.edges) {
    std::vector<std::size_t> path{e.path.front()};
    if (mode == Remesh::coarsen) {
      const bool closed = e.path.front() == e.path.back();
      std::size_t run_start = 0;
      for (std::size_t k = 1; k < e.path.size(); ++k) {
        const std::size_t v = e.path[k];
        const bool keep = k + 1 == e.path.size() || ninfo[v].pinned || ninfo[v].kind != Kind::free;
        if (!keep) continue;
        Polyline run;
        for (std::size_t q = run_start; q <= k; ++q) run.push_back(nc_.vertices[e.path[q]]);
        if (run.size() > 2) {
          const double len = polyline_length(run);
          int m = std::max(1, static_cast<int>(std::lround(len / spacing_)));
          if (closed && run_start == 0 && k + 1 == e.path.size()) m = std::max(m, 3);
          std::size_t seg = 0;
          double seg_start = 0.0;
          for (int q = 1; q < m; ++q) {
            const double t = len * q / m;
            while (seg + 2 < run.size() && seg_start + distance(run[seg], run[seg + 1]) < t) {
              seg_start += distance(run[seg], run[seg + 1]);
              ++seg;
            }
            const double l = distance(run[seg], run[seg + 1]);
            const Vec2 p = run[seg] + (run[seg + 1] - run[seg]) * (l > 0.0 ? std::min((t - seg_start) / l, 1.0) : 0.0);
            nc_.vertices.push_back(p);
            ninfo.push_back(VertexInfo{});
            path.push_back(nc_.vertices.size() - 1);
          }
        }
        path.push_back(v);
        run_start = k;
      }
      e.path = std::move(path);
      continue;
    }
    for (std::size_t k = 1; k < e.path.size(); ++k) {
      const std::size_t v = e.path[k];
      const std::size_t from = path.back();
      const Vec2 a = nc_.vertices[from], b = nc_.vertices[v];
      const bool last = k + 1 == e.path.size();
      if (mode == Remesh::maintain && !last && !ninfo[v].pinned && ninfo[v].kind == Kind::free) {
        const Vec2 next = nc_.vertices[e.path[k + 1]];
        if ((distance(a, b) < 0.5 * spacing_ || distance(b, next) < 0.5 * spacing_) && distance(a, next) <= 2.0 * spacing_)
          continue;
      }
      const double len = distance(a, b);
      int pieces = 1;
      if (mode == Remesh::halve) pieces = 2;
      else if (len > 2.0 * spacing_) pieces = static_cast<int>(std::ceil(len / spacing_));
      for (int q = 1; q < pieces; ++q) path.push_back(add_point(a + (b - a) * (static_cast<double>(q) / pieces), from, v));
      path.push_back(v);
    }
    e.path = std::move(path);
  }
  // Compact the vertex array.
  std::vector<bool> used(nc_.vertices.size(), false);
  for (const Edge& e : nc_.edges)
    for (std::size_t v : e.path) used[v] = true;
  std::vector<std::size_t> remap(nc_.vertices.size(), 0);
  Cluster out = nc_;
  out.vertices.clear();
  std::vector<VertexInfo> oinfo;
  for (std::size_t v = 0; v < nc_.vertices.size(); ++v)
    if (used[v]) {
      remap[v] = out.vertices.size();
      out.vertices.push_back(nc_.vertices[v]);
      oinfo.push_back(ninfo[v]);
    }
  for (Edge& e : out.edges)
    for (std::size_t& v : e.path) v = remap[v];
  if (!validate(out).empty()) return;
  const Cluster keep_c = c_;
  const std::vector<VertexInfo> keep_info = info_;
  c_ = std::move(out);
  info_ = std::move(oinfo);
  rebuild();
  Vec nx = to_vec();
  if (!crossing_free(nx)) {
    c_ = keep_c;
    info_ = keep_info;
    rebuild();
    return;
  }
  x = std::move(nx);
}

// Augmented Lagrangian with L-BFGS inner solves; returns once the volumes are
// roughly right.
bool Solver::phase1(Vec& x) {
  const double switch_tol = std::max(1e-3, 10.0 * opt_.volume_tol);
  std::vector<double> lambda(nc(), 0.0);
  double mu = 10.0 * std::max(perimeter(x), 1e-300);
  double prev_err = std::numeric_limits<double>::infinity();
  bool shaped = false;  // last inner loop ended on a small Lagrangian gradient
  for (int outer = 0; outer < 60 && iterations_ < opt_.max_iterations; ++outer) {
    if (outer > 0 && opt_.resample) resample(x, Remesh::maintain);
    auto lag = [&](const Vec& y, std::vector<double>* res) {
      const std::vector<double> r = residuals(y);
      if (res) *res = r;
      double v = perimeter(y);
      for (std::size_t i = 0; i < nc(); ++i) v += lambda[i] * r[i] + 0.5 * mu * r[i] * r[i];
      return v;
    };
    auto lag_grad = [&](const Vec& y, const std::vector<double>& r) {
      Vec gp;
      std::vector<Vec> gc;
      gradients(y, gp, gc);
      for (std::size_t i = 0; i < nc(); ++i) axpy(lambda[i] + mu * r[i], gc[i], gp);
      return gp;
    };
    std::vector<double> r;
    double f = lag(x, &r);
    if (shaped && max_abs(r) < switch_tol) return true;
    shaped = false;
    Vec g = lag_grad(x, r);
    std::deque<std::pair<Vec, Vec>> mem;
    for (int inner = 0; inner < 150 && iterations_ < opt_.max_iterations; ++inner) {
      ++iterations_;
      ++rep_.phase1_iterations;
      // Two-loop recursion.
      Vec q = g;
      std::vector<double> alpha(mem.size());
      for (std::size_t k = mem.size(); k-- > 0;) {
        alpha[k] = dotv(mem[k].first, q) / dotv(mem[k].second, mem[k].first);
        axpy(-alpha[k], mem[k].second, q);
      }
      if (!mem.empty()) {
        const auto& [s, y] = mem.back();
        const double gamma = dotv(s, y) / dotv(y, y);
        for (double& a : q) a *= gamma;
      }
      for (std::size_t k = 0; k < mem.size(); ++k) {
        const double beta = dotv(mem[k].second, q) / dotv(mem[k].second, mem[k].first);
        axpy(alpha[k] - beta, mem[k].first, q);
      }
      Vec dir(q.size());
      for (std::size_t i = 0; i < q.size(); ++i) dir[i] = -q[i];
      project(dir, x);
      double slope = dotv(dir, g);
      if (!(slope < 0.0)) {
        mem.clear();
        for (std::size_t i = 0; i < g.size(); ++i) dir[i] = -g[i];
        slope = dotv(dir, g);
        if (!(slope < 0.0)) break;
      }
      double a = std::min(1.0, step_cap(x, dir));
      bool accepted = false;
      Vec xn;
      std::vector<double> rn;
      double fn = f;
      for (int ls = 0; ls < 40; ++ls, a *= 0.5) {
        xn = x;
        axpy(a, dir, xn);
        if (!snap(xn) || !crossing_free(xn)) continue;
        fn = lag(xn, &rn);
        if (fn <= f + 1e-4 * a * slope) {
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        if (mem.empty()) break;
        mem.clear();
        continue;
      }
      const Vec gn = lag_grad(xn, rn);
      Vec s(x.size()), y(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) {
        s[i] = xn[i] - x[i];
        y[i] = gn[i] - g[i];
      }
      if (dotv(s, y) > 1e-14 * std::sqrt(dotv(s, s) * dotv(y, y))) {
        mem.emplace_back(std::move(s), std::move(y));
        if (mem.size() > 10) mem.pop_front();
      }
      x = std::move(xn);
      g = gn;
      f = fn;
      r = rn;
      const double err = max_abs(r);
      if (err >= switch_tol) record(perimeter(x), err);
      if (vertex_inf_norm(g) < 1e-3 * gradient_scale(x)) {
        shaped = true;
        break;
      }
    }
    const double err = max_abs(r);
    for (std::size_t i = 0; i < nc(); ++i) lambda[i] += mu * r[i];
    if (err > 0.25 * prev_err) mu *= 2.0;
    prev_err = err;
  }
  return max_abs(residuals(x)) < switch_tol;
}

bool Solver::remesh_without_increase(Vec& x, double& p) {
  const Cluster keep_c = c_;
  const std::vector<VertexInfo> keep_info = info_;
  const std::size_t before = nv();
  Vec y = x;
  resample(y, Remesh::maintain);
  if (nv() != before && restore(y, 0.1 * opt_.volume_tol) && crossing_free(y)) {
    const double py = perimeter(y);
    if (py <= p) {
      x = std::move(y);
      p = py;
      record(p, max_abs(residuals(x)));
      return true;
    }
  }
  c_ = keep_c;
  info_ = keep_info;
  rebuild();
  return false;
}

// Feasible, monotone projected L-BFGS on the perimeter.
void Solver::phase2(Vec& x, double gradient_tol) {
  const double tol = opt_.volume_tol;
  {
    Vec y = x;
    if (!restore(y, 0.1 * tol) || !crossing_free(y)) {
      rep_.flags.push_back("volume projection failed");
      return;
    }
    x = std::move(y);
  }
  double p = perimeter(x);
  record(p, max_abs(residuals(x)));
  auto reduced = [&](const Vec& y, Vec& red, std::vector<Vec>& j) {
    Vec gp;
    gradients(y, gp, j);
    std::vector<std::vector<double>> g(nc(), std::vector<double>(nc()));
    std::vector<double> b(nc());
    for (std::size_t a = 0; a < nc(); ++a) {
      b[a] = dotv(j[a], gp);
      for (std::size_t c = 0; c < nc(); ++c) g[a][c] = dotv(j[a], j[c]);
    }
    red = gp;
    if (solve_dense(g, b))
      for (std::size_t a = 0; a < nc(); ++a) axpy(-b[a], j[a], red);
  };
  auto tangent = [&](Vec& v, const std::vector<Vec>& j) {
    std::vector<std::vector<double>> g(nc(), std::vector<double>(nc()));
    std::vector<double> b(nc());
    for (std::size_t a = 0; a < nc(); ++a) {
      b[a] = dotv(j[a], v);
      for (std::size_t c = 0; c < nc(); ++c) g[a][c] = dotv(j[a], j[c]);
    }
    if (solve_dense(g, b))
      for (std::size_t a = 0; a < nc(); ++a) axpy(-b[a], j[a], v);
  };
  Vec r;
  std::vector<Vec> j;
  reduced(x, r, j);
  std::deque<std::pair<Vec, Vec>> mem;
  int failures = 0;
  while (iterations_ < opt_.max_iterations) {
    rep_.gradient_norm = shape_norm(x, r) / gradient_scale(x);
    if (rep_.gradient_norm <= gradient_tol) return;
    ++iterations_;
    Vec q = r;
    std::vector<double> alpha(mem.size());
    for (std::size_t k = mem.size(); k-- > 0;) {
      alpha[k] = dotv(mem[k].first, q) / dotv(mem[k].second, mem[k].first);
      axpy(-alpha[k], mem[k].second, q);
    }
    if (!mem.empty()) {
      const auto& [s, y] = mem.back();
      const double gamma = dotv(s, y) / dotv(y, y);
      for (double& a : q) a *= gamma;
    }
    for (std::size_t k = 0; k < mem.size(); ++k) {
      const double beta = dotv(mem[k].second, q) / dotv(mem[k].second, mem[k].first);
      axpy(alpha[k] - beta, mem[k].first, q);
    }
    Vec dir(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) dir[i] = -q[i];
    project(dir, x);
    tangent(dir, j);
    double slope = dotv(dir, r);
    if (!(slope < -1e-12 * std::sqrt(dotv(dir, dir) * dotv(r, r)))) {
      mem.clear();
      for (std::size_t i = 0; i < r.size(); ++i) dir[i] = -r[i];
      slope = dotv(dir, r);
    }
    double a = std::min(1.0, step_cap(x, dir));
    bool accepted = false;
    Vec xn;
    double pn = p;
    for (int ls = 0; ls < 40; ++ls, a *= 0.5) {
      xn = x;
      axpy(a, dir, xn);
      if (!snap(xn) || !restore(xn, 0.1 * tol) || !crossing_free(xn)) continue;
      pn = perimeter(xn);
      if (pn <= p + 1e-4 * a * slope && pn < p) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      mem.clear();
      if (++failures < 2) continue;
      // Short segments and knots can block every step; clean them up when
      // that does not raise the perimeter.
      if (!opt_.resample || !remesh_without_increase(x, p)) {
        rep_.stalled = true;
        return;
      }
      failures = 0;
      reduced(x, r, j);
      continue;
    }
    failures = 0;
    Vec rn;
    std::vector<Vec> jn;
    reduced(xn, rn, jn);
    Vec s(x.size()), y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      s[i] = xn[i] - x[i];
      y[i] = rn[i] - r[i];
    }
    if (dotv(s, y) > 1e-14 * std::sqrt(dotv(s, s) * dotv(y, y))) {
      mem.emplace_back(std::move(s), std::move(y));
      if (mem.size() > 10) mem.pop_front();
    }
    x = std::move(xn);
    r = std::move(rn);
    j = std::move(jn);
    p = pn;
    record(p, max_abs(residuals(x)));
  }
}

SolveReport Solver::run() {
  rep_.start = start_;
  Vec x = to_vec();
  if (start_ > 0) perturb(x);
  // Coarse-to-fine: solve on a coarsened mesh first, then refine. Only the
  // finest level is recorded in the trace.
  const double fine = spacing_;
  int levels = 0;
  if (opt_.resample) {
    double shortest = std::numeric_limits<double>::infinity();
    for (std::size_t e = 0; e < c_.edges.size(); ++e) shortest = std::min(shortest, polyline_length(c_.edge_points(e)));
    while (levels < 5 && fine * std::pow(2.0, levels + 1) <= shortest / 16.0) ++levels;
  }
  for (int level = levels; level >= 0; --level) {
    spacing_ = fine * std::pow(2.0, level);
    recording_ = level == 0;
    if (level == levels && levels > 0) resample(x, Remesh::coarsen);
    else if (level < levels) resample(x, Remesh::halve);
    rep_.stalled = false;
    const bool near = phase1(x);
    if (level == 0 && !near) rep_.flags.push_back("volume constraints not reached in the penalty phase");
    phase2(x, level == 0 ? opt_.gradient_tol : std::max(opt_.gradient_tol, 1e-3));
  }
  from_vec(x);
  rep_.cluster = c_;
  rep_.iterations = iterations_;
  rep_.perimeter = perimeter(x);
  rep_.volumes = weighted_volume(c_, d_);
  rep_.volume_error.assign(nc(), 0.0);
  for (std::size_t i = 0; i < nc(); ++i) rep_.volume_error[i] = rep_.volumes[i] / pb_.targets[i] - 1.0;
  rep_.volumes_ok = max_abs(rep_.volume_error) <= opt_.volume_tol;
  {
    Vec gp;
    std::vector<Vec> j;
    gradients(x, gp, j);
    std::vector<std::vector<double>> g(nc(), std::vector<double>(nc()));
    std::vector<double> b(nc());
    for (std::size_t a = 0; a < nc(); ++a) {
      b[a] = dotv(j[a], gp);
      for (std::size_t c = 0; c < nc(); ++c) g[a][c] = dotv(j[a], j[c]);
    }
    if (solve_dense(g, b))
      for (std::size_t a = 0; a < nc(); ++a) axpy(-b[a], j[a], gp);
    rep_.gradient_norm = shape_norm(x, gp) / gradient_scale(x);
  }
  const bool grad_ok = rep_.gradient_norm <= opt_.gradient_tol;
  // A kinked gauge has no gradient at a minimizer, so a stall there is the
  // expected end. For smooth gauges a stall only counts near the tolerance.
  const bool stall_ok =
      rep_.stalled && (!d_.base().is_c1() || rep_.gradient_norm <= 100.0 * opt_.gradient_tol);
  rep_.converged = rep_.volumes_ok && (grad_ok || stall_ok);
  if (rep_.stalled) rep_.flags.push_back("stalled: no descent step found (nonsmooth or noise floor)");
  if (!rep_.volumes_ok) rep_.flags.push_back("volume error above tolerance");
  if (!rep_.converged) rep_.flags.push_back("not converged");
  rep_.diagnostics = steiner_diagnose(c_, d_, 5.0 * spacing_, opt_.wall);
  return rep_;
}

void check_problem(const OptimizationProblem& pb) {
  const auto issues = validate(pb.initial);
  if (!issues.empty()) throw std::invalid_argument("initial cluster invalid: " + issues.front());
  if (pb.targets.size() != static_cast<std::size_t>(pb.initial.m))
    throw std::invalid_argument("one target volume per chamber is required");
  const VolumeVector v = weighted_volume(pb.initial, pb.density);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(pb.targets[i] > 0.0)) throw std::invalid_argument("target volumes must be positive");
    if (!(v[i] > 0.0) || v[i] > 10.0 * pb.targets[i] || v[i] < 0.1 * pb.targets[i])
      throw std::invalid_argument("initial volume of chamber " + std::to_string(i + 1) + " is not within a factor 10 of its target");
  }
  if (pb.options.starts < 1) throw std::invalid_argument("starts must be at least 1");
}

}  // namespace

SolveReport minimize(const OptimizationProblem& problem) {
  check_problem(problem);
  const int n = problem.options.starts;
  std::vector<SolveReport> reports(static_cast<std::size_t>(n));
  std::vector<std::string> errors(static_cast<std::size_t>(n));
  {
    std::vector<std::jthread> pool;
    for (int s = 0; s < n; ++s)
      pool.emplace_back([&, s] {
        try {
          Solver solver(problem, s);
          reports[s] = solver.run();
        } catch (const std::exception& e) {
          errors[s] = e.what();
        }
      });
  }
  int best = -1;
  for (int s = 0; s < n; ++s) {
    if (!errors[s].empty()) continue;
    const SolveReport& r = reports[s];
    if (best < 0) {
      best = s;
      continue;
    }
    const SolveReport& b = reports[best];
    if (r.volumes_ok != b.volumes_ok) {
      if (r.volumes_ok) best = s;
      continue;
    }
    if (r.perimeter < b.perimeter) best = s;
  }
  if (best < 0) throw std::runtime_error("all starts failed: " + errors[0]);
  return reports[best];
}

namespace {

// Index of the vertex whose arc length from the start is closest to t, at
// least `min_index`.
std::size_t vertex_near(const Polyline& p, double t, std::size_t min_index) {
  std::size_t best = std::min(min_index, p.size() - 1);
  double acc = 0.0, err = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (k > 0) acc += distance(p[k - 1], p[k]);
    if (k >= min_index && std::abs(acc - t) < err) {
      err = std::abs(acc - t);
      best = k;
    }
  }
  return best;
}

// Tangent at p0 of the circle through p0, p1, p2, oriented towards p1.
Vec2 circle_tangent(Vec2 p0, Vec2 p1, Vec2 p2) {
  const Vec2 a = p1 - p0, b = p2 - p0;
  const double den = 2.0 * cross(a, b);
  if (std::abs(den) <= 1e-12 * dot(b, b)) return normalized(b);
  const double aa = dot(a, a), bb = dot(b, b);
  const Vec2 center{(b.y * aa - a.y * bb) / den, (a.x * bb - b.x * aa) / den};  // relative to p0
  Vec2 t = normalized(rotate_ccw(center));
  if (dot(t, a) < 0.0) t = -t;
  return t;
}

}  // namespace

std::vector<JunctionReport> detect_junctions(const Cluster& c, double radius, const Polyline& wall) {
  const auto issues = validate(c);
  if (!issues.empty()) throw std::invalid_argument("invalid cluster: " + issues.front());
  double diam = 0.0;
  for (const Vec2& p : wall)
    for (const Vec2& q : wall) diam = std::max(diam, distance(p, q));
  const double tol = 1e-9 * std::max(diam, 1e-300);
  struct Arm {
    Vec2 dir;
    int cw_label;  // label on the clockwise side of the outgoing arm
  };
  std::vector<std::vector<Arm>> arms(c.vertices.size());
  for (const Edge& e : c.edges) {
    for (int end = 0; end < 2; ++end) {
      Polyline pts = c.edge_points(static_cast<std::size_t>(&e - c.edges.data()));
      const std::size_t v = end == 0 ? e.path.front() : e.path.back();
      if (end == 1) std::reverse(pts.begin(), pts.end());
      const std::size_t k1 = vertex_near(pts, 0.5 * radius, 1);
      const std::size_t k2 = vertex_near(pts, radius, k1 + 1);
      const Vec2 dir = k2 == k1 ? normalized(pts[k1] - pts[0]) : circle_tangent(pts[0], pts[k1], pts[k2]);
      // Outgoing from the start, the right side is clockwise from the arm.
      arms[v].push_back({dir, end == 0 ? e.right : e.left});
    }
  }
  std::vector<JunctionReport> out;
  for (std::size_t v = 0; v < c.vertices.size(); ++v) {
    if (arms[v].size() < 3) continue;
    bool on_wall = false;
    for (std::size_t i = 0; i < wall.size() && !on_wall; ++i)
      if (point_segment_distance(c.vertices[v], wall[i], wall[(i + 1) % wall.size()]) <= tol) on_wall = true;
    if (on_wall) continue;
    std::vector<Arm> a = arms[v];
    // Clockwise order: decreasing polar angle.
    std::sort(a.begin(), a.end(), [](const Arm& x, const Arm& y) { return polar_angle(x.dir) > polar_angle(y.dir); });
    std::vector<int> labels;
    for (const Arm& arm : a) labels.push_back(arm.cw_label);
    std::vector<int> distinct = labels;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() < 3) continue;
    JunctionReport j;
    j.vertex = v;
    j.point = c.vertices[v];
    for (std::size_t k = 0; k < a.size(); ++k) {
      j.directions.push_back(a[k].dir);
      j.labels.push_back(labels[k]);
      j.colors.push_back(c.is_white(labels[k]) ? kWhite : labels[k]);
      j.sector_angles_deg.push_back(rad_to_deg(ccw_angle(a[(k + 1) % a.size()].dir, a[k].dir)));
    }
    j.triple = a.size() == 3;
    out.push_back(std::move(j));
  }
  return out;
}

DiagnoseReport steiner_diagnose(const Cluster& c, const Density& d, double radius, const Polyline& wall) {
  DiagnoseReport rep;
  rep.junctions = detect_junctions(c, radius, wall);
  for (JunctionReport& j : rep.junctions) {
    if (!j.triple) {
      j.skipped = true;
      rep.flags.push_back("non-triple junction at vertex " + std::to_string(j.vertex) + " (" +
                          std::to_string(j.directions.size()) + " sectors)");
      continue;
    }
    const int whites = static_cast<int>(std::count(j.colors.begin(), j.colors.end(), kWhite));
    if (whites >= 2) {
      j.skipped = true;
      rep.flags.push_back("junction with two white sectors at vertex " + std::to_string(j.vertex));
      continue;
    }
    const std::array<Vec2, 3> th{j.directions[0], j.directions[1], j.directions[2]};
    const std::array<int, 3> col{j.colors[0], j.colors[1], j.colors[2]};
    j.residual = junction_residual(d, j.point, th, col);
    j.residual_norm = norm(j.residual);
    j.relative_residual = relative_residual(d.frozen(j.point), th, j.residual);
  }
  for (std::size_t e = 0; e < c.edges.size(); ++e) {
    const Polyline p = c.edge_points(e);
    ArcReport a;
    a.edge = e;
    for (std::size_t k = 1; k + 1 < p.size(); ++k)
      a.max_turning_deg = std::max(a.max_turning_deg, rad_to_deg(angle_between(p[k] - p[k - 1], p[k + 1] - p[k])));
    rep.arcs.push_back(a);
  }
  return rep;
}

BallBound ball_bound_check(const Cluster& c, const Density& d, const std::vector<Vec2>& centers,
                           const std::vector<double>& radii) {
  BallBound out;
  out.threshold = 7.0 * d.h_max() / d.h_min();
  for (const Vec2& x : centers)
    for (double r : radii) {
      double len = 0.0;
      for (const Edge& e : c.edges) {
        if (e.left == e.right) continue;
        for (std::size_t k = 0; k + 1 < e.path.size(); ++k) {
          const Vec2 a = c.vertices[e.path[k]], b = c.vertices[e.path[k + 1]];
          const Vec2 v = b - a, w = a - x;
          const double qa = dot(v, v), qb = 2.0 * dot(w, v), qc = dot(w, w) - r * r;
          const double disc = qb * qb - 4.0 * qa * qc;
          if (!(qa > 0.0) || disc <= 0.0) continue;
          const double sq = std::sqrt(disc);
          const double t0 = std::max(0.0, (-qb - sq) / (2 * qa)), t1 = std::min(1.0, (-qb + sq) / (2 * qa));
          if (t1 > t0) len += (t1 - t0) * std::sqrt(qa);
        }
      }
      const double ratio = len / r;
      if (ratio > out.worst_ratio) {
        out.worst_ratio = ratio;
        out.worst_center = x;
        out.worst_radius = r;
      }
    }
  out.pass = out.worst_ratio < out.threshold;
  return out;
}

double hausdorff_to_segments(const Cluster& c, const std::vector<std::pair<Vec2, Vec2>>& segments,
                             const Polyline& wall, int samples) {
  double diam = 0.0;
  for (const Vec2& p : wall)
    for (const Vec2& q : wall) diam = std::max(diam, distance(p, q));
  const double tol = 1e-9 * std::max(diam, 1e-300);
  std::vector<std::pair<Vec2, Vec2>> mine;
  for (const Edge& e : c.edges) {
    if (e.left == e.right) continue;
    for (std::size_t k = 0; k + 1 < e.path.size(); ++k) {
      const Vec2 a = c.vertices[e.path[k]], b = c.vertices[e.path[k + 1]];
      if (!wall.empty() && segment_on_wall(a, b, wall, tol)) continue;
      mine.emplace_back(a, b);
    }
  }
  auto dist_to = [](Vec2 p, const std::vector<std::pair<Vec2, Vec2>>& set) {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& [a, b] : set) m = std::min(m, point_segment_distance(p, a, b));
    return m;
  };
  double h = 0.0;
  const std::vector<std::pair<Vec2, Vec2>>* sets[2] = {&mine, &segments};
  for (int k = 0; k < 2; ++k) {
    const auto* from = sets[k];
    const auto& to = *sets[1 - k];
    for (const auto& [a, b] : *from)
      for (int s = 0; s <= samples; ++s) h = std::max(h, dist_to(a + (b - a) * (static_cast<double>(s) / samples), to));
  }
  return h;
}

}  // namespace isocluster

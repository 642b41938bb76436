#include "isocluster/steiner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace isocluster {

namespace {

struct Term {
  Vec2 x;
  double sign;  // the term is phi(sign * (x - p))
  bool sym;
};

std::array<Term, 3> terms_for(Vec2 a, Vec2 b, Vec2 c, JunctionPattern pattern) {
  switch (pattern) {
    case JunctionPattern::plain:
      return {Term{a, 1.0, false}, Term{b, 1.0, false}, Term{c, 1.0, false}};
    case JunctionPattern::all_colored:
      return {Term{a, 1.0, true}, Term{b, 1.0, true}, Term{c, 1.0, true}};
    case JunctionPattern::one_white:
      return {Term{a, 1.0, false}, Term{b, -1.0, false}, Term{c, 1.0, true}};
  }
  return {};
}

struct Objective {
  Gauge g;
  Gauge s;
  std::array<Term, 3> terms;

  double value(Vec2 p) const {
    double v = 0.0;
    for (const Term& t : terms) v += (t.sym ? s : g).eval((t.x - p) * t.sign);
    return v;
  }

  Vec2 term_grad(const Term& t, Vec2 p) const {
    return (t.sym ? s : g).grad((t.x - p) * t.sign) * (-t.sign);
  }

  // Gradient away from the inputs.
  Vec2 gradient(Vec2 p) const {
    Vec2 out;
    for (const Term& t : terms) out += term_grad(t, p);
    return out;
  }

  // Minimum over unit directions of the one-sided derivative at input i.
  double vertex_slope(int i) const {
    const Term& ti = terms[i];
    Vec2 rest;
    for (int j = 0; j < 3; ++j)
      if (j != i) rest += term_grad(terms[j], ti.x);
    const Gauge& phi = ti.sym ? s : g;
    auto slope = [&](double th) {
      const Vec2 d = unit(th);
      return dot(rest, d) + phi.eval(d * (-ti.sign));
    };
    constexpr int kCoarse = 3600;
    int best = 0;
    double bv = slope(0.0);
    for (int k = 1; k < kCoarse; ++k) {
      const double v = slope(kTwoPi * k / kCoarse);
      if (v < bv) {
        bv = v;
        best = k;
      }
    }
    // Golden-section refinement around the coarse minimum.
    double lo = kTwoPi * (best - 1) / kCoarse, hi = kTwoPi * (best + 1) / kCoarse;
    const double r = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - r * (hi - lo), x2 = lo + r * (hi - lo);
    double f1 = slope(x1), f2 = slope(x2);
    for (int it = 0; it < 80; ++it) {
      if (f1 < f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - r * (hi - lo);
        f1 = slope(x1);
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + r * (hi - lo);
        f2 = slope(x2);
      }
    }
    return std::min({bv, f1, f2});
  }
};

}  // namespace

double fermat_objective(const Gauge& gauge, Vec2 a, Vec2 b, Vec2 c, JunctionPattern pattern, Vec2 p) {
  const Objective obj{gauge, symmetrized(gauge), terms_for(a, b, c, pattern)};
  return obj.value(p);
}

FermatResult fermat_point(const Gauge& gauge, Vec2 a, Vec2 b, Vec2 c, JunctionPattern pattern) {
  const double diam = std::max({distance(a, b), distance(b, c), distance(a, c)});
  if (!(diam > 0.0) || distance(a, b) <= 1e-14 * diam || distance(b, c) <= 1e-14 * diam ||
      distance(a, c) <= 1e-14 * diam)
    throw std::invalid_argument("fermat_point needs three distinct points");

  const Objective obj{gauge, symmetrized(gauge), terms_for(a, b, c, pattern)};
  FermatResult out;
  out.collinear = std::abs(cross(b - a, c - a)) <= 1e-12 * diam * diam;
  const Vec2 pts[3] = {a, b, c};
  const double degenerate_tol = 1e-8 * diam;

  // Vertex optimality: all one-sided derivatives nonnegative.
  double gscale = 0.0;
  for (const Term& t : obj.terms) gscale += (t.sym ? obj.s : obj.g).eval(unit(0.0)) + (t.sym ? obj.s : obj.g).eval(unit(kPi / 2));
  for (int i = 0; i < 3; ++i) {
    if (obj.vertex_slope(i) >= -1e-12 * gscale) {
      out.point = pts[i];
      out.objective = obj.value(pts[i]);
      out.degenerate = true;
      out.vertex = i;
      out.converged = true;
      return out;
    }
  }

  // Quasi-Newton descent from the centroid.
  Vec2 p = (a + b + c) / 3.0;
  auto safe_grad = [&](Vec2 q) {
    for (const Vec2& x : pts)
      if (distance(q, x) <= 1e-15 * diam) q += Vec2{1e-12 * diam, 0.7e-12 * diam};
    return obj.gradient(q);
  };
  double f = obj.value(p);
  Vec2 gr = safe_grad(p);
  const double gnorm0 = std::max(norm(gr), 1e-300);
  double h00 = 0.1 * diam / gnorm0, h01 = 0.0, h11 = h00;
  int it = 0;
  bool converged = false;
  for (; it < 1000; ++it) {
    Vec2 d{-(h00 * gr.x + h01 * gr.y), -(h01 * gr.x + h11 * gr.y)};
    if (dot(d, gr) >= 0.0) {
      h00 = h11 = 0.1 * diam / std::max(norm(gr), 1e-300);
      h01 = 0.0;
      d = gr * (-h00);
    }
    double alpha = 1.0;
    Vec2 pn;
    double fn = f;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      pn = p + d * alpha;
      fn = obj.value(pn);
      if (fn <= f + 1e-4 * alpha * dot(gr, d)) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      // Descent stalled; accept only a non-increasing tiny step.
      if (fn <= f) p = pn, f = fn;
      break;
    }
    const Vec2 s = pn - p;
    const Vec2 gn = safe_grad(pn);
    const Vec2 y = gn - gr;
    p = pn;
    f = fn;
    gr = gn;
    if (norm(s) < 1e-10 * diam && norm(gr) < 1e-10 * gscale) {
      converged = true;
      break;
    }
    if (norm(gr) < 1e-14 * gscale) {
      converged = true;
      break;
    }
    const double sy = dot(s, y);
    if (sy > 1e-300) {
      // BFGS update of the inverse Hessian.
      const double rho = 1.0 / sy;
      const Vec2 hy{h00 * y.x + h01 * y.y, h01 * y.x + h11 * y.y};
      const double yhy = dot(y, hy);
      const double c1 = (1.0 + rho * yhy) * rho;
      h00 += c1 * s.x * s.x - rho * (hy.x * s.x + s.x * hy.x);
      h01 += c1 * s.x * s.y - rho * (hy.x * s.y + s.x * hy.y);
      h11 += c1 * s.y * s.y - rho * (hy.y * s.y + s.y * hy.y);
    }
  }
  out.point = p;
  out.objective = f;
  out.iterations = it;
  out.converged = converged;
  for (int i = 0; i < 3; ++i)
    if (distance(p, pts[i]) <= degenerate_tol) {
      out.point = pts[i];
      out.objective = obj.value(pts[i]);
      out.degenerate = true;
      out.vertex = i;
    }
  return out;
}

namespace {

std::array<Vec2, 3> checked_directions(const std::array<Vec2, 3>& theta) {
  std::array<Vec2, 3> t;
  for (int i = 0; i < 3; ++i) {
    const double n = norm(theta[i]);
    if (!(n > 0.0)) throw std::invalid_argument("junction directions must be nonzero");
    t[i] = theta[i] / n;
  }
  for (int i = 0; i < 3; ++i)
    if (angle_between(t[i], t[(i + 1) % 3]) <= 1e-12) throw std::invalid_argument("junction directions must be distinct");
  double turn = 0.0;
  for (int i = 0; i < 3; ++i) turn += ccw_angle(t[(i + 1) % 3], t[i]);
  if (std::abs(turn - kTwoPi) > 1e-9) throw std::invalid_argument("junction directions must be ordered clockwise");
  return t;
}

}  // namespace

Vec2 junction_residual(const Gauge& h, const std::array<Vec2, 3>& theta, const std::array<int, 3>& colors) {
  const std::array<Vec2, 3> t = checked_directions(theta);
  const Gauge hh = tangent_gauge(h);
  const int whites = static_cast<int>(std::count(colors.begin(), colors.end(), kWhite));
  if (whites >= 2) throw std::invalid_argument("junction with two or more white sectors");
  auto odd = [&](Vec2 v) { return (hh.grad(v) - hh.grad(-v)) * 0.5; };
  if (whites == 0) return odd(t[0]) + odd(t[1]) + odd(t[2]);
  const int k = static_cast<int>(std::find(colors.begin(), colors.end(), kWhite) - colors.begin());
  const Vec2 t1 = t[k], t2 = t[(k + 1) % 3], t3 = t[(k + 2) % 3];
  return hh.grad(t1) - hh.grad(-t2) + odd(t3);
}

Vec2 junction_residual(const Density& d, Vec2 o, const std::array<Vec2, 3>& theta, const std::array<int, 3>& colors) {
  return junction_residual(d.frozen(o), theta, colors);
}

double relative_residual(const Gauge& h, const std::array<Vec2, 3>& theta, Vec2 residual) {
  const Gauge hh = tangent_gauge(h);
  double s = 0.0;
  for (const Vec2& t : theta) s += norm(hh.grad(t)) / 3.0;
  return norm(residual) / s;
}

std::vector<AdmissibleTriple> admissible_pairs(const Gauge& gauge, Vec2 a, int resolution) {
  if (!gauge.is_c1()) throw KinkedGaugeError();
  if (std::abs(gauge.eval(a) - 1.0) > 1e-9) throw std::invalid_argument("admissible_pairs needs eval(A) = 1");
  if (resolution < 8) throw std::invalid_argument("admissible_pairs needs resolution >= 8");
  const int n = resolution;
  const Vec2 ga = gauge.grad(a);
  std::vector<Vec2> g(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) g[k] = gauge.grad(unit(kTwoPi * k / n));

  auto residual = [&](double pb, double pc) { return ga + gauge.grad(unit(pb)) + gauge.grad(unit(pc)); };
  auto dgrad = [&](double p) {
    constexpr double h = 1e-6;
    return (gauge.grad(unit(p + h)) - gauge.grad(unit(p - h))) / (2.0 * h);
  };

  struct Root {
    double pb, pc, res;
  };
  std::vector<Root> roots;
  auto wrap = [](double x) {
    x = std::fmod(x, kTwoPi);
    return x < 0.0 ? x + kTwoPi : x;
  };
  auto ang_dist = [](double x, double y) { return std::abs(std::remainder(x - y, kTwoPi)); };
  const double pa = polar_angle(a);

  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const int i1 = (i + 1) % n, j1 = (j + 1) % n;
      const Vec2 f[4] = {ga + g[i] + g[j], ga + g[i1] + g[j], ga + g[i] + g[j1], ga + g[i1] + g[j1]};
      double xmin = f[0].x, xmax = f[0].x, ymin = f[0].y, ymax = f[0].y;
      for (const Vec2& v : f) {
        xmin = std::min(xmin, v.x);
        xmax = std::max(xmax, v.x);
        ymin = std::min(ymin, v.y);
        ymax = std::max(ymax, v.y);
      }
      if (!(xmin <= 0.0 && xmax >= 0.0 && ymin <= 0.0 && ymax >= 0.0)) continue;

      // Damped Newton from the cell center.
      double pb = kTwoPi * (i + 0.5) / n, pc = kTwoPi * (j + 0.5) / n;
      Vec2 r = residual(pb, pc);
      for (int it = 0; it < 60 && norm(r) > 1e-15; ++it) {
        const Vec2 jb = dgrad(pb), jc = dgrad(pc);
        const double det = jb.x * jc.y - jc.x * jb.y;
        if (std::abs(det) < 1e-300) break;
        const double db = -(jc.y * r.x - jc.x * r.y) / det;
        const double dc = -(-jb.y * r.x + jb.x * r.y) / det;
        double lam = 1.0;
        bool moved = false;
        for (int ls = 0; ls < 40; ++ls) {
          const Vec2 rn = residual(pb + lam * db, pc + lam * dc);
          if (norm(rn) < norm(r)) {
            pb += lam * db;
            pc += lam * dc;
            r = rn;
            moved = true;
            break;
          }
          lam *= 0.5;
        }
        if (!moved) break;
      }
      if (!(norm(r) < 1e-9)) continue;
      pb = wrap(pb);
      pc = wrap(pc);
      if (ang_dist(pb, pc) < 1e-6 || ang_dist(pb, pa) < 1e-6 || ang_dist(pc, pa) < 1e-6) continue;
      if (pb > pc) std::swap(pb, pc);
      bool dup = false;
      for (const Root& q : roots)
        if (ang_dist(q.pb, pb) < 1e-6 && ang_dist(q.pc, pc) < 1e-6) dup = true;
      if (!dup) roots.push_back({pb, pc, norm(r)});
    }

  // Order each pair counterclockwise from A, then sort by B.
  std::vector<AdmissibleTriple> out;
  for (Root r : roots) {
    double pb = r.pb, pc = r.pc;
    if (wrap(pb - pa) > wrap(pc - pa)) std::swap(pb, pc);
    AdmissibleTriple t;
    t.a = a;
    t.b = unit(pb) / gauge.eval(unit(pb));
    t.c = unit(pc) / gauge.eval(unit(pc));
    t.residual = r.res;
    t.angle_ab_deg = rad_to_deg(angle_between(t.a, t.b));
    t.angle_ac_deg = rad_to_deg(angle_between(t.a, t.c));
    out.push_back(t);
  }
  std::sort(out.begin(), out.end(),
            [&](const AdmissibleTriple& x, const AdmissibleTriple& y) {
              return wrap(polar_angle(x.b) - pa) < wrap(polar_angle(y.b) - pa);
            });
  return out;
}

}  // namespace isocluster

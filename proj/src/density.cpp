#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "isocluster/gauge.hpp"

namespace isocluster {

Domain Domain::rectangle(Vec2 lo, Vec2 hi) {
  if (!(hi.x > lo.x && hi.y > lo.y)) throw std::invalid_argument("empty rectangle domain");
  Domain d;
  d.shape = Shape::rectangle;
  d.lo = lo;
  d.hi = hi;
  d.center = (lo + hi) * 0.5;
  d.radius = 0.5 * distance(lo, hi);
  return d;
}

Domain Domain::disk(Vec2 center, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("disk domain needs a positive radius");
  Domain d;
  d.shape = Shape::disk;
  d.center = center;
  d.radius = radius;
  d.lo = center - Vec2{radius, radius};
  d.hi = center + Vec2{radius, radius};
  return d;
}

bool Domain::contains(Vec2 p, double tol) const {
  const double s = tol * std::max(1.0, diameter());
  if (shape == Shape::disk) return distance(p, center) <= radius + s;
  return p.x >= lo.x - s && p.x <= hi.x + s && p.y >= lo.y - s && p.y <= hi.y + s;
}

double Domain::diameter() const {
  return shape == Shape::disk ? 2.0 * radius : distance(lo, hi);
}

Vec2 Domain::middle() const { return center; }
Vec2 Domain::bbox_lo() const { return lo; }
Vec2 Domain::bbox_hi() const { return hi; }

namespace {

std::vector<Vec2> domain_grid(const Domain& d, int n) {
  std::vector<Vec2> pts;
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j) {
      const Vec2 p{d.lo.x + (d.hi.x - d.lo.x) * i / n, d.lo.y + (d.hi.y - d.lo.y) * j / n};
      if (d.contains(p)) pts.push_back(p);
    }
  pts.push_back(d.center);
  return pts;
}

}  // namespace

Density::Density(Gauge base, Field factor, Field g, Domain domain)
    : base_(std::move(base)), factor_(std::move(factor)), g_(std::move(g)), domain_(domain) {
  separable_ = true;
  constant_h_ = !factor_;
  if (!g_) g_ = [](Vec2) { return 1.0; };
  compute_bounds();
}

Density Density::uniform(Gauge base, double g, Domain domain) {
  if (!(g > 0.0)) throw std::invalid_argument("volume density must be positive");
  return Density(std::move(base), nullptr, [g](Vec2) { return g; }, domain);
}

Density Density::general(Anisotropic h, Field g, Domain domain) {
  Density d;
  d.general_ = std::move(h);
  d.g_ = g ? std::move(g) : Field([](Vec2) { return 1.0; });
  d.domain_ = domain;
  d.separable_ = false;
  d.constant_h_ = false;
  d.compute_bounds();
  return d;
}

double Density::h(Vec2 x, Vec2 nu) const {
  if (separable_) return factor_ ? factor_(x) * base_.eval(nu) : base_.eval(nu);
  const double n = norm(nu);
  if (n == 0.0) return 0.0;
  return n * general_(x, nu / n);
}

double Density::g(Vec2 x) const { return g_(x); }

Gauge Density::frozen(Vec2 x) const {
  if (separable_) {
    if (!factor_) return base_;
    return base_.scaled(factor_(x));
  }
  auto fn = general_;
  bool sym = true;
  for (int k = 0; k < 90 && sym; ++k) {
    const Vec2 u = unit(kTwoPi * k / 180.0);
    const double a = fn(x, u), b = fn(x, -u);
    sym = std::abs(a - b) <= 1e-12 * std::max(a, b);
  }
  return Gauge::from_profile([fn, x](Vec2 u) { return fn(x, u); }, sym);
}

Density Density::scaled(double sh, double sg) const {
  if (!(sh > 0.0 && sg > 0.0)) throw std::invalid_argument("density scale factors must be positive");
  Density d = *this;
  auto g = g_;
  d.g_ = [g, sg](Vec2 x) { return sg * g(x); };
  if (separable_) {
    d.base_ = base_.scaled(sh);
  } else {
    auto h = general_;
    d.general_ = [h, sh](Vec2 x, Vec2 u) { return sh * h(x, u); };
  }
  d.compute_bounds();
  return d;
}

void Density::compute_bounds() {
  constexpr int kDirections = 720;
  constexpr int kGrid = 40;
  const auto pts = domain_grid(domain_, kGrid);
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  if (separable_) {
    double blo = lo, bhi = 0.0;
    for (int k = 0; k < kDirections; ++k) {
      const double v = base_.eval(unit(kTwoPi * k / kDirections));
      blo = std::min(blo, v);
      bhi = std::max(bhi, v);
    }
    double flo = 1.0, fhi = 1.0;
    if (factor_) {
      flo = std::numeric_limits<double>::infinity();
      fhi = 0.0;
      for (const Vec2& p : pts) {
        const double f = factor_(p);
        if (!std::isfinite(f) || !(f > 0.0)) throw std::invalid_argument("perimeter density must be positive and finite on the domain");
        flo = std::min(flo, f);
        fhi = std::max(fhi, f);
      }
    }
    lo = blo * flo;
    hi = bhi * fhi;
  } else {
    for (const Vec2& p : pts)
      for (int k = 0; k < kDirections; k += 4) {
        const double v = general_(p, unit(kTwoPi * k / kDirections));
        if (!std::isfinite(v) || !(v > 0.0)) throw std::invalid_argument("perimeter density must be positive and finite on the domain");
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
  }
  for (const Vec2& p : pts) {
    const double gv = g_(p);
    if (!std::isfinite(gv) || gv < 0.0) throw std::invalid_argument("volume density must be nonnegative and finite on the domain");
  }
  h_min_ = lo;
  h_max_ = hi;
}

double estimate_modulus(const Density& d, double t, int samples, std::uint64_t seed) {
  if (!(t > 0.0)) throw std::invalid_argument("modulus radius must be positive");
  if (samples < 100) throw std::invalid_argument("estimate_modulus needs at least 100 samples");
  const Domain& dom = d.domain();
  t = std::min(t, dom.diameter());
  if (d.spatially_constant()) return 0.0;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(dom.lo.x, dom.hi.x), uy(dom.lo.y, dom.hi.y);
  std::uniform_real_distribution<double> ang(0.0, kTwoPi);

  // Parameters: x, direction of y - x, normal direction.
  struct Probe {
    Vec2 x;
    double phi;
    double psi;
  };
  auto value = [&](const Probe& p) {
    const Vec2 y = p.x + unit(p.phi) * t;
    if (!dom.contains(p.x, 0.0) || !dom.contains(y, 0.0)) return -1.0;
    const Vec2 nu = unit(p.psi);
    return std::abs(d.h(p.x, nu) - d.h(y, nu));
  };

  constexpr int kKeep = 8;
  std::vector<std::pair<double, Probe>> best;
  for (int s = 0; s < samples; ++s) {
    Probe p{{ux(rng), uy(rng)}, ang(rng), ang(rng)};
    const double v = value(p);
    if (v < 0.0) continue;
    best.emplace_back(v, p);
    if (static_cast<int>(best.size()) > 4 * kKeep) {
      std::partial_sort(best.begin(), best.begin() + kKeep, best.end(),
                        [](const auto& a, const auto& b) { return a.first > b.first; });
      best.resize(kKeep);
    }
  }
  std::sort(best.begin(), best.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  if (best.size() > static_cast<std::size_t>(kKeep)) best.resize(kKeep);

  // Compass search from the best samples; every probe is a feasible pair, so
  // the result stays a lower estimate.
  double out = 0.0;
  for (auto [v, p] : best) {
    double step_x = 0.1 * dom.diameter(), step_a = 0.5;
    while (step_x > 1e-12 * dom.diameter() || step_a > 1e-10) {
      bool moved = false;
      const Probe moves[8] = {{p.x + Vec2{step_x, 0}, p.phi, p.psi}, {p.x - Vec2{step_x, 0}, p.phi, p.psi},
                              {p.x + Vec2{0, step_x}, p.phi, p.psi}, {p.x - Vec2{0, step_x}, p.phi, p.psi},
                              {p.x, p.phi + step_a, p.psi},          {p.x, p.phi - step_a, p.psi},
                              {p.x, p.phi, p.psi + step_a},          {p.x, p.phi, p.psi - step_a}};
      for (const Probe& q : moves) {
        const double w = value(q);
        if (w > v) {
          v = w;
          p = q;
          moved = true;
        }
      }
      if (!moved) {
        step_x *= 0.5;
        step_a *= 0.5;
      }
    }
    out = std::max(out, v);
  }
  return out;
}

}  // namespace isocluster

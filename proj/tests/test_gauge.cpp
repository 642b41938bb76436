#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "isocluster/gauge.hpp"
#include "oracles.hpp"

using namespace isocluster;

namespace {

struct Named {
  std::string name;
  Gauge g;
};

Gauge tabulated_from(const Gauge& src, int n) {
  std::vector<double> a, v;
  for (int k = 0; k < n; ++k) {
    a.push_back(kTwoPi * k / n);
    v.push_back(src.eval(unit(a.back())));
  }
  return Gauge::tabulated(a, v);
}

std::vector<Named> builtin_gauges() {
  return {
      {"euclidean", Gauge::euclidean()},
      {"lp1.5", Gauge::lp(1.5)},
      {"lp3", Gauge::lp(3.0)},
      {"max", Gauge::max_norm()},
      {"ellipse", Gauge::ellipse(1.0, 0.3, 4.0)},
      {"smoothed-l1", Gauge::smoothed_l1(0.05)},
      {"shifted-disk", Gauge::shifted_disk({0.0, -0.5}, 1.0)},
      {"tabulated", tabulated_from(Gauge::shifted_disk({0.2, 0.1}, 1.0), 90)},
  };
}

bool near_kink(const Gauge& g, Vec2 v) {
  // Kinks of the built-in gauges sit on the diagonals (max-norm and
  // smoothed-l1) or the axes (lp(1)).
  if (g.is_c1()) return false;
  return std::abs(std::abs(v.x) - std::abs(v.y)) < 1e-3 * norm(v);
}

}  // namespace

TEST_CASE("eval examples") {
  CHECK(Gauge::euclidean().eval({3, 4}) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(Gauge::lp(2).eval({1, 1}) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  for (double p : {1.0, 1.5, 2.5, 3.0, 5.0, 7.3}) {
    CAPTURE(p);
    CHECK(Gauge::lp(p).eval({1, 1}) == doctest::Approx(oracle::lp_norm_bisection(p, {1, 1})).epsilon(1e-12));
    CHECK(Gauge::lp(p).eval({1, 1}) == doctest::Approx(std::pow(2.0, 1.0 / p)).epsilon(1e-14));
  }
  oracle::Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const Vec2 v = rng.nonzero_vec(5.0);
    CHECK(Gauge::lp(3.0).eval(v) == doctest::Approx(oracle::lp_norm_bisection(3.0, v)).epsilon(1e-12));
  }
  CHECK(Gauge::max_norm().eval({-0.3, 2.0}) == 2.0);
  CHECK(Gauge::euclidean().eval({0, 0}) == 0.0);
  CHECK(Gauge::shifted_disk({0, -0.5}, 1.0).eval({0, 0}) == 0.0);
}

TEST_CASE("grad examples") {
  const Vec2 g = Gauge::euclidean().grad({1, 0});
  CHECK(g.x == 1.0);
  CHECK(g.y == 0.0);
  CHECK_THROWS_AS(Gauge::euclidean().grad({0, 0}), std::invalid_argument);

  // lp(3): gradient on the boundary against nu_P / (P . nu_P) with a
  // finite-difference level-set normal.
  const Gauge l3 = Gauge::lp(3.0);
  for (const Vec2& p : unit_ball_boundary(l3, 64)) {
    const Vec2 nu = oracle::level_set_normal([&](Vec2 v) { return oracle::lp_norm_bisection(3.0, v); }, p);
    const Vec2 expect = nu / dot(p, nu);
    const Vec2 got = l3.grad(p);
    CHECK(norm(got - expect) <= 1e-6 * norm(expect));
  }
}

TEST_CASE("max-norm subgradient at a corner is flagged") {
  const Subgradient s = Gauge::max_norm().subgradient({1, 1});
  CHECK(s.kink);
  CHECK(dot(s.value, Vec2{1, 1}) == doctest::Approx(1.0));
  CHECK_FALSE(Gauge::max_norm().subgradient({1, 0.5}).kink);
  CHECK(Gauge::smoothed_l1(0.1).subgradient({2, 2}).kink);
}

TEST_CASE("rotations and induced gauges") {
  CHECK(rotate_cw(Vec2{1, 0}) == Vec2{0, -1});
  CHECK(rotate_ccw(rotate_cw(Vec2{0.3, -2})) == Vec2{0.3, -2});

  oracle::Rng rng(11);
  const Gauge ell = Gauge::ellipse(2.0, 0.5, 1.0);
  const Gauge t = tangent_gauge(ell);
  const Gauge ts = symmetrized(t);
  for (int i = 0; i < 100; ++i) {
    const Vec2 v = rng.nonzero_vec(3.0);
    CHECK(t.eval(v) == doctest::Approx(ell.eval({v.y, -v.x})).epsilon(1e-14));
    CHECK(ts.eval(v) == doctest::Approx(t.eval(v)).epsilon(1e-14));
  }

  const Gauge sd = tangent_gauge(Gauge::shifted_disk({0, -0.5}, 1.0));
  CHECK(std::abs(sd.eval({1, 0}) - sd.eval({-1, 0})) > 0.1);
  const Gauge sds = symmetrized(sd);
  CHECK(sds.eval({1, 0}) == doctest::Approx(0.5 * (sd.eval({1, 0}) + sd.eval({-1, 0}))));
  CHECK(sds.is_symmetric());
  CHECK_FALSE(sd.is_symmetric());
}

TEST_CASE("unit ball boundary") {
  for (const Vec2& p : unit_ball_boundary(Gauge::euclidean(), 4)) CHECK(norm(p) == doctest::Approx(1.0));

  const Polyline sq = unit_ball_boundary(Gauge::max_norm(), 8);
  REQUIRE(sq.size() == 8);
  const Vec2 corners[4] = {{1, 1}, {-1, 1}, {-1, -1}, {1, -1}};
  for (const Vec2& c : corners) {
    bool found = false;
    for (const Vec2& p : sq) found = found || distance(p, c) < 1e-12;
    CHECK(found);
  }

  const Polyline sd = unit_ball_boundary(Gauge::shifted_disk({0, -0.5}, 1.0), 4);
  CHECK(distance(sd[1], Vec2{0, 0.5}) < 1e-12);
  CHECK(distance(sd[3], Vec2{0, -1.5}) < 1e-12);

  for (const auto& [name, g] : builtin_gauges()) {
    CAPTURE(name);
    const Polyline b = unit_ball_boundary(g, 97);
    for (const Vec2& p : b) CHECK(std::abs(g.eval(p) - 1.0) <= 1e-10);
    CHECK(signed_area(b) > 0.0);
    for (std::size_t i = 0; i + 1 < b.size(); ++i) CHECK(polar_angle(b[i + 1]) > polar_angle(b[i]));
  }
}

TEST_CASE("strict convexity margin") {
  CHECK(strict_convexity_margin(Gauge::euclidean(), 64).value > 0.0);
  CHECK(strict_convexity_margin(Gauge::euclidean(), 64).resolution == 64);
  CHECK(strict_convexity_margin(Gauge::max_norm(), 64).value == 0.0);
  CHECK(strict_convexity_margin(Gauge::smoothed_l1(0.05), 64).value > 0.0);
  CHECK(strict_convexity_margin(Gauge::lp(1.0), 32).value == 0.0);
  CHECK_THROWS(strict_convexity_margin(Gauge::euclidean(), 8));
}

TEST_CASE("roundedness constant") {
  // Oracle: brute-force grid minimization of ((|nu+w| + |nu-w|)/2 - 1)/|w|^2.
  double brute = 1e300;
  for (int k = 1; k <= 10000; ++k) {
    const double t = k / 10000.0;
    brute = std::min(brute, (std::sqrt(1 + t * t) - 1.0) / (t * t));
  }
  CHECK(roundedness_constant(Gauge::euclidean(), 64).value == doctest::Approx(brute).epsilon(1e-9));
  CHECK(brute == doctest::Approx(std::sqrt(2.0) - 1.0).epsilon(1e-12));
  CHECK(roundedness_constant(Gauge::max_norm(), 64).value == 0.0);
  CHECK(roundedness_constant(Gauge::ellipse(1.0, 0.0, 4.0), 64).value > 0.0);
  CHECK(roundedness_constant(Gauge::smoothed_l1(0.05), 64).value > 0.0);
}

TEST_CASE("path length") {
  CHECK(path_length(Gauge::euclidean(), {{0, 0}, {1, 0}}) == 1.0);
  CHECK(path_length(Gauge::euclidean(), {{0, 0}}) == 0.0);
  const Gauge sd = Gauge::shifted_disk({0, -0.5}, 1.0);
  const Polyline seg{{0, 0}, {0, 1}};
  CHECK(std::abs(path_length(sd, seg) - path_length(sd, seg, true)) > 0.1);
}

TEST_CASE("Jensen chord bound on random polylines") {
  oracle::Rng rng(5);
  for (const auto& [name, g] : builtin_gauges()) {
    CAPTURE(name);
    for (int i = 0; i < 500; ++i) {
      Polyline p;
      const int n = rng.integer(2, 12);
      for (int k = 0; k < n; ++k) p.push_back(rng.vec(2.0));
      const double chord = g.eval(p.back() - p.front());
      CHECK(path_length(g, p) >= chord - 1e-12 * (1.0 + chord));
      CHECK(path_length(g, p, true) >= g.eval(p.front() - p.back()) - 1e-12 * (1.0 + chord));
    }
  }
}

TEST_CASE("gauge invariants on random inputs") {
  oracle::Rng rng(7);
  for (const auto& [name, g] : builtin_gauges()) {
    CAPTURE(name);
    for (int i = 0; i < 1000; ++i) {
      const Vec2 v = rng.nonzero_vec(3.0), w = rng.nonzero_vec(3.0);
      const double lam = rng.uniform(0.0, 10.0);
      const double ev = g.eval(v);
      CHECK(ev > 0.0);
      CHECK(g.eval(v * lam) == doctest::Approx(lam * ev).epsilon(1e-12));
      CHECK(g.eval(v + w) <= ev + g.eval(w) + 1e-12 * (ev + g.eval(w)));
      CHECK(dot(g.grad(v), v) == doctest::Approx(ev).epsilon(1e-9));
      if (lam > 1e-3) {
        const Vec2 a = g.grad(v), b = g.grad(v * lam);
        if (!near_kink(g, v)) CHECK(norm(a - b) <= 1e-9 * norm(a));
      }
    }
  }
}

TEST_CASE("analytic gradients match central differences") {
  oracle::Rng rng(9);
  for (const auto& [name, g] : builtin_gauges()) {
    CAPTURE(name);
    int checked = 0;
    for (int i = 0; i < 1000; ++i) {
      const Vec2 v = rng.nonzero_vec(3.0);
      if (near_kink(g, v)) continue;
      const Vec2 fd = oracle::fd_gradient([&](Vec2 x) { return g.eval(x); }, v, 1e-6 * norm(v));
      const Vec2 an = g.grad(v);
      CHECK(norm(fd - an) <= 1e-6 * norm(an));
      ++checked;
    }
    CHECK(checked > 900);
  }
}

TEST_CASE("boundary gradient identity on smooth gauges") {
  for (const auto& [name, g] : builtin_gauges()) {
    if (!g.is_c1()) continue;
    CAPTURE(name);
    for (const Vec2& p : unit_ball_boundary(g, 200)) {
      const Vec2 nu = oracle::level_set_normal([&](Vec2 v) { return g.eval(v); }, p);
      const Vec2 expect = nu / dot(p, nu);
      CHECK(norm(g.grad(p) - expect) <= 1e-6 * norm(expect));
    }
  }
}

TEST_CASE("gradient symmetry") {
  oracle::Rng rng(13);
  for (const auto& [name, g] : builtin_gauges()) {
    CAPTURE(name);
    bool violated = false;
    for (int i = 0; i < 200; ++i) {
      const Vec2 v = rng.nonzero_vec(1.0);
      if (near_kink(g, v)) continue;
      const double err = norm(g.grad(-v) + g.grad(v));
      if (g.is_symmetric()) CHECK(err <= 1e-12);
      violated = violated || err > 1e-6;
    }
    CHECK(violated == !g.is_symmetric());
  }
}

TEST_CASE("tabulated gauge reproduces a smooth profile") {
  const Gauge src = Gauge::lp(3.0);
  const Gauge tab = tabulated_from(src, 360);
  oracle::Rng rng(17);
  for (int i = 0; i < 200; ++i) {
    const Vec2 v = rng.nonzero_vec(2.0);
    CHECK(tab.eval(v) == doctest::Approx(src.eval(v)).epsilon(1e-5));
    CHECK(norm(tab.grad(v) - src.grad(v)) < 1e-3);
  }
  CHECK(tab.is_symmetric());
  CHECK(tab.is_strictly_convex());
  CHECK_THROWS(Gauge::tabulated({0, 1, 2}, {1, 1, 1}));
  CHECK_THROWS(Gauge::tabulated({0, 1, 1, 2}, {1, 1, 1, 1}));
}

TEST_CASE("rotated gauge") {
  const Gauge g = Gauge::ellipse(1.0, 0.0, 4.0);
  const Gauge r = g.rotated(kPi / 2);
  CHECK(r.eval({1, 0}) == doctest::Approx(g.eval({0, 1})));
  CHECK(r.eval({0, 1}) == doctest::Approx(g.eval({1, 0})));
}

TEST_CASE("modulus of continuity") {
  const Domain dom = Domain::rectangle({-1, -1}, {1, 1});
  const Density flat = Density::uniform(Gauge::lp(3.0), 1.0, dom);
  for (double t : {0.01, 0.1, 1.0}) CHECK(estimate_modulus(flat, t, 500) == 0.0);

  const Density lin(Gauge::euclidean(), [](Vec2 x) { return 1.0 + norm(x); }, nullptr, dom);
  for (double t : {0.01, 0.1, 0.5}) {
    CAPTURE(t);
    const double few = estimate_modulus(lin, t, 100, 1);
    const double many = estimate_modulus(lin, t, 20000, 1);
    CHECK(few <= t * (1 + 1e-12));
    CHECK(many <= t * (1 + 1e-12));
    CHECK(many >= 0.999 * t);
  }
  // Huge radii clamp to the diameter.
  CHECK(estimate_modulus(lin, 100.0, 1000) <= dom.diameter() + 1e-12);

  const double alpha = 0.5;
  const Density hold(Gauge::euclidean(), [alpha](Vec2 x) { return 1.0 + std::pow(std::abs(x.x), alpha); }, nullptr, dom);
  std::vector<double> lt, lw;
  for (double t : {1e-3, 1e-2, 1e-1, 1.0}) {
    lt.push_back(std::log(t));
    lw.push_back(std::log(estimate_modulus(hold, t, 5000)));
  }
  double mt = 0, mw = 0;
  for (std::size_t i = 0; i < lt.size(); ++i) {
    mt += lt[i] / lt.size();
    mw += lw[i] / lw.size();
  }
  double num = 0, den = 0;
  for (std::size_t i = 0; i < lt.size(); ++i) {
    num += (lt[i] - mt) * (lw[i] - mw);
    den += (lt[i] - mt) * (lt[i] - mt);
  }
  CHECK(num / den == doctest::Approx(alpha).epsilon(0.05));
}

TEST_CASE("Dini partial sums") {
  CHECK(dini_partial_sum([](double t) { return t; }, 2.0, 20) == doctest::Approx(2.0 - std::pow(2.0, -20)).epsilon(1e-15));
  const auto holder = [](double t) { return std::pow(t, 0.3); };
  const double s100 = dini_partial_sum(holder, 2.0, 100), s1000 = dini_partial_sum(holder, 2.0, 1000);
  CHECK(s1000 - s100 < 1e-8);
  // 1/log(1/t) at t = C^-n is 1/(n log C): harmonic growth, no plateau.
  const auto slow = [](double t) { return t >= 1.0 ? 0.0 : 1.0 / std::log(1.0 / t); };
  const double a = dini_partial_sum(slow, 1.01, 100), b = dini_partial_sum(slow, 1.01, 1000),
               c = dini_partial_sum(slow, 1.01, 10000);
  CHECK(b - a > 2.0);
  CHECK(c - b > 2.0);
  CHECK_THROWS(dini_partial_sum(holder, 1.0, 5));
}

TEST_CASE("density bounds") {
  const Domain dom = Domain::disk({0, 0}, 2.0);
  const Density d(Gauge::euclidean(), [](Vec2 x) { return 1.0 + norm(x); }, nullptr, dom);
  CHECK(d.h_min() == doctest::Approx(1.0));
  CHECK(d.h_max() == doctest::Approx(3.0).epsilon(1e-3));
  CHECK(d.h({1, 0}, {0, 2}) == doctest::Approx(4.0));
  CHECK(d.frozen({1, 0}).eval({0, 2}) == doctest::Approx(4.0));
  const Density gen = Density::general([](Vec2 x, Vec2 u) { return 1.0 + 0.5 * x.x * x.x + 0.1 * u.x; }, nullptr, dom);
  CHECK(gen.h({0, 0}, {3, 0}) == doctest::Approx(3.3));
  CHECK(gen.frozen({0, 0}).grad({1, 0}).x == doctest::Approx(1.1).epsilon(1e-8));
  CHECK_THROWS(Density::uniform(Gauge::euclidean(), -1.0));
}

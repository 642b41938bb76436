#include <cmath>

#include "doctest.h"
#include "isocluster/slices.hpp"
#include "oracles.hpp"

using namespace isocluster;

namespace {

// Tangent gauge built directly from the normal density, without the library's
// composite gauges.
double th(const Gauge& h, Vec2 v) { return h.eval({v.y, -v.x}); }
double th_sym(const Gauge& h, Vec2 v) { return 0.5 * (th(h, v) + th(h, -v)); }

std::vector<Gauge> strict_c1_gauges() {
  return {Gauge::euclidean(), Gauge::lp(1.5), Gauge::lp(3.0), Gauge::ellipse(1.0, 0.3, 2.5),
          Gauge::shifted_disk({0.3, -0.2}, 1.0), Gauge::shifted_disk({-0.1, 0.45}, 1.0)};
}

// Random config: n radii with consecutive gaps >= min_gap degrees.
SliceConfig random_config(oracle::Rng& rng, int n, double min_gap_deg, const Gauge& g, bool allow_white) {
  for (;;) {
    std::vector<double> gaps;
    double total = 0.0;
    for (int k = 0; k < n; ++k) {
      gaps.push_back(rng.uniform(0.2, 1.0));
      total += gaps.back();
    }
    std::vector<double> deg;
    double a = rng.uniform(0.0, 360.0);
    bool ok = true;
    for (int k = 0; k < n; ++k) {
      const double gap = 360.0 * gaps[k] / total;
      if (gap < min_gap_deg) ok = false;
      deg.push_back(a);
      a += gap;
    }
    if (!ok) continue;
    std::vector<int> colors;
    for (int k = 0; k < n; ++k) colors.push_back(rng.integer(allow_white ? 0 : 1, 4));
    for (int k = 0; k < n; ++k)
      if (colors[k] != kWhite && colors[k] == colors[(k + 1) % n]) colors[(k + 1) % n] = colors[k] % 4 + 1;
    try {
      SliceConfig c = SliceConfig::from_degrees(deg, colors, g);
      if (c.size() == n) return c;
    } catch (const std::invalid_argument&) {
    }
  }
}

int original_color(const SliceConfig& c, double angle) {
  for (int k = 0; k < c.size(); ++k) {
    const double a = c.angles[k];
    const double b = k + 1 < c.size() ? c.angles[k + 1] : c.angles[0] + kTwoPi;
    double t = angle;
    while (t < a) t += kTwoPi;
    while (t >= a + kTwoPi) t -= kTwoPi;
    if (t < b) return c.colors[k];
  }
  return -1;
}

// The competitor keeps the labels near the unit circle.
bool boundary_trace_kept(const SliceConfig& c, const CompetitorNetwork& net) {
  for (int s = 0; s < 720; ++s) {
    const double t = kTwoPi * (s + 0.37) / 720;
    bool near_radius = false;
    for (double a : c.angles)
      if (std::abs(std::remainder(t - a, kTwoPi)) < 1e-4) near_radius = true;
    if (near_radius) continue;
    if (net.coloring.at(unit(t) * (1.0 - 1e-7)) != original_color(c, t)) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("slice perimeter: three Euclidean radii") {
  const Gauge e = Gauge::euclidean();
  CHECK(slice_perimeter(SliceConfig::from_degrees({0, 120, 240}, {1, 2, 3}, e)) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(slice_perimeter(SliceConfig::from_degrees({0, 120, 240}, {1, 2, kWhite}, e)) == doctest::Approx(3.0).epsilon(1e-14));
  // Equal labels on both sides of a radius do not count.
  CHECK(slice_perimeter(SliceConfig::from_degrees({0, 120, 240}, {1, 1, 2}, e)) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("slice perimeter reproduces the six-term formula of the drawn cluster") {
  // Radii A..F at 30, 135, 190, 250, 290, 330 degrees; sectors E1, E3, E5,
  // white, E2, white.
  const double deg[] = {30, 135, 190, 250, 290, 330};
  const std::vector<Gauge> gauges = {Gauge::shifted_disk({0.3, -0.2}, 1.0), Gauge::ellipse(2.0, 0.4, 1.0),
                                     Gauge::shifted_disk({-0.4, 0.1}, 1.0)};
  for (const Gauge& h : gauges) {
    const SliceConfig c = SliceConfig::from_degrees({deg, deg + 6}, {1, 3, 5, kWhite, 2, kWhite}, h);
    Vec2 p[6];
    for (int k = 0; k < 6; ++k) p[k] = unit(deg_to_rad(deg[k]));
    const double expected = th(h, p[0]) + th_sym(h, p[1]) + th_sym(h, p[2]) + th(h, -p[3]) + th(h, p[4]) + th(h, -p[5]);
    CHECK(slice_perimeter(c) == doctest::Approx(expected).epsilon(1e-13));
    // Orientation matters: the flipped reading differs for an asymmetric gauge.
    const double flipped = th(h, -p[0]) + th_sym(h, p[1]) + th_sym(h, p[2]) + th(h, p[3]) + th(h, -p[4]) + th(h, p[5]);
    if (!h.is_symmetric()) CHECK(std::abs(slice_perimeter(c) - flipped) > 1e-3);
  }
}

TEST_CASE("slice config validation and white merging") {
  const Gauge e = Gauge::euclidean();
  CHECK_THROWS_AS(SliceConfig::from_degrees({0}, {1}, e), std::invalid_argument);
  CHECK_THROWS_AS(SliceConfig::from_degrees({0, 90, 45}, {1, 2, 3}, e), std::invalid_argument);
  CHECK_THROWS_AS(SliceConfig::from_degrees({0, 90}, {1}, e), std::invalid_argument);
  const SliceConfig m = SliceConfig::from_degrees({0, 90, 180, 270}, {1, kWhite, kWhite, 2}, e);
  REQUIRE(m.size() == 3);
  CHECK(m.colors == std::vector<int>{1, kWhite, 2});
  CHECK(rad_to_deg(m.angles[2]) == doctest::Approx(270.0));
}

TEST_CASE("slice perimeter rotation invariance") {
  oracle::Rng rng(17);
  for (const Gauge& g : strict_c1_gauges())
    for (int trial = 0; trial < 20; ++trial) {
      const SliceConfig c = random_config(rng, rng.integer(3, 7), 5.0, g, true);
      const double rot = rng.uniform(-kPi, kPi);
      std::vector<double> turned;
      for (double a : c.angles) turned.push_back(a + rot);
      const SliceConfig r = SliceConfig::make(turned, c.colors, g.rotated(rot));
      CHECK(slice_perimeter(r) == doctest::Approx(slice_perimeter(c)).epsilon(1e-12));
    }
}

TEST_CASE("Euclidean cross: the tripod move improves") {
  const SliceConfig c = SliceConfig::from_degrees({0, 90, 180, 270}, {1, 2, 3, 4}, Gauge::euclidean());
  const ImproveResult r = improve(c);
  // Independent evaluation of the tripod over the same eps grid: radii OB, OC
  // replaced by OW, WB, WC with W = eps (B + C).
  double oracle_best = 0.0;
  for (int k = 1; k <= 20; ++k) {
    const double e = std::ldexp(1.0, -k);
    const double p = 2.0 + e * std::sqrt(2.0) + 2.0 * std::hypot(1.0 - e, e);
    oracle_best = std::max(oracle_best, 4.0 - p);
  }
  CHECK(oracle_best > 0.0);
  CHECK(r.delta > 0.0);
  CHECK(r.best.family == MoveFamily::tripod);
  CHECK(r.delta == doctest::Approx(oracle_best).epsilon(1e-12));
  CHECK_FALSE(r.kinked);
  CHECK_FALSE(r.non_strictly_convex);
  CHECK(boundary_trace_kept(c, r.best));
}

TEST_CASE("improve needs four radii") {
  const SliceConfig c = SliceConfig::from_degrees({0, 120, 240}, {1, 2, 3}, Gauge::euclidean());
  CHECK_THROWS_WITH_AS(improve(c), doctest::Contains("hypothesis not met"), std::invalid_argument);
  CHECK_NOTHROW(best_competitor(c));
}

TEST_CASE("max-norm diagonal cross is a fixed point") {
  const SliceConfig c = SliceConfig::from_degrees({45, 135, 225, 315}, {1, 2, 3, 4}, Gauge::max_norm());
  const ImproveResult r = improve(c);
  CHECK(r.delta <= 0.0);
  CHECK(r.non_strictly_convex);
  CHECK(r.kinked);
  CHECK(r.original == doctest::Approx(2.0 * std::sqrt(2.0)));
}

TEST_CASE("thin sector next to a white slice: chord move with the K bound") {
  oracle::Rng rng(23);
  for (const Gauge& g : strict_c1_gauges()) {
    double hmin = 1e300, hmax = 0.0;
    for (int s = 0; s < 3600; ++s) {
      const double v = g.eval(unit(kTwoPi * s / 3600));
      hmin = std::min(hmin, v);
      hmax = std::max(hmax, v);
    }
    const double k_bound = std::max(hmax, 1.0 / hmin);
    for (int trial = 0; trial < 10; ++trial) {
      const double a0 = rng.uniform(0, 360), thin = rng.uniform(0.05, 0.95);
      // Radii P, Q with a thin colored sector between; white on the P side.
      const std::vector<double> deg = {a0, a0 + thin, a0 + thin + rng.uniform(60, 120), a0 + thin + rng.uniform(150, 200),
                                       a0 + thin + rng.uniform(230, 300)};
      const SliceConfig c = SliceConfig::from_degrees(deg, {1, 2, 3, 4, kWhite}, g);
      const ImproveResult r = improve(c);
      CHECK(r.delta >= 1.0 / (2.0 * k_bound));
      CHECK(boundary_trace_kept(c, r.best));
    }
  }
}

TEST_CASE("random configurations with four or more radii improve") {
  oracle::Rng rng(99);
  const auto gauges = strict_c1_gauges();
  int by_family[7] = {};
  for (int trial = 0; trial < 200; ++trial) {
    const Gauge& g = gauges[trial % gauges.size()];
    const SliceConfig c = random_config(rng, rng.integer(4, 8), 5.0, g, trial % 2 == 0);
    const ImproveResult r = improve(c);
    CHECK(r.delta > 0.0);
    CHECK(r.best.perimeter == doctest::Approx(r.original - r.delta));
    CHECK(boundary_trace_kept(c, r.best));
    ++by_family[static_cast<int>(r.best.family)];
  }
  MESSAGE("winning families: chord " << by_family[1] << ", white_join " << by_family[2] << ", radius_tilt " << by_family[3]
                                     << ", white_tilt " << by_family[4] << ", tripod " << by_family[5] << ", shift "
                                     << by_family[6]);
}

TEST_CASE("three radii: admissible triples cannot be improved, others can") {
  const Gauge gauges[] = {Gauge::lp(3.0), Gauge::ellipse(2.0, 0.5, 1.0), Gauge::euclidean()};
  oracle::Rng rng(4);
  for (const Gauge& h : gauges) {
    const Gauge hh = tangent_gauge(h);
    for (int trial = 0; trial < 6; ++trial) {
      Vec2 a = unit(rng.uniform(0, kTwoPi));
      a = a / hh.eval(a);
      const auto pairs = admissible_pairs(hh, a, 360);
      REQUIRE(pairs.size() == 1);
      std::vector<double> ang = {polar_angle(pairs[0].a), polar_angle(pairs[0].b), polar_angle(pairs[0].c)};
      std::sort(ang.begin(), ang.end());
      for (std::vector<int> colors : {std::vector<int>{1, 2, 3}, std::vector<int>{1, 2, kWhite}}) {
        const ImproveResult fixed = best_competitor(SliceConfig::make(ang, colors, h));
        CHECK(fixed.delta <= 1e-12);
        std::vector<double> moved = ang;
        moved[1] += deg_to_rad(rng.uniform(3.0, 8.0)) * (rng.uniform(0, 1) < 0.5 ? -1.0 : 1.0);
        const ImproveResult better = best_competitor(SliceConfig::make(moved, colors, h));
        CHECK(better.delta > 0.0);
      }
    }
  }
}

TEST_CASE("shortcut path: worked cases") {
  const Gauge g = Gauge::euclidean();
  const Vec2 p{0, 0}, q{2, 0};
  const Polyline straight{p, q};
  const Polyline detour{q, {1, 1}, p};
  const Polyline t = shortcut_path(straight, detour, g);
  CHECK(t == straight);

  // Convex region: the chord PQ.
  const Polyline t1{p, {0.5, -1}, {1.5, -1}, q};
  const Polyline t2{q, {1.8, 1}, {1, 1.4}, {0.2, 1}, p};
  CHECK(shortcut_path(t1, t2, g) == straight);

  // Crossing inputs are rejected.
  const Polyline bad{q, {1, -2}, {1, 2}, p};
  CHECK_THROWS_AS(shortcut_path(t1, bad, g), std::invalid_argument);
}

TEST_CASE("shortcut path: parallel cut when no chord is interior") {
  // tau1 bends over a spike of tau2 that reaches into triangle ABC, and a
  // second spike blocks the chords from P and Q.
  const Polyline tau1{{0, 0}, {1, 2}, {2, 3}, {3, 2}, {4, 0}};
  const Polyline tau2{{4, 0}, {3.2, 0.5}, {2.05, 0.3}, {2.0, 2.6}, {1.95, 0.3}, {0.8, 0.5}, {0, 0}};
  const Gauge g = Gauge::shifted_disk({0.2, 0.3}, 1.0);
  const Polyline t = shortcut_path(tau1, tau2, g);
  CHECK(t.front() == tau1.front());
  CHECK(t.back() == tau1.back());
  CHECK(path_length(g, t) + path_length(g, t, true) <= path_length(g, tau1) + path_length(g, tau2) + 1e-12);
}

TEST_CASE("shortcut path: random polygon pairs") {
  oracle::Rng rng(1234);
  const Gauge gauges[] = {Gauge::euclidean(), Gauge::shifted_disk({0.4, -0.3}, 1.0), Gauge::lp(1.2),
                          Gauge::max_norm(), Gauge::ellipse(1.0, 0.7, 3.0)};
  for (int trial = 0; trial < 500; ++trial) {
    const int n = rng.integer(4, 24);
    const Polyline poly = oracle::random_star_polygon(rng, n, {0, 0}, trial % 2 ? 0.1 : 0.6, 1.0);
    const int i = rng.integer(0, n - 1);
    const int j = (i + rng.integer(1, n - 1)) % n;
    Polyline tau1, tau2;
    for (int k = i;; k = (k + 1) % n) {
      tau1.push_back(poly[k]);
      if (k == j) break;
    }
    for (int k = j;; k = (k + 1) % n) {
      tau2.push_back(poly[k]);
      if (k == i) break;
    }
    const Gauge& g = gauges[trial % 5];
    const Polyline t = shortcut_path(tau1, tau2, g);
    const double slack = path_length(g, tau1) + path_length(g, tau2) - path_length(g, t) - path_length(g, t, true);
    CHECK(slack >= -1e-12);
    REQUIRE(t.size() >= 2);
    CHECK(t.front() == tau1.front());
    CHECK(t.back() == tau1.back());
    // Inside the closed region: sample points are inside or on the boundary.
    for (std::size_t s = 0; s + 1 < t.size(); ++s)
      for (int u = 1; u < 8; ++u) {
        const Vec2 x = t[s] + (t[s + 1] - t[s]) * (u / 8.0);
        double dmin = 1e300;
        for (int k = 0; k < n; ++k) dmin = std::min(dmin, point_segment_distance(x, poly[k], poly[(k + 1) % n]));
        CHECK((point_in_polygon(poly, x) || dmin < 1e-9));
      }
    // Injective: nonadjacent segments do not meet.
    for (std::size_t a = 0; a + 1 < t.size(); ++a)
      for (std::size_t b = a + 2; b + 1 < t.size(); ++b)
        CHECK_FALSE(intersect_segments(t[a], t[a + 1], t[b], t[b + 1]).hit);
  }
}

TEST_CASE("random configurations under euclidean, ellipse and smoothed-l1 gauges") {
  oracle::Rng rng(777);
  const Gauge gauges[] = {Gauge::euclidean(), Gauge::ellipse(1.0, 0.3, 2.5), Gauge::smoothed_l1(0.05), Gauge::smoothed_l1(0.5)};
  for (int trial = 0; trial < 400; ++trial) {
    const Gauge& g = gauges[trial % 4];
    const SliceConfig c = random_config(rng, rng.integer(4, 8), 5.0, g, trial % 3 == 0);
    const ImproveResult r = improve(c);
    CHECK(r.delta > 0.0);
    CHECK_FALSE(r.non_strictly_convex);
  }
}

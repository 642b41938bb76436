#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include "isocluster/gauge.hpp"

namespace isocluster {

// Label used for the white (uncolored) sector in junction color patterns.
constexpr int kWhite = 0;

// Which interfaces of the junction carry the symmetrized weight.
enum class JunctionPattern {
  plain,        // L(P) = sum of gauge(X - P)
  all_colored,  // every arm separates two colored chambers
  one_white,    // white sector between the arms to A and B
};

struct FermatResult {
  Vec2 point;
  double objective = 0.0;
  bool degenerate = false;  // minimizer at one of the inputs
  int vertex = -1;          // index of that input, or -1
  bool collinear = false;
  bool converged = false;
  int iterations = 0;
};

// Minimizer of the junction objective for the tangent gauge `gauge`.
FermatResult fermat_point(const Gauge& gauge, Vec2 a, Vec2 b, Vec2 c,
                          JunctionPattern pattern = JunctionPattern::plain);

double fermat_objective(const Gauge& gauge, Vec2 a, Vec2 b, Vec2 c, JunctionPattern pattern, Vec2 p);

// Theta for directions ordered clockwise around O, with sector colors: sector k
// lies between theta_k and theta_{k+1} (clockwise). kWhite marks white.
// `h` is the frozen normal density at O; the tangent gauge is built from it.
Vec2 junction_residual(const Gauge& h, const std::array<Vec2, 3>& theta, const std::array<int, 3>& colors);
Vec2 junction_residual(const Density& d, Vec2 o, const std::array<Vec2, 3>& theta, const std::array<int, 3>& colors);

// Residual norm divided by the mean gradient size of the three arms.
double relative_residual(const Gauge& h, const std::array<Vec2, 3>& theta, Vec2 residual);

struct AdmissibleTriple {
  Vec2 a, b, c;  // points with gauge value 1
  double residual = 0.0;
  double angle_ab_deg = 0.0;  // unsigned angle AOB
  double angle_ac_deg = 0.0;
};

class KinkedGaugeError : public std::domain_error {
 public:
  KinkedGaugeError() : std::domain_error("kinked gauge: the first-order condition needs a C1 gauge") {}
};

// All unordered pairs {B, C} on the unit sphere of `gauge` with
// grad(A) + grad(B) + grad(C) = 0, found by a resolution x resolution scan.
std::vector<AdmissibleTriple> admissible_pairs(const Gauge& gauge, Vec2 a, int resolution = 720);

}  // namespace isocluster

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "isocluster/cluster.hpp"
#include "isocluster/steiner.hpp"

namespace isocluster {

struct SolveOptions {
  int max_iterations = 4000;      // total inner iterations over both phases
  double volume_tol = 1e-8;       // on |V_i / T_i - 1|
  double gradient_tol = 1e-7;     // on the reduced gradient, relative to P / length
  double spacing = 0.0;           // target segment length; 0 takes the initial median
  bool resample = true;
  int starts = 1;                 // start 0 is the unperturbed initial cluster
  double perturbation = 0.1;      // of the local segment length, for starts > 0
  std::uint64_t seed = 1;
  Polyline wall;                  // hard wall: vertices on it slide, its corners are fixed
  std::vector<std::size_t> fixed; // vertex indices of the initial cluster held in place
};

struct OptimizationProblem {
  Cluster initial;
  Density density = Density::uniform(Gauge::euclidean());
  VolumeVector targets;
  SolveOptions options;
};

struct JunctionReport {
  std::size_t vertex = 0;
  Vec2 point;
  std::vector<Vec2> directions;  // clockwise
  std::vector<int> colors;       // sector k lies clockwise from direction k; kWhite for white labels
  std::vector<int> labels;       // chamber labels of the sectors
  std::vector<double> sector_angles_deg;
  bool triple = false;
  bool skipped = false;          // residual not computed (not a triple point)
  Vec2 residual;
  double residual_norm = 0.0;
  double relative_residual = 0.0;
};

struct ArcReport {
  std::size_t edge = 0;
  double max_turning_deg = 0.0;
};

struct DiagnoseReport {
  std::vector<JunctionReport> junctions;
  std::vector<ArcReport> arcs;
  std::vector<std::string> flags;
};

struct SolveReport {
  Cluster cluster;
  double perimeter = 0.0;
  std::vector<double> perimeter_trace;
  std::vector<double> volume_error_trace;  // max relative error at each trace entry
  VolumeVector volumes;
  VolumeVector volume_error;  // relative, per chamber
  double gradient_norm = 0.0;
  int iterations = 0;
  int phase1_iterations = 0;
  int start = 0;
  bool volumes_ok = false;
  bool stalled = false;
  bool converged = false;
  std::vector<std::string> flags;
  DiagnoseReport diagnostics;
};

SolveReport minimize(const OptimizationProblem& problem);

// Vertices where three or more labels meet. Vertices on `wall` are skipped.
// Tangents come from the circle through the vertex and the arm vertices
// nearest to arc length radius/2 and radius.
std::vector<JunctionReport> detect_junctions(const Cluster& c, double radius, const Polyline& wall = {});

DiagnoseReport steiner_diagnose(const Cluster& c, const Density& d, double radius, const Polyline& wall = {});

struct BallBound {
  double worst_ratio = 0.0;
  double threshold = 0.0;
  bool pass = false;
  Vec2 worst_center;
  double worst_radius = 0.0;
};

// Euclidean boundary length inside each ball divided by its radius.
BallBound ball_bound_check(const Cluster& c, const Density& d, const std::vector<Vec2>& centers,
                           const std::vector<double>& radii);

// Largest Hausdorff distance between the non-wall boundary of `c` and the
// union of the given segments, sampled at `samples` points per segment.
double hausdorff_to_segments(const Cluster& c, const std::vector<std::pair<Vec2, Vec2>>& segments,
                             const Polyline& wall, int samples = 20);

}  // namespace isocluster

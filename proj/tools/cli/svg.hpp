#pragma once

#include <string>
#include <vector>

#include "isocluster/cluster.hpp"
#include "isocluster/optimizer.hpp"
#include "isocluster/slices.hpp"

namespace isocluster::cli {

struct SvgFill {
  int label = 0;
  std::vector<Polyline> loops;  // filled with the even-odd rule
};

struct SvgLine {
  Polyline points;
  std::string cls;
  bool closed = false;
};

struct SvgArrow {
  Vec2 from, to;
  std::string cls;
};

struct SvgMarker {
  Vec2 at;
  std::string cls;
};

struct SvgPanel {
  std::string title;
  std::vector<SvgFill> fills;
  std::vector<SvgLine> lines;
  std::vector<SvgArrow> arrows;
  std::vector<SvgMarker> markers;
};

struct SvgStyle {
  double panel_size = 400.0;  // pixels per panel side
  double margin = 24.0;
  bool axes = true;
};

// Normal arrows at a boundary point: one full-length arrow into the white
// side of a white/colored interface, two opposite half-length arrows on an
// interface between two colored chambers, none between two white regions.
// `left_normal` is the unit normal pointing to the left of travel.
std::vector<SvgArrow> boundary_arrows(Vec2 at, Vec2 left_normal, bool left_white, bool right_white, double length);

// Chamber loops, edges, one arrow site per edge, and junction markers with
// their residual vectors.
SvgPanel cluster_panel(const Cluster& c, const std::vector<JunctionReport>& junctions, std::string title);

SvgPanel slice_panel(const Coloring& coloring, const std::vector<NetworkSegment>& segments, std::string title);

SvgPanel points_panel(const std::vector<Vec2>& points, std::string title);

// Deterministic SVG 1.1: fixed element order, coordinates with six decimals.
std::string render_svg(const std::vector<SvgPanel>& panels, const SvgStyle& style = {});

}  // namespace isocluster::cli

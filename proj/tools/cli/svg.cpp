#include "cli/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

namespace isocluster::cli {

namespace {

const char* kPalette[] = {"#8ecae6", "#ffb703", "#90be6d", "#f28482", "#b8b8ff",
                          "#f6bd60", "#84a59d", "#cdb4db", "#a3c4f3", "#e5989b"};

std::string fill_color(int label) {
  if (label <= 0) return "none";
  return kPalette[(label - 1) % (sizeof(kPalette) / sizeof(kPalette[0]))];
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  std::string s = buf;
  if (s == "-0.000000") s = "0.000000";
  return s;
}

struct Box {
  Vec2 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  Vec2 hi{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  void add(Vec2 p) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
  }
  bool empty() const { return !(lo.x <= hi.x); }
};

Box panel_box(const SvgPanel& p) {
  Box b;
  for (const auto& f : p.fills)
    for (const auto& l : f.loops)
      for (Vec2 q : l) b.add(q);
  for (const auto& l : p.lines)
    for (Vec2 q : l.points) b.add(q);
  for (const auto& a : p.arrows) {
    b.add(a.from);
    b.add(a.to);
  }
  for (const auto& m : p.markers) b.add(m.at);
  if (b.empty()) {
    b.add({-1, -1});
    b.add({1, 1});
  }
  // Keep degenerate extents drawable.
  const double w = std::max({b.hi.x - b.lo.x, b.hi.y - b.lo.y, 1e-9});
  const Vec2 mid = (b.lo + b.hi) * 0.5;
  b.lo = mid - Vec2{w, w} * 0.55;
  b.hi = mid + Vec2{w, w} * 0.55;
  return b;
}

double arrow_length(const Cluster& c) {
  Box b;
  for (Vec2 v : c.vertices) b.add(v);
  if (b.empty()) return 0.1;
  return 0.05 * std::max(norm(b.hi - b.lo), 1e-9);
}

// Closed boundary loops of chamber `label`, oriented counterclockwise when
// the cluster is consistent.
std::vector<Polyline> chamber_loops(const Cluster& c, int label) {
  std::vector<std::vector<std::size_t>> paths;
  for (const Edge& e : c.edges) {
    if (e.left == e.right || e.path.size() < 2) continue;
    if (e.left == label) paths.push_back(e.path);
    if (e.right == label) paths.emplace_back(e.path.rbegin(), e.path.rend());
  }
  std::multimap<std::size_t, std::size_t> by_start;
  for (std::size_t i = 0; i < paths.size(); ++i) by_start.emplace(paths[i].front(), i);
  std::vector<bool> used(paths.size(), false);
  std::vector<Polyline> loops;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    if (used[i]) continue;
    Polyline loop;
    std::size_t cur = i;
    const std::size_t start = paths[i].front();
    while (true) {
      used[cur] = true;
      const auto& p = paths[cur];
      for (std::size_t k = 0; k + 1 < p.size(); ++k) loop.push_back(c.vertices[p[k]]);
      const std::size_t end = p.back();
      if (end == start) break;
      std::size_t next = paths.size();
      for (auto [it, last] = by_start.equal_range(end); it != last; ++it)
        if (!used[it->second]) {
          next = it->second;
          break;
        }
      if (next == paths.size()) {
        loop.push_back(c.vertices[end]);
        break;
      }
      cur = next;
    }
    loops.push_back(std::move(loop));
  }
  return loops;
}

Polyline wedge(Vec2 center, Vec2 from, Vec2 to) {
  Polyline out{center, from};
  const double a0 = polar_angle(from);
  double span = polar_angle(to) - a0;
  while (span <= 0.0) span += kTwoPi;
  const int steps = std::max(2, static_cast<int>(std::ceil(span / deg_to_rad(3.0))));
  for (int k = 1; k < steps; ++k) out.push_back(unit(a0 + span * k / steps));
  out.push_back(to);
  return out;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

}  // namespace

std::vector<SvgArrow> boundary_arrows(Vec2 at, Vec2 left_normal, bool left_white, bool right_white, double length) {
  if (left_white && right_white) return {};
  if (!left_white && !right_white)
    return {{at, at + left_normal * (0.5 * length), "arrow-half"}, {at, at - left_normal * (0.5 * length), "arrow-half"}};
  // The arrow leaves the colored side.
  const Vec2 dir = left_white ? left_normal : -left_normal;
  return {{at, at + dir * length, "arrow-full"}};
}

SvgPanel cluster_panel(const Cluster& c, const std::vector<JunctionReport>& junctions, std::string title) {
  SvgPanel p;
  p.title = std::move(title);
  for (int i = 1; i <= c.m; ++i)
    if (!c.is_white(i)) p.fills.push_back({i, chamber_loops(c, i)});
  const double len = arrow_length(c);
  for (const Edge& e : c.edges) {
    if (e.path.size() < 2) continue;
    SvgLine line;
    for (std::size_t v : e.path) line.points.push_back(c.vertices[v]);
    line.cls = "edge";
    p.lines.push_back(std::move(line));
    const std::size_t k = (e.path.size() - 2) / 2;
    const Vec2 a = c.vertices[e.path[k]], b = c.vertices[e.path[k + 1]];
    if (distance(a, b) == 0.0) continue;
    const auto arrows =
        boundary_arrows((a + b) * 0.5, rotate_ccw(normalized(b - a)), c.is_white(e.left), c.is_white(e.right), len);
    p.arrows.insert(p.arrows.end(), arrows.begin(), arrows.end());
  }
  for (const JunctionReport& j : junctions) {
    p.markers.push_back({j.point, "junction"});
    if (!j.skipped && j.residual_norm > 0.0) p.arrows.push_back({j.point, j.point + j.residual * len, "residual"});
  }
  return p;
}

SvgPanel slice_panel(const Coloring& coloring, const std::vector<NetworkSegment>& segments, std::string title) {
  SvgPanel p;
  p.title = std::move(title);
  const int n = static_cast<int>(coloring.ends.size());
  for (int k = 0; k < n; ++k) {
    const int color = coloring.sector_colors[k];
    if (color == kWhite) continue;
    p.fills.push_back({color, {wedge(coloring.center, coloring.ends[k], coloring.ends[(k + 1) % n])}});
  }
  for (const auto& t : coloring.overrides) p.fills.push_back({t.color, {{t.a, t.b, t.c}}});
  SvgLine circle;
  circle.cls = "disk";
  circle.closed = true;
  for (int k = 0; k < 120; ++k) circle.points.push_back(unit(kTwoPi * k / 120));
  p.lines.push_back(std::move(circle));
  for (const NetworkSegment& s : segments) {
    p.lines.push_back({{s.a, s.b}, "edge", false});
    if (distance(s.a, s.b) == 0.0) continue;
    const auto arrows = boundary_arrows((s.a + s.b) * 0.5, rotate_ccw(normalized(s.b - s.a)), s.left == kWhite,
                                        s.right == kWhite, 0.25);
    p.arrows.insert(p.arrows.end(), arrows.begin(), arrows.end());
  }
  return p;
}

SvgPanel points_panel(const std::vector<Vec2>& points, std::string title) {
  SvgPanel p;
  p.title = std::move(title);
  for (Vec2 q : points) p.markers.push_back({q, "point"});
  return p;
}

std::string render_svg(const std::vector<SvgPanel>& panels, const SvgStyle& style) {
  const std::size_t count = std::max<std::size_t>(panels.size(), 1);
  const double side = style.panel_size + 2.0 * style.margin;
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << num(side * count) << "\" height=\""
      << num(side) << "\" viewBox=\"0 0 " << num(side * count) << ' ' << num(side) << "\">\n";
  out << "<defs><marker id=\"head\" markerWidth=\"8\" markerHeight=\"8\" refX=\"6\" refY=\"3\" orient=\"auto\">"
         "<path d=\"M0,0 L6,3 L0,6 z\" fill=\"#222222\"/></marker></defs>\n";
  out << "<style>.edge{stroke:#222222;stroke-width:1.5;fill:none}.disk{stroke:#999999;stroke-dasharray:4 3;fill:none}"
         ".axis{stroke:#bbbbbb;stroke-width:0.75}.arrow-full,.arrow-half{stroke:#222222;stroke-width:1}"
         ".residual{stroke:#d00000;stroke-width:1.5}.junction{fill:#d00000}.point{fill:#023047}"
         ".chamber{stroke:none;fill-rule:evenodd;fill-opacity:0.8}</style>\n";
  const std::vector<SvgPanel> none(1);
  const auto& list = panels.empty() ? none : panels;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const SvgPanel& p = list[i];
    const Box b = panel_box(p);
    const double scale = style.panel_size / (b.hi.x - b.lo.x);
    const double ox = side * i + style.margin;
    auto px = [&](Vec2 q) { return num(ox + (q.x - b.lo.x) * scale) + ',' + num(style.margin + (b.hi.y - q.y) * scale); };
    out << "<g class=\"panel\">\n";
    if (!p.title.empty())
      out << "<text x=\"" << num(ox) << "\" y=\"" << num(style.margin * 0.7) << "\" font-size=\"14\">" << xml_escape(p.title)
          << "</text>\n";
    if (style.axes) {
      if (b.lo.y <= 0.0 && 0.0 <= b.hi.y)
        out << "<line class=\"axis\" x1=\"" << num(ox) << "\" y1=\"" << num(style.margin + b.hi.y * scale) << "\" x2=\""
            << num(ox + style.panel_size) << "\" y2=\"" << num(style.margin + b.hi.y * scale) << "\"/>\n";
      if (b.lo.x <= 0.0 && 0.0 <= b.hi.x)
        out << "<line class=\"axis\" x1=\"" << num(ox - b.lo.x * scale) << "\" y1=\"" << num(style.margin)
            << "\" x2=\"" << num(ox - b.lo.x * scale) << "\" y2=\"" << num(style.margin + style.panel_size)
            << "\"/>\n";
    }
    for (const SvgFill& f : p.fills) {
      out << "<path class=\"chamber\" data-label=\"" << f.label << "\" fill=\"" << fill_color(f.label) << "\" d=\"";
      for (const Polyline& loop : f.loops) {
        for (std::size_t k = 0; k < loop.size(); ++k) out << (k == 0 ? "M" : " L") << px(loop[k]);
        out << " Z";
      }
      out << "\"/>\n";
    }
    for (const SvgLine& l : p.lines) {
      out << '<' << (l.closed ? "polygon" : "polyline") << " class=\"" << l.cls << "\" points=\"";
      for (std::size_t k = 0; k < l.points.size(); ++k) out << (k ? " " : "") << px(l.points[k]);
      out << "\"/>\n";
    }
    for (const SvgArrow& a : p.arrows) {
      const std::string f = px(a.from), t = px(a.to);
      const auto cf = f.find(','), ct = t.find(',');
      out << "<line class=\"" << a.cls << "\" x1=\"" << f.substr(0, cf) << "\" y1=\"" << f.substr(cf + 1)
          << "\" x2=\"" << t.substr(0, ct) << "\" y2=\"" << t.substr(ct + 1) << "\" marker-end=\"url(#head)\"/>\n";
    }
    for (const SvgMarker& m : p.markers) {
      const std::string c = px(m.at);
      const auto k = c.find(',');
      out << "<circle class=\"" << m.cls << "\" cx=\"" << c.substr(0, k) << "\" cy=\"" << c.substr(k + 1)
          << "\" r=\"4.000000\"/>\n";
    }
    out << "</g>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace isocluster::cli

#include "cli/run.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>

#include "cli/svg.hpp"
#include "isocluster/slices.hpp"

namespace isocluster::cli {

namespace {

json pt(Vec2 v) { return json::array({v.x, v.y}); }

json cluster_json(const Cluster& c) {
  json vertices = json::array();
  for (Vec2 v : c.vertices) vertices.push_back(pt(v));
  json edges = json::array();
  for (const Edge& e : c.edges) edges.push_back({{"path", e.path}, {"left", e.left}, {"right", e.right}});
  return {{"m", c.m}, {"white", c.white}, {"vertices", vertices}, {"edges", edges}};
}

json junction_json(const JunctionReport& j) {
  json dirs = json::array();
  for (Vec2 d : j.directions) dirs.push_back(pt(d));
  json out = {{"vertex", j.vertex},
              {"point", pt(j.point)},
              {"directions", dirs},
              {"labels", j.labels},
              {"sector_angles_deg", j.sector_angles_deg},
              {"triple", j.triple},
              {"skipped", j.skipped}};
  if (!j.skipped) {
    out["residual"] = pt(j.residual);
    out["residual_norm"] = j.residual_norm;
    out["relative_residual"] = j.relative_residual;
  }
  return out;
}

json diagnose_json(const DiagnoseReport& d) {
  json junctions = json::array();
  for (const auto& j : d.junctions) junctions.push_back(junction_json(j));
  json arcs = json::array();
  for (const auto& a : d.arcs) arcs.push_back({{"edge", a.edge}, {"max_turning_deg", a.max_turning_deg}});
  return {{"junctions", junctions}, {"arcs", arcs}, {"flags", d.flags}};
}

double median_segment(const Cluster& c) {
  std::vector<double> len;
  for (const Edge& e : c.edges)
    for (std::size_t k = 0; k + 1 < e.path.size(); ++k)
      len.push_back(distance(c.vertices[e.path[k]], c.vertices[e.path[k + 1]]));
  if (len.empty()) return 0.1;
  std::nth_element(len.begin(), len.begin() + len.size() / 2, len.end());
  return len[len.size() / 2];
}

json gauge_json(const Gauge& g) {
  return {{"describe", g.describe()}, {"c1", g.is_c1()}, {"symmetric", g.is_symmetric()},
          {"strictly_convex", g.is_strictly_convex()}};
}

Outcome do_fermat(const Scenario& s) {
  const Gauge& g = s.density.base();
  const FermatResult r = fermat_point(g, s.points[0], s.points[1], s.points[2], s.pattern);
  Outcome o;
  o.report["fermat"] = {{"point", pt(r.point)},     {"objective", r.objective}, {"degenerate", r.degenerate},
                        {"vertex", r.vertex},       {"collinear", r.collinear}, {"converged", r.converged},
                        {"iterations", r.iterations}};
  SvgPanel p = points_panel({s.points[0], s.points[1], s.points[2]}, "fermat");
  for (Vec2 q : s.points) p.lines.push_back({{r.point, q}, "edge", false});
  p.markers.push_back({r.point, "junction"});
  o.svg = render_svg({p});
  o.exit_code = r.converged ? kOk : kNotConverged;
  return o;
}

Outcome do_triples(const Scenario& s) {
  const Gauge& g = s.density.base();
  const auto triples = admissible_pairs(g, s.a, s.resolution);
  Outcome o;
  json list = json::array();
  SvgPanel p;
  p.title = "admissible triples";
  p.lines.push_back({unit_ball_boundary(g, 360), "disk", true});
  for (const auto& t : triples) {
    list.push_back({{"a", pt(t.a)},
                    {"b", pt(t.b)},
                    {"c", pt(t.c)},
                    {"residual", t.residual},
                    {"angle_ab_deg", t.angle_ab_deg},
                    {"angle_ac_deg", t.angle_ac_deg}});
    for (Vec2 q : {t.a, t.b, t.c}) p.lines.push_back({{{0, 0}, q}, "edge", false});
  }
  o.report["triples"] = {{"a", pt(s.a)}, {"resolution", s.resolution}, {"count", triples.size()}, {"pairs", list}};
  o.svg = render_svg({p});
  return o;
}

Outcome do_slices(const Scenario& s) {
  const SliceConfig c = SliceConfig::from_degrees(s.angles_deg, s.colors, s.density.base());
  const ImproveResult r = improve(c);
  const CompetitorNetwork before = slice_network(c);
  Outcome o;
  json pts = json::array();
  for (Vec2 q : r.best.interior_points) pts.push_back(pt(q));
  std::vector<double> merged_deg;
  for (double a : c.angles) merged_deg.push_back(rad_to_deg(a));
  o.report["slices"] = {{"angles_deg", merged_deg},
                        {"colors", c.colors},
                        {"original", r.original},
                        {"delta", r.delta},
                        {"improved", r.delta > 0.0},
                        {"move", to_string(r.best.family)},
                        {"index", r.best.index},
                        {"eps", r.best.eps},
                        {"competitor_perimeter", r.best.perimeter},
                        {"interior_points", pts},
                        {"kinked", r.kinked},
                        {"non_strictly_convex", r.non_strictly_convex},
                        {"candidates", r.candidates}};
  o.svg = render_svg({slice_panel(before.coloring, before.segments, "before"),
                      slice_panel(r.best.coloring, r.best.segments, "after: " + to_string(r.best.family))});
  return o;
}

json perimeter_fields(const Cluster& c, const Density& d) {
  return {{"perimeter", weighted_perimeter(c, d)},
          {"per_edge", perimeter_by_edge(c, d)},
          {"volumes", weighted_volume(c, d)}};
}

Outcome do_perimeter(const Scenario& s) {
  Outcome o;
  json r = perimeter_fields(*s.cluster, s.density);
  if (!s.wall.empty()) r["interior_perimeter"] = interior_perimeter(*s.cluster, s.density, s.wall);
  if (s.region)
    r["region"] = {{"center", pt(s.region->center)},
                   {"radius", s.region->radius},
                   {"perimeter", relative_perimeter(*s.cluster, s.density, *s.region)}};
  r["cluster"] = cluster_json(*s.cluster);
  o.report["perimeter"] = r;
  o.svg = render_svg({cluster_panel(*s.cluster, {}, "perimeter")});
  return o;
}

Outcome do_diagnose(const Scenario& s) {
  Outcome o;
  const double radius = s.radius > 0.0 ? s.radius : 5.0 * median_segment(*s.cluster);
  const DiagnoseReport d = steiner_diagnose(*s.cluster, s.density, radius, s.wall);
  json r = diagnose_json(d);
  r["radius"] = radius;
  r["perimeter"] = weighted_perimeter(*s.cluster, s.density);
  o.report["diagnose"] = r;
  o.svg = render_svg({cluster_panel(*s.cluster, d.junctions, "diagnose")});
  return o;
}

Outcome do_solve(const Scenario& s, std::optional<std::uint64_t> seed) {
  OptimizationProblem pb{*s.cluster, s.density, s.targets, s.options};
  if (seed) pb.options.seed = *seed;
  const SolveReport r = minimize(pb);
  Outcome o;
  json out = {{"perimeter", r.perimeter},
              {"per_edge", perimeter_by_edge(r.cluster, s.density)},
              {"perimeter_trace", r.perimeter_trace},
              {"volume_error_trace", r.volume_error_trace},
              {"targets", s.targets},
              {"volumes", r.volumes},
              {"volume_error", r.volume_error},
              {"gradient_norm", r.gradient_norm},
              {"iterations", r.iterations},
              {"phase1_iterations", r.phase1_iterations},
              {"start", r.start},
              {"seed", pb.options.seed},
              {"volumes_ok", r.volumes_ok},
              {"stalled", r.stalled},
              {"converged", r.converged},
              {"flags", r.flags},
              {"cluster", cluster_json(r.cluster)},
              {"diagnostics", diagnose_json(r.diagnostics)}};
  o.report["solve"] = out;
  o.svg = render_svg({cluster_panel(r.cluster, r.diagnostics.junctions, "solve")});
  o.exit_code = r.converged ? kOk : kNotConverged;
  return o;
}

Outcome do_gaugeprobe(const Scenario& s) {
  const Gauge& g = s.density.base();
  Outcome o;
  json samples = json::array();
  for (double deg : s.directions_deg) {
    const Vec2 v = unit(deg_to_rad(deg));
    const Subgradient sg = g.subgradient(v);
    samples.push_back({{"angle_deg", deg}, {"value", g.eval(v)}, {"gradient", pt(sg.value)}, {"kink", sg.kink}});
  }
  const GridProbe margin = strict_convexity_margin(g, s.resolution);
  const GridProbe round = roundedness_constant(g, s.resolution);
  json r = gauge_json(g);
  r["strict_convexity_margin"] = {{"value", margin.value}, {"resolution", margin.resolution}};
  r["roundedness"] = {{"value", round.value}, {"resolution", round.resolution}};
  r["samples"] = samples;
  o.report["gaugeprobe"] = r;
  SvgPanel p;
  p.title = "unit ball";
  p.lines.push_back({unit_ball_boundary(g, 360), "edge", true});
  o.svg = render_svg({p});
  return o;
}

}  // namespace

json round_numbers(const json& j) {
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (!std::isfinite(v)) return nullptr;
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    const double r = std::strtod(buf, nullptr);
    return r == 0.0 ? 0.0 : r;
  }
  if (j.is_array()) {
    json out = json::array();
    for (const auto& x : j) out.push_back(round_numbers(x));
    return out;
  }
  if (j.is_object()) {
    json out = json::object();
    for (auto it = j.begin(); it != j.end(); ++it) out[it.key()] = round_numbers(it.value());
    return out;
  }
  return j;
}

std::string dump_report(const json& report) { return report.dump(2) + "\n"; }

Outcome execute(const Scenario& s, std::optional<std::uint64_t> seed) {
  Outcome o;
  if (s.task == "fermat")
    o = do_fermat(s);
  else if (s.task == "triples")
    o = do_triples(s);
  else if (s.task == "slices")
    o = do_slices(s);
  else if (s.task == "perimeter")
    o = do_perimeter(s);
  else if (s.task == "diagnose")
    o = do_diagnose(s);
  else if (s.task == "solve")
    o = do_solve(s, seed);
  else if (s.task == "gaugeprobe")
    o = do_gaugeprobe(s);
  else
    throw ScenarioError("/task", "unknown task '" + s.task + "'");
  o.report["schema_version"] = kReportVersion;
  o.report["task"] = s.task;
  o.report["scenario"] = s.name;
  o.report["gauge"] = gauge_json(s.density.base());
  o.report["exit_code"] = o.exit_code;
  o.report = round_numbers(o.report);
  return o;
}

int run(const RunArgs& args, std::ostream& out, std::ostream& err) {
  Scenario s;
  Outcome o;
  try {
    s = load_scenario(args.scenario);
    if (s.task != args.task)
      throw ScenarioError("/task", "scenario declares task '" + s.task + "' but '" + args.task + "' was requested");
    o = execute(s, args.seed);
  } catch (const ScenarioError& e) {
    err << "error: " << args.scenario.string() << ": " << e.what() << "\n";
    return kInvalid;
  } catch (const std::invalid_argument& e) {
    err << "error: " << args.scenario.string() << ": " << e.what() << "\n";
    return kInvalid;
  } catch (const KinkedGaugeError& e) {
    err << "error: " << args.scenario.string() << ": " << e.what() << "\n";
    return kInvalid;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }

  std::filesystem::path dir = ".";
  if (args.out) {
    dir = *args.out;
  } else if (const char* env = std::getenv("ISOCLUSTER_OUT"); env && *env) {
    dir = env;
  }
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const std::filesystem::path json_path = dir / (s.name + "." + s.task + ".json");
  std::ofstream(json_path) << dump_report(o.report);
  if (!std::filesystem::exists(json_path)) {
    err << "error: cannot write " << json_path.string() << "\n";
    return kFailure;
  }
  out << json_path.string() << "\n";
  if (args.svg) {
    const std::filesystem::path svg_path = dir / (s.name + "." + s.task + ".svg");
    std::ofstream(svg_path) << o.svg;
    out << svg_path.string() << "\n";
  }
  if (args.verbose) {
    const json& r = o.report[s.task];
    for (const char* key : {"perimeter", "delta", "move", "objective", "count", "converged", "flags"})
      if (r.contains(key)) out << "  " << key << ": " << r[key].dump() << "\n";
  }
  if (o.exit_code == kNotConverged) err << "warning: not converged\n";
  return o.exit_code;
}

}  // namespace isocluster::cli

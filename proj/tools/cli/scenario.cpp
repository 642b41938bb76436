#include "cli/scenario.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "isocluster/builders.hpp"

namespace isocluster::cli {

std::string pointer_escape(const std::string& key) {
  std::string out;
  for (char ch : key) {
    if (ch == '~')
      out += "~0";
    else if (ch == '/')
      out += "~1";
    else
      out += ch;
  }
  return out;
}

Node::Node(const json& j, std::string path) : j_(&j), path_(std::move(path)) {
  if (!j.is_object()) throw ScenarioError(path_, "expected an object");
}

bool Node::has(const std::string& key) const { return j_->contains(key); }

std::string Node::child_path(const std::string& key) const { return path_ + "/" + pointer_escape(key); }

const json& Node::take(const std::string& key) {
  auto it = j_->find(key);
  if (it == j_->end()) throw ScenarioError(child_path(key), "missing required key");
  used_.insert(key);
  return *it;
}

const json& Node::value(const std::string& key) { return take(key); }

Node Node::object(const std::string& key) { return Node(take(key), child_path(key)); }

std::optional<Node> Node::maybe_object(const std::string& key) {
  if (!has(key)) return std::nullopt;
  return object(key);
}

namespace {

double as_number(const json& j, const std::string& where) {
  if (!j.is_number()) throw ScenarioError(where, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ScenarioError(where, "expected a finite number");
  return v;
}

Vec2 as_point(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) throw ScenarioError(where, "expected [x, y]");
  return {as_number(j[0], where + "/0"), as_number(j[1], where + "/1")};
}

bool is_index(const json& j) { return j.is_number_integer() && j.get<long long>() >= 0; }

}  // namespace

double Node::number(const std::string& key) { return as_number(take(key), child_path(key)); }

double Node::number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

long long Node::integer(const std::string& key) {
  const json& j = take(key);
  if (!j.is_number_integer()) throw ScenarioError(child_path(key), "expected an integer");
  return j.get<long long>();
}

long long Node::integer(const std::string& key, long long fallback) { return has(key) ? integer(key) : fallback; }

bool Node::boolean(const std::string& key, bool fallback) {
  if (!has(key)) return fallback;
  const json& j = take(key);
  if (!j.is_boolean()) throw ScenarioError(child_path(key), "expected true or false");
  return j.get<bool>();
}

std::string Node::string(const std::string& key) {
  const json& j = take(key);
  if (!j.is_string()) throw ScenarioError(child_path(key), "expected a string");
  return j.get<std::string>();
}

std::string Node::string(const std::string& key, const std::string& fallback) {
  return has(key) ? string(key) : fallback;
}

Vec2 Node::point(const std::string& key) { return as_point(take(key), child_path(key)); }

std::vector<double> Node::numbers(const std::string& key) {
  const json& j = take(key);
  const std::string where = child_path(key);
  if (!j.is_array()) throw ScenarioError(where, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_number(j[i], where + "/" + std::to_string(i)));
  return out;
}

std::vector<Vec2> Node::points(const std::string& key) {
  const json& j = take(key);
  const std::string where = child_path(key);
  if (!j.is_array()) throw ScenarioError(where, "expected an array of points");
  std::vector<Vec2> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_point(j[i], where + "/" + std::to_string(i)));
  return out;
}

void Node::finish() const {
  for (auto it = j_->begin(); it != j_->end(); ++it)
    if (!used_.count(it.key())) throw ScenarioError(child_path(it.key()), "unknown key");
}

namespace {

int positive_int(Node& n, const std::string& key, long long fallback, long long lo = 1) {
  const long long v = n.integer(key, fallback);
  if (v < lo || v > 1000000) throw ScenarioError(n.child_path(key), "out of range");
  return static_cast<int>(v);
}

std::array<double, 3> three_angles(Node& n, const std::string& key) {
  const auto v = n.numbers(key);
  if (v.size() != 3) throw ScenarioError(n.child_path(key), "expected three angles");
  return {deg_to_rad(v[0]), deg_to_rad(v[1]), deg_to_rad(v[2])};
}

Polyline parse_wall(const json& j, const std::string& where) {
  if (j.is_array()) {
    Polyline out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_point(j[i], where + "/" + std::to_string(i)));
    if (out.size() < 3) throw ScenarioError(where, "a wall needs at least three vertices");
    return out;
  }
  Node n(j, where);
  const std::string builder = n.string("builder");
  Polyline out;
  if (builder == "square") {
    out = square_wall();
  } else if (builder == "tripod") {
    const auto a = three_angles(n, "angles_deg");
    const double angles[3] = {a[0], a[1], a[2]};
    out = tripod_wall(angles, positive_int(n, "n_wall", 64, 3));
  } else {
    throw ScenarioError(n.child_path("builder"), "unknown wall builder '" + builder + "'");
  }
  n.finish();
  return out;
}

Domain parse_domain(Node n) {
  Domain d;
  if (n.has("radius")) {
    const Vec2 c = n.point("center");
    const double r = n.number("radius");
    if (!(r > 0.0)) throw ScenarioError(n.child_path("radius"), "must be positive");
    d = Domain::disk(c, r);
  } else {
    const Vec2 lo = n.point("lo"), hi = n.point("hi");
    if (!(lo.x < hi.x && lo.y < hi.y)) throw ScenarioError(n.path(), "need lo < hi");
    d = Domain::rectangle(lo, hi);
  }
  n.finish();
  return d;
}

JunctionPattern parse_pattern(const std::string& s, const std::string& where) {
  if (s == "plain") return JunctionPattern::plain;
  if (s == "all_colored") return JunctionPattern::all_colored;
  if (s == "one_white") return JunctionPattern::one_white;
  throw ScenarioError(where, "unknown pattern '" + s + "'");
}

SolveOptions parse_solve_options(Node& n, VolumeVector& targets) {
  SolveOptions o;
  targets = n.numbers("targets");
  o.max_iterations = positive_int(n, "max_iterations", o.max_iterations);
  o.volume_tol = n.number("volume_tol", o.volume_tol);
  o.gradient_tol = n.number("gradient_tol", o.gradient_tol);
  o.spacing = n.number("spacing", o.spacing);
  o.resample = n.boolean("resample", o.resample);
  o.starts = positive_int(n, "starts", o.starts);
  o.perturbation = n.number("perturbation", o.perturbation);
  if (n.has("seed")) {
    const long long s = n.integer("seed");
    if (s < 0) throw ScenarioError(n.child_path("seed"), "must be nonnegative");
    o.seed = static_cast<std::uint64_t>(s);
  }
  if (n.has("fixed")) {
    const json& f = n.value("fixed");
    const std::string where = n.child_path("fixed");
    if (!f.is_array()) throw ScenarioError(where, "expected an array of vertex indices");
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (!is_index(f[i])) throw ScenarioError(where + "/" + std::to_string(i), "expected an index");
      o.fixed.push_back(f[i].get<std::size_t>());
    }
  }
  if (!(o.volume_tol > 0.0)) throw ScenarioError(n.child_path("volume_tol"), "must be positive");
  if (!(o.gradient_tol > 0.0)) throw ScenarioError(n.child_path("gradient_tol"), "must be positive");
  if (o.spacing < 0.0) throw ScenarioError(n.child_path("spacing"), "must be nonnegative");
  return o;
}

}  // namespace

Gauge parse_gauge(Node n) {
  const std::string kind = n.string("kind");
  Gauge g = Gauge::euclidean();
  try {
    if (kind == "euclidean") {
    } else if (kind == "lp") {
      const json& p = n.value("p");
      if (p.is_string() && p.get<std::string>() == "inf")
        g = Gauge::max_norm();
      else
        g = Gauge::lp(as_number(p, n.child_path("p")));
    } else if (kind == "max") {
      g = Gauge::max_norm();
    } else if (kind == "ellipse") {
      g = Gauge::ellipse(n.number("a"), n.number("b"), n.number("c"));
    } else if (kind == "smoothed_l1") {
      g = Gauge::smoothed_l1(n.number("kappa"));
    } else if (kind == "shifted_disk") {
      g = Gauge::shifted_disk(n.point("center"), n.number("radius"));
    } else if (kind == "tabulated") {
      std::vector<double> a = n.numbers("angles_deg");
      for (double& x : a) x = deg_to_rad(x);
      g = Gauge::tabulated(std::move(a), n.numbers("values"));
    } else {
      throw ScenarioError(n.child_path("kind"), "unknown gauge kind '" + kind + "'");
    }
    if (n.has("matrix")) {
      const auto m = n.numbers("matrix");
      if (m.size() != 4) throw ScenarioError(n.child_path("matrix"), "expected [m00, m01, m10, m11]");
      g = g.precompose(m[0], m[1], m[2], m[3]);
    }
    if (n.has("rotate_deg")) g = g.rotated(deg_to_rad(n.number("rotate_deg")));
    if (n.has("scale")) g = g.scaled(n.number("scale"));
  } catch (const std::invalid_argument& e) {
    throw ScenarioError(n.path(), e.what());
  }
  n.finish();
  return g;
}

Cluster parse_cluster(Node n) {
  Cluster c;
  if (n.has("builder")) {
    const std::string builder = n.string("builder");
    if (builder == "regular_polygon") {
      c = regular_polygon(n.point("center"), n.number("radius"), positive_int(n, "n", 64, 3));
    } else if (builder == "double_bubble") {
      c = double_bubble(n.number("r", 1.0), positive_int(n, "n_arc", 32, 2), positive_int(n, "n_mid", 16));
    } else if (builder == "diagonal_cross") {
      c = diagonal_cross(n.point("junction"), positive_int(n, "n_arm", 16));
    } else if (builder == "pinned_tripod") {
      const Vec2 j = n.point("junction");
      const auto a = three_angles(n, "angles_deg");
      const double angles[3] = {a[0], a[1], a[2]};
      c = pinned_tripod(j, angles, positive_int(n, "n_arm", 16), positive_int(n, "n_wall", 64, 3));
    } else {
      throw ScenarioError(n.child_path("builder"), "unknown cluster builder '" + builder + "'");
    }
  } else {
    const long long m = n.integer("m");
    if (m < 1) throw ScenarioError(n.child_path("m"), "need at least one chamber");
    c.m = static_cast<int>(m);
    c.vertices = n.points("vertices");
    const json& edges = n.value("edges");
    const std::string where = n.child_path("edges");
    if (!edges.is_array()) throw ScenarioError(where, "expected an array of edges");
    for (std::size_t i = 0; i < edges.size(); ++i) {
      Node e(edges[i], where + "/" + std::to_string(i));
      Edge out;
      const json& path = e.value("path");
      if (!path.is_array()) throw ScenarioError(e.child_path("path"), "expected vertex indices");
      for (std::size_t k = 0; k < path.size(); ++k) {
        if (!is_index(path[k]))
          throw ScenarioError(e.child_path("path") + "/" + std::to_string(k), "expected a vertex index");
        out.path.push_back(path[k].get<std::size_t>());
      }
      out.left = static_cast<int>(e.integer("left"));
      out.right = static_cast<int>(e.integer("right"));
      e.finish();
      c.edges.push_back(std::move(out));
    }
    if (n.has("white")) {
      c.white.clear();
      for (double w : n.numbers("white")) c.white.push_back(static_cast<int>(w));
    }
  }
  n.finish();
  const auto issues = validate(c);
  if (!issues.empty()) throw ScenarioError(n.path(), "invalid cluster: " + issues.front());
  return c;
}

Scenario parse_scenario(const json& doc, std::string name) {
  Node root(doc, "");
  Scenario s;
  s.name = std::move(name);
  const long long version = root.integer("version");
  if (version != kScenarioVersion)
    throw ScenarioError(root.child_path("version"), "unsupported version " + std::to_string(version));
  s.task = root.string("task");
  bool known = false;
  for (const auto& t : task_names()) known = known || t == s.task;
  if (!known) throw ScenarioError(root.child_path("task"), "unknown task '" + s.task + "'");
  if (root.has("name")) s.name = root.string("name");

  const Gauge g = parse_gauge(root.object("gauge"));
  const double vol = root.number("volume_density", 1.0);
  if (!(vol > 0.0)) throw ScenarioError(root.child_path("volume_density"), "must be positive");
  Domain domain = Domain::rectangle({-10, -10}, {10, 10});
  if (auto d = root.maybe_object("domain")) domain = parse_domain(std::move(*d));
  s.density = Density::uniform(g, vol, domain);

  if (auto c = root.maybe_object("cluster")) s.cluster = parse_cluster(std::move(*c));
  if (root.has("wall")) s.wall = parse_wall(root.value("wall"), root.child_path("wall"));

  const bool needs_cluster = s.task == "perimeter" || s.task == "solve" || s.task == "diagnose";
  if (needs_cluster && !s.cluster) throw ScenarioError(root.child_path("cluster"), "missing required key");

  // Only the block of the declared task is read; blocks for other tasks are
  // left unconsumed and rejected by finish().
  if (s.task == "fermat") {
    Node t = root.object("fermat");
    const auto p = t.points("points");
    if (p.size() != 3) throw ScenarioError(t.child_path("points"), "expected three points");
    s.points = {p[0], p[1], p[2]};
    s.pattern = parse_pattern(t.string("pattern", "plain"), t.child_path("pattern"));
    t.finish();
  } else if (s.task == "triples") {
    if (auto t = root.maybe_object("triples")) {
      if (t->has("a")) s.a = t->point("a");
      s.resolution = positive_int(*t, "resolution", s.resolution, 8);
      t->finish();
    }
  } else if (s.task == "slices") {
    Node t = root.object("slices");
    s.angles_deg = t.numbers("angles_deg");
    for (double c : t.numbers("colors")) {
      if (c != std::floor(c) || c < 0) throw ScenarioError(t.child_path("colors"), "colors are nonnegative integers");
      s.colors.push_back(static_cast<int>(c));
    }
    t.finish();
  } else if (s.task == "perimeter") {
    if (auto t = root.maybe_object("perimeter")) {
      if (auto r = t->maybe_object("region")) {
        Disk d{r->point("center"), r->number("radius")};
        if (!(d.radius > 0.0)) throw ScenarioError(r->child_path("radius"), "must be positive");
        r->finish();
        s.region = d;
      }
      t->finish();
    }
  } else if (s.task == "solve") {
    Node t = root.object("solve");
    s.options = parse_solve_options(t, s.targets);
    t.finish();
    s.options.wall = s.wall;
    if (static_cast<int>(s.targets.size()) != s.cluster->m)
      throw ScenarioError(root.child_path("solve") + "/targets", "need one target per chamber");
  } else if (s.task == "diagnose") {
    if (auto t = root.maybe_object("diagnose")) {
      s.radius = t->number("radius", 0.0);
      if (s.radius < 0.0) throw ScenarioError(t->child_path("radius"), "must be nonnegative");
      t->finish();
    }
  } else if (s.task == "gaugeprobe") {
    s.resolution = 720;
    s.directions_deg = {0, 45, 90, 135, 180, 225, 270, 315};
    if (auto t = root.maybe_object("gaugeprobe")) {
      s.resolution = positive_int(*t, "resolution", s.resolution, 8);
      if (t->has("directions_deg")) s.directions_deg = t->numbers("directions_deg");
      t->finish();
    }
  }
  root.finish();
  return s;
}

Scenario load_scenario(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ScenarioError("", "cannot open " + file.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ScenarioError("", std::string("not valid JSON: ") + e.what());
  }
  return parse_scenario(doc, file.stem().string());
}

}  // namespace isocluster::cli

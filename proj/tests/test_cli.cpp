#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "cli/run.hpp"
#include "cli/scenario.hpp"
#include "cli/schema.hpp"
#include "cli/svg.hpp"
#include "doctest.h"
#include "isocluster/slices.hpp"

using namespace isocluster;
using namespace isocluster::cli;
namespace fs = std::filesystem;

namespace {

const fs::path kSource = ISOCLUSTER_SOURCE_DIR;

json read_json(const fs::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

json schema() {
  static const json s = read_json(kSource / "schemas" / "report.schema.json");
  return s;
}

Scenario scenario_file(const std::string& name) { return load_scenario(kSource / "scenarios" / name); }

std::string error_path(const json& doc) {
  try {
    parse_scenario(doc, "t");
  } catch (const ScenarioError& e) {
    return e.where();
  }
  return "no error";
}

int count(const std::string& text, const std::string& needle) {
  int n = 0;
  for (std::size_t at = text.find(needle); at != std::string::npos; at = text.find(needle, at + 1)) ++n;
  return n;
}

fs::path scratch_dir(const std::string& tag) {
  const fs::path d = fs::temp_directory_path() / ("isocluster_cli_" + tag);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

fs::path write_file(const fs::path& dir, const std::string& name, const std::string& text) {
  const fs::path p = dir / name;
  std::ofstream(p) << text;
  return p;
}

}  // namespace

TEST_CASE("unknown keys are rejected with the pointer to the key") {
  json doc = {{"version", 1}, {"task", "gaugeprobe"}, {"gauge", {{"kind", "lp"}, {"p", 3}, {"pp", 2}}}};
  CHECK(error_path(doc) == "/gauge/pp");
  doc = {{"version", 1}, {"task", "gaugeprobe"}, {"gauge", {{"kind", "euclidean"}}}, {"extra", 0}};
  CHECK(error_path(doc) == "/extra");
  // A block for a task other than the declared one is not read.
  doc = {{"version", 1},
         {"task", "gaugeprobe"},
         {"gauge", {{"kind", "euclidean"}}},
         {"triples", {{"a", {0, 1}}}}};
  CHECK(error_path(doc) == "/triples");
  doc = {{"version", 1},
         {"task", "solve"},
         {"gauge", {{"kind", "euclidean"}}},
         {"cluster", {{"builder", "regular_polygon"}, {"center", {0, 0}}, {"radius", 1}, {"n", 8}, {"sides", 3}}},
         {"solve", {{"targets", {1.0}}}}};
  CHECK(error_path(doc) == "/cluster/sides");
  doc = {{"version", 1},
         {"task", "perimeter"},
         {"gauge", {{"kind", "euclidean"}}},
         {"cluster", {{"m", 1}, {"vertices", {{0, 0}, {1, 0}, {0, 1}}}, {"edges", {{{"path", {0, 1, 2, 0}}, {"left", 1}, {"right", 0}, {"colour", 1}}}}}}};
  CHECK(error_path(doc) == "/cluster/edges/0/colour");
  doc["task"] = "perimeters";
  CHECK(error_path(doc) == "/task");
}

TEST_CASE("missing and malformed values") {
  json doc = {{"version", 1}, {"task", "gaugeprobe"}};
  CHECK(error_path(doc) == "/gauge");
  doc = {{"task", "gaugeprobe"}, {"gauge", {{"kind", "euclidean"}}}};
  CHECK(error_path(doc) == "/version");
  doc = {{"version", 2}, {"task", "gaugeprobe"}, {"gauge", {{"kind", "euclidean"}}}};
  CHECK(error_path(doc) == "/version");
  doc = {{"version", 1}, {"task", "gaugeprobe"}, {"gauge", {{"kind", "lp"}, {"p", "three"}}}};
  CHECK(error_path(doc) == "/gauge/p");
  doc = {{"version", 1}, {"task", "gaugeprobe"}, {"gauge", {{"kind", "lp"}, {"p", 0.5}}}};
  CHECK(error_path(doc) == "/gauge");
  doc = {{"version", 1}, {"task", "fermat"}, {"gauge", {{"kind", "euclidean"}}}, {"fermat", {{"points", {{0, 0}, {1, 0}}}}}};
  CHECK(error_path(doc) == "/fermat/points");
  doc = {{"version", 1}, {"task", "fermat"}, {"gauge", {{"kind", "euclidean"}}}, {"fermat", {{"points", {{0, 0}, {1, 0}, {0, "x"}}}}}};
  CHECK(error_path(doc) == "/fermat/points/2/1");
  doc = {{"version", 1}, {"task", "solve"}, {"gauge", {{"kind", "euclidean"}}}, {"solve", {{"targets", {1.0}}}}};
  CHECK(error_path(doc) == "/cluster");
  // Crossing edges fail cluster validation.
  doc = {{"version", 1},
         {"task", "perimeter"},
         {"gauge", {{"kind", "euclidean"}}},
         {"cluster", {{"m", 1}, {"vertices", {{0, 0}, {1, 1}, {1, 0}, {0, 1}}}, {"edges", {{{"path", {0, 1, 2, 3, 0}}, {"left", 1}, {"right", 0}}}}}}};
  CHECK(error_path(doc) == "/cluster");
}

TEST_CASE("gauge blocks") {
  auto gauge = [](json block) {
    return parse_scenario({{"version", 1}, {"task", "gaugeprobe"}, {"gauge", block}}, "t").density.base();
  };
  const Vec2 v{0.3, -0.8};
  CHECK(gauge({{"kind", "lp"}, {"p", "inf"}}).eval(v) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(gauge({{"kind", "max"}}).eval(v) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(gauge({{"kind", "lp"}, {"p", 1}}).eval(v) == doctest::Approx(1.1).epsilon(1e-15));
  CHECK(gauge({{"kind", "ellipse"}, {"a", 4}, {"b", 0}, {"c", 1}}).eval(v) == doctest::Approx(std::sqrt(4 * 0.09 + 0.64)));
  CHECK(gauge({{"kind", "euclidean"}, {"scale", 2}}).eval(v) == doctest::Approx(2 * std::hypot(0.3, 0.8)));
  CHECK(gauge({{"kind", "max"}, {"matrix", {2, 0, 0, 1}}}).eval(v) == doctest::Approx(0.8));
  CHECK(gauge({{"kind", "max"}, {"matrix", {4, 0, 0, 1}}}).eval(v) == doctest::Approx(1.2));
  // Unit ball rotated by 90 degrees: the x-extent of the max ball moves to y.
  const Gauge r = gauge({{"kind", "ellipse"}, {"a", 4}, {"b", 0}, {"c", 1}, {"rotate_deg", 90}});
  CHECK(r.eval({0, 1}) == doctest::Approx(2.0));
  CHECK(r.eval({1, 0}) == doctest::Approx(1.0));
  const Gauge d = gauge({{"kind", "shifted_disk"}, {"center", {0, -0.5}}, {"radius", 1}});
  CHECK(d.eval({0, 0.5}) == doctest::Approx(1.0));
  CHECK(d.eval({0, -1.5}) == doctest::Approx(1.0));
}

TEST_CASE("triples on the euclidean scenario: one pair at 120 degrees") {
  const Outcome o = execute(scenario_file("triples_euclidean.json"), std::nullopt);
  CHECK(o.exit_code == kOk);
  const json& t = o.report["triples"];
  REQUIRE(t["count"] == 1);
  CHECK(std::abs(t["pairs"][0]["angle_ab_deg"].get<double>() - 120.0) < 0.01);
  CHECK(std::abs(t["pairs"][0]["angle_ac_deg"].get<double>() - 120.0) < 0.01);
  // B and C mirror each other across the axis of A.
  CHECK(t["pairs"][0]["b"][0].get<double>() == doctest::Approx(-t["pairs"][0]["c"][0].get<double>()));
}

TEST_CASE("triples on the shifted disk scenario: none") {
  const Outcome o = execute(scenario_file("triples_shifted_disk.json"), std::nullopt);
  CHECK(o.report["triples"]["count"] == 0);
}

TEST_CASE("perimeter on the diagonal scenario: in-square perimeter 4") {
  const Outcome o = execute(scenario_file("diagonal_perimeter.json"), std::nullopt);
  const json& p = o.report["perimeter"];
  CHECK(std::abs(p["interior_perimeter"].get<double>() - 4.0) < 1e-9);
  // Square sides against the exterior add 4 * 2 under the max norm.
  CHECK(std::abs(p["perimeter"].get<double>() - 12.0) < 1e-9);
  double sum = 0.0;
  for (const auto& e : p["per_edge"]) sum += e.get<double>();
  CHECK(sum == doctest::Approx(p["perimeter"].get<double>()).epsilon(1e-11));
  for (const auto& v : p["volumes"]) CHECK(std::abs(v.get<double>() - 1.0) < 1e-11);
}

TEST_CASE("run: exit codes and files") {
  const fs::path dir = scratch_dir("run");
  std::ostringstream out, err;

  const fs::path bad = write_file(dir, "bad.json", R"({"version": 1, "task": "triples"})");
  CHECK(run({"triples", bad, dir, std::nullopt, false, false}, out, err) == kInvalid);
  CHECK(err.str().find("/gauge") != std::string::npos);
  CHECK(err.str().find("missing") != std::string::npos);

  err.str("");
  const fs::path garbage = write_file(dir, "garbage.json", "{ not json");
  CHECK(run({"triples", garbage, dir, std::nullopt, false, false}, out, err) == kInvalid);

  err.str("");
  const fs::path good = kSource / "scenarios" / "triples_euclidean.json";
  CHECK(run({"fermat", good, dir, std::nullopt, false, false}, out, err) == kInvalid);
  CHECK(err.str().find("triples") != std::string::npos);

  CHECK(run({"triples", good, dir, std::nullopt, true, false}, out, err) == kOk);
  CHECK(fs::exists(dir / "triples_euclidean.triples.json"));
  CHECK(fs::exists(dir / "triples_euclidean.triples.svg"));

  // Kinked gauges have no first-order junction condition.
  const fs::path kinked =
      write_file(dir, "kinked.json", R"({"version": 1, "task": "triples", "gauge": {"kind": "max"}})");
  CHECK(run({"triples", kinked, dir, std::nullopt, false, false}, out, err) == kInvalid);

  const fs::path short_solve = write_file(dir, "short.json", R"({
    "version": 1, "task": "solve", "gauge": {"kind": "euclidean"},
    "cluster": {"builder": "regular_polygon", "center": [0, 0], "radius": 1, "n": 40},
    "solve": {"targets": [4.0], "max_iterations": 3}})");
  CHECK(run({"solve", short_solve, dir, std::nullopt, false, false}, out, err) == kNotConverged);
  const json r = read_json(dir / "short.solve.json");
  CHECK(r["solve"]["converged"] == false);
  CHECK(r["exit_code"] == kNotConverged);
}

TEST_CASE("output directory from the environment") {
  const fs::path dir = scratch_dir("env");
  ::setenv("ISOCLUSTER_OUT", dir.c_str(), 1);
  std::ostringstream out, err;
  const int code = run({"gaugeprobe", kSource / "scenarios" / "smoothed_l1_probe.json", std::nullopt, std::nullopt,
                        false, false},
                       out, err);
  ::unsetenv("ISOCLUSTER_OUT");
  CHECK(code == kOk);
  CHECK(fs::exists(dir / "smoothed_l1_probe.gaugeprobe.json"));
}

TEST_CASE("every scenario report validates against the schema") {
  const json s = schema();
  int n = 0;
  for (const auto& entry : fs::directory_iterator(kSource / "scenarios")) {
    const Scenario sc = load_scenario(entry.path());
    const Outcome o = execute(sc, std::nullopt);
    const json reparsed = json::parse(dump_report(o.report));
    const auto errs = validate_schema(s, reparsed);
    INFO(entry.path().filename().string() << ": " << (errs.empty() ? "" : errs.front()));
    CHECK(errs.empty());
    CHECK(reparsed == o.report);
    ++n;
  }
  CHECK(n >= 10);
}

TEST_CASE("schema validator rejects broken reports") {
  const json s = schema();
  json r = execute(scenario_file("fermat_ellipse.json"), std::nullopt).report;
  REQUIRE(validate_schema(s, r).empty());
  json bad = r;
  bad.erase("scenario");
  CHECK(!validate_schema(s, bad).empty());
  bad = r;
  bad["fermat"]["objective"] = "large";
  CHECK(validate_schema(s, bad).front().rfind("/fermat/objective", 0) == 0);
  bad = r;
  bad["fermat"]["bonus"] = 1;
  CHECK(validate_schema(s, bad).front().rfind("/fermat/bonus", 0) == 0);
  bad = r;
  bad["triples"] = {{"a", {0, 1}}, {"resolution", 8}, {"count", 0}, {"pairs", json::array()}};
  CHECK(!validate_schema(s, bad).empty());  // two task blocks
  bad = r;
  bad["fermat"]["point"] = {1.0};
  CHECK(!validate_schema(s, bad).empty());
  bad = r;
  bad["exit_code"] = 2;
  CHECK(!validate_schema(s, bad).empty());
  CHECK_THROWS(validate_schema(json{{"type", "object"}, {"patternProperties", json::object()}}, r));
}

TEST_CASE("identical scenario and seed give byte-identical reports") {
  const json doc = {{"version", 1},
                    {"task", "solve"},
                    {"gauge", {{"kind", "ellipse"}, {"a", 1.5}, {"b", 0.2}, {"c", 1}}},
                    {"cluster", {{"builder", "double_bubble"}, {"r", 1}, {"n_arc", 16}, {"n_mid", 6}}},
                    {"solve", {{"targets", {2.4, 2.6}}, {"starts", 3}}}};
  const Scenario s = parse_scenario(doc, "det");
  const std::string a = dump_report(execute(s, 11).report);
  const std::string b = dump_report(execute(s, 11).report);
  CHECK(a == b);
  CHECK(json::parse(a)["solve"]["seed"] == 11);
  CHECK(json::parse(dump_report(execute(s, std::nullopt).report))["solve"]["seed"] == 1);
}

TEST_CASE("numbers are serialized at 12 significant digits") {
  const json r = round_numbers({{"a", 0.1 + 0.2}, {"b", -0.0}, {"c", {1.0 / 3.0, 7}}, {"d", 123456789.123456789}});
  CHECK(r.dump() == R"({"a":0.3,"b":0.0,"c":[0.333333333333,7],"d":123456789.123})");
}

TEST_CASE("svg: empty cluster draws axes only") {
  Cluster empty;
  empty.m = 0;
  const std::string svg = render_svg({cluster_panel(empty, {}, "")});
  CHECK(svg.rfind("<?xml", 0) == 0);
  CHECK(count(svg, "<svg ") == 1);
  CHECK(count(svg, "</svg>") == 1);
  CHECK(count(svg, "<line class=\"axis\"") == 2);
  CHECK(count(svg, "<path class=\"chamber\"") == 0);
  CHECK(count(svg, "<polyline") == 0);
  CHECK(render_svg({}) == svg);
}

TEST_CASE("svg: coordinates use six decimals and output is stable") {
  const Outcome a = execute(scenario_file("double_bubble_diagnose.json"), std::nullopt);
  const Outcome b = execute(scenario_file("double_bubble_diagnose.json"), std::nullopt);
  CHECK(a.svg == b.svg);
  // Geometry follows the style sheet.
  const std::string body = a.svg.substr(a.svg.find("</style>"));
  const std::regex number(R"(-?\d+\.(\d+))");
  int checked = 0;
  for (std::sregex_iterator it(body.begin(), body.end(), number), end; it != end; ++it) {
    CHECK((*it)[1].length() == 6);
    ++checked;
  }
  CHECK(checked > 100);
  CHECK(a.svg.find("-0.000000") == std::string::npos);
}

TEST_CASE("svg: six-radius slice configuration arrows") {
  const Scenario s = scenario_file("fig2_slices.json");
  const SliceConfig c = SliceConfig::from_degrees(s.angles_deg, s.colors, s.density.base());
  const CompetitorNetwork net = slice_network(c);
  const SvgPanel p = slice_panel(net.coloring, net.segments, "before");
  int full = 0, half = 0;
  for (const SvgArrow& a : p.arrows) {
    full += a.cls == "arrow-full";
    half += a.cls == "arrow-half";
  }
  // Radii A, D, E, F touch a white sector; B and C separate two chambers.
  CHECK(full == 4);
  CHECK(half == 4);
  for (const SvgArrow& a : p.arrows) {
    const Vec2 d = a.to - a.from;
    if (a.cls == "arrow-full") {
      CHECK(norm(d) == doctest::Approx(0.25));
      CHECK(net.coloring.at(a.from + d * 0.1) == kWhite);
      CHECK(net.coloring.at(a.from - d * 0.1) != kWhite);
    } else {
      CHECK(norm(d) == doctest::Approx(0.125));
      CHECK(net.coloring.at(a.from + d * 0.1) != kWhite);
    }
  }
  const std::string svg = render_svg({p});
  CHECK(count(svg, "<line class=\"arrow-full\"") == 4);
  CHECK(count(svg, "<line class=\"arrow-half\"") == 4);
}

TEST_CASE("svg: boundary arrow convention") {
  const Vec2 at{1, 2}, n{0, 1};
  CHECK(boundary_arrows(at, n, true, true, 1.0).empty());
  auto a = boundary_arrows(at, n, true, false, 1.0);
  REQUIRE(a.size() == 1);
  CHECK(a[0].to == Vec2{1, 3});
  a = boundary_arrows(at, n, false, true, 1.0);
  REQUIRE(a.size() == 1);
  CHECK(a[0].to == Vec2{1, 1});
  a = boundary_arrows(at, n, false, false, 1.0);
  REQUIRE(a.size() == 2);
  CHECK(a[0].to == Vec2{1, 2.5});
  CHECK(a[1].to == Vec2{1, 1.5});
}

TEST_CASE("svg: double bubble solve has two chambers and two junctions") {
  const Outcome o = execute(scenario_file("double_bubble_solve.json"), std::nullopt);
  CHECK(o.exit_code == kOk);
  CHECK(count(o.svg, "<path class=\"chamber\"") == 2);
  CHECK(count(o.svg, "<circle class=\"junction\"") == 2);
  // Each chamber path is one closed loop.
  const std::regex loop("<path class=\"chamber\"[^>]*d=\"M[^MZ]*Z\"/>");
  CHECK(std::distance(std::sregex_iterator(o.svg.begin(), o.svg.end(), loop), std::sregex_iterator()) == 2);
}

#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "isocluster/cluster.hpp"
#include "isocluster/optimizer.hpp"
#include "isocluster/steiner.hpp"

namespace isocluster::cli {

using json = nlohmann::json;

constexpr int kScenarioVersion = 1;

// Bad scenario input. `where` is a JSON pointer into the scenario document.
class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(std::string where, const std::string& what)
      : std::runtime_error((where.empty() ? std::string("/") : where) + ": " + what), where_(std::move(where)) {}
  const std::string& where() const { return where_; }

 private:
  std::string where_;
};

// Read-once view of a JSON object. Every key must be consumed before
// finish(), so typos surface as errors instead of being ignored.
class Node {
 public:
  Node(const json& j, std::string path);

  const std::string& path() const { return path_; }
  const json& raw() const { return *j_; }
  bool has(const std::string& key) const;
  std::string child_path(const std::string& key) const;

  Node object(const std::string& key);
  std::optional<Node> maybe_object(const std::string& key);
  const json& value(const std::string& key);

  double number(const std::string& key);
  double number(const std::string& key, double fallback);
  long long integer(const std::string& key);
  long long integer(const std::string& key, long long fallback);
  bool boolean(const std::string& key, bool fallback);
  std::string string(const std::string& key);
  std::string string(const std::string& key, const std::string& fallback);
  Vec2 point(const std::string& key);
  std::vector<double> numbers(const std::string& key);
  std::vector<Vec2> points(const std::string& key);

  void finish() const;

 private:
  const json& take(const std::string& key);

  const json* j_;
  std::string path_;
  std::set<std::string> used_;
};

std::string pointer_escape(const std::string& key);

struct Scenario {
  std::string name;
  std::string task;
  Density density = Density::uniform(Gauge::euclidean());
  std::optional<Cluster> cluster;
  Polyline wall;

  // fermat
  std::array<Vec2, 3> points{};
  JunctionPattern pattern = JunctionPattern::plain;
  // triples
  Vec2 a{0.0, 1.0};
  int resolution = 720;
  // slices
  std::vector<double> angles_deg;
  std::vector<int> colors;
  // perimeter
  std::optional<Disk> region;
  // solve
  VolumeVector targets;
  SolveOptions options;
  // diagnose
  double radius = 0.0;  // 0 picks a default from the cluster
  // gaugeprobe
  std::vector<double> directions_deg;
};

inline const std::vector<std::string>& task_names() {
  static const std::vector<std::string> names = {"fermat",    "triples", "slices",    "perimeter",
                                                 "solve",     "diagnose", "gaugeprobe"};
  return names;
}

Gauge parse_gauge(Node n);
Cluster parse_cluster(Node n);
Scenario parse_scenario(const json& doc, std::string name);
Scenario load_scenario(const std::filesystem::path& file);

}  // namespace isocluster::cli

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "cli/scenario.hpp"

namespace isocluster::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kInvalid = 2,
  kNotConverged = 3,
};

constexpr int kReportVersion = 1;

struct RunArgs {
  std::string task;
  std::filesystem::path scenario;
  std::optional<std::filesystem::path> out;  // falls back to $ISOCLUSTER_OUT, then "."
  std::optional<std::uint64_t> seed;
  bool svg = false;
  bool verbose = false;
};

struct Outcome {
  json report;
  std::string svg;
  int exit_code = kOk;
};

// Runs the scenario's task without touching the file system.
Outcome execute(const Scenario& s, std::optional<std::uint64_t> seed);

// Rounds every floating point value to 12 significant digits so reports are
// stable across platforms and diffable.
json round_numbers(const json& j);

std::string dump_report(const json& report);

// Loads the scenario, checks that it declares `args.task`, writes
// <out>/<name>.<task>.json (and .svg with args.svg) and returns the exit code.
int run(const RunArgs& args, std::ostream& out, std::ostream& err);

}  // namespace isocluster::cli

#include <iostream>

#include <CLI11.hpp>

#include "cli/run.hpp"

int main(int argc, char** argv) {
  using namespace isocluster::cli;
  CLI::App app{"Planar isoperimetric cluster toolkit"};
  app.require_subcommand(1);

  RunArgs args;
  std::string scenario, out;
  std::uint64_t seed = 0;
  const std::map<std::string, std::string> help = {
      {"fermat", "anisotropic Fermat point of three points"},
      {"triples", "admissible junction triples for a gauge"},
      {"slices", "best perimeter-decreasing competitor of a slice configuration"},
      {"perimeter", "weighted perimeter and volumes of a cluster"},
      {"solve", "minimize cluster perimeter at fixed volumes"},
      {"diagnose", "junction and arc diagnostics of a cluster"},
      {"gaugeprobe", "values, gradients and convexity probes of a gauge"},
  };
  for (const auto& name : task_names()) {
    CLI::App* sub = app.add_subcommand(name, help.at(name));
    sub->add_option("--scenario", scenario, "scenario file (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "output directory (default: $ISOCLUSTER_OUT or .)");
    sub->add_option("--seed", seed, "seed for randomized starts");
    sub->add_flag("--svg", args.svg, "also write an SVG rendering");
    sub->add_flag("--verbose", args.verbose, "print a summary");
    sub->callback([&, name, sub] {
      args.task = name;
      args.scenario = scenario;
      if (!out.empty()) args.out = out;
      if (sub->count("--seed")) args.seed = seed;
    });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kInvalid;
  }
  return run(args, std::cout, std::cerr);
}

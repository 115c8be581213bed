// mlspec: build, run and inspect mini-ML units.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mlspec/driver.hpp"

namespace fs = std::filesystem;
using namespace mlspec::driver;

namespace {

std::optional<fs::path> lib_dir_or_env(const std::string& flag) {
  if (!flag.empty()) return fs::path(flag);
  if (const char* env = std::getenv("MLSPEC_LIB"); env && *env) return fs::path(env);
  return std::nullopt;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mlspec: a mini-ML compiler that specializes polymorphic array accesses after inlining"};
  app.require_subcommand(1);

  std::string lib;

  auto* build = app.add_subcommand("build", "Compile a .mx file to a .unit artifact");
  std::string build_file;
  std::string mode = "full";
  long long threshold = -1;
  std::string output;
  bool report = false;
  build->add_option("FILE", build_file, "Source file")->required();
  build->add_option("--lib", lib, "Directory holding imported .unit files (default: $MLSPEC_LIB, else the source directory)");
  build->add_option("--mode", mode, "Optimization mode")->check(CLI::IsMember({"none", "inline-only", "full"}));
  build->add_option("--inline-threshold", threshold, "Largest callee body (IR nodes) to inline; default unbounded")
      ->check(CLI::NonNegativeNumber);
  build->add_option("-o", output, "Output path (default: <lib or source dir>/<unit>.unit)");
  build->add_flag("--report", report, "Print the inlining report to stderr");

  auto* run = app.add_subcommand("run", "Evaluate a unit and report array-access statistics");
  std::string run_unit;
  std::string stats = "tsv";
  run->add_option("UNIT", run_unit, ".unit file")->required();
  run->add_option("--lib", lib, "Directory holding dependency .unit files (default: $MLSPEC_LIB, else the unit's directory)");
  run->add_option("--stats", stats, "Statistics format on stderr")->check(CLI::IsMember({"tsv", "json"}));

  auto* bench = app.add_subcommand("bench", "Run bundled benchmarks before and after specialization");
  std::string bench_name;
  long long scale = 1000;
  bench->add_option("NAME", bench_name, "all, simple, random or rec_residual")->required();
  bench->add_option("--scale", scale, "Iteration count multiplier");

  auto* dump = app.add_subcommand("dump-ir", "Print the IR stored in a unit");
  std::string dump_unit;
  std::string stage;
  dump->add_option("UNIT", dump_unit, ".unit file")->required();
  dump->add_option("--stage", stage, "lowered or optimized")->required()->check(CLI::IsMember({"lowered", "optimized"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUser;
  }

  if (*build) {
    BuildCommand cmd;
    cmd.file = build_file;
    cmd.lib_dir = lib_dir_or_env(lib);
    if (!output.empty()) cmd.output = fs::path(output);
    cmd.options.mode = *parse_mode(mode);
    if (threshold >= 0) cmd.options.policy.threshold = static_cast<std::size_t>(threshold);
    cmd.report = report;
    return cmd_build(cmd, std::cout, std::cerr);
  }
  if (*run) {
    RunCommand cmd;
    cmd.unit = run_unit;
    cmd.lib_dir = lib_dir_or_env(lib);
    cmd.stats = stats == "json" ? mlspec::runtime::StatsFormat::Json : mlspec::runtime::StatsFormat::Tsv;
    return cmd_run(cmd, std::cout, std::cerr);
  }
  if (*bench) return cmd_bench(bench_name, scale, std::cout, std::cerr);
  return cmd_dump_ir(dump_unit, *parse_stage(stage), std::cout, std::cerr);
}

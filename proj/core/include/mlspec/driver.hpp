#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mlspec/opt.hpp"
#include "mlspec/runtime.hpp"
#include "mlspec/units.hpp"

namespace mlspec::driver {

enum class Mode { None, InlineOnly, Full };

std::optional<Mode> parse_mode(std::string_view s);
std::string_view mode_name(Mode m);

struct BuildOptions {
  Mode mode = Mode::Full;
  opt::InlinePolicy policy;
};

struct BuildResult {
  units::UnitArtifact artifact;
  opt::InlineReport report;
};

/// One compilation session: artifacts held in memory plus those found in a
/// flat library directory as `<lowercased unit>.unit`, and the import
/// renaming table shared by every compilation in the session.
class Session {
 public:
  explicit Session(std::optional<std::filesystem::path> lib_dir = std::nullopt);

  /// Compiles one unit. `iface` is the parsed `.mxi`, if any.
  BuildResult compile(std::string_view source, const std::string& unit_name,
                      const std::optional<typing::SchemeMap>& iface, const BuildOptions& options);

  /// Compiles and keeps the artifact in memory for later imports.
  const units::UnitArtifact& compile_and_add(std::string_view source, const std::string& unit_name,
                                             const std::optional<typing::SchemeMap>& iface,
                                             const BuildOptions& options);

  void add(units::UnitArtifact artifact);
  const units::UnitArtifact* find(const std::string& unit);

  /// The entry unit and its transitive dependencies, dependencies first.
  std::vector<ir::IrUnit> link(const units::UnitArtifact& entry);
  std::vector<ir::IrUnit> link(const std::string& entry_unit);

  units::RenamingTable& table() { return table_; }

 private:
  std::optional<std::filesystem::path> lib_dir_;
  std::map<std::string, std::unique_ptr<units::UnitArtifact>> artifacts_;
  std::map<std::string, bool> missing_;
  units::RenamingTable table_;
};

/// `.unit` file name of a unit in a library directory.
std::filesystem::path artifact_path(const std::filesystem::path& dir, const std::string& unit_name);

// ---- commands; each returns the process exit code ----

struct BuildCommand {
  std::filesystem::path file;
  std::optional<std::filesystem::path> lib_dir;
  std::optional<std::filesystem::path> output;
  BuildOptions options;
  bool report = false;
};
int cmd_build(const BuildCommand& cmd, std::ostream& out, std::ostream& err);

struct RunCommand {
  std::filesystem::path unit;
  std::optional<std::filesystem::path> lib_dir;
  runtime::StatsFormat stats = runtime::StatsFormat::Tsv;
  std::uint64_t step_budget = 1'000'000'000;
};
int cmd_run(const RunCommand& cmd, std::ostream& out, std::ostream& err);

enum class Stage { Lowered, Optimized };
std::optional<Stage> parse_stage(std::string_view s);
int cmd_dump_ir(const std::filesystem::path& unit, Stage stage, std::ostream& out, std::ostream& err);

int cmd_bench(const std::string& name, std::int64_t scale, std::ostream& out, std::ostream& err);

// ---- bench corpus ----

struct BenchSource {
  std::string file;  // e.g. "simple.mx"
  std::string text;
};
/// Bundled sources, keyed by file name.
const std::vector<BenchSource>& bench_corpus();
std::vector<std::string> bench_names();

/// Rewrites `let scale = N` in a bench source.
std::string with_scale(std::string_view source, std::int64_t scale);

struct BenchRun {
  std::string bench;
  Mode mode = Mode::Full;
  std::string output;
  runtime::AccessStats stats;
};

/// Builds the shared accessor unit and the bench in `mode`, then runs it.
BenchRun run_bench(const std::string& name, std::int64_t scale, Mode mode,
                   const opt::InlinePolicy& policy = {});

/// Exit-code classes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUser = 1;
inline constexpr int kExitRuntime = 2;
inline constexpr int kExitInternal = 3;

}  // namespace mlspec::driver

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "harness.hpp"
#include "mlspec/driver.hpp"

namespace fs = std::filesystem;
using namespace mlspec;
using namespace mlspec::driver;

namespace {

class TempDir {
 public:
  TempDir() : path_(fs::temp_directory_path() / ("mlspec_driver_" + std::to_string(::getpid()) + "_" + std::to_string(next_++))) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }
  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(path_ / name) << text;
    return path_ / name;
  }

 private:
  static inline int next_ = 0;
  fs::path path_;
};

struct Cli {
  int rc;
  std::string out;
  std::string err;
};

Cli build(const fs::path& file, const fs::path& lib, Mode mode = Mode::Full, bool report = false) {
  std::ostringstream out, err;
  BuildCommand cmd{file, lib, std::nullopt, {mode, {}}, report};
  int rc = cmd_build(cmd, out, err);
  return {rc, out.str(), err.str()};
}

Cli run(const fs::path& unit, const fs::path& lib, runtime::StatsFormat stats = runtime::StatsFormat::Tsv) {
  std::ostringstream out, err;
  int rc = cmd_run(RunCommand{unit, lib, stats}, out, err);
  return {rc, out.str(), err.str()};
}

}  // namespace

TEST(Modes, Parse) {
  EXPECT_EQ(parse_mode("none"), Mode::None);
  EXPECT_EQ(parse_mode("inline-only"), Mode::InlineOnly);
  EXPECT_EQ(parse_mode("full"), Mode::Full);
  EXPECT_FALSE(parse_mode("fast").has_value());
  EXPECT_EQ(parse_stage("optimized"), Stage::Optimized);
  EXPECT_FALSE(parse_stage("raw").has_value());
}

TEST(Build, TwoUnitsThroughTheLibraryDirectory) {
  TempDir d;
  fs::copy_file(fs::path(testkit::test_data_dir()) / "a.mx", d.path() / "a.mx");
  fs::copy_file(fs::path(testkit::test_data_dir()) / "a.mxi", d.path() / "a.mxi");
  fs::copy_file(fs::path(testkit::test_data_dir()) / "b.mx", d.path() / "b.mx");
  ASSERT_EQ(build(d.path() / "a.mx", d.path()).rc, 0);
  Cli b = build(d.path() / "b.mx", d.path(), Mode::Full, true);
  ASSERT_EQ(b.rc, 0) << b.err;
  EXPECT_NE(b.err.find("A.get0\tinlined"), std::string::npos) << b.err;
  EXPECT_TRUE(fs::exists(d.path() / "b.unit"));

  Cli r = run(d.path() / "b.unit", d.path(), runtime::StatsFormat::Json);
  EXPECT_EQ(r.rc, 0);
  EXPECT_EQ(r.out, "10\n1.5\n");
  EXPECT_NE(r.err.find("\"gen\":0"), std::string::npos) << r.err;

  std::ostringstream lowered, err;
  EXPECT_EQ(cmd_dump_ir(d.path() / "b.unit", Stage::Lowered, lowered, err), 0);
  EXPECT_NE(lowered.str().find("(spec (gvar A get0)"), std::string::npos) << lowered.str();
}

TEST(Build, BaselineModeKeepsGenericAccesses) {
  TempDir d;
  fs::copy_file(fs::path(testkit::test_data_dir()) / "a.mx", d.path() / "a.mx");
  fs::copy_file(fs::path(testkit::test_data_dir()) / "b.mx", d.path() / "b.mx");
  ASSERT_EQ(build(d.path() / "a.mx", d.path(), Mode::None).rc, 0);
  ASSERT_EQ(build(d.path() / "b.mx", d.path(), Mode::None).rc, 0);
  Cli r = run(d.path() / "b.unit", d.path());
  EXPECT_EQ(r.out, "10\n1.5\n");
  EXPECT_NE(r.err.find("\n2\t2\t"), std::string::npos) << r.err;
}

TEST(ExitCodes, UserErrors) {
  TempDir d;
  EXPECT_EQ(build(d.write("bad.mx", "let x = 1 +. 2.0\n"), d.path()).rc, kExitUser);
  EXPECT_EQ(build(d.write("syntax.mx", "let = 3\n"), d.path()).rc, kExitUser);
  EXPECT_EQ(build(d.path() / "missing.mx", d.path()).rc, kExitUser);
  EXPECT_EQ(build(d.write("imports.mx", "let x = Nowhere.y\n"), d.path()).rc, kExitUser);
  d.write("iface.mxi", "val f : int -> float\n");
  EXPECT_EQ(build(d.write("iface.mx", "let f x = x + 1\n"), d.path()).rc, kExitUser);
  d.write("stale.unit", "(unit-artifact mlspec-unit-0 (iface) (impl (unit Stale)) (meta))\n");
  EXPECT_EQ(run(d.path() / "stale.unit", d.path()).rc, kExitUser);
}

TEST(ExitCodes, RuntimeErrors) {
  TempDir d;
  ASSERT_EQ(build(d.write("oob.mx", "let a = [| 1 |]\nlet main = print_int a.(3)\n"), d.path()).rc, 0);
  Cli r = run(d.path() / "oob.unit", d.path());
  EXPECT_EQ(r.rc, kExitRuntime);
  EXPECT_FALSE(r.err.empty());
}

TEST(ExitCodes, InternalErrors) {
  TempDir d;
  // A hand-written artifact whose specialized access contradicts the data.
  d.write("evil.unit",
          "(unit-artifact mlspec-unit-1 (iface) (impl (unit Evil (def main (aget int (alit float 1.5) 0)))) (meta))\n");
  EXPECT_EQ(run(d.path() / "evil.unit", d.path()).rc, kExitInternal);
}

TEST(Session, LinkOrdersDependenciesFirst) {
  Session s;
  s.compile_and_add("let x = 1", "A", std::nullopt, {});
  s.compile_and_add("let y = A.x + 1", "B", std::nullopt, {});
  s.compile_and_add("let z = B.y + A.x", "C", std::nullopt, {});
  std::vector<std::string> order;
  for (const auto& u : s.link("C")) order.push_back(u.name);
  ASSERT_EQ(order.size(), 3u);
  EXPECT_EQ(order.back(), "C");
  EXPECT_LT(std::find(order.begin(), order.end(), "A"), std::find(order.begin(), order.end(), "B"));
}

TEST(Bench, CorpusIsBundled) {
  EXPECT_EQ(bench_names(), (std::vector<std::string>{"simple", "random", "rec_residual"}));
  EXPECT_EQ(with_scale("let scale = 1000\nlet x = scale", 7), "let scale = 7\nlet x = scale");
}

TEST(Bench, DeterministicAndMonotoneAcrossModes) {
  for (const std::string& name : bench_names()) {
    BenchRun none = run_bench(name, 200, Mode::None);
    BenchRun inline_only = run_bench(name, 200, Mode::InlineOnly);
    BenchRun full = run_bench(name, 200, Mode::Full);
    BenchRun again = run_bench(name, 200, Mode::Full);
    EXPECT_EQ(full.output, none.output) << name;
    EXPECT_EQ(full.stats, again.stats) << name;
    EXPECT_LE(full.stats.gen_pct_tenths(), inline_only.stats.gen_pct_tenths()) << name;
    EXPECT_LE(inline_only.stats.gen_pct_tenths(), none.stats.gen_pct_tenths()) << name;
  }
}

TEST(Bench, CountsScaleLinearly) {
  // Access-count formulas: simple 4n, random 4n, rec_residual 5n.
  for (std::int64_t n : {10, 100, 1000}) {
    EXPECT_EQ(run_bench("simple", n, Mode::None).stats.all(), static_cast<std::uint64_t>(4 * n));
    EXPECT_EQ(run_bench("random", n, Mode::None).stats.all(), static_cast<std::uint64_t>(4 * n));
    EXPECT_EQ(run_bench("rec_residual", n, Mode::None).stats.all(), static_cast<std::uint64_t>(5 * n));
  }
}

TEST(Bench, CommandTable) {
  std::ostringstream out, err;
  EXPECT_EQ(cmd_bench("simple", 100, out, err), 0);
  EXPECT_NE(out.str().find("100.0"), std::string::npos) << out.str();
  EXPECT_EQ(cmd_bench("nosuch", 100, out, err), kExitUser);
}

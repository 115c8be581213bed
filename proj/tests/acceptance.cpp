// Acceptance suite: one PASS/FAIL line per criterion.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <regex>
#include <sstream>

#include <unistd.h>

#include "generators.hpp"
#include "harness.hpp"
#include "mlspec/driver.hpp"
#include "mlspec/errors.hpp"
#include "mlspec/typing.hpp"

namespace fs = std::filesystem;
using namespace mlspec;
using driver::Mode;

namespace {

constexpr std::int64_t kScale = 1000;

struct Outcome {
  bool ok = true;
  std::string detail;
};

Outcome fail(std::string why) { return Outcome{false, std::move(why)}; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string pct(const runtime::AccessStats& s) {
  std::uint64_t t = s.gen_pct_tenths();
  return std::to_string(t / 10) + "." + std::to_string(t % 10);
}

// ---- 1-4: bench rows ----

Outcome simple_row() {
  auto t0 = std::chrono::steady_clock::now();
  auto none = driver::run_bench("simple", kScale, Mode::None);
  auto full = driver::run_bench("simple", kScale, Mode::Full);
  double secs = seconds_since(t0);
  // fill_ints and fill_floats write every cell once; sum_ints and sum_floats read every cell once.
  const std::uint64_t expected_all = 4 * kScale;
  std::ostringstream d;
  d << "none " << none.stats.all() << "/" << none.stats.gen() << " (" << pct(none.stats) << "%), full "
    << full.stats.all() << "/" << full.stats.gen() << " (" << pct(full.stats) << "%), " << secs << "s";
  bool ok = none.stats.gen_pct_tenths() == 1000 && full.stats.gen_pct_tenths() == 0 &&
            none.stats.all() == expected_all && full.stats.all() == expected_all &&
            none.stats.gen() == expected_all && none.output == full.output && secs < 2.0;
  return Outcome{ok, d.str()};
}

Outcome random_row() {
  auto t0 = std::chrono::steady_clock::now();
  auto none = driver::run_bench("random", kScale, Mode::None);
  auto full = driver::run_bench("random", kScale, Mode::Full);
  double secs = seconds_since(t0);
  // Per iteration: one read and one write of the LCG state, two polymorphic reads.
  const std::uint64_t expected_all = 4 * kScale;
  std::ostringstream d;
  d << "none " << none.stats.all() << "/" << none.stats.gen() << " (" << pct(none.stats) << "%), full "
    << full.stats.all() << "/" << full.stats.gen() << " (" << pct(full.stats) << "%), " << secs << "s";
  bool ok = none.stats.gen_pct_tenths() == 500 && full.stats.gen_pct_tenths() == 0 &&
            none.stats.all() == expected_all && none.stats.gen() == 2 * kScale && none.output == full.output &&
            secs < 2.0;
  return Outcome{ok, d.str()};
}

Outcome inline_only_baseline() {
  auto r = driver::run_bench("simple", kScale, Mode::InlineOnly);
  return Outcome{r.stats.gen_pct_tenths() == 1000, "inline-only gen% " + pct(r.stats)};
}

Outcome residual_generics() {
  auto none = driver::run_bench("rec_residual", kScale, Mode::None);
  auto full = driver::run_bench("rec_residual", kScale, Mode::Full);
  // fold_left reads small (4 cells) once per iteration; loop reads fa once.
  const std::uint64_t fold_reads = 4 * kScale;
  std::ostringstream d;
  d << "none gen " << none.stats.gen() << ", full gen " << full.stats.gen() << " (" << pct(full.stats) << "%)";
  bool ok = full.stats.gen_pct_tenths() > 0 && none.stats.gen() == fold_reads + kScale &&
            full.stats.gen() == fold_reads && none.output == full.output;
  return Outcome{ok, d.str()};
}

// ---- 5: two-unit program through the CLI commands ----

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t count_matches(const std::string& text, const std::regex& re) {
  return static_cast<std::size_t>(std::distance(std::sregex_iterator(text.begin(), text.end(), re), std::sregex_iterator()));
}

/// Shifts every type-variable id in a stored artifact by `offset`.
void offset_artifact_ids(const fs::path& path, std::uint32_t offset) {
  units::UnitArtifact a = units::load_artifact(path);
  std::set<TyVarId> ids;
  for (auto& [name, s] : a.interface) {
    ids.insert(s.quantified.begin(), s.quantified.end());
    collect_free_vars(s.body, ids);
  }
  for (const auto& b : a.impl.bindings) ir::collect_all_tyvars(b.term, ids);
  if (a.lowered)
    for (const auto& b : a.lowered->bindings) ir::collect_all_tyvars(b.term, ids);
  std::map<TyVarId, TyVarId> ren;
  std::map<TyVarId, Ty> as_types;
  for (TyVarId id : ids) {
    ren[id] = TyVarId{id.value + offset};
    as_types.emplace(id, Ty::var(ren[id]));
  }
  auto rename_schemes = [&](typing::SchemeMap& m) {
    for (auto& [name, s] : m) {
      std::set<TyVarId> q;
      for (TyVarId v : s.quantified) q.insert(ren.at(v));
      s = TypeScheme{q, replace_vars(s.body, as_types)};
    }
  };
  rename_schemes(a.interface);
  rename_schemes(a.impl.exports);
  for (auto& b : a.impl.bindings) b.term = ir::rename_tyvars(b.term, ren);
  if (a.lowered) {
    rename_schemes(a.lowered->exports);
    for (auto& b : a.lowered->bindings) b.term = ir::rename_tyvars(b.term, ren);
  }
  reserve_tyvars_through(TyVarId{offset + 100000});
  units::save_artifact(a, path);
}

struct TwoUnitVariant {
  std::string label;
  std::string mxi;
  std::size_t burn = 0;        // fresh ids consumed between the two builds
  std::uint32_t offset = 0;    // shift applied to a.unit's stored ids
};

Outcome two_unit_variant(const TwoUnitVariant& v, const fs::path& root) {
  fs::path dir = root / v.label;
  fs::remove_all(dir);
  fs::create_directories(dir);
  fs::copy_file(fs::path(testkit::test_data_dir()) / "a.mx", dir / "a.mx");
  fs::copy_file(fs::path(testkit::test_data_dir()) / "b.mx", dir / "b.mx");
  { std::ofstream(dir / "a.mxi") << v.mxi; }

  std::ostringstream out, err;
  driver::BuildCommand build_a{dir / "a.mx", dir, std::nullopt, {}, false};
  if (int rc = driver::cmd_build(build_a, out, err); rc != 0) return fail(v.label + ": build a failed: " + err.str());
  if (v.offset) offset_artifact_ids(dir / "a.unit", v.offset);
  for (std::size_t i = 0; i < v.burn; ++i) fresh_tyvar();
  driver::BuildCommand build_b{dir / "b.mx", dir, std::nullopt, {}, false};
  if (int rc = driver::cmd_build(build_b, out, err); rc != 0) return fail(v.label + ": build b failed: " + err.str());

  std::ostringstream dump;
  if (int rc = driver::cmd_dump_ir(dir / "b.unit", driver::Stage::Optimized, dump, err); rc != 0)
    return fail(v.label + ": dump-ir failed: " + err.str());
  std::string text = dump.str();
  std::size_t tvars = count_matches(text, std::regex(R"(\btvar\b)"));
  std::size_t gens = count_matches(text, std::regex(R"(\bgen\b)"));
  std::size_t ints = count_matches(text, std::regex(R"(\(aget int\b)"));
  std::size_t floats = count_matches(text, std::regex(R"(\(aget float\b)"));

  driver::RunCommand run{dir / "b.unit", dir, runtime::StatsFormat::Tsv};
  std::ostringstream run_out, run_err;
  int rc = driver::cmd_run(run, run_out, run_err);

  if (tvars || gens || ints != 1 || floats != 1 || rc != 0 || run_out.str() != "10\n1.5\n") {
    std::ostringstream d;
    d << v.label << ": tvar " << tvars << ", gen " << gens << ", aget int " << ints << ", aget float " << floats
      << ", run rc " << rc;
    return fail(d.str());
  }
  return Outcome{true, v.label};
}

Outcome cross_module() {
  fs::path root = fs::temp_directory_path() / ("mlspec_acceptance_" + std::to_string(::getpid()));
  std::vector<TwoUnitVariant> variants = {
      {"plain", "val get0 : 'a array -> 'a\n"},
      {"renamed-var", "val get0 : 'zz array -> 'zz\n"},
      {"burned-ids", "val get0 : 'a array -> 'a\n", 977},
      {"offset-artifact", "val get0 : 'b array -> 'b\n", 13, 50000},
  };
  std::string labels;
  for (const auto& v : variants) {
    Outcome o = two_unit_variant(v, root);
    if (!o.ok) {
      fs::remove_all(root);
      return o;
    }
    labels += (labels.empty() ? "" : ", ") + o.detail;
  }
  fs::remove_all(root);
  return Outcome{true, "variants: " + labels};
}

// ---- 6: differential testing ----

Outcome differential() {
  auto t0 = std::chrono::steady_clock::now();
  const std::uint64_t programs = 240;
  std::uint64_t accesses = 0, specialized_away = 0;
  for (std::uint64_t seed = 1; seed <= programs; ++seed) {
    auto p = testkit::random_program(seed);
    testkit::ProgramRun none, full;
    try {
      none = testkit::run_generated(p, Mode::None);
      full = testkit::run_generated(p, Mode::Full);
    } catch (const KindSoundnessViolation& e) {
      return fail("seed " + std::to_string(seed) + ": kind soundness violation: " + e.what());
    } catch (const std::exception& e) {
      return fail("seed " + std::to_string(seed) + ": " + e.what());
    }
    if (none.output != full.output) return fail("seed " + std::to_string(seed) + ": outputs differ");
    if (none.stats.all() != full.stats.all()) return fail("seed " + std::to_string(seed) + ": access counts differ");
    accesses += none.stats.all();
    specialized_away += none.stats.gen() - full.stats.gen();
  }
  double secs = seconds_since(t0);
  std::ostringstream d;
  d << programs << " programs, " << accesses << " accesses, " << specialized_away << " generic accesses specialized, "
    << secs << "s";
  return Outcome{secs < 60.0, d.str()};
}

// ---- 7, 8: algebra ----

Outcome unification_oracle() {
  testkit::Rng rng(7);
  for (int i = 0; i < 1000; ++i) {
    auto c = testkit::random_scheme_case(rng);
    Ty ground = replace_vars(c.scheme.body, c.grounding);
    auto m = match_scheme(c.scheme, ground);
    if (!(replace_vars(c.scheme.body, m) == ground)) return fail("scheme " + to_string(c.scheme));
  }
  return Outcome{true, "1000 schemes"};
}

Outcome substitution_algebra() {
  testkit::Rng rng(8);
  TyVarId a = fresh_tyvar();
  TyVarId c = fresh_tyvar();
  const ir::ArrayKind ks[] = {ir::ArrayKind::int_(), ir::ArrayKind::float_(), ir::ArrayKind::addr()};
  for (int i = 0; i < 500; ++i) {
    ir::TermPtr t = testkit::random_term(rng, {a}, 4);
    for (const auto& k : ks) {
      ir::TermPtr two_step = ir::subst_kinds(ir::subst_kinds(t, {{a, ir::ArrayKind::tyvar(c)}}), {{c, k}});
      ir::TermPtr one_step = ir::subst_kinds(t, {{a, k}});
      if (!ir::structurally_equal(two_step, one_step)) return fail("term " + ir::print_term(t));
    }
  }
  return Outcome{true, "500 terms x 3 kinds"};
}

// ---- 9: threshold sweep ----

struct CorpusProgram {
  std::string label;
  std::function<std::uint64_t(Mode, const opt::InlinePolicy&)> gen_count;
};

std::uint64_t two_unit_gen(Mode mode, const opt::InlinePolicy& policy) {
  driver::Session s;
  driver::BuildOptions o{mode, policy};
  fs::path data = testkit::test_data_dir();
  s.compile_and_add(slurp(data / "a.mx"), "A", typing::parse_interface(slurp(data / "a.mxi")), o);
  s.compile_and_add(slurp(data / "b.mx"), "B", std::nullopt, o);
  return runtime::eval_program(s.link("B")).stats.gen();
}

Outcome threshold_sweep() {
  std::vector<CorpusProgram> corpus;
  for (const std::string& name : driver::bench_names())
    corpus.push_back({name, [name](Mode m, const opt::InlinePolicy& p) {
                        return driver::run_bench(name, kScale, m, p).stats.gen();
                      }});
  corpus.push_back({"two-unit", two_unit_gen});
  for (std::uint64_t seed = 1001; seed <= 1040; ++seed)
    corpus.push_back({"generated-" + std::to_string(seed), [seed](Mode m, const opt::InlinePolicy& p) {
                        return testkit::run_generated(testkit::random_program(seed), m, p).stats.gen();
                      }});

  const std::size_t thresholds[] = {0, 8, 64, std::numeric_limits<std::size_t>::max()};
  std::size_t strict = 0;
  for (const auto& prog : corpus) {
    std::uint64_t none = prog.gen_count(Mode::None, {});
    std::uint64_t prev = 0;
    for (std::size_t i = 0; i < std::size(thresholds); ++i) {
      opt::InlinePolicy policy;
      policy.threshold = thresholds[i];
      std::uint64_t g = prog.gen_count(Mode::Full, policy);
      if (i == 0 && g != none)
        return fail(prog.label + ": threshold 0 gives " + std::to_string(g) + ", none gives " + std::to_string(none));
      if (i > 0 && g > prev) return fail(prog.label + ": gen rises at threshold " + std::to_string(thresholds[i]));
      if (i > 0 && g < prev) ++strict;
      prev = g;
    }
  }
  return Outcome{true, std::to_string(corpus.size()) + " programs, " + std::to_string(strict) + " strict decreases"};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    Outcome (*run)();
  };
  const Criterion criteria[] = {
      {"1 simple-row", simple_row},
      {"2 random-row", random_row},
      {"3 inline-only-baseline", inline_only_baseline},
      {"4 residual-generics", residual_generics},
      {"5 cross-module", cross_module},
      {"6 differential", differential},
      {"7 unification-oracle", unification_oracle},
      {"8 substitution-algebra", substitution_algebra},
      {"9 threshold-sweep", threshold_sweep},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = fail(std::string("exception: ") + e.what());
    }
    std::cout << (o.ok ? "PASS " : "FAIL ") << c.name << ": " << o.detail << std::endl;
    if (!o.ok) ++failures;
  }
  return failures == 0 ? 0 : 1;
}

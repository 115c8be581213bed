#include <gtest/gtest.h>

#include "generators.hpp"
#include "harness.hpp"
#include "mlspec/driver.hpp"
#include "mlspec/lowering.hpp"
#include "mlspec/opt.hpp"

using namespace mlspec;
using driver::Mode;

namespace {

struct Built {
  std::string text;  // printed impl
  opt::InlineReport report;
  runtime::EvalResult result;
};

Built build(const std::string& source, Mode mode = Mode::Full, opt::InlinePolicy policy = {}) {
  driver::Session s;
  driver::BuildOptions o{mode, policy};
  driver::BuildResult r = s.compile(source, "M", std::nullopt, o);
  s.add(r.artifact);
  Built b{ir::print_ir(r.artifact.impl), r.report, runtime::eval_program(s.link("M"))};
  return b;
}

bool has_site(const opt::InlineReport& r, const std::string& callee, bool inlined, const std::string& reason = {}) {
  for (const auto& s : r.sites)
    if (s.callee == callee && s.inlined == inlined && (inlined || s.reason == reason)) return true;
  return false;
}

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = text.find(needle); p != std::string::npos; p = text.find(needle, p + 1)) ++n;
  return n;
}

}  // namespace

TEST(Inline, SpecializesPolymorphicAccessors) {
  Built b = build("let get0 a = a.(0)\nlet x = get0 [| 1 |]\nlet y = get0 [| 2.5 |]\nlet main = print_int x");
  EXPECT_TRUE(has_site(b.report, "M.get0", true));
  EXPECT_EQ(count(b.text, "(aget int"), 1u);
  EXPECT_EQ(count(b.text, "(aget float"), 1u);
  EXPECT_EQ(b.result.output, "1");
  EXPECT_EQ(b.result.stats.gen(), 0u);
}

TEST(Inline, TransitiveChainsSpecializeInOnePass) {
  Built b = build("let get0 a = a.(0)\nlet first a = get0 a\nlet second a = first a\nlet x = second [| 1.5 |]");
  EXPECT_NE(b.text.find("(def x (let a#"), std::string::npos) << b.text;
  EXPECT_EQ(count(b.text, "(def x") , 1u);
  EXPECT_EQ(b.result.stats.gen(), 0u);
  EXPECT_EQ(b.result.stats.spec_float(), 1u);
}

TEST(Inline, RefusesRecursiveFunctions) {
  Built b = build(
      "let rec count a i n = if i < Array.length a then count a (i + 1) (if a.(i) = a.(0) then n + 1 else n) else n\n"
      "let s = count [| 1; 2; 1 |] 0 0");
  EXPECT_TRUE(has_site(b.report, "M.count", false, "recursive"));
  EXPECT_EQ(b.result.stats.gen(), 6u);
  // The call keeps its specialization even though nothing consumes it.
  EXPECT_NE(b.text.find("(spec (gvar M count)"), std::string::npos);
}

TEST(Inline, RespectsThreshold) {
  opt::InlinePolicy small;
  small.threshold = 2;
  Built b = build("let get0 a = a.(0)\nlet x = get0 [| 1 |]", Mode::Full, small);
  EXPECT_TRUE(has_site(b.report, "M.get0", false, "too-big"));
  EXPECT_EQ(b.result.stats.gen(), 1u);
}

TEST(Inline, RefusesPartialApplications) {
  Built b = build("let set a i x = a.(i) <- x\nlet arr = [| 1 |]\nlet s = set arr 0\nlet main = s 5");
  EXPECT_TRUE(has_site(b.report, "M.set", false, "higher-order"));
  EXPECT_EQ(b.result.stats.gen(), 1u);
}

TEST(Inline, RefusesUnknownHeads) {
  Built b = build("let apply f x = f x\nlet y = apply (fun z -> z + 1) 2");
  bool refused = false;
  for (const auto& site : b.report.sites) refused = refused || (!site.inlined && site.reason == "unknown-head");
  EXPECT_TRUE(refused) << b.report.to_text();
  EXPECT_TRUE(has_site(b.report, "M.apply", true));
}

TEST(Inline, OverApplicationKeepsExtraArguments) {
  Built b = build("let k x = fun y -> x + y\nlet main = print_int (k 1 2)");
  EXPECT_EQ(b.result.output, "3");
}

TEST(Inline, AvoidsCapture) {
  Built b = build(
      "let f x = let y = x + 1 in y * 10\n"
      "let g y = f y + y\n"
      "let main = print_int (g 4)");
  EXPECT_EQ(b.result.output, "54");
}

TEST(Inline, PolymorphicArgumentsReachInlinedBodies) {
  // The argument is itself a specialized polymorphic function.
  Built b = build(
      "let get0 a = a.(0)\nlet apply f x = f x\nlet v = apply get0 [| 0.5 |]\nlet main = print_float v");
  EXPECT_EQ(b.result.output, "0.5");
  EXPECT_EQ(b.result.stats.gen(), 0u);
}

TEST(Modes, InlineOnlySpecializesNothing) {
  Built b = build("let get0 a = a.(0)\nlet x = get0 [| 1 |]", Mode::InlineOnly);
  EXPECT_TRUE(has_site(b.report, "M.get0", true));
  EXPECT_EQ(b.text.find("(aget (tvar"), std::string::npos);
  EXPECT_EQ(b.text.find("(spec"), std::string::npos);
  EXPECT_EQ(count(b.text, "(aget gen"), 2u);
}

TEST(Modes, NoneErasesKinds) {
  Built b = build("let get0 a = a.(0)\nlet x = get0 [| 1 |]\nlet y = [| 1.5 |].(0)", Mode::None);
  EXPECT_TRUE(b.report.sites.empty());
  EXPECT_EQ(b.text.find("(aget (tvar"), std::string::npos);
  EXPECT_EQ(b.text.find("(spec"), std::string::npos);
  EXPECT_NE(b.text.find("(aget float"), std::string::npos);
}

TEST(Cleanup, PropagatesTrivialLets) {
  ir::TermPtr t = ir::parse_term("(let a x (let b 3 (aget int a b)))");
  EXPECT_EQ(ir::print_term(opt::beta_cleanup(t)), "(aget int x 3)");
}

TEST(Cleanup, ComposesSpecializations) {
  ir::TermPtr t = ir::parse_term("(let f (spec (gvar A g) ((1 (tvar 5)))) (app (spec f ((5 float))) y))");
  EXPECT_EQ(ir::print_term(opt::beta_cleanup(t)), "(app (spec (gvar A g) ((1 float))) y)");
}

TEST(Cleanup, KeepsEffectsAndDropsDeadPureLets) {
  ir::TermPtr effect = ir::parse_term("(let u (aset int a 0 1) 5)");
  EXPECT_EQ(ir::print_term(opt::beta_cleanup(effect)), ir::print_term(effect));
  ir::TermPtr dead = ir::parse_term("(let u (fun (z) z) 5)");
  EXPECT_EQ(ir::print_term(opt::beta_cleanup(dead)), "5");
}

TEST(Cleanup, RespectsShadowing) {
  ir::TermPtr t = ir::parse_term("(let a x (fun (x) (app a x)))");
  EXPECT_EQ(ir::print_term(opt::beta_cleanup(t)), ir::print_term(t));
}

TEST(Cleanup, IsIdempotent) {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    auto p = testkit::random_program(seed);
    driver::Session s;
    s.compile_and_add(p.lib_source, "Lib", std::nullopt, {});
    const auto& main = s.compile_and_add(p.main_source, "Main", std::nullopt, {});
    for (const auto* u : {&main.impl, &*main.lowered}) {
      ir::IrUnit once = opt::beta_cleanup(*u);
      EXPECT_TRUE(ir::structurally_equal(opt::beta_cleanup(once), once)) << seed;
    }
  }
}

TEST(InlineProperties, PreservesSemanticsAndNeverAddsGenerics) {
  const std::size_t thresholds[] = {0, 4, 8, 16, 64, std::numeric_limits<std::size_t>::max()};
  for (std::uint64_t seed = 300; seed < 360; ++seed) {
    auto p = testkit::random_program(seed);
    testkit::ProgramRun none = testkit::run_generated(p, Mode::None);
    testkit::ProgramRun inline_only = testkit::run_generated(p, Mode::InlineOnly);
    EXPECT_EQ(inline_only.output, none.output) << seed;
    EXPECT_EQ(inline_only.stats.all(), none.stats.all()) << seed;
    EXPECT_EQ(inline_only.stats.gen(), none.stats.gen()) << seed;
    for (std::size_t t : thresholds) {
      opt::InlinePolicy policy;
      policy.threshold = t;
      testkit::ProgramRun full = testkit::run_generated(p, Mode::Full, policy);
      EXPECT_EQ(full.output, none.output) << seed << " threshold " << t;
      EXPECT_EQ(full.stats.all(), none.stats.all()) << seed << " threshold " << t;
      EXPECT_LE(full.stats.gen(), none.stats.gen()) << seed << " threshold " << t;
    }
  }
}

TEST(InlineProperties, ResidualTyVarsOnlyUnderUninlinedHeads) {
  // After a full pass over Main, every remaining tvar kind sits inside a
  // local function body or a Specialized map of a call that was refused.
  for (std::uint64_t seed = 400; seed < 430; ++seed) {
    auto p = testkit::random_program(seed);
    driver::Session s;
    s.compile_and_add(p.lib_source, "Lib", std::nullopt, {});
    const auto& main = s.compile_and_add(p.main_source, "Main", std::nullopt, {});
    for (const auto& b : main.impl.bindings) {
      std::function<void(const ir::TermPtr&, bool)> walk = [&](const ir::TermPtr& t, bool under_fun) {
        if (t->as<ir::Fun>()) under_fun = true;
        if (const auto* g = t->as<ir::ArrayGet>(); g && g->kind.is_tyvar()) EXPECT_TRUE(under_fun) << seed;
        if (const auto* sp = t->as<ir::Specialized>()) {
          bool tyvar_range = false;
          for (const auto& [k, v] : sp->map) tyvar_range = tyvar_range || v.is_tyvar();
          EXPECT_TRUE(!tyvar_range || under_fun) << seed;
        }
        ir::for_each_child(*t, [&](const ir::TermPtr& c) { walk(c, under_fun); });
      };
      walk(b.term, false);
    }
  }
}

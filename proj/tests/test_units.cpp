#include <gtest/gtest.h>

#include "generators.hpp"
#include "mlspec/driver.hpp"
#include "mlspec/lowering.hpp"
#include "mlspec/surface.hpp"
#include "mlspec/units.hpp"

using namespace mlspec;
using namespace mlspec::units;

namespace {

struct Compiled {
  typing::SchemeMap inferred;
  ir::IrUnit lowered;
};

Compiled compile(const std::string& source, const std::string& name) {
  typing::TypedUnit tu = typing::infer_unit(surface::parse_unit(source, name), {});
  return Compiled{tu.exported, lowering::lower_unit(tu)};
}

std::set<TyVarId> kind_ids(const ir::TermPtr& t) {
  std::set<TyVarId> out;
  ir::collect_all_tyvars(t, out);
  return out;
}

}  // namespace

TEST(Emit, AdjustsToInterfaceIds) {
  Compiled a = compile("let get0 a = a.(0)", "A");
  typing::SchemeMap iface = typing::parse_interface("val get0 : 'x array -> 'x");
  TyVarId declared = *iface.at("get0").quantified.begin();
  UnitArtifact art = emit_artifact(iface, a.inferred, a.lowered, &a.lowered);
  EXPECT_EQ(kind_ids(art.impl.find("get0")->term), std::set<TyVarId>{declared});
  EXPECT_EQ(kind_ids(art.lowered->find("get0")->term), std::set<TyVarId>{declared});
  EXPECT_EQ(art.impl.exports.at("get0").quantified, iface.at("get0").quantified);
}

TEST(Emit, MoreSpecificInterfaceFixesTheKind) {
  Compiled a = compile("let get0 a = a.(0)", "A");
  UnitArtifact art = emit_artifact(typing::parse_interface("val get0 : float array -> float"), a.inferred, a.lowered);
  EXPECT_EQ(ir::print_term(art.impl.find("get0")->term), "(fun (a) (aget float a 0))");
}

TEST(Emit, SelfSpecializationsAreRekeyed) {
  Compiled a = compile("let get0 a = a.(0)\nlet first a = get0 a", "A");
  typing::SchemeMap iface = typing::parse_interface("val get0 : 'p array -> 'p\nval first : 'q array -> 'q");
  UnitArtifact art = emit_artifact(iface, a.inferred, a.lowered);
  std::string p = std::to_string(iface.at("get0").quantified.begin()->value);
  std::string q = std::to_string(iface.at("first").quantified.begin()->value);
  EXPECT_EQ(ir::print_term(art.impl.find("first")->term),
            "(fun (a) (app (spec (gvar A get0) ((" + p + " (tvar " + q + ")))) a))");
}

TEST(Emit, WithoutInterfaceExportsInferredSchemes) {
  Compiled a = compile("let get0 a = a.(0)\nlet n = 3", "A");
  UnitArtifact art = emit_artifact(std::nullopt, a.inferred, a.lowered);
  EXPECT_EQ(art.interface.size(), 2u);
  EXPECT_TRUE(alpha_equivalent(art.interface.at("get0"), a.inferred.at("get0")));
}

TEST(Emit, RejectsMissingAndMismatchedNames) {
  Compiled a = compile("let get0 a = a.(0)", "A");
  EXPECT_THROW(emit_artifact(typing::parse_interface("val nope : int"), a.inferred, a.lowered), CompileError);
  EXPECT_THROW(emit_artifact(typing::parse_interface("val get0 : 'a -> 'a"), a.inferred, a.lowered), CompileError);
  EXPECT_THROW(emit_artifact(typing::parse_interface("val get0 : 'a array -> 'b"), a.inferred, a.lowered),
               CompileError);
}

TEST(Artifact, RoundTripsThroughText) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto p = testkit::random_program(seed);
    driver::Session s;
    const UnitArtifact& lib = s.compile_and_add(p.lib_source, "Lib", std::nullopt, {});
    const UnitArtifact& main = s.compile_and_add(p.main_source, "Main", std::nullopt, {});
    for (const UnitArtifact* a : {&lib, &main}) {
      std::string text = write_artifact(*a);
      UnitArtifact back = read_artifact(text);
      EXPECT_TRUE(structurally_equal(back, *a)) << text;
      EXPECT_EQ(write_artifact(back), text);
    }
  }
}

TEST(Artifact, RejectsStaleVersionAndDanglingInterface) {
  EXPECT_THROW(read_artifact("(unit-artifact mlspec-unit-0 (iface) (impl (unit A)) (meta))"), ArtifactError);
  EXPECT_THROW(read_artifact("(unit-artifact mlspec-unit-1 (iface (val x (forall () int))) (impl (unit A)) (meta))"),
               ArtifactError);
  EXPECT_THROW(read_artifact("(unit-artifact"), ArtifactError);
}

TEST(Artifact, MetadataComesFromLoweredBodies) {
  Compiled a = compile("let rec loop i = if i > 0 then loop (i - 1)\nlet get0 a = a.(0)", "A");
  UnitArtifact art = emit_artifact(std::nullopt, a.inferred, a.lowered, &a.lowered);
  ASSERT_NE(art.find_meta("loop"), nullptr);
  EXPECT_TRUE(art.find_meta("loop")->recursive);
  EXPECT_FALSE(art.find_meta("get0")->recursive);
  EXPECT_EQ(art.find_meta("get0")->size, ir::term_size(a.lowered.find("get0")->term));
}

TEST(Import, RenamesIntoFreshIdsAndIsIdempotent) {
  Compiled a = compile("let get0 a = a.(0)\nlet pair x y = (x, y)", "A");
  UnitArtifact art = emit_artifact(std::nullopt, a.inferred, a.lowered);
  RenamingTable table;
  TyVarId watermark = fresh_tyvar();
  typing::SchemeMap first = import_interface(art, table);
  typing::SchemeMap second = import_interface(art, table);
  for (const auto& [name, s] : first) {
    EXPECT_TRUE(alpha_equivalent(s, art.interface.at(name)));
    EXPECT_EQ(s.quantified, second.at(name).quantified);
    for (TyVarId q : s.quantified) EXPECT_GT(q, watermark);
  }
  // A bijection from artifact ids onto distinct session ids.
  const auto* ren = table.renaming_for("A");
  ASSERT_NE(ren, nullptr);
  std::set<TyVarId> targets;
  for (const auto& [from, to] : *ren) targets.insert(to);
  EXPECT_EQ(targets.size(), ren->size());
  for (const auto& [name, s] : art.interface)
    for (TyVarId q : s.quantified) EXPECT_TRUE(ren->contains(q));
}

TEST(Import, FetchedBodiesUseSessionIds) {
  Compiled a = compile("let get0 a = a.(0)", "A");
  UnitArtifact art = emit_artifact(std::nullopt, a.inferred, a.lowered);
  RenamingTable table;
  typing::SchemeMap imported = import_interface(art, table);
  ir::TermPtr body = fetch_body_for_inlining(art, "get0", table);
  EXPECT_EQ(kind_ids(body), imported.at("get0").quantified);
}

TEST(Import, EndToEndCoherence) {
  // a defines get0; b uses it at int and float: after specialization nothing generic is left.
  Compiled a = compile("let get0 a = a.(0)", "A");
  UnitArtifact art = emit_artifact(typing::parse_interface("val get0 : 'a array -> 'a"), a.inferred, a.lowered);
  RenamingTable table;
  typing::SchemeMap imported = import_interface(art, table);
  TyVarId q = *imported.at("get0").quantified.begin();
  ir::TermPtr body = fetch_body_for_inlining(art, "get0", table);
  for (const ir::ArrayKind& k : {ir::ArrayKind::int_(), ir::ArrayKind::float_()})
    EXPECT_TRUE(ir::free_kind_tvars(ir::subst_kinds(body, {{q, k}})).empty());
}

TEST(Import, SessionsAgreeOnDeepChains) {
  // C inlines B.wrap, whose body specializes A.get0 with B's ids.
  driver::Session s;
  s.compile_and_add("let get0 a = a.(0)", "A", typing::parse_interface("val get0 : 'a array -> 'a"), {});
  s.compile_and_add("let wrap a = A.get0 a", "B", typing::parse_interface("val wrap : 'b array -> 'b"), {});
  const UnitArtifact& c = s.compile_and_add("let x = B.wrap [| 2.5 |]", "C", std::nullopt, {});
  std::string text = ir::print_term(c.impl.find("x")->term);
  EXPECT_NE(text.find("(aget float"), std::string::npos) << text;
  EXPECT_EQ(text.find("tvar"), std::string::npos) << text;
}

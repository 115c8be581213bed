#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "mlspec/types.hpp"

namespace mlspec::sexpr {
struct Sexp;
}

namespace mlspec::ir {

/// Partial type annotation on array primitives: which memory representation
/// the access may assume.
class ArrayKind {
 public:
  enum class Tag : std::uint8_t { TyVar, Int, Float, Addr, Generic };

  static ArrayKind tyvar(TyVarId id) { return ArrayKind(Tag::TyVar, id); }
  static ArrayKind int_() { return ArrayKind(Tag::Int, {}); }
  static ArrayKind float_() { return ArrayKind(Tag::Float, {}); }
  static ArrayKind addr() { return ArrayKind(Tag::Addr, {}); }
  static ArrayKind generic() { return ArrayKind(Tag::Generic, {}); }

  Tag tag() const { return tag_; }
  TyVarId tyvar_id() const { return id_; }
  bool is_tyvar() const { return tag_ == Tag::TyVar; }
  /// TyVar and Generic both dispatch at runtime.
  bool is_generic() const { return tag_ == Tag::TyVar || tag_ == Tag::Generic; }

  friend bool operator==(const ArrayKind&, const ArrayKind&) = default;

 private:
  ArrayKind(Tag tag, TyVarId id) : tag_(tag), id_(id) {}
  Tag tag_;
  TyVarId id_;
};

/// Type-application payload; std::map keeps ascending key order.
using KindMap = std::map<TyVarId, ArrayKind>;

/// int, bool, unit -> Int; float -> Float; 'a -> TyVar; anything boxed -> Addr.
ArrayKind kind_of_type(const Ty& elem);

enum class PrimOp : std::uint8_t {
  AddI, SubI, MulI, DivI, ModI,
  AddF, SubF, MulF, DivF,
  Eq, Lt, Gt, Le, Ge,
  PrintInt, PrintFloat, Newline, FloatOfInt, IntOfFloat,
};

std::string_view prim_name(PrimOp op);
std::size_t prim_arity(PrimOp op);

struct Term;
using TermPtr = std::shared_ptr<const Term>;

struct Const {
  std::variant<std::int64_t, double, bool, std::monostate> value;
};
struct Var { std::string name; };
struct GlobalVar { std::string unit; std::string name; };
struct Fun { std::vector<std::string> params; TermPtr body; };
struct App { TermPtr fn; std::vector<TermPtr> args; };
struct Let { bool recursive = false; std::string name; TermPtr bound; TermPtr body; };
struct If { TermPtr cond; TermPtr then_branch; TermPtr else_branch; };
struct Prim { PrimOp op; std::vector<TermPtr> args; };
struct ArrayGet { ArrayKind kind; TermPtr array; TermPtr index; };
struct ArraySet { ArrayKind kind; TermPtr array; TermPtr index; TermPtr value; };
struct ArrayMake { ArrayKind kind; TermPtr length; TermPtr init; };
struct ArrayLit { ArrayKind kind; std::vector<TermPtr> elements; };
struct ArrayLen { TermPtr array; };
struct Tuple { std::vector<TermPtr> elements; };
struct TupleProj { std::size_t index; TermPtr tuple; };
struct Seq { TermPtr first; TermPtr second; };
/// Explicit type application. `inner` is always a Var or GlobalVar.
struct Specialized { TermPtr inner; KindMap map; };

using TermNode = std::variant<Const, Var, GlobalVar, Fun, App, Let, If, Prim, ArrayGet, ArraySet, ArrayMake, ArrayLit,
                              ArrayLen, Tuple, TupleProj, Seq, Specialized>;

struct Term {
  TermNode node;

  template <typename T>
  const T* as() const { return std::get_if<T>(&node); }
};

template <typename T>
TermPtr make(T node) {
  return std::make_shared<const Term>(Term{TermNode{std::move(node)}});
}

TermPtr make_int(std::int64_t v);
TermPtr make_float(double v);
TermPtr make_bool(bool v);
TermPtr make_unit();
TermPtr make_var(std::string name);

/// Returns `inner` unchanged when `map` is empty. Throws InternalError when
/// `inner` is not a variable.
TermPtr make_specialized(TermPtr inner, KindMap map);

struct Binding {
  std::string name;
  TermPtr term;
};

struct IrUnit {
  std::string name;
  std::vector<Binding> bindings;
  std::map<std::string, TypeScheme> exports;

  const Binding* find(const std::string& n) const;
};

// ---- generic traversal ----

/// Calls f on every direct child.
template <typename F>
void for_each_child(const Term& t, F&& f);

/// Rebuilds `t` with every direct child replaced by f(child). Returns the
/// original pointer when no child changed.
template <typename F>
TermPtr map_children(const TermPtr& t, F&& f);

// ---- analyses and rewrites ----

bool structurally_equal(const Term& a, const Term& b);
bool structurally_equal(const TermPtr& a, const TermPtr& b);
bool structurally_equal(const IrUnit& a, const IrUnit& b);

/// Simultaneous replacement of TyVar kinds, including KindMap ranges of
/// nested Specialized nodes. Keys of nested maps are left alone.
TermPtr subst_kinds(const TermPtr& term, const KindMap& map);
IrUnit subst_kinds(const IrUnit& u, const KindMap& map);

/// Consistent renaming of every TyVarId in the term: annotation kinds plus
/// both keys and ranges of Specialized maps. Ids outside `renaming` are kept.
TermPtr rename_tyvars(const TermPtr& term, const std::map<TyVarId, TyVarId>& renaming);

/// Every TyVarId mentioned anywhere in the term, Specialized keys included.
void collect_all_tyvars(const TermPtr& term, std::set<TyVarId>& out);

std::set<TyVarId> free_kind_tvars(const TermPtr& term);
std::set<TyVarId> free_kind_tvars(const IrUnit& u);

std::size_t term_size(const TermPtr& term);

/// Free local variables (Var names not bound inside the term).
std::set<std::string> free_locals(const TermPtr& term);

/// True when `term` references GlobalVar(unit, name).
bool references_global(const TermPtr& term, const std::string& unit, const std::string& name);

/// Names of the other units referenced through GlobalVar.
std::set<std::string> referenced_units(const IrUnit& u);

// ---- textual form ----

std::string print_kind(const ArrayKind& k);
std::string print_term(const TermPtr& t);
std::string print_ir(const IrUnit& u);
IrUnit parse_ir(std::string_view text);
TermPtr parse_term(std::string_view text);
sexpr::Sexp unit_to_sexp(const IrUnit& u);
IrUnit unit_from_sexp(const sexpr::Sexp& s);

}  // namespace mlspec::ir

#include "mlspec/ir_traversal.hpp"

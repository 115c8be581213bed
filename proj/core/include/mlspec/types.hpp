#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

namespace mlspec {

/// Globally unique type-variable identifier. The same id space is shared by
/// type schemes and by the `tvar` array kinds of the IR.
struct TyVarId {
  std::uint32_t value = 0;

  friend auto operator<=>(const TyVarId&, const TyVarId&) = default;
};

/// Allocates a fresh identifier from the process-wide monotone counter.
TyVarId fresh_tyvar();

/// Ensures every later fresh_tyvar() result is strictly greater than `id`.
void reserve_tyvars_through(TyVarId id);

class Ty {
 public:
  enum class Tag : std::uint8_t { Int, Float, Bool, Unit, Var, Array, Arrow, Tuple };

  static Ty int_();
  static Ty float_();
  static Ty bool_();
  static Ty unit();
  static Ty var(TyVarId id);
  static Ty fresh_var() { return var(fresh_tyvar()); }
  static Ty array(Ty elem);
  static Ty arrow(Ty from, Ty to);
  static Ty tuple(std::vector<Ty> elems);

  Tag tag() const { return node_->tag; }
  bool is_var() const { return tag() == Tag::Var; }
  TyVarId var_id() const { return node_->var; }

  // Array: [elem]; Arrow: [from, to]; Tuple: elements.
  const std::vector<Ty>& args() const { return node_->args; }
  const Ty& elem() const { return node_->args[0]; }
  const Ty& from() const { return node_->args[0]; }
  const Ty& to() const { return node_->args[1]; }

  friend bool operator==(const Ty& a, const Ty& b);

 private:
  struct Node {
    Tag tag;
    TyVarId var;
    std::vector<Ty> args;
  };
  explicit Ty(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  static Ty make(Tag tag, TyVarId var, std::vector<Ty> args);

  std::shared_ptr<const Node> node_;
};

/// Implicitly quantified polymorphic type: no binder node, only a side set
/// naming which of the body's variables are generic.
struct TypeScheme {
  std::set<TyVarId> quantified;
  Ty body = Ty::unit();

  static TypeScheme mono(Ty t) { return TypeScheme{{}, std::move(t)}; }
  bool is_polymorphic() const { return !quantified.empty(); }

  friend bool operator==(const TypeScheme&, const TypeScheme&) = default;
};

std::set<TyVarId> free_vars(const Ty& t);
void collect_free_vars(const Ty& t, std::set<TyVarId>& out);
bool occurs_in(TyVarId id, const Ty& t);

/// Simultaneous replacement of type variables (no chasing of chains).
Ty replace_vars(const Ty& t, const std::map<TyVarId, Ty>& mapping);

/// Substitution kept in triangular form; `apply` resolves chains fully.
class Subst {
 public:
  bool empty() const { return bindings_.empty(); }
  std::size_t size() const { return bindings_.size(); }
  const Ty* lookup(TyVarId id) const;
  void bind(TyVarId id, Ty t);
  Ty apply(const Ty& t) const;
  TypeScheme apply(const TypeScheme& s) const;

  /// Fully resolved view of every binding, keyed by variable.
  std::map<TyVarId, Ty> resolved() const;

 private:
  std::unordered_map<std::uint32_t, Ty> bindings_;
};

/// Raised by unify; `reason` is "occurs" or "clash".
struct UnifyError {
  enum class Kind { Occurs, Clash } kind;
  Ty left;
  Ty right;
};

/// Most general unifier extending `subst`. Throws UnifyError.
Subst unify(const Ty& t1, const Ty& t2, Subst subst);

/// Generalizes `t` over the variables not free in `env_free`, or over nothing
/// when the bound expression is not a syntactic value.
TypeScheme generalize(const std::set<TyVarId>& env_free, const Ty& t, bool is_syntactic_value);

struct Instantiation {
  Ty type;
  std::map<TyVarId, TyVarId> renaming;  // quantified -> fresh
};
Instantiation instantiate(const TypeScheme& s);

/// One-directional unification: only `scheme.quantified` may be bound.
/// Returns std::nullopt when `occurrence` is not an instance of the scheme.
std::optional<std::map<TyVarId, Ty>> try_match_scheme(const TypeScheme& scheme, const Ty& occurrence);

/// Like try_match_scheme but a failure is a compiler bug: throws InternalError.
std::map<TyVarId, Ty> match_scheme(const TypeScheme& scheme, const Ty& occurrence);

bool alpha_equivalent(const TypeScheme& a, const TypeScheme& b);

/// Prints with 'a-style names assigned in first-occurrence order.
std::string to_string(const Ty& t);
std::string to_string(const TypeScheme& s);

}  // namespace mlspec

template <>
struct std::hash<mlspec::TyVarId> {
  std::size_t operator()(const mlspec::TyVarId& id) const noexcept { return std::hash<std::uint32_t>{}(id.value); }
};

#include "mlspec/ir.hpp"

#include <cstring>

#include "mlspec/errors.hpp"

namespace mlspec::ir {

ArrayKind kind_of_type(const Ty& elem) {
  switch (elem.tag()) {
    case Ty::Tag::Int:
    case Ty::Tag::Bool:
    case Ty::Tag::Unit:
      return ArrayKind::int_();
    case Ty::Tag::Float:
      return ArrayKind::float_();
    case Ty::Tag::Var:
      return ArrayKind::tyvar(elem.var_id());
    case Ty::Tag::Array:
    case Ty::Tag::Arrow:
    case Ty::Tag::Tuple:
      return ArrayKind::addr();
  }
  return ArrayKind::generic();
}

std::string_view prim_name(PrimOp op) {
  switch (op) {
    case PrimOp::AddI: return "+";
    case PrimOp::SubI: return "-";
    case PrimOp::MulI: return "*";
    case PrimOp::DivI: return "/";
    case PrimOp::ModI: return "mod";
    case PrimOp::AddF: return "+.";
    case PrimOp::SubF: return "-.";
    case PrimOp::MulF: return "*.";
    case PrimOp::DivF: return "/.";
    case PrimOp::Eq: return "=";
    case PrimOp::Lt: return "<";
    case PrimOp::Gt: return ">";
    case PrimOp::Le: return "<=";
    case PrimOp::Ge: return ">=";
    case PrimOp::PrintInt: return "print_int";
    case PrimOp::PrintFloat: return "print_float";
    case PrimOp::Newline: return "newline";
    case PrimOp::FloatOfInt: return "float_of_int";
    case PrimOp::IntOfFloat: return "int_of_float";
  }
  return "?";
}

std::size_t prim_arity(PrimOp op) {
  switch (op) {
    case PrimOp::PrintInt:
    case PrimOp::PrintFloat:
    case PrimOp::Newline:
    case PrimOp::FloatOfInt:
    case PrimOp::IntOfFloat:
      return 1;
    default:
      return 2;
  }
}

TermPtr make_int(std::int64_t v) { return make(Const{v}); }
TermPtr make_float(double v) { return make(Const{v}); }
TermPtr make_bool(bool v) { return make(Const{v}); }
TermPtr make_unit() { return make(Const{std::monostate{}}); }
TermPtr make_var(std::string name) { return make(Var{std::move(name)}); }

TermPtr make_specialized(TermPtr inner, KindMap map) {
  if (!inner->as<Var>() && !inner->as<GlobalVar>())
    throw InternalError("Specialized must wrap a variable, got " + print_term(inner));
  if (map.empty()) return inner;
  return make(Specialized{std::move(inner), std::move(map)});
}

const Binding* IrUnit::find(const std::string& n) const {
  for (const Binding& b : bindings)
    if (b.name == n) return &b;
  return nullptr;
}

namespace {

bool same_const(const Const& a, const Const& b) {
  if (a.value.index() != b.value.index()) return false;
  if (const auto* x = std::get_if<double>(&a.value)) {
    double y = std::get<double>(b.value);
    return std::memcmp(x, &y, sizeof y) == 0;
  }
  return a.value == b.value;
}

bool eq(const std::vector<TermPtr>& a, const std::vector<TermPtr>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!structurally_equal(a[i], b[i])) return false;
  return true;
}

struct EqVisitor {
  static bool e(const TermPtr& a, const TermPtr& b) { return structurally_equal(a, b); }

  bool operator()(const Const& a, const Const& b) const { return same_const(a, b); }
  bool operator()(const Var& a, const Var& b) const { return a.name == b.name; }
  bool operator()(const GlobalVar& a, const GlobalVar& b) const { return a.unit == b.unit && a.name == b.name; }
  bool operator()(const Fun& a, const Fun& b) const { return a.params == b.params && e(a.body, b.body); }
  bool operator()(const App& a, const App& b) const { return e(a.fn, b.fn) && eq(a.args, b.args); }
  bool operator()(const Let& a, const Let& b) const {
    return a.recursive == b.recursive && a.name == b.name && e(a.bound, b.bound) && e(a.body, b.body);
  }
  bool operator()(const If& a, const If& b) const {
    return e(a.cond, b.cond) && e(a.then_branch, b.then_branch) && e(a.else_branch, b.else_branch);
  }
  bool operator()(const Prim& a, const Prim& b) const { return a.op == b.op && eq(a.args, b.args); }
  bool operator()(const ArrayGet& a, const ArrayGet& b) const {
    return a.kind == b.kind && e(a.array, b.array) && e(a.index, b.index);
  }
  bool operator()(const ArraySet& a, const ArraySet& b) const {
    return a.kind == b.kind && e(a.array, b.array) && e(a.index, b.index) && e(a.value, b.value);
  }
  bool operator()(const ArrayMake& a, const ArrayMake& b) const {
    return a.kind == b.kind && e(a.length, b.length) && e(a.init, b.init);
  }
  bool operator()(const ArrayLit& a, const ArrayLit& b) const { return a.kind == b.kind && eq(a.elements, b.elements); }
  bool operator()(const ArrayLen& a, const ArrayLen& b) const { return e(a.array, b.array); }
  bool operator()(const Tuple& a, const Tuple& b) const { return eq(a.elements, b.elements); }
  bool operator()(const TupleProj& a, const TupleProj& b) const { return a.index == b.index && e(a.tuple, b.tuple); }
  bool operator()(const Seq& a, const Seq& b) const { return e(a.first, b.first) && e(a.second, b.second); }
  bool operator()(const Specialized& a, const Specialized& b) const { return a.map == b.map && e(a.inner, b.inner); }
  template <typename A, typename B>
  bool operator()(const A&, const B&) const {
    return false;
  }
};

ArrayKind subst_kind(const ArrayKind& k, const KindMap& map) {
  if (!k.is_tyvar()) return k;
  auto it = map.find(k.tyvar_id());
  return it == map.end() ? k : it->second;
}

template <typename Node>
TermPtr with_kind(const Node& n, ArrayKind k, const TermPtr& rebuilt, const TermPtr& original) {
  if (k == n.kind) return rebuilt;
  Node copy = rebuilt == original ? n : *rebuilt->as<Node>();
  copy.kind = k;
  return make(std::move(copy));
}

void collect_kind_tvars(const TermPtr& t, std::set<TyVarId>& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ArrayGet> || std::is_same_v<T, ArraySet> || std::is_same_v<T, ArrayMake> ||
                      std::is_same_v<T, ArrayLit>) {
          if (n.kind.is_tyvar()) out.insert(n.kind.tyvar_id());
        } else if constexpr (std::is_same_v<T, Specialized>) {
          for (const auto& [key, k] : n.map)
            if (k.is_tyvar()) out.insert(k.tyvar_id());
        }
      },
      t->node);
  for_each_child(*t, [&](const TermPtr& c) { collect_kind_tvars(c, out); });
}

void collect_free_locals(const TermPtr& t, std::set<std::string>& bound, std::set<std::string>& out) {
  if (const auto* v = t->as<Var>()) {
    if (!bound.contains(v->name)) out.insert(v->name);
    return;
  }
  auto with_bound = [&](const std::vector<std::string>& names, const TermPtr& body) {
    std::vector<std::string> added;
    for (const std::string& n : names)
      if (bound.insert(n).second) added.push_back(n);
    collect_free_locals(body, bound, out);
    for (const std::string& n : added) bound.erase(n);
  };
  if (const auto* f = t->as<Fun>()) {
    with_bound(f->params, f->body);
    return;
  }
  if (const auto* l = t->as<Let>()) {
    if (l->recursive)
      with_bound({l->name}, l->bound);
    else
      collect_free_locals(l->bound, bound, out);
    with_bound({l->name}, l->body);
    return;
  }
  for_each_child(*t, [&](const TermPtr& c) { collect_free_locals(c, bound, out); });
}

}  // namespace

bool structurally_equal(const Term& a, const Term& b) { return std::visit(EqVisitor{}, a.node, b.node); }

bool structurally_equal(const TermPtr& a, const TermPtr& b) { return a == b || structurally_equal(*a, *b); }

bool structurally_equal(const IrUnit& a, const IrUnit& b) {
  if (a.name != b.name || a.bindings.size() != b.bindings.size()) return false;
  for (std::size_t i = 0; i < a.bindings.size(); ++i) {
    if (a.bindings[i].name != b.bindings[i].name) return false;
    if (!structurally_equal(a.bindings[i].term, b.bindings[i].term)) return false;
  }
  if (a.exports.size() != b.exports.size()) return false;
  for (const auto& [name, s] : a.exports) {
    auto it = b.exports.find(name);
    if (it == b.exports.end() || !(it->second == s)) return false;
  }
  return true;
}

TermPtr subst_kinds(const TermPtr& term, const KindMap& map) {
  if (map.empty()) return term;
  TermPtr rebuilt = map_children(term, [&](const TermPtr& c) { return subst_kinds(c, map); });
  return std::visit(
      [&](const auto& n) -> TermPtr {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ArrayGet> || std::is_same_v<T, ArraySet> || std::is_same_v<T, ArrayMake> ||
                      std::is_same_v<T, ArrayLit>) {
          return with_kind(n, subst_kind(n.kind, map), rebuilt, term);
        } else if constexpr (std::is_same_v<T, Specialized>) {
          KindMap next;
          bool changed = false;
          for (const auto& [key, k] : n.map) {
            ArrayKind s = subst_kind(k, map);
            changed |= !(s == k);
            next.emplace(key, s);
          }
          if (!changed) return rebuilt;
          const auto& base = rebuilt == term ? n : *rebuilt->as<Specialized>();
          return make(Specialized{base.inner, std::move(next)});
        } else {
          return rebuilt;
        }
      },
      term->node);
}

IrUnit subst_kinds(const IrUnit& u, const KindMap& map) {
  IrUnit out = u;
  for (Binding& b : out.bindings) b.term = subst_kinds(b.term, map);
  return out;
}

TermPtr rename_tyvars(const TermPtr& term, const std::map<TyVarId, TyVarId>& renaming) {
  if (renaming.empty()) return term;
  auto rename = [&](const ArrayKind& k) {
    if (!k.is_tyvar()) return k;
    auto it = renaming.find(k.tyvar_id());
    return it == renaming.end() ? k : ArrayKind::tyvar(it->second);
  };
  TermPtr rebuilt = map_children(term, [&](const TermPtr& c) { return rename_tyvars(c, renaming); });
  return std::visit(
      [&](const auto& n) -> TermPtr {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ArrayGet> || std::is_same_v<T, ArraySet> || std::is_same_v<T, ArrayMake> ||
                      std::is_same_v<T, ArrayLit>) {
          return with_kind(n, rename(n.kind), rebuilt, term);
        } else if constexpr (std::is_same_v<T, Specialized>) {
          KindMap next;
          for (const auto& [key, k] : n.map) {
            auto it = renaming.find(key);
            next.emplace(it == renaming.end() ? key : it->second, rename(k));
          }
          if (next == n.map) return rebuilt;
          const auto& base = rebuilt == term ? n : *rebuilt->as<Specialized>();
          return make(Specialized{base.inner, std::move(next)});
        } else {
          return rebuilt;
        }
      },
      term->node);
}

namespace {
void collect_keys(const TermPtr& term, std::set<TyVarId>& out) {
  if (const auto* sp = term->as<Specialized>())
    for (const auto& [key, k] : sp->map) out.insert(key);
  for_each_child(*term, [&](const TermPtr& c) { collect_keys(c, out); });
}
}  // namespace

void collect_all_tyvars(const TermPtr& term, std::set<TyVarId>& out) {
  collect_kind_tvars(term, out);
  collect_keys(term, out);
}

std::set<TyVarId> free_kind_tvars(const TermPtr& term) {
  std::set<TyVarId> out;
  collect_kind_tvars(term, out);
  return out;
}

std::set<TyVarId> free_kind_tvars(const IrUnit& u) {
  std::set<TyVarId> out;
  for (const Binding& b : u.bindings) collect_kind_tvars(b.term, out);
  return out;
}

std::size_t term_size(const TermPtr& term) {
  std::size_t n = 1;
  for_each_child(*term, [&](const TermPtr& c) { n += term_size(c); });
  return n;
}

std::set<std::string> free_locals(const TermPtr& term) {
  std::set<std::string> bound;
  std::set<std::string> out;
  collect_free_locals(term, bound, out);
  return out;
}

bool references_global(const TermPtr& term, const std::string& unit, const std::string& name) {
  if (const auto* g = term->as<GlobalVar>()) return g->unit == unit && g->name == name;
  bool found = false;
  for_each_child(*term, [&](const TermPtr& c) { found = found || references_global(c, unit, name); });
  return found;
}

namespace {
void collect_units(const TermPtr& t, std::set<std::string>& out) {
  if (const auto* g = t->as<GlobalVar>()) out.insert(g->unit);
  for_each_child(*t, [&](const TermPtr& c) { collect_units(c, out); });
}
}  // namespace

std::set<std::string> referenced_units(const IrUnit& u) {
  std::set<std::string> out;
  for (const Binding& b : u.bindings) collect_units(b.term, out);
  out.erase(u.name);
  return out;
}

}  // namespace mlspec::ir

#include <algorithm>

#include "mlspec/errors.hpp"
#include "mlspec/typing.hpp"

namespace mlspec::typing {

using namespace mlspec::surface;

const std::vector<Builtin>& builtins() {
  static const std::vector<Builtin> table{
      {"Array", "make", 2},   {"Array", "length", 1}, {"", "print_int", 1},    {"", "print_float", 1},
      {"", "newline", 1},     {"", "float_of_int", 1}, {"", "int_of_float", 1},
  };
  return table;
}

TypeScheme builtin_scheme(std::string_view unit, std::string_view name) {
  auto fn = [](Ty a, Ty b) { return Ty::arrow(std::move(a), std::move(b)); };
  if (unit == "Array") {
    TyVarId a = fresh_tyvar();
    if (name == "make") return TypeScheme{{a}, fn(Ty::int_(), fn(Ty::var(a), Ty::array(Ty::var(a))))};
    if (name == "length") return TypeScheme{{a}, fn(Ty::array(Ty::var(a)), Ty::int_())};
  } else if (unit.empty()) {
    if (name == "print_int") return TypeScheme::mono(fn(Ty::int_(), Ty::unit()));
    if (name == "print_float") return TypeScheme::mono(fn(Ty::float_(), Ty::unit()));
    if (name == "newline") return TypeScheme::mono(fn(Ty::unit(), Ty::unit()));
    if (name == "float_of_int") return TypeScheme::mono(fn(Ty::int_(), Ty::float_()));
    if (name == "int_of_float") return TypeScheme::mono(fn(Ty::float_(), Ty::int_()));
  }
  throw InternalError("unknown builtin " + std::string(unit) + "." + std::string(name));
}

namespace {

bool is_builtin(std::string_view unit, std::string_view name) {
  return std::any_of(builtins().begin(), builtins().end(),
                     [&](const Builtin& b) { return b.unit == unit && b.name == name; });
}

class Inferencer {
 public:
  Inferencer(std::string unit_name, const ImportMap& imports) : unit_(std::move(unit_name)), imports_(imports) {}

  TypedUnit run(const SurfaceUnit& u) {
    TypedUnit out{unit_, {}, {}, {}};
    for (const Item& item : u.items) {
      if (const auto* o = std::get_if<Open>(&item.node)) {
        auto it = imports_.find(o->unit);
        if (it == imports_.end()) throw CompileError(item.loc, "unbound unit " + o->unit);
        out.opens.push_back(o->unit);
        for (const auto& [name, scheme] : it->second)
          env_.push_back(Entry{name, VarRef{VarRef::Origin::Global, o->unit, name, scheme}});
        continue;
      }
      const auto& let = std::get<TopLet>(item.node);
      auto [bound, scheme] = infer_binding(item.loc, let.recursive, let.name, let.params, let.bound,
                                           VarRef{VarRef::Origin::Global, unit_, let.name, {}});
      env_.push_back(Entry{let.name, VarRef{VarRef::Origin::Global, unit_, let.name, scheme}});
      out.bindings.push_back(TypedBinding{item.loc, let.recursive, let.name, let.params, std::move(bound), scheme});
    }
    for (TypedBinding& b : out.bindings) {
      finalize(b.bound);
      b.scheme = subst_.apply(b.scheme);
      out.exported.insert_or_assign(b.name, b.scheme);
    }
    return out;
  }

 private:
  struct Entry {
    std::string name;
    VarRef ref;
  };

  [[noreturn]] void clash(Loc loc, const UnifyError& e) const {
    if (e.kind == UnifyError::Kind::Occurs)
      throw CompileError(loc, "occurs check: cannot construct infinite type " + to_string(Ty::tuple({e.left, e.right})));
    throw CompileError(loc, "type clash between " + to_string(e.left) + " and " + to_string(e.right));
  }

  void unify_at(Loc loc, const Ty& a, const Ty& b) {
    try {
      subst_ = unify(a, b, std::move(subst_));
    } catch (const UnifyError& e) {
      clash(loc, e);
    }
  }

  std::set<TyVarId> env_free() const {
    std::set<TyVarId> out;
    for (const Entry& e : env_) {
      if (e.ref.origin == VarRef::Origin::Global && e.ref.unit != unit_) continue;  // imported: closed
      std::set<TyVarId> fv = free_vars(subst_.apply(e.ref.scheme.body));
      for (TyVarId v : fv)
        if (!e.ref.scheme.quantified.contains(v)) out.insert(v);
    }
    return out;
  }

  // Pushes parameter bindings; returns the parameter types in order.
  std::vector<Ty> push_params(const std::vector<Param>& params) {
    std::vector<Ty> types;
    for (const Param& p : params) {
      switch (p.kind) {
        case Param::Kind::Name: {
          Ty t = Ty::fresh_var();
          push_local(p.names[0], t);
          types.push_back(t);
          break;
        }
        case Param::Kind::Unit:
          types.push_back(Ty::unit());
          break;
        case Param::Kind::Tuple: {
          std::vector<Ty> parts;
          for (const std::string& n : p.names) {
            Ty t = Ty::fresh_var();
            push_local(n, t);
            parts.push_back(t);
          }
          types.push_back(Ty::tuple(std::move(parts)));
          break;
        }
      }
    }
    return types;
  }

  static std::size_t param_binding_count(const std::vector<Param>& params) {
    std::size_t n = 0;
    for (const Param& p : params) n += p.names.size();
    return n;
  }

  void push_local(const std::string& name, Ty t) {
    env_.push_back(Entry{name, VarRef{VarRef::Origin::Local, "", name, TypeScheme::mono(std::move(t))}});
  }

  void pop(std::size_t n) { env_.resize(env_.size() - n); }

  TypedExpr infer_lambda(const ExprPtr& source, const std::vector<Param>& params, const ExprPtr& body) {
    std::vector<Ty> ptys = push_params(params);
    TypedExpr tbody = infer(body);
    pop(param_binding_count(params));
    Ty ty = tbody.ty;
    for (auto it = ptys.rbegin(); it != ptys.rend(); ++it) ty = Ty::arrow(*it, ty);
    TypedExpr out{source, ty, {}, std::nullopt, std::nullopt};
    out.children.push_back(std::move(tbody));
    return out;
  }

  // Infers `[rec] name params = bound`; the binding itself is not left in env.
  std::pair<TypedExpr, TypeScheme> infer_binding(Loc loc, bool recursive, const std::string& name,
                                                 const std::vector<Param>& params, const ExprPtr& bound,
                                                 VarRef self) {
    ExprPtr value = params.empty() ? bound : make(loc, Lambda{params, bound});
    if (recursive && !value->as<Lambda>())
      throw CompileError(loc, "the right-hand side of 'let rec' must be a function");
    Ty self_ty = Ty::fresh_var();
    if (recursive) {
      self.scheme = TypeScheme::mono(self_ty);
      env_.push_back(Entry{name, self});
    }
    TypedExpr typed = [&] {
      if (const auto* lam = value->as<Lambda>()) return infer_lambda(value, lam->params, lam->body);
      return infer(value);
    }();
    if (recursive) {
      unify_at(loc, self_ty, typed.ty);
      pop(1);
    }
    TypeScheme scheme = generalize(env_free(), subst_.apply(typed.ty), is_syntactic_value(*value));
    return {std::move(typed), std::move(scheme)};
  }

  const VarRef* lookup(const std::string& name) const {
    for (auto it = env_.rbegin(); it != env_.rend(); ++it)
      if (it->name == name) return &it->ref;
    return nullptr;
  }

  TypedExpr occurrence(const ExprPtr& e, VarRef ref) {
    Ty ty = instantiate(ref.scheme).type;
    return TypedExpr{e, std::move(ty), {}, std::move(ref), std::nullopt};
  }

  TypedExpr infer(const ExprPtr& e) {
    const Loc loc = e->loc;
    auto leaf = [&](Ty t) { return TypedExpr{e, std::move(t), {}, std::nullopt, std::nullopt}; };
    auto node = [&](Ty t, std::vector<TypedExpr> children) {
      return TypedExpr{e, std::move(t), std::move(children), std::nullopt, std::nullopt};
    };

    return std::visit(
        [&](const auto& n) -> TypedExpr {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, IntLit>) {
            return leaf(Ty::int_());
          } else if constexpr (std::is_same_v<T, FloatLit>) {
            return leaf(Ty::float_());
          } else if constexpr (std::is_same_v<T, BoolLit>) {
            return leaf(Ty::bool_());
          } else if constexpr (std::is_same_v<T, UnitLit>) {
            return leaf(Ty::unit());
          } else if constexpr (std::is_same_v<T, Var>) {
            if (const VarRef* ref = lookup(n.name)) return occurrence(e, *ref);
            if (is_builtin("", n.name))
              return occurrence(e, VarRef{VarRef::Origin::Builtin, "", n.name, builtin_scheme("", n.name)});
            throw CompileError(loc, "unbound variable " + n.name);
          } else if constexpr (std::is_same_v<T, QualVar>) {
            if (is_builtin(n.unit, n.name))
              return occurrence(e, VarRef{VarRef::Origin::Builtin, n.unit, n.name, builtin_scheme(n.unit, n.name)});
            auto unit = imports_.find(n.unit);
            if (unit == imports_.end()) throw CompileError(loc, "unbound unit " + n.unit);
            auto it = unit->second.find(n.name);
            if (it == unit->second.end()) throw CompileError(loc, "unbound variable " + n.unit + "." + n.name);
            return occurrence(e, VarRef{VarRef::Origin::Global, n.unit, n.name, it->second});
          } else if constexpr (std::is_same_v<T, Lambda>) {
            return infer_lambda(e, n.params, n.body);
          } else if constexpr (std::is_same_v<T, App>) {
            TypedExpr f = infer(n.fn);
            TypedExpr a = infer(n.arg);
            Ty result = Ty::fresh_var();
            unify_at(n.arg->loc, f.ty, Ty::arrow(a.ty, result));
            return node(result, {std::move(f), std::move(a)});
          } else if constexpr (std::is_same_v<T, Let>) {
            auto [bound, scheme] = infer_binding(loc, n.recursive, n.name, n.params, n.bound,
                                                 VarRef{VarRef::Origin::Local, "", n.name, {}});
            env_.push_back(Entry{n.name, VarRef{VarRef::Origin::Local, "", n.name, scheme}});
            TypedExpr body = infer(n.body);
            pop(1);
            Ty ty = body.ty;
            TypedExpr out = node(ty, {std::move(bound), std::move(body)});
            out.scheme = std::move(scheme);
            return out;
          } else if constexpr (std::is_same_v<T, If>) {
            TypedExpr c = infer(n.cond);
            unify_at(n.cond->loc, c.ty, Ty::bool_());
            TypedExpr t = infer(n.then_branch);
            TypedExpr f = infer(n.else_branch);
            unify_at(n.else_branch->loc, t.ty, f.ty);
            Ty ty = t.ty;
            return node(ty, {std::move(c), std::move(t), std::move(f)});
          } else if constexpr (std::is_same_v<T, Binary>) {
            TypedExpr l = infer(n.lhs);
            TypedExpr r = infer(n.rhs);
            Ty operand = Ty::int_();
            Ty result = Ty::int_();
            switch (n.op) {
              case BinOp::Add: case BinOp::Sub: case BinOp::Mul: case BinOp::Div: case BinOp::Mod:
                operand = result = Ty::int_();
                break;
              case BinOp::FAdd: case BinOp::FSub: case BinOp::FMul: case BinOp::FDiv:
                operand = result = Ty::float_();
                break;
              case BinOp::Eq: case BinOp::Lt: case BinOp::Gt: case BinOp::Le: case BinOp::Ge:
                operand = Ty::fresh_var();
                result = Ty::bool_();
                break;
              case BinOp::And: case BinOp::Or:
                operand = result = Ty::bool_();
                break;
            }
            unify_at(n.lhs->loc, l.ty, operand);
            unify_at(n.rhs->loc, r.ty, operand);
            return node(result, {std::move(l), std::move(r)});
          } else if constexpr (std::is_same_v<T, Get>) {
            TypedExpr a = infer(n.array);
            TypedExpr i = infer(n.index);
            Ty elem = Ty::fresh_var();
            unify_at(n.array->loc, a.ty, Ty::array(elem));
            unify_at(n.index->loc, i.ty, Ty::int_());
            return node(elem, {std::move(a), std::move(i)});
          } else if constexpr (std::is_same_v<T, Set>) {
            TypedExpr a = infer(n.array);
            TypedExpr i = infer(n.index);
            TypedExpr v = infer(n.value);
            unify_at(n.array->loc, a.ty, Ty::array(v.ty));
            unify_at(n.index->loc, i.ty, Ty::int_());
            return node(Ty::unit(), {std::move(a), std::move(i), std::move(v)});
          } else if constexpr (std::is_same_v<T, ArrayLit>) {
            Ty elem = Ty::fresh_var();
            std::vector<TypedExpr> elems;
            for (const ExprPtr& el : n.elements) {
              elems.push_back(infer(el));
              unify_at(el->loc, elems.back().ty, elem);
            }
            return node(Ty::array(elem), std::move(elems));
          } else if constexpr (std::is_same_v<T, Tuple>) {
            std::vector<TypedExpr> elems;
            std::vector<Ty> tys;
            for (const ExprPtr& el : n.elements) {
              elems.push_back(infer(el));
              tys.push_back(elems.back().ty);
            }
            return node(Ty::tuple(std::move(tys)), std::move(elems));
          } else {
            static_assert(std::is_same_v<T, Seq>);
            TypedExpr a = infer(n.first);
            TypedExpr b = infer(n.second);
            Ty ty = b.ty;
            return node(ty, {std::move(a), std::move(b)});
          }
        },
        e->node);
  }

  void finalize(TypedExpr& t) {
    t.ty = subst_.apply(t.ty);
    if (t.var) t.var->scheme = subst_.apply(t.var->scheme);
    if (t.scheme) t.scheme = subst_.apply(*t.scheme);
    for (TypedExpr& c : t.children) finalize(c);
  }

  std::string unit_;
  const ImportMap& imports_;
  std::vector<Entry> env_;
  Subst subst_;
};

}  // namespace

TypedUnit infer_unit(const SurfaceUnit& u, const ImportMap& imports) {
  return Inferencer(u.unit_name, imports).run(u);
}

}  // namespace mlspec::typing

#include "mlspec/lowering.hpp"

#include <set>

#include "mlspec/errors.hpp"

namespace mlspec::lowering {

using typing::TypedExpr;
using typing::VarRef;
namespace s = mlspec::surface;

namespace {

class Lowerer {
 public:
  explicit Lowerer(std::string unit) : unit_(std::move(unit)) {}

  ir::TermPtr binding(const typing::TypedBinding& b) {
    scope_.clear();
    used_.clear();
    return lower(b.bound);
  }

 private:
  std::string fresh(const std::string& base) {
    if (used_.insert(base).second) return base;
    for (std::size_t k = 1;; ++k) {
      std::string candidate = base + "#" + std::to_string(k);
      if (used_.insert(candidate).second) return candidate;
    }
  }

  std::string bind(const std::string& source_name) {
    std::string ir_name = fresh(source_name);
    scope_.emplace_back(source_name, ir_name);
    return ir_name;
  }

  const std::string& resolve(const std::string& source_name) const {
    for (auto it = scope_.rbegin(); it != scope_.rend(); ++it)
      if (it->first == source_name) return it->second;
    throw InternalError("lowering: unbound local " + source_name);
  }

  ir::KindMap kind_map(const TypeScheme& scheme, const Ty& occurrence) const {
    ir::KindMap out;
    if (!scheme.is_polymorphic()) return out;
    auto instantiation = match_scheme(scheme, occurrence);
    for (TyVarId q : scheme.quantified) {
      auto it = instantiation.find(q);
      if (it != instantiation.end()) out.emplace(q, ir::kind_of_type(it->second));
    }
    return out;
  }

  ir::TermPtr occurrence(const TypedExpr& e) {
    const VarRef& ref = *e.var;
    ir::TermPtr head;
    switch (ref.origin) {
      case VarRef::Origin::Builtin:
        return builtin_application(e, {});
      case VarRef::Origin::Local:
        head = ir::make_var(resolve(ref.name));
        break;
      case VarRef::Origin::Global:
        head = ir::make(ir::GlobalVar{ref.unit, ref.name});
        break;
    }
    return ir::make_specialized(std::move(head), kind_map(ref.scheme, e.ty));
  }

  // Builds the primitive for a builtin applied to `args` (possibly partially).
  ir::TermPtr builtin_application(const TypedExpr& head, std::vector<ir::TermPtr> args) {
    const VarRef& ref = *head.var;
    std::size_t arity = 0;
    for (const auto& b : typing::builtins())
      if (b.unit == ref.unit && b.name == ref.name) arity = b.arity;

    std::vector<ir::TermPtr> extra;
    if (args.size() > arity) {
      extra.assign(args.begin() + static_cast<std::ptrdiff_t>(arity), args.end());
      args.resize(arity);
    }

    // Partial application: evaluate the supplied arguments once, then close over them.
    std::vector<std::pair<std::string, ir::TermPtr>> lets;
    std::vector<std::string> params;
    if (args.size() < arity) {
      for (ir::TermPtr& a : args) {
        std::string name = fresh("arg");
        lets.emplace_back(name, a);
        a = ir::make_var(name);
      }
      while (args.size() < arity) {
        params.push_back(fresh("x"));
        args.push_back(ir::make_var(params.back()));
      }
    }

    Ty result = head.ty;
    for (std::size_t i = 0; i < arity; ++i) result = result.to();

    ir::TermPtr prim;
    if (ref.unit == "Array" && ref.name == "make") {
      prim = ir::make(ir::ArrayMake{ir::kind_of_type(result.elem()), args[0], args[1]});
    } else if (ref.unit == "Array" && ref.name == "length") {
      prim = ir::make(ir::ArrayLen{args[0]});
    } else {
      ir::PrimOp op = ref.name == "print_int"      ? ir::PrimOp::PrintInt
                      : ref.name == "print_float"  ? ir::PrimOp::PrintFloat
                      : ref.name == "newline"      ? ir::PrimOp::Newline
                      : ref.name == "float_of_int" ? ir::PrimOp::FloatOfInt
                                                   : ir::PrimOp::IntOfFloat;
      prim = ir::make(ir::Prim{op, std::move(args)});
    }

    if (!params.empty()) prim = ir::make(ir::Fun{std::move(params), prim});
    for (auto it = lets.rbegin(); it != lets.rend(); ++it)
      prim = ir::make(ir::Let{false, it->first, it->second, prim});
    if (!extra.empty()) prim = ir::make(ir::App{prim, std::move(extra)});
    return prim;
  }

  ir::TermPtr lambda(const std::vector<s::Param>& params, const TypedExpr& body) {
    std::size_t scope_mark = scope_.size();
    std::vector<std::string> ir_params;
    std::vector<std::pair<std::string, std::vector<std::string>>> destructure;
    for (const s::Param& p : params) {
      switch (p.kind) {
        case s::Param::Kind::Name:
          ir_params.push_back(bind(p.names[0]));
          break;
        case s::Param::Kind::Unit:
          ir_params.push_back(fresh("unit"));
          break;
        case s::Param::Kind::Tuple: {
          std::string tuple_name = fresh("tup");
          ir_params.push_back(tuple_name);
          std::vector<std::string> parts;
          for (const std::string& n : p.names) parts.push_back(bind(n));
          destructure.emplace_back(tuple_name, std::move(parts));
          break;
        }
      }
    }
    ir::TermPtr out = lower(body);
    for (auto it = destructure.rbegin(); it != destructure.rend(); ++it) {
      for (std::size_t i = it->second.size(); i-- > 0;) {
        out = ir::make(ir::Let{false, it->second[i], ir::make(ir::TupleProj{i, ir::make_var(it->first)}), out});
      }
    }
    scope_.resize(scope_mark);
    return ir::make(ir::Fun{std::move(ir_params), out});
  }

  ir::TermPtr lower(const TypedExpr& e) {
    return std::visit(
        [&](const auto& n) -> ir::TermPtr {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, s::IntLit>) {
            return ir::make_int(n.value);
          } else if constexpr (std::is_same_v<T, s::FloatLit>) {
            return ir::make_float(n.value);
          } else if constexpr (std::is_same_v<T, s::BoolLit>) {
            return ir::make_bool(n.value);
          } else if constexpr (std::is_same_v<T, s::UnitLit>) {
            return ir::make_unit();
          } else if constexpr (std::is_same_v<T, s::Var> || std::is_same_v<T, s::QualVar>) {
            return occurrence(e);
          } else if constexpr (std::is_same_v<T, s::Lambda>) {
            return lambda(n.params, e.children[0]);
          } else if constexpr (std::is_same_v<T, s::App>) {
            std::vector<const TypedExpr*> spine;
            const TypedExpr* head = &e;
            while (head->source->template as<s::App>()) {
              spine.push_back(&head->children[1]);
              head = &head->children[0];
            }
            std::vector<ir::TermPtr> args;
            if (head->var && head->var->origin == VarRef::Origin::Builtin) {
              for (auto it = spine.rbegin(); it != spine.rend(); ++it) args.push_back(lower(**it));
              return builtin_application(*head, std::move(args));
            }
            ir::TermPtr fn = lower(*head);
            for (auto it = spine.rbegin(); it != spine.rend(); ++it) args.push_back(lower(**it));
            return ir::make(ir::App{std::move(fn), std::move(args)});
          } else if constexpr (std::is_same_v<T, s::Let>) {
            std::size_t scope_mark = scope_.size();
            ir::TermPtr bound;
            std::string name;
            if (n.recursive) {
              name = bind(n.name);
              bound = lower(e.children[0]);
            } else {
              bound = lower(e.children[0]);
              name = bind(n.name);
            }
            ir::TermPtr body = lower(e.children[1]);
            scope_.resize(scope_mark);
            return ir::make(ir::Let{n.recursive, std::move(name), std::move(bound), std::move(body)});
          } else if constexpr (std::is_same_v<T, s::If>) {
            return ir::make(ir::If{lower(e.children[0]), lower(e.children[1]), lower(e.children[2])});
          } else if constexpr (std::is_same_v<T, s::Binary>) {
            ir::TermPtr l = lower(e.children[0]);
            ir::TermPtr r = lower(e.children[1]);
            switch (n.op) {
              case s::BinOp::And: return ir::make(ir::If{l, r, ir::make_bool(false)});
              case s::BinOp::Or: return ir::make(ir::If{l, ir::make_bool(true), r});
              default: break;
            }
            static constexpr ir::PrimOp table[] = {
                ir::PrimOp::AddI, ir::PrimOp::SubI, ir::PrimOp::MulI, ir::PrimOp::DivI, ir::PrimOp::ModI,
                ir::PrimOp::AddF, ir::PrimOp::SubF, ir::PrimOp::MulF, ir::PrimOp::DivF, ir::PrimOp::Eq,
                ir::PrimOp::Lt,   ir::PrimOp::Gt,   ir::PrimOp::Le,   ir::PrimOp::Ge,
            };
            return ir::make(ir::Prim{table[static_cast<std::size_t>(n.op)], {l, r}});
          } else if constexpr (std::is_same_v<T, s::Get>) {
            return ir::make(ir::ArrayGet{ir::kind_of_type(e.ty), lower(e.children[0]), lower(e.children[1])});
          } else if constexpr (std::is_same_v<T, s::Set>) {
            return ir::make(ir::ArraySet{ir::kind_of_type(e.children[2].ty), lower(e.children[0]),
                                         lower(e.children[1]), lower(e.children[2])});
          } else if constexpr (std::is_same_v<T, s::ArrayLit>) {
            std::vector<ir::TermPtr> elems;
            for (const TypedExpr& c : e.children) elems.push_back(lower(c));
            return ir::make(ir::ArrayLit{ir::kind_of_type(e.ty.elem()), std::move(elems)});
          } else if constexpr (std::is_same_v<T, s::Tuple>) {
            std::vector<ir::TermPtr> elems;
            for (const TypedExpr& c : e.children) elems.push_back(lower(c));
            return ir::make(ir::Tuple{std::move(elems)});
          } else {
            static_assert(std::is_same_v<T, s::Seq>);
            return ir::make(ir::Seq{lower(e.children[0]), lower(e.children[1])});
          }
        },
        e.source->node);
  }

  std::string unit_;
  std::vector<std::pair<std::string, std::string>> scope_;
  std::set<std::string> used_;
};

void count(const ir::TermPtr& t, GenericCount& out) {
  if (const auto* g = t->as<ir::ArrayGet>()) {
    ++out.total;
    if (g->kind.is_generic()) ++out.generic;
  } else if (const auto* st = t->as<ir::ArraySet>()) {
    ++out.total;
    if (st->kind.is_generic()) ++out.generic;
  }
  ir::for_each_child(*t, [&](const ir::TermPtr& c) { count(c, out); });
}

}  // namespace

ir::IrUnit lower_unit(const typing::TypedUnit& tu) {
  ir::IrUnit out;
  out.name = tu.unit_name;
  out.exports = tu.exported;
  Lowerer lowerer(tu.unit_name);
  for (const typing::TypedBinding& b : tu.bindings) out.bindings.push_back(ir::Binding{b.name, lowerer.binding(b)});
  return out;
}

GenericCount static_generic_count(const ir::TermPtr& t) {
  GenericCount out;
  count(t, out);
  return out;
}

GenericCount static_generic_count(const ir::IrUnit& u) {
  GenericCount out;
  for (const ir::Binding& b : u.bindings) count(b.term, out);
  return out;
}

}  // namespace mlspec::lowering

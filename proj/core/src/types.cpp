#include "mlspec/types.hpp"

#include <atomic>
#include <sstream>

#include "mlspec/errors.hpp"

namespace mlspec {

namespace {
std::atomic<std::uint32_t> next_tyvar{1};
}  // namespace

TyVarId fresh_tyvar() { return TyVarId{next_tyvar.fetch_add(1, std::memory_order_relaxed)}; }

void reserve_tyvars_through(TyVarId id) {
  std::uint32_t current = next_tyvar.load(std::memory_order_relaxed);
  while (current <= id.value &&
         !next_tyvar.compare_exchange_weak(current, id.value + 1, std::memory_order_relaxed)) {
  }
}

std::string to_string(const Loc& loc) {
  return std::to_string(loc.line) + ":" + std::to_string(loc.column);
}

Ty Ty::make(Tag tag, TyVarId var, std::vector<Ty> args) {
  return Ty(std::make_shared<const Node>(Node{tag, var, std::move(args)}));
}

Ty Ty::int_() {
  static const Ty t = make(Tag::Int, {}, {});
  return t;
}
Ty Ty::float_() {
  static const Ty t = make(Tag::Float, {}, {});
  return t;
}
Ty Ty::bool_() {
  static const Ty t = make(Tag::Bool, {}, {});
  return t;
}
Ty Ty::unit() {
  static const Ty t = make(Tag::Unit, {}, {});
  return t;
}
Ty Ty::var(TyVarId id) { return make(Tag::Var, id, {}); }
Ty Ty::array(Ty elem) { return make(Tag::Array, {}, {std::move(elem)}); }
Ty Ty::arrow(Ty from, Ty to) { return make(Tag::Arrow, {}, {std::move(from), std::move(to)}); }
Ty Ty::tuple(std::vector<Ty> elems) { return make(Tag::Tuple, {}, std::move(elems)); }

bool operator==(const Ty& a, const Ty& b) {
  if (a.node_ == b.node_) return true;
  if (a.tag() != b.tag()) return false;
  if (a.tag() == Ty::Tag::Var) return a.var_id() == b.var_id();
  return a.args() == b.args();
}

void collect_free_vars(const Ty& t, std::set<TyVarId>& out) {
  if (t.is_var()) {
    out.insert(t.var_id());
    return;
  }
  for (const Ty& a : t.args()) collect_free_vars(a, out);
}

std::set<TyVarId> free_vars(const Ty& t) {
  std::set<TyVarId> out;
  collect_free_vars(t, out);
  return out;
}

bool occurs_in(TyVarId id, const Ty& t) {
  if (t.is_var()) return t.var_id() == id;
  for (const Ty& a : t.args())
    if (occurs_in(id, a)) return true;
  return false;
}

namespace {

template <typename F>
Ty rebuild(const Ty& t, F&& on_var) {
  switch (t.tag()) {
    case Ty::Tag::Var:
      return on_var(t);
    case Ty::Tag::Array:
      return Ty::array(rebuild(t.elem(), on_var));
    case Ty::Tag::Arrow:
      return Ty::arrow(rebuild(t.from(), on_var), rebuild(t.to(), on_var));
    case Ty::Tag::Tuple: {
      std::vector<Ty> elems;
      elems.reserve(t.args().size());
      for (const Ty& a : t.args()) elems.push_back(rebuild(a, on_var));
      return Ty::tuple(std::move(elems));
    }
    default:
      return t;
  }
}

}  // namespace

Ty replace_vars(const Ty& t, const std::map<TyVarId, Ty>& mapping) {
  if (mapping.empty()) return t;
  return rebuild(t, [&](const Ty& v) {
    auto it = mapping.find(v.var_id());
    return it == mapping.end() ? v : it->second;
  });
}

const Ty* Subst::lookup(TyVarId id) const {
  auto it = bindings_.find(id.value);
  return it == bindings_.end() ? nullptr : &it->second;
}

void Subst::bind(TyVarId id, Ty t) { bindings_.insert_or_assign(id.value, std::move(t)); }

Ty Subst::apply(const Ty& t) const {
  if (bindings_.empty()) return t;
  return rebuild(t, [&](const Ty& v) {
    const Ty* bound = lookup(v.var_id());
    return bound ? apply(*bound) : v;
  });
}

TypeScheme Subst::apply(const TypeScheme& s) const { return TypeScheme{s.quantified, apply(s.body)}; }

std::map<TyVarId, Ty> Subst::resolved() const {
  std::map<TyVarId, Ty> out;
  for (const auto& [id, t] : bindings_) out.emplace(TyVarId{id}, apply(t));
  return out;
}

namespace {

void unify_into(const Ty& t1, const Ty& t2, Subst& s) {
  Ty a = t1.is_var() && s.lookup(t1.var_id()) ? s.apply(t1) : t1;
  Ty b = t2.is_var() && s.lookup(t2.var_id()) ? s.apply(t2) : t2;
  if (a.is_var() && b.is_var() && a.var_id() == b.var_id()) return;
  if (a.is_var() || b.is_var()) {
    const Ty& v = a.is_var() ? a : b;
    const Ty& other = a.is_var() ? b : a;
    Ty resolved = s.apply(other);
    if (occurs_in(v.var_id(), resolved)) throw UnifyError{UnifyError::Kind::Occurs, s.apply(t1), s.apply(t2)};
    s.bind(v.var_id(), std::move(resolved));
    return;
  }
  if (a.tag() != b.tag() || a.args().size() != b.args().size())
    throw UnifyError{UnifyError::Kind::Clash, s.apply(t1), s.apply(t2)};
  for (std::size_t i = 0; i < a.args().size(); ++i) unify_into(a.args()[i], b.args()[i], s);
}

}  // namespace

Subst unify(const Ty& t1, const Ty& t2, Subst subst) {
  unify_into(t1, t2, subst);
  return subst;
}

TypeScheme generalize(const std::set<TyVarId>& env_free, const Ty& t, bool is_syntactic_value) {
  TypeScheme s{{}, t};
  if (!is_syntactic_value) return s;
  for (TyVarId v : free_vars(t))
    if (!env_free.contains(v)) s.quantified.insert(v);
  return s;
}

Instantiation instantiate(const TypeScheme& s) {
  Instantiation inst{s.body, {}};
  if (s.quantified.empty()) return inst;
  std::map<TyVarId, Ty> mapping;
  for (TyVarId q : s.quantified) {
    TyVarId fresh = fresh_tyvar();
    inst.renaming.emplace(q, fresh);
    mapping.emplace(q, Ty::var(fresh));
  }
  inst.type = replace_vars(s.body, mapping);
  return inst;
}

namespace {

bool match_into(const TypeScheme& scheme, const Ty& pattern, const Ty& target, std::map<TyVarId, Ty>& out) {
  if (pattern.is_var()) {
    TyVarId id = pattern.var_id();
    if (!scheme.quantified.contains(id)) return target.is_var() && target.var_id() == id;
    auto [it, inserted] = out.emplace(id, target);
    return inserted || it->second == target;
  }
  if (pattern.tag() != target.tag() || pattern.args().size() != target.args().size()) return false;
  for (std::size_t i = 0; i < pattern.args().size(); ++i)
    if (!match_into(scheme, pattern.args()[i], target.args()[i], out)) return false;
  return true;
}

}  // namespace

std::optional<std::map<TyVarId, Ty>> try_match_scheme(const TypeScheme& scheme, const Ty& occurrence) {
  std::map<TyVarId, Ty> out;
  if (!match_into(scheme, scheme.body, occurrence, out)) return std::nullopt;
  return out;
}

std::map<TyVarId, Ty> match_scheme(const TypeScheme& scheme, const Ty& occurrence) {
  auto m = try_match_scheme(scheme, occurrence);
  if (!m)
    throw InternalError("scheme match failure: " + to_string(occurrence) + " is not an instance of " +
                        to_string(scheme));
  return *m;
}

bool alpha_equivalent(const TypeScheme& a, const TypeScheme& b) {
  if (a.quantified.size() != b.quantified.size()) return false;
  auto forward = try_match_scheme(a, b.body);
  if (!forward) return false;
  std::set<TyVarId> images;
  for (const auto& [q, img] : *forward) {
    if (!img.is_var() || !b.quantified.contains(img.var_id())) return false;
    images.insert(img.var_id());
  }
  return images.size() == forward->size() && forward->size() == a.quantified.size();
}

namespace {

class TyPrinter {
 public:
  std::string name_of(TyVarId id) {
    auto it = names_.find(id);
    if (it != names_.end()) return it->second;
    std::size_t n = names_.size();
    std::string name = "'";
    name += static_cast<char>('a' + n % 26);
    if (n >= 26) name += std::to_string(n / 26);
    names_.emplace(id, name);
    return name;
  }

  // prec: 0 = arrow context, 1 = tuple component, 2 = array element / atom
  void print(std::ostream& os, const Ty& t, int prec) {
    switch (t.tag()) {
      case Ty::Tag::Int: os << "int"; break;
      case Ty::Tag::Float: os << "float"; break;
      case Ty::Tag::Bool: os << "bool"; break;
      case Ty::Tag::Unit: os << "unit"; break;
      case Ty::Tag::Var: os << name_of(t.var_id()); break;
      case Ty::Tag::Array:
        print(os, t.elem(), 2);
        os << " array";
        break;
      case Ty::Tag::Arrow:
        if (prec > 0) os << '(';
        print(os, t.from(), 1);
        os << " -> ";
        print(os, t.to(), 0);
        if (prec > 0) os << ')';
        break;
      case Ty::Tag::Tuple: {
        if (prec > 1) os << '(';
        for (std::size_t i = 0; i < t.args().size(); ++i) {
          if (i) os << " * ";
          print(os, t.args()[i], 2);
        }
        if (prec > 1) os << ')';
        break;
      }
    }
  }

 private:
  std::map<TyVarId, std::string> names_;
};

}  // namespace

std::string to_string(const Ty& t) {
  std::ostringstream os;
  TyPrinter{}.print(os, t, 0);
  return os.str();
}

std::string to_string(const TypeScheme& s) { return to_string(s.body); }

}  // namespace mlspec

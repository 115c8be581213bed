#include <array>
#include <charconv>
#include <cmath>
#include <unordered_map>

#include "mlspec/errors.hpp"
#include "mlspec/ir.hpp"
#include "mlspec/sexpr.hpp"

namespace mlspec::ir {

using sexpr::Sexp;

namespace {

Sexp atom(std::string s) { return Sexp::atom(std::move(s)); }

std::string float_atom(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  std::string s(buf.data(), ptr);
  if (s.find('.') != std::string::npos) return s;
  auto e = s.find('e');
  if (e == std::string::npos) return s + ".";
  return s.insert(e, ".");
}

Sexp kind_to_sexp(const ArrayKind& k) {
  switch (k.tag()) {
    case ArrayKind::Tag::Int: return atom("int");
    case ArrayKind::Tag::Float: return atom("float");
    case ArrayKind::Tag::Addr: return atom("addr");
    case ArrayKind::Tag::Generic: return atom("gen");
    case ArrayKind::Tag::TyVar: return Sexp::list({atom("tvar"), atom(std::to_string(k.tyvar_id().value))});
  }
  return atom("?");
}

Sexp term_to_sexp(const TermPtr& t);

std::vector<Sexp> tagged(std::string head, std::initializer_list<Sexp> rest) {
  std::vector<Sexp> xs{atom(std::move(head))};
  xs.insert(xs.end(), rest.begin(), rest.end());
  return xs;
}

void append_terms(std::vector<Sexp>& xs, const std::vector<TermPtr>& ts) {
  for (const TermPtr& t : ts) xs.push_back(term_to_sexp(t));
}

Sexp term_to_sexp(const TermPtr& t) {
  return std::visit(
      [&](const auto& n) -> Sexp {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Const>) {
          if (const auto* i = std::get_if<std::int64_t>(&n.value)) return atom(std::to_string(*i));
          if (const auto* d = std::get_if<double>(&n.value)) {
            if (std::isfinite(*d)) return atom(float_atom(*d));
            std::string spelled = std::isnan(*d) ? "nan" : (*d > 0 ? "inf" : "-inf");
            return Sexp::list({atom("float"), atom(spelled)});
          }
          if (const auto* b = std::get_if<bool>(&n.value)) return atom(*b ? "true" : "false");
          return Sexp::list();
        } else if constexpr (std::is_same_v<T, Var>) {
          return atom(n.name);
        } else if constexpr (std::is_same_v<T, GlobalVar>) {
          return Sexp::list(tagged("gvar", {atom(n.unit), atom(n.name)}));
        } else if constexpr (std::is_same_v<T, Fun>) {
          std::vector<Sexp> ps;
          for (const std::string& p : n.params) ps.push_back(atom(p));
          return Sexp::list(tagged("fun", {Sexp::list(std::move(ps)), term_to_sexp(n.body)}));
        } else if constexpr (std::is_same_v<T, App>) {
          std::vector<Sexp> xs = tagged("app", {term_to_sexp(n.fn)});
          append_terms(xs, n.args);
          return Sexp::list(std::move(xs));
        } else if constexpr (std::is_same_v<T, Let>) {
          return Sexp::list(
              tagged(n.recursive ? "letrec" : "let", {atom(n.name), term_to_sexp(n.bound), term_to_sexp(n.body)}));
        } else if constexpr (std::is_same_v<T, If>) {
          return Sexp::list(
              tagged("if", {term_to_sexp(n.cond), term_to_sexp(n.then_branch), term_to_sexp(n.else_branch)}));
        } else if constexpr (std::is_same_v<T, Prim>) {
          std::vector<Sexp> xs = tagged("prim", {atom(std::string(prim_name(n.op)))});
          append_terms(xs, n.args);
          return Sexp::list(std::move(xs));
        } else if constexpr (std::is_same_v<T, ArrayGet>) {
          return Sexp::list(tagged("aget", {kind_to_sexp(n.kind), term_to_sexp(n.array), term_to_sexp(n.index)}));
        } else if constexpr (std::is_same_v<T, ArraySet>) {
          return Sexp::list(tagged("aset", {kind_to_sexp(n.kind), term_to_sexp(n.array), term_to_sexp(n.index),
                                            term_to_sexp(n.value)}));
        } else if constexpr (std::is_same_v<T, ArrayMake>) {
          return Sexp::list(tagged("amake", {kind_to_sexp(n.kind), term_to_sexp(n.length), term_to_sexp(n.init)}));
        } else if constexpr (std::is_same_v<T, ArrayLit>) {
          std::vector<Sexp> xs = tagged("alit", {kind_to_sexp(n.kind)});
          append_terms(xs, n.elements);
          return Sexp::list(std::move(xs));
        } else if constexpr (std::is_same_v<T, ArrayLen>) {
          return Sexp::list(tagged("alen", {term_to_sexp(n.array)}));
        } else if constexpr (std::is_same_v<T, Tuple>) {
          std::vector<Sexp> xs = tagged("tuple", {});
          append_terms(xs, n.elements);
          return Sexp::list(std::move(xs));
        } else if constexpr (std::is_same_v<T, TupleProj>) {
          return Sexp::list(tagged("proj", {atom(std::to_string(n.index)), term_to_sexp(n.tuple)}));
        } else if constexpr (std::is_same_v<T, Seq>) {
          return Sexp::list(tagged("seq", {term_to_sexp(n.first), term_to_sexp(n.second)}));
        } else {
          static_assert(std::is_same_v<T, Specialized>);
          std::vector<Sexp> entries;
          for (const auto& [id, k] : n.map)
            entries.push_back(Sexp::list({atom(std::to_string(id.value)), kind_to_sexp(k)}));
          return Sexp::list(tagged("spec", {term_to_sexp(n.inner), Sexp::list(std::move(entries))}));
        }
      },
      t->node);
}

// ---- reading ----

const std::vector<Sexp>& expect_arity(const Sexp& s, std::size_t n) {
  const auto& xs = s.items();
  if (xs.size() != n + 1)
    throw ArtifactError("arity mismatch in (" + xs[0].text() + " ...): expected " + std::to_string(n) +
                        " argument(s), found " + std::to_string(xs.size() - 1));
  return xs;
}

const std::vector<Sexp>& expect_at_least(const Sexp& s, std::size_t n) {
  const auto& xs = s.items();
  if (xs.size() < n + 1)
    throw ArtifactError("arity mismatch in (" + xs[0].text() + " ...): expected at least " + std::to_string(n) +
                        " argument(s)");
  return xs;
}

ArrayKind kind_from_sexp(const Sexp& s) {
  if (s.is_atom()) {
    const std::string& t = s.text();
    if (t == "int") return ArrayKind::int_();
    if (t == "float") return ArrayKind::float_();
    if (t == "addr") return ArrayKind::addr();
    if (t == "gen") return ArrayKind::generic();
    throw ArtifactError("unknown array kind '" + t + "'");
  }
  if (!s.has_head("tvar")) throw ArtifactError("malformed array kind " + sexpr::print(s));
  const auto& xs = expect_arity(s, 1);
  return ArrayKind::tyvar(TyVarId{static_cast<std::uint32_t>(sexpr::parse_uint(xs[1]))});
}

PrimOp prim_from_name(const std::string& name) {
  static const std::unordered_map<std::string, PrimOp> table = [] {
    std::unordered_map<std::string, PrimOp> m;
    for (int i = 0; i <= static_cast<int>(PrimOp::IntOfFloat); ++i) {
      auto op = static_cast<PrimOp>(i);
      m.emplace(std::string(prim_name(op)), op);
    }
    return m;
  }();
  auto it = table.find(name);
  if (it == table.end()) throw ArtifactError("unknown primitive '" + name + "'");
  return it->second;
}

bool looks_numeric(const std::string& t) {
  if (t.empty()) return false;
  std::size_t i = t[0] == '-' ? 1 : 0;
  return i < t.size() && std::isdigit(static_cast<unsigned char>(t[i]));
}

TermPtr term_from_sexp(const Sexp& s);

std::vector<TermPtr> terms_from(const std::vector<Sexp>& xs, std::size_t first) {
  std::vector<TermPtr> out;
  for (std::size_t i = first; i < xs.size(); ++i) out.push_back(term_from_sexp(xs[i]));
  return out;
}

TermPtr atom_term(const std::string& t) {
  if (looks_numeric(t)) {
    if (t.find_first_of(".eE") != std::string::npos) {
      double d = 0;
      auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), d);
      if (ec != std::errc{} || ptr != t.data() + t.size()) throw ArtifactError("malformed float '" + t + "'");
      return make_float(d);
    }
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size()) throw ArtifactError("malformed integer '" + t + "'");
    return make_int(v);
  }
  if (t == "true") return make_bool(true);
  if (t == "false") return make_bool(false);
  return make_var(t);
}

TermPtr term_from_sexp(const Sexp& s) {
  if (s.is_atom()) return atom_term(s.text());
  const auto& xs = s.items();
  if (xs.empty()) return make_unit();
  if (!xs[0].is_atom()) throw ArtifactError("malformed term " + sexpr::print(s));
  const std::string& head = xs[0].text();
  if (head == "float") {
    const std::string& v = expect_arity(s, 1)[1].text();
    if (v == "inf") return make_float(HUGE_VAL);
    if (v == "-inf") return make_float(-HUGE_VAL);
    if (v == "nan") return make_float(std::nan(""));
    throw ArtifactError("malformed float constant " + sexpr::print(s));
  }
  if (head == "gvar") {
    expect_arity(s, 2);
    return make(GlobalVar{xs[1].text(), xs[2].text()});
  }
  if (head == "fun") {
    expect_arity(s, 2);
    std::vector<std::string> params;
    for (const Sexp& p : xs[1].items()) params.push_back(p.text());
    return make(Fun{std::move(params), term_from_sexp(xs[2])});
  }
  if (head == "app") {
    expect_at_least(s, 1);
    return make(App{term_from_sexp(xs[1]), terms_from(xs, 2)});
  }
  if (head == "let" || head == "letrec") {
    expect_arity(s, 3);
    return make(Let{head == "letrec", xs[1].text(), term_from_sexp(xs[2]), term_from_sexp(xs[3])});
  }
  if (head == "if") {
    expect_arity(s, 3);
    return make(If{term_from_sexp(xs[1]), term_from_sexp(xs[2]), term_from_sexp(xs[3])});
  }
  if (head == "prim") {
    expect_at_least(s, 1);
    PrimOp op = prim_from_name(xs[1].text());
    if (xs.size() - 2 != prim_arity(op)) throw ArtifactError("arity mismatch for primitive " + xs[1].text());
    return make(Prim{op, terms_from(xs, 2)});
  }
  if (head == "aget") {
    expect_arity(s, 3);
    return make(ArrayGet{kind_from_sexp(xs[1]), term_from_sexp(xs[2]), term_from_sexp(xs[3])});
  }
  if (head == "aset") {
    expect_arity(s, 4);
    return make(ArraySet{kind_from_sexp(xs[1]), term_from_sexp(xs[2]), term_from_sexp(xs[3]), term_from_sexp(xs[4])});
  }
  if (head == "amake") {
    expect_arity(s, 3);
    return make(ArrayMake{kind_from_sexp(xs[1]), term_from_sexp(xs[2]), term_from_sexp(xs[3])});
  }
  if (head == "alit") {
    expect_at_least(s, 1);
    return make(ArrayLit{kind_from_sexp(xs[1]), terms_from(xs, 2)});
  }
  if (head == "alen") {
    expect_arity(s, 1);
    return make(ArrayLen{term_from_sexp(xs[1])});
  }
  if (head == "tuple") {
    expect_at_least(s, 2);
    return make(Tuple{terms_from(xs, 1)});
  }
  if (head == "proj") {
    expect_arity(s, 2);
    return make(TupleProj{static_cast<std::size_t>(sexpr::parse_uint(xs[1])), term_from_sexp(xs[2])});
  }
  if (head == "seq") {
    expect_arity(s, 2);
    return make(Seq{term_from_sexp(xs[1]), term_from_sexp(xs[2])});
  }
  if (head == "spec") {
    expect_arity(s, 2);
    KindMap map;
    for (const Sexp& entry : xs[2].items()) {
      const auto& kv = entry.items();
      if (kv.size() != 2) throw ArtifactError("malformed kind map entry " + sexpr::print(entry));
      auto id = TyVarId{static_cast<std::uint32_t>(sexpr::parse_uint(kv[0]))};
      if (!map.emplace(id, kind_from_sexp(kv[1])).second) throw ArtifactError("duplicate kind map key");
    }
    if (map.empty()) throw ArtifactError("empty kind map in spec node");
    TermPtr inner = term_from_sexp(xs[1]);
    if (!inner->as<Var>() && !inner->as<GlobalVar>()) throw ArtifactError("spec must wrap a variable");
    return make(Specialized{std::move(inner), std::move(map)});
  }
  throw ArtifactError("unknown head symbol '" + head + "'");
}

}  // namespace

std::string print_kind(const ArrayKind& k) { return sexpr::print(kind_to_sexp(k)); }

std::string print_term(const TermPtr& t) { return sexpr::print(term_to_sexp(t)); }

sexpr::Sexp unit_to_sexp(const IrUnit& u) {
  std::vector<Sexp> xs{atom("unit"), atom(u.name)};
  for (const auto& [name, scheme] : u.exports)
    xs.push_back(Sexp::list({atom("export"), atom(name), sexpr::scheme_to_sexp(scheme)}));
  for (const Binding& b : u.bindings) xs.push_back(Sexp::list({atom("def"), atom(b.name), term_to_sexp(b.term)}));
  return Sexp::list(std::move(xs));
}

IrUnit unit_from_sexp(const Sexp& s) {
  if (!s.has_head("unit")) throw ArtifactError("expected (unit NAME ...)");
  const auto& xs = s.items();
  if (xs.size() < 2) throw ArtifactError("unit form is missing its name");
  IrUnit u;
  u.name = xs[1].text();
  for (std::size_t i = 2; i < xs.size(); ++i) {
    const Sexp& form = xs[i];
    if (form.has_head("export")) {
      expect_arity(form, 2);
      u.exports.insert_or_assign(form.items()[1].text(), sexpr::scheme_from_sexp(form.items()[2]));
    } else if (form.has_head("def")) {
      expect_arity(form, 2);
      const std::string& name = form.items()[1].text();
      if (u.find(name)) throw ArtifactError("duplicate definition of " + name);
      u.bindings.push_back(Binding{name, term_from_sexp(form.items()[2])});
    } else {
      throw ArtifactError("unknown unit form " + sexpr::print(form));
    }
  }
  return u;
}

std::string print_ir(const IrUnit& u) {
  std::string out = "(unit " + u.name;
  for (const auto& [name, scheme] : u.exports)
    out += "\n  (export " + name + " " + sexpr::print(sexpr::scheme_to_sexp(scheme)) + ")";
  for (const Binding& b : u.bindings) out += "\n  (def " + b.name + " " + print_term(b.term) + ")";
  out += ")\n";
  return out;
}

IrUnit parse_ir(std::string_view text) { return unit_from_sexp(sexpr::parse(text)); }

TermPtr parse_term(std::string_view text) { return term_from_sexp(sexpr::parse(text)); }

}  // namespace mlspec::ir

#include "mlspec/opt.hpp"

#include <charconv>
#include <sstream>

#include "mlspec/errors.hpp"

namespace mlspec::opt {

using namespace mlspec::ir;

namespace {

// ---- names ----

std::size_t suffix_of(const std::string& name) {
  auto hash = name.rfind('#');
  if (hash == std::string::npos) return 0;
  std::size_t v = 0;
  std::from_chars(name.data() + hash + 1, name.data() + name.size(), v);
  return v;
}

void max_suffix(const TermPtr& t, std::size_t& out) {
  if (const auto* v = t->as<Var>()) out = std::max(out, suffix_of(v->name));
  if (const auto* f = t->as<Fun>())
    for (const std::string& p : f->params) out = std::max(out, suffix_of(p));
  if (const auto* l = t->as<Let>()) out = std::max(out, suffix_of(l->name));
  for_each_child(*t, [&](const TermPtr& c) { max_suffix(c, out); });
}

/// Gives every binder in a term a fresh `base#N` name.
class Freshener {
 public:
  explicit Freshener(std::size_t& counter) : counter_(counter) {}

  TermPtr run(const TermPtr& t) {
    if (const auto* v = t->as<Var>()) {
      for (auto it = scope_.rbegin(); it != scope_.rend(); ++it)
        if (it->first == v->name) return make_var(it->second);
      return t;
    }
    if (const auto* f = t->as<Fun>()) {
      std::size_t mark = scope_.size();
      std::vector<std::string> params;
      for (const std::string& p : f->params) params.push_back(bind(p));
      TermPtr body = run(f->body);
      scope_.resize(mark);
      return make(Fun{std::move(params), std::move(body)});
    }
    if (const auto* l = t->as<Let>()) {
      std::size_t mark = scope_.size();
      std::string name;
      TermPtr bound;
      if (l->recursive) {
        name = bind(l->name);
        bound = run(l->bound);
      } else {
        bound = run(l->bound);
        name = bind(l->name);
      }
      TermPtr body = run(l->body);
      scope_.resize(mark);
      return make(Let{l->recursive, std::move(name), std::move(bound), std::move(body)});
    }
    return map_children(t, [&](const TermPtr& c) { return run(c); });
  }

 private:
  std::string bind(const std::string& old) {
    std::string fresh = old.substr(0, old.find('#')) + "#" + std::to_string(++counter_);
    scope_.emplace_back(old, fresh);
    return fresh;
  }

  std::size_t& counter_;
  std::vector<std::pair<std::string, std::string>> scope_;
};

// ---- cleanup helpers ----

bool binds_name(const TermPtr& t, const std::string& name) {
  if (const auto* f = t->as<Fun>())
    for (const std::string& p : f->params)
      if (p == name) return true;
  if (const auto* l = t->as<Let>(); l && l->name == name) return true;
  bool found = false;
  for_each_child(*t, [&](const TermPtr& c) { found = found || binds_name(c, name); });
  return found;
}

bool is_trivial(const TermPtr& t) {
  return t->as<Var>() || t->as<Const>() || t->as<GlobalVar>() || t->as<Specialized>();
}

bool is_pure(const TermPtr& t) {
  if (is_trivial(t) || t->as<Fun>()) return true;
  if (const auto* tup = t->as<Tuple>()) {
    for (const TermPtr& e : tup->elements)
      if (!is_pure(e)) return false;
    return true;
  }
  return false;
}

/// Replaces free occurrences of `name` by `repl` (a trivial term).
TermPtr substitute(const TermPtr& t, const std::string& name, const TermPtr& repl) {
  if (const auto* v = t->as<Var>()) return v->name == name ? repl : t;
  if (const auto* sp = t->as<Specialized>()) {
    const auto* v = sp->inner->as<Var>();
    if (!v || v->name != name) return t;
    if (repl->as<Var>() || repl->as<GlobalVar>()) return make_specialized(repl, sp->map);
    if (repl->as<Specialized>()) return subst_kinds(repl, sp->map);
    return repl;
  }
  if (const auto* f = t->as<Fun>()) {
    for (const std::string& p : f->params)
      if (p == name) return t;
    TermPtr body = substitute(f->body, name, repl);
    return body == f->body ? t : make(Fun{f->params, body});
  }
  if (const auto* l = t->as<Let>()) {
    if (l->recursive && l->name == name) return t;
    TermPtr bound = substitute(l->bound, name, repl);
    TermPtr body = l->name == name ? l->body : substitute(l->body, name, repl);
    if (bound == l->bound && body == l->body) return t;
    return make(Let{l->recursive, l->name, bound, body});
  }
  return map_children(t, [&](const TermPtr& c) { return substitute(c, name, repl); });
}

std::string free_name_of(const TermPtr& trivial) {
  if (const auto* v = trivial->as<Var>()) return v->name;
  if (const auto* sp = trivial->as<Specialized>())
    if (const auto* v = sp->inner->as<Var>()) return v->name;
  return {};
}

TermPtr cleanup(const TermPtr& t) {
  TermPtr r = map_children(t, [](const TermPtr& c) { return cleanup(c); });
  const auto* l = r->as<Let>();
  if (!l || l->recursive) return r;
  if (is_trivial(l->bound)) {
    std::string captured = free_name_of(l->bound);
    if (!binds_name(l->body, l->name) && (captured.empty() || !binds_name(l->body, captured)))
      return substitute(l->body, l->name, l->bound);
  }
  if (is_pure(l->bound) && !free_locals(l->body).contains(l->name)) return l->body;
  return r;
}

// ---- inliner ----

struct Callee {
  TermPtr fun;
  std::size_t size = 0;
  bool recursive = false;
};

class Inliner {
 public:
  Inliner(const IrUnit& original, const InlineEnv& env, const InlinePolicy& policy)
      : env_(env), policy_(policy), unit_(original) {
    for (const Binding& b : original.bindings) {
      original_meta_.emplace(b.name, units::BindingMeta{term_size(b.term), references_global(b.term, unit_.name, b.name)});
      max_suffix(b.term, counter_);
    }
  }

  IrUnit run(InlineReport* report) {
    std::vector<InlineSite> last_refusals;
    for (std::size_t round = 0; round < policy_.max_rounds; ++round) {
      refusals_.clear();
      bool any = false;
      for (Binding& b : unit_.bindings) {
        caller_ = b.name;
        changed_ = false;
        TermPtr next = visit(b.term);
        if (changed_) {
          b.term = cleanup(next);
          any = true;
        }
      }
      last_refusals = refusals_;
      if (!any) break;
    }
    if (report) {
      report->sites.insert(report->sites.end(), inlined_.begin(), inlined_.end());
      report->sites.insert(report->sites.end(), last_refusals.begin(), last_refusals.end());
    }
    return unit_;
  }

 private:
  TermPtr visit(const TermPtr& t) {
    TermPtr r = map_children(t, [&](const TermPtr& c) { return visit(c); });
    if (const auto* app = r->as<App>()) return at_app(*app, r);
    return r;
  }

  void refuse(const std::string& callee, const char* reason) {
    refusals_.push_back(InlineSite{caller_, callee, false, reason});
  }

  TermPtr at_app(const App& app, const TermPtr& whole) {
    if (const auto* f = app.fn->as<Fun>()) {
      if (f->params.size() != app.args.size()) return whole;
      changed_ = true;
      return expand(app.fn, {}, app.args);
    }
    TermPtr head = app.fn;
    KindMap kinds;
    if (const auto* sp = head->as<Specialized>()) {
      kinds = sp->map;
      head = sp->inner;
    }
    if (const auto* v = head->as<Var>()) {
      refuse(v->name, "unknown-head");
      return whole;
    }
    const auto* g = head->as<GlobalVar>();
    if (!g) return whole;
    std::string label = g->unit + "." + g->name;
    auto callee = lookup(*g);
    if (!callee) {
      refuse(label, "unknown-head");
      return whole;
    }
    if (callee->recursive) {
      refuse(label, "recursive");
      return whole;
    }
    if (callee->size > policy_.threshold) {
      refuse(label, "too-big");
      return whole;
    }
    if (app.args.size() < callee->fun->as<Fun>()->params.size()) {
      refuse(label, "higher-order");
      return whole;
    }
    changed_ = true;
    inlined_.push_back(InlineSite{caller_, label, true, {}});
    return expand(callee->fun, kinds, app.args);
  }

  TermPtr expand(const TermPtr& fun, const KindMap& kinds, const std::vector<TermPtr>& args) {
    TermPtr copy = Freshener(counter_).run(subst_kinds(fun, kinds));
    const auto& f = *copy->as<Fun>();
    std::size_t n = f.params.size();
    TermPtr body = f.body;
    for (std::size_t i = n; i-- > 0;) body = make(Let{false, f.params[i], args[i], body});
    if (args.size() > n) body = make(App{body, std::vector<TermPtr>(args.begin() + static_cast<std::ptrdiff_t>(n), args.end())});
    return body;
  }

  std::optional<Callee> lookup(const GlobalVar& g) {
    if (g.unit == unit_.name) {
      const Binding* b = unit_.find(g.name);
      auto meta = original_meta_.find(g.name);
      if (!b || meta == original_meta_.end() || !b->term->as<Fun>()) return std::nullopt;
      return Callee{b->term, meta->second.size, meta->second.recursive};
    }
    if (!env_.artifact_for) return std::nullopt;
    const units::UnitArtifact* a = env_.artifact_for(g.unit);
    if (!a) return std::nullopt;
    const units::BindingMeta* meta = a->find_meta(g.name);
    if (!meta || !a->impl.find(g.name)) return std::nullopt;
    TermPtr body;
    if (env_.table) {
      if (!env_.table->renaming_for(g.unit)) units::import_interface(*a, *env_.table);
      for (const std::string& dep : a->deps) {
        if (env_.table->renaming_for(dep)) continue;
        if (const units::UnitArtifact* d = env_.artifact_for(dep)) units::import_interface(*d, *env_.table);
      }
      body = units::fetch_body_for_inlining(*a, g.name, *env_.table);
    } else {
      body = a->impl.find(g.name)->term;
    }
    if (!body->as<Fun>()) return std::nullopt;
    return Callee{body, meta->size, meta->recursive};
  }

  const InlineEnv& env_;
  InlinePolicy policy_;
  IrUnit unit_;
  std::map<std::string, units::BindingMeta> original_meta_;
  std::size_t counter_ = 0;
  std::string caller_;
  bool changed_ = false;
  std::vector<InlineSite> inlined_;
  std::vector<InlineSite> refusals_;
};

}  // namespace

std::string InlineReport::to_text() const {
  std::ostringstream out;
  for (const InlineSite& s : sites) {
    out << s.caller << '\t' << s.callee << '\t';
    if (s.inlined)
      out << "inlined";
    else
      out << "refused(" << s.reason << ")";
    out << '\n';
  }
  return out.str();
}

IrUnit inline_pass(const IrUnit& u, const InlineEnv& env, const InlinePolicy& policy, InlineReport* report) {
  return Inliner(u, env, policy).run(report);
}

TermPtr beta_cleanup(const TermPtr& t) { return cleanup(t); }

IrUnit beta_cleanup(const IrUnit& u) {
  IrUnit out = u;
  for (Binding& b : out.bindings) b.term = cleanup(b.term);
  return out;
}

TermPtr erase_kinds(const TermPtr& t) {
  if (const auto* sp = t->as<Specialized>()) return sp->inner;
  TermPtr r = map_children(t, [](const TermPtr& c) { return erase_kinds(c); });
  return std::visit(
      [&](const auto& n) -> TermPtr {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ArrayGet> || std::is_same_v<T, ArraySet> || std::is_same_v<T, ArrayMake> ||
                      std::is_same_v<T, ArrayLit>) {
          if (!n.kind.is_tyvar()) return r;
          T copy = n;
          copy.kind = ArrayKind::generic();
          return make(std::move(copy));
        } else {
          return r;
        }
      },
      r->node);
}

IrUnit erase_kinds(const IrUnit& u) {
  IrUnit out = u;
  for (Binding& b : out.bindings) b.term = erase_kinds(b.term);
  return out;
}

}  // namespace mlspec::opt

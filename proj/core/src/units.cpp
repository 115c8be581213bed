#include "mlspec/units.hpp"

#include <fstream>
#include <sstream>

#include "mlspec/errors.hpp"
#include "mlspec/sexpr.hpp"

namespace mlspec::units {

using sexpr::Sexp;

const BindingMeta* UnitArtifact::find_meta(const std::string& name) const {
  auto it = meta.find(name);
  return it == meta.end() ? nullptr : &it->second;
}

const std::map<TyVarId, TyVarId>* RenamingTable::renaming_for(const std::string& unit) const {
  auto it = units.find(unit);
  return it == units.end() ? nullptr : &it->second.renaming;
}

namespace {

// For one exported name: the kind each inferred quantified variable takes
// when the inferred scheme is matched against the interface scheme.
ir::KindMap correspondence(const std::string& name, const TypeScheme& inferred, const TypeScheme& declared) {
  auto m = try_match_scheme(inferred, declared.body);
  if (!m) throw InternalError("adjust_impl_tvars: scheme of '" + name + "' does not match its interface");
  ir::KindMap out;
  for (TyVarId q : inferred.quantified) {
    auto it = m->find(q);
    if (it != m->end()) out.emplace(q, ir::kind_of_type(it->second));
  }
  return out;
}

ir::TermPtr rekey(const ir::TermPtr& t, const std::string& unit, const std::map<std::string, ir::KindMap>& corr) {
  ir::TermPtr rebuilt = ir::map_children(t, [&](const ir::TermPtr& c) { return rekey(c, unit, corr); });
  const auto* sp = rebuilt->as<ir::Specialized>();
  if (!sp) return rebuilt;
  const auto* g = sp->inner->as<ir::GlobalVar>();
  if (!g || g->unit != unit) return rebuilt;
  auto it = corr.find(g->name);
  if (it == corr.end()) return rebuilt;
  ir::KindMap next;
  for (const auto& [key, k] : sp->map) {
    auto c = it->second.find(key);
    if (c == it->second.end()) {
      next.emplace(key, k);
    } else if (c->second.is_tyvar()) {
      next.emplace(c->second.tyvar_id(), k);
    }
  }
  if (next == sp->map) return rebuilt;
  return ir::make_specialized(sp->inner, std::move(next));
}

std::vector<std::string> sorted_names(const typing::SchemeMap& m) {
  std::vector<std::string> out;
  for (const auto& [n, s] : m) out.push_back(n);
  return out;
}

void collect_scheme_ids(const TypeScheme& s, std::set<TyVarId>& out) {
  out.insert(s.quantified.begin(), s.quantified.end());
  collect_free_vars(s.body, out);
}

TypeScheme rename_scheme(const TypeScheme& s, const std::map<TyVarId, TyVarId>& renaming) {
  std::map<TyVarId, Ty> repl;
  for (const auto& [from, to] : renaming) repl.emplace(from, Ty::var(to));
  TypeScheme out;
  for (TyVarId q : s.quantified) {
    auto it = renaming.find(q);
    out.quantified.insert(it == renaming.end() ? q : it->second);
  }
  out.body = replace_vars(s.body, repl);
  return out;
}

BindingMeta meta_of(const std::string& unit, const ir::Binding& b) {
  return BindingMeta{ir::term_size(b.term), ir::references_global(b.term, unit, b.name)};
}

// Rewrites the keys of Specialized maps whose head is a GlobalVar of another unit.
template <typename F>
ir::TermPtr map_foreign_keys(const ir::TermPtr& t, const std::string& self, const F& f) {
  ir::TermPtr rebuilt = ir::map_children(t, [&](const ir::TermPtr& c) { return map_foreign_keys(c, self, f); });
  const auto* sp = rebuilt->as<ir::Specialized>();
  if (!sp) return rebuilt;
  const auto* g = sp->inner->as<ir::GlobalVar>();
  if (!g || g->unit == self) return rebuilt;
  ir::KindMap next;
  for (const auto& [key, k] : sp->map) next.emplace(f(g->unit, key), k);
  if (next == sp->map) return rebuilt;
  return ir::make_specialized(sp->inner, std::move(next));
}

const Sexp& section(const std::vector<Sexp>& items, std::size_t i, std::string_view head) {
  if (i >= items.size() || !items[i].has_head(head))
    throw ArtifactError("malformed unit artifact: expected (" + std::string(head) + " ...) section");
  return items[i];
}

}  // namespace

ir::IrUnit adjust_impl_tvars(const ir::IrUnit& impl, const typing::SchemeMap& inferred,
                             const typing::SchemeMap& iface) {
  std::map<std::string, ir::KindMap> corr;
  for (const auto& [name, declared] : iface) {
    auto it = inferred.find(name);
    if (it == inferred.end()) continue;
    corr.emplace(name, correspondence(name, it->second, declared));
  }
  ir::IrUnit out = impl;
  for (ir::Binding& b : out.bindings) {
    auto c = corr.find(b.name);
    if (c != corr.end()) b.term = ir::subst_kinds(b.term, c->second);
    b.term = rekey(b.term, out.name, corr);
  }
  return out;
}

UnitArtifact emit_artifact(const std::optional<typing::SchemeMap>& iface, const typing::SchemeMap& inferred,
                           const ir::IrUnit& impl, const ir::IrUnit* lowered, std::vector<std::string> deps) {
  UnitArtifact a;
  a.unit_name = impl.name;
  if (iface) {
    for (const auto& [name, declared] : *iface) {
      auto it = inferred.find(name);
      if (it == inferred.end())
        throw CompileError("interface of " + impl.name + " declares '" + name + "' but the unit does not define it");
      if (!try_match_scheme(it->second, declared.body))
        throw CompileError("interface mismatch for '" + name + "': implementation has type " + to_string(it->second) +
                           ", interface declares " + to_string(declared));
    }
    a.interface = *iface;
    a.impl = adjust_impl_tvars(impl, inferred, *iface);
    if (lowered) a.lowered = adjust_impl_tvars(*lowered, inferred, *iface);
  } else {
    a.interface = inferred;
    a.impl = impl;
    if (lowered) a.lowered = *lowered;
  }
  a.impl.exports = a.interface;
  if (a.lowered) a.lowered->exports = a.interface;
  for (const ir::Binding& b : (lowered ? *a.lowered : a.impl).bindings) a.meta.emplace(b.name, meta_of(a.unit_name, b));
  a.deps = std::move(deps);
  return a;
}

typing::SchemeMap import_interface(const UnitArtifact& artifact, RenamingTable& table) {
  if (artifact.format_version != kFormatVersion)
    throw ArtifactError("unit " + artifact.unit_name + " has format version '" + artifact.format_version +
                        "', expected '" + std::string(kFormatVersion) + "'");
  auto cached = table.units.find(artifact.unit_name);
  if (cached != table.units.end()) return cached->second.schemes;

  std::set<TyVarId> ids;
  for (const auto& [n, s] : artifact.interface) collect_scheme_ids(s, ids);
  for (const ir::Binding& b : artifact.impl.bindings) ir::collect_all_tyvars(b.term, ids);

  RenamingTable::Entry entry;
  for (TyVarId id : ids) entry.renaming.emplace(id, fresh_tyvar());
  for (const std::string& n : sorted_names(artifact.interface))
    entry.schemes.emplace(n, rename_scheme(artifact.interface.at(n), entry.renaming));
  typing::SchemeMap out = entry.schemes;
  table.units.emplace(artifact.unit_name, std::move(entry));
  return out;
}

ir::TermPtr fetch_body_for_inlining(const UnitArtifact& artifact, const std::string& name,
                                    const RenamingTable& table) {
  const ir::Binding* b = artifact.impl.find(name);
  if (!b) throw ArtifactError("unit " + artifact.unit_name + " has no binding '" + name + "'");
  const auto* renaming = table.renaming_for(artifact.unit_name);
  ir::TermPtr body = renaming ? ir::rename_tyvars(b->term, *renaming) : b->term;
  return map_foreign_keys(body, artifact.unit_name, [&](const std::string& unit, TyVarId native) {
    // Undo this unit's renaming of the key, then apply the owner's.
    TyVarId original = native;
    if (renaming)
      for (const auto& [from, to] : *renaming)
        if (to == native) original = from;
    const auto* owner = table.renaming_for(unit);
    if (!owner) return original;
    auto it = owner->find(original);
    return it == owner->end() ? original : it->second;
  });
}

ir::IrUnit externalize_foreign_keys(const ir::IrUnit& u, const RenamingTable& table) {
  ir::IrUnit out = u;
  for (ir::Binding& b : out.bindings) {
    b.term = map_foreign_keys(b.term, u.name, [&](const std::string& unit, TyVarId session) {
      const auto* owner = table.renaming_for(unit);
      if (owner)
        for (const auto& [from, to] : *owner)
          if (to == session) return from;
      return session;
    });
  }
  return out;
}

std::string write_artifact(const UnitArtifact& a) {
  std::ostringstream out;
  out << "(unit-artifact " << a.format_version << "\n (iface";
  for (const auto& [name, s] : a.interface)
    out << "\n  " << sexpr::print(Sexp::list({Sexp::atom("val"), Sexp::atom(name), sexpr::scheme_to_sexp(s)}));
  out << ")\n (impl\n" << ir::print_ir(a.impl) << ")";
  if (a.lowered) out << "\n (lowered\n" << ir::print_ir(*a.lowered) << ")";
  out << "\n (meta";
  for (const auto& [name, m] : a.meta)
    out << "\n  (size " << name << ' ' << m.size << ')';
  for (const auto& [name, m] : a.meta)
    if (m.recursive) out << "\n  (rec " << name << ')';
  for (const std::string& d : a.deps) out << "\n  (dep " << d << ')';
  out << "))\n";
  return out.str();
}

UnitArtifact read_artifact(std::string_view text) {
  Sexp root = sexpr::parse(text);
  if (!root.has_head("unit-artifact")) throw ArtifactError("not a unit artifact");
  const auto& items = root.items();
  if (items.size() < 2) throw ArtifactError("unit artifact without version");
  UnitArtifact a;
  a.format_version = items[1].text();
  if (a.format_version != kFormatVersion)
    throw ArtifactError("unit artifact has format version '" + a.format_version + "', expected '" +
                        std::string(kFormatVersion) + "'; rebuild it");

  std::size_t i = 2;
  const auto& vals = section(items, i++, "iface").items();
  for (std::size_t k = 1; k < vals.size(); ++k) {
    const Sexp& v = vals[k];
    if (!v.has_head("val") || v.items().size() != 3) throw ArtifactError("malformed iface entry " + sexpr::print(v));
    a.interface.emplace(v.items()[1].text(), sexpr::scheme_from_sexp(v.items()[2]));
  }
  const Sexp& impl = section(items, i++, "impl");
  if (impl.items().size() != 2) throw ArtifactError("impl section must hold exactly one unit");
  a.impl = ir::unit_from_sexp(impl.items()[1]);
  a.unit_name = a.impl.name;
  if (i < items.size() && items[i].has_head("lowered")) {
    if (items[i].items().size() != 2) throw ArtifactError("lowered section must hold exactly one unit");
    a.lowered = ir::unit_from_sexp(items[i].items()[1]);
    ++i;
  }
  const Sexp& meta = section(items, i++, "meta");
  if (i != items.size()) throw ArtifactError("unexpected trailing sections in unit artifact");
  for (std::size_t k = 1; k < meta.items().size(); ++k) {
    const Sexp& m = meta.items()[k];
    if (m.has_head("size") && m.items().size() == 3) {
      a.meta[m.items()[1].text()].size = static_cast<std::size_t>(sexpr::parse_uint(m.items()[2]));
    } else if (m.has_head("rec") && m.items().size() == 2) {
      a.meta[m.items()[1].text()].recursive = true;
    } else if (m.has_head("dep") && m.items().size() == 2) {
      a.deps.push_back(m.items()[1].text());
    } else {
      throw ArtifactError("malformed meta entry " + sexpr::print(m));
    }
  }
  for (const auto& [name, s] : a.interface)
    if (!a.impl.find(name)) throw ArtifactError("interface name '" + name + "' has no implementation binding");
  return a;
}

void save_artifact(const UnitArtifact& a, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArtifactError("cannot write " + path.string());
  out << write_artifact(a);
  if (!out) throw ArtifactError("failed writing " + path.string());
}

UnitArtifact load_artifact(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArtifactError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return read_artifact(buf.str());
  } catch (const ArtifactError& e) {
    throw ArtifactError(path.string() + ": " + e.what());
  }
}

bool structurally_equal(const UnitArtifact& a, const UnitArtifact& b) {
  if (a.format_version != b.format_version || a.unit_name != b.unit_name) return false;
  if (a.interface != b.interface || a.meta != b.meta || a.deps != b.deps) return false;
  if (!ir::structurally_equal(a.impl, b.impl)) return false;
  if (a.lowered.has_value() != b.lowered.has_value()) return false;
  return !a.lowered || ir::structurally_equal(*a.lowered, *b.lowered);
}

}  // namespace mlspec::units

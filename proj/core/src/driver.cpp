#include "mlspec/driver.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <regex>
#include <set>
#include <sstream>

#include "mlspec/errors.hpp"
#include "mlspec/lowering.hpp"
#include "mlspec/surface.hpp"
#include "mlspec/typing.hpp"

namespace mlspec::driver {

namespace fs = std::filesystem;

std::optional<Mode> parse_mode(std::string_view s) {
  if (s == "none") return Mode::None;
  if (s == "inline-only") return Mode::InlineOnly;
  if (s == "full") return Mode::Full;
  return std::nullopt;
}

std::string_view mode_name(Mode m) {
  switch (m) {
    case Mode::None: return "none";
    case Mode::InlineOnly: return "inline-only";
    case Mode::Full: return "full";
  }
  return "?";
}

std::optional<Stage> parse_stage(std::string_view s) {
  if (s == "lowered") return Stage::Lowered;
  if (s == "optimized") return Stage::Optimized;
  return std::nullopt;
}

fs::path artifact_path(const fs::path& dir, const std::string& unit_name) {
  std::string file = unit_name;
  std::transform(file.begin(), file.end(), file.begin(), [](unsigned char c) { return std::tolower(c); });
  return dir / (file + ".unit");
}

namespace {

bool is_builtin_unit(const std::string& u) {
  for (const auto& b : typing::builtins())
    if (!b.unit.empty() && b.unit == u) return true;
  return false;
}

void collect_units(const surface::ExprPtr& e, std::set<std::string>& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        using namespace surface;
        if constexpr (std::is_same_v<T, QualVar>) {
          out.insert(n.unit);
        } else if constexpr (std::is_same_v<T, Lambda>) {
          collect_units(n.body, out);
        } else if constexpr (std::is_same_v<T, App>) {
          collect_units(n.fn, out);
          collect_units(n.arg, out);
        } else if constexpr (std::is_same_v<T, Let>) {
          collect_units(n.bound, out);
          collect_units(n.body, out);
        } else if constexpr (std::is_same_v<T, If>) {
          collect_units(n.cond, out);
          collect_units(n.then_branch, out);
          collect_units(n.else_branch, out);
        } else if constexpr (std::is_same_v<T, Binary>) {
          collect_units(n.lhs, out);
          collect_units(n.rhs, out);
        } else if constexpr (std::is_same_v<T, Get>) {
          collect_units(n.array, out);
          collect_units(n.index, out);
        } else if constexpr (std::is_same_v<T, Set>) {
          collect_units(n.array, out);
          collect_units(n.index, out);
          collect_units(n.value, out);
        } else if constexpr (std::is_same_v<T, ArrayLit> || std::is_same_v<T, Tuple>) {
          for (const ExprPtr& x : n.elements) collect_units(x, out);
        } else if constexpr (std::is_same_v<T, Seq>) {
          collect_units(n.first, out);
          collect_units(n.second, out);
        }
      },
      e->node);
}

/// Units named by `open` or by qualified references, in source order of first mention.
std::vector<std::string> source_units(const surface::SurfaceUnit& su) {
  std::vector<std::string> ordered;
  std::set<std::string> seen;
  auto add = [&](const std::string& u) {
    if (u != su.unit_name && !is_builtin_unit(u) && seen.insert(u).second) ordered.push_back(u);
  };
  for (const surface::Item& item : su.items) {
    if (const auto* o = std::get_if<surface::Open>(&item.node)) {
      add(o->unit);
    } else if (const auto* t = std::get_if<surface::TopLet>(&item.node)) {
      std::set<std::string> found;
      collect_units(t->bound, found);
      for (const std::string& u : found) add(u);
    }
  }
  return ordered;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw CompileError("cannot read " + p.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const CompileError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUser;
  } catch (const ArtifactError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUser;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUser;
  } catch (const RuntimeError& e) {
    err << "runtime error: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const KindSoundnessViolation& e) {
    err << "internal error: kind soundness violation: " << e.what() << '\n';
    return kExitInternal;
  } catch (const InternalError& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}

}  // namespace

Session::Session(std::optional<fs::path> lib_dir) : lib_dir_(std::move(lib_dir)) {}

void Session::add(units::UnitArtifact artifact) {
  std::string name = artifact.unit_name;
  missing_.erase(name);
  artifacts_[name] = std::make_unique<units::UnitArtifact>(std::move(artifact));
}

const units::UnitArtifact* Session::find(const std::string& unit) {
  if (auto it = artifacts_.find(unit); it != artifacts_.end()) return it->second.get();
  if (!lib_dir_ || missing_.contains(unit)) return nullptr;
  fs::path p = artifact_path(*lib_dir_, unit);
  if (!fs::exists(p)) {
    missing_[unit] = true;
    return nullptr;
  }
  units::UnitArtifact a = units::load_artifact(p);
  if (a.unit_name != unit) throw ArtifactError(p.string() + " holds unit " + a.unit_name + ", expected " + unit);
  auto& slot = artifacts_[unit];
  slot = std::make_unique<units::UnitArtifact>(std::move(a));
  return slot.get();
}

BuildResult Session::compile(std::string_view source, const std::string& unit_name,
                             const std::optional<typing::SchemeMap>& iface, const BuildOptions& options) {
  surface::SurfaceUnit su = surface::parse_unit(source, unit_name);
  std::vector<std::string> referenced = source_units(su);

  typing::ImportMap imports;
  for (const std::string& u : referenced)
    if (const units::UnitArtifact* a = find(u)) imports.emplace(u, units::import_interface(*a, table_));

  typing::TypedUnit tu = typing::infer_unit(su, imports);
  ir::IrUnit lowered = lowering::lower_unit(tu);

  opt::InlineEnv env{[this](const std::string& u) { return find(u); }, &table_};
  BuildResult out;
  ir::IrUnit impl;
  switch (options.mode) {
    case Mode::None:
      impl = opt::erase_kinds(lowered);
      break;
    case Mode::InlineOnly:
      impl = opt::erase_kinds(opt::inline_pass(opt::erase_kinds(lowered), env, options.policy, &out.report));
      break;
    case Mode::Full:
      impl = opt::inline_pass(lowered, env, options.policy, &out.report);
      break;
  }

  std::vector<std::string> deps = referenced;
  for (const std::string& u : ir::referenced_units(impl))
    if (std::find(deps.begin(), deps.end(), u) == deps.end()) deps.push_back(u);

  impl = units::externalize_foreign_keys(impl, table_);
  lowered = units::externalize_foreign_keys(lowered, table_);
  out.artifact = units::emit_artifact(iface, tu.exported, impl, &lowered, std::move(deps));
  return out;
}

const units::UnitArtifact& Session::compile_and_add(std::string_view source, const std::string& unit_name,
                                                    const std::optional<typing::SchemeMap>& iface,
                                                    const BuildOptions& options) {
  add(compile(source, unit_name, iface, options).artifact);
  return *artifacts_.at(unit_name);
}

std::vector<ir::IrUnit> Session::link(const units::UnitArtifact& entry) {
  std::vector<ir::IrUnit> order;
  std::map<std::string, int> state;  // 1 visiting, 2 done
  auto visit = [&](auto&& self, const units::UnitArtifact& a) -> void {
    int& s = state[a.unit_name];
    if (s == 2) return;
    if (s == 1) throw ArtifactError("dependency cycle through unit " + a.unit_name);
    s = 1;
    for (const std::string& dep : a.deps) {
      const units::UnitArtifact* d = find(dep);
      if (!d) throw ArtifactError("unit " + a.unit_name + " depends on " + dep + ", which was not found");
      self(self, *d);
    }
    state[a.unit_name] = 2;
    order.push_back(a.impl);
  };
  visit(visit, entry);
  return order;
}

std::vector<ir::IrUnit> Session::link(const std::string& entry_unit) {
  const units::UnitArtifact* a = find(entry_unit);
  if (!a) throw ArtifactError("unit " + entry_unit + " not found");
  return link(*a);
}

int cmd_build(const BuildCommand& cmd, std::ostream& /*out*/, std::ostream& err) {
  return guarded(err, [&] {
    std::string source = read_file(cmd.file);
    std::string unit = surface::unit_name_from_path(cmd.file.string());
    std::optional<typing::SchemeMap> iface;
    fs::path mxi = fs::path(cmd.file).replace_extension(".mxi");
    if (fs::exists(mxi)) iface = typing::parse_interface(read_file(mxi));

    fs::path source_dir = cmd.file.has_parent_path() ? cmd.file.parent_path() : fs::path(".");
    Session session(cmd.lib_dir ? *cmd.lib_dir : source_dir);
    BuildResult r = session.compile(source, unit, iface, cmd.options);
    if (cmd.report) err << r.report.to_text();
    fs::path dest = cmd.output ? *cmd.output : artifact_path(cmd.lib_dir ? *cmd.lib_dir : source_dir, unit);
    units::save_artifact(r.artifact, dest);
    return kExitOk;
  });
}

int cmd_run(const RunCommand& cmd, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    units::UnitArtifact entry = units::load_artifact(cmd.unit);
    fs::path dir = cmd.unit.has_parent_path() ? cmd.unit.parent_path() : fs::path(".");
    Session session(cmd.lib_dir ? *cmd.lib_dir : dir);
    std::vector<ir::IrUnit> program = session.link(entry);
    runtime::EvalOptions eo;
    eo.step_budget = cmd.step_budget;
    eo.echo = &out;
    runtime::EvalResult r = runtime::eval_program(program, eo);
    out.flush();
    err << runtime::report_stats(r.stats, cmd.stats);
    return kExitOk;
  });
}

int cmd_dump_ir(const fs::path& unit, Stage stage, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    units::UnitArtifact a = units::load_artifact(unit);
    if (stage == Stage::Lowered) {
      if (!a.lowered) throw ArtifactError(unit.string() + " carries no lowered IR");
      out << ir::print_ir(*a.lowered);
    } else {
      out << ir::print_ir(a.impl);
    }
    return kExitOk;
  });
}

std::vector<std::string> bench_names() { return {"simple", "random", "rec_residual"}; }

std::string with_scale(std::string_view source, std::int64_t scale) {
  static const std::regex pattern(R"(let\s+scale\s*=\s*[0-9]+)");
  return std::regex_replace(std::string(source), pattern, "let scale = " + std::to_string(scale));
}

namespace {

const BenchSource* corpus_file(const std::string& file) {
  for (const BenchSource& b : bench_corpus())
    if (b.file == file) return &b;
  return nullptr;
}

}  // namespace

BenchRun run_bench(const std::string& name, std::int64_t scale, Mode mode, const opt::InlinePolicy& policy) {
  const BenchSource* src = corpus_file(name + ".mx");
  const BenchSource* poly = corpus_file("poly.mx");
  if (!src || !poly) throw CompileError("unknown bench '" + name + "'");
  const BenchSource* poly_iface = corpus_file("poly.mxi");

  Session session;
  BuildOptions options{mode, policy};
  std::optional<typing::SchemeMap> iface;
  if (poly_iface) iface = typing::parse_interface(poly_iface->text);
  session.compile_and_add(poly->text, "Poly", iface, options);
  const units::UnitArtifact& entry =
      session.compile_and_add(with_scale(src->text, scale), surface::unit_name_from_path(src->file), std::nullopt, options);
  runtime::EvalResult r = runtime::eval_program(session.link(entry));
  return BenchRun{name, mode, std::move(r.output), r.stats};
}

int cmd_bench(const std::string& name, std::int64_t scale, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    std::vector<std::string> names = bench_names();
    if (name != "all") {
      if (std::find(names.begin(), names.end(), name) == names.end())
        throw CompileError("unknown bench '" + name + "' (expected all, simple, random or rec_residual)");
      names = {name};
    }
    if (scale < 1) throw CompileError("--scale must be positive");
    out << std::left << std::setw(14) << "bench" << std::setw(8) << "mode" << std::right << std::setw(12) << "all"
        << std::setw(12) << "gen" << std::setw(9) << "gen%" << '\n';
    int status = kExitOk;
    for (const std::string& n : names) {
      BenchRun before = run_bench(n, scale, Mode::None);
      BenchRun after = run_bench(n, scale, Mode::Full);
      for (const BenchRun* r : {&before, &after}) {
        std::uint64_t t = r->stats.gen_pct_tenths();
        out << std::left << std::setw(14) << n << std::setw(8) << mode_name(r->mode) << std::right << std::setw(12)
            << r->stats.all() << std::setw(12) << r->stats.gen() << std::setw(7) << t / 10 << '.' << t % 10 << '\n';
      }
      if (before.output != after.output) {
        err << "internal error: " << n << " prints different output in modes none and full\n";
        status = kExitInternal;
      }
    }
    return status;
  });
}

}  // namespace mlspec::driver

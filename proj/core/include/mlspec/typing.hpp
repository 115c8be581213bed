#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mlspec/surface.hpp"
#include "mlspec/types.hpp"

namespace mlspec::typing {

using SchemeMap = std::map<std::string, TypeScheme>;

/// Exported schemes of every unit visible to the unit being inferred.
using ImportMap = std::map<std::string, SchemeMap>;

struct VarRef {
  enum class Origin { Local, Global, Builtin };
  Origin origin = Origin::Local;
  std::string unit;  // Global: defining unit
  std::string name;
  TypeScheme scheme;  // scheme of the binding this occurrence refers to
};

/// Typed tree. Mirrors the surface node it annotates; `children` follow the
/// surface node's child order (Lambda: [body]; Let: [bound, body]; App:
/// [fn, arg]; ...).
struct TypedExpr {
  surface::ExprPtr source;
  Ty ty = Ty::unit();
  std::vector<TypedExpr> children;
  std::optional<VarRef> var;           // Var / QualVar occurrences
  std::optional<TypeScheme> scheme;    // Let: the binding's scheme
};

struct TypedBinding {
  Loc loc;
  bool recursive = false;
  std::string name;
  std::vector<surface::Param> params;
  TypedExpr bound;  // the whole bound value, a Lambda-shaped node when params is non-empty
  TypeScheme scheme;
};

struct TypedUnit {
  std::string unit_name;
  std::vector<std::string> opens;
  std::vector<TypedBinding> bindings;
  SchemeMap exported;
};

/// Hindley-Milner inference with the syntactic value restriction. Throws
/// CompileError on unbound names and type clashes.
TypedUnit infer_unit(const surface::SurfaceUnit& u, const ImportMap& imports);

/// The initial environment (Array.make, Array.length, print_int, ...).
struct Builtin {
  std::string_view unit;  // "" or "Array"
  std::string_view name;
  std::size_t arity;
};
const std::vector<Builtin>& builtins();
TypeScheme builtin_scheme(std::string_view unit, std::string_view name);

/// Parses `.mxi` text: lines `val NAME : TYPE`. Type variables get fresh ids,
/// one scope per declaration.
SchemeMap parse_interface(std::string_view text);

/// Parses a single type expression (tests).
TypeScheme parse_type_scheme(std::string_view text);

}  // namespace mlspec::typing

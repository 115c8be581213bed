#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mlspec/types.hpp"

namespace mlspec::sexpr {

/// Minimal s-expression: an atom (any run of non-space, non-paren
/// characters) or a list.
struct Sexp {
  std::variant<std::string, std::vector<Sexp>> value;

  static Sexp atom(std::string s) { return Sexp{std::move(s)}; }
  static Sexp list(std::vector<Sexp> items = {}) { return Sexp{std::move(items)}; }

  bool is_atom() const { return value.index() == 0; }
  bool is_list() const { return value.index() == 1; }
  const std::string& text() const;              // throws ArtifactError unless atom
  const std::vector<Sexp>& items() const;       // throws ArtifactError unless list
  bool has_head(std::string_view head) const;   // list whose first item is the atom `head`
};

/// Parses exactly one s-expression. Throws ArtifactError.
Sexp parse(std::string_view text);
std::string print(const Sexp& s);

std::uint64_t parse_uint(const Sexp& s);

Sexp type_to_sexp(const Ty& t);
Ty type_from_sexp(const Sexp& s);

/// `(forall (ID...) TYPE)`
Sexp scheme_to_sexp(const TypeScheme& s);
TypeScheme scheme_from_sexp(const Sexp& s);

}  // namespace mlspec::sexpr

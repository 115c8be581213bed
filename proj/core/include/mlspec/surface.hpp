#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mlspec/errors.hpp"

namespace mlspec::surface {

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

enum class BinOp : std::uint8_t {
  Add, Sub, Mul, Div, Mod,        // int
  FAdd, FSub, FMul, FDiv,         // float
  Eq, Lt, Gt, Le, Ge,             // comparison
  And, Or,                        // boolean
};

std::string_view spelling(BinOp op);

/// A function parameter: a name, `()`, or a flat tuple pattern `(a, b)`.
struct Param {
  enum class Kind : std::uint8_t { Name, Unit, Tuple } kind = Kind::Name;
  std::vector<std::string> names;  // one for Name, none for Unit, >= 2 for Tuple

  static Param named(std::string n) { return Param{Kind::Name, {std::move(n)}}; }
  friend bool operator==(const Param&, const Param&) = default;
};

struct IntLit { std::int64_t value; };
struct FloatLit { double value; };
struct BoolLit { bool value; };
struct UnitLit {};
struct Var { std::string name; };
struct QualVar { std::string unit; std::string name; };
struct Lambda { std::vector<Param> params; ExprPtr body; };
struct App { ExprPtr fn; ExprPtr arg; };
struct Let {
  bool recursive = false;
  std::string name;
  std::vector<Param> params;
  ExprPtr bound;
  ExprPtr body;
};
struct If { ExprPtr cond; ExprPtr then_branch; ExprPtr else_branch; };
struct Binary { BinOp op; ExprPtr lhs; ExprPtr rhs; };
struct Get { ExprPtr array; ExprPtr index; };
struct Set { ExprPtr array; ExprPtr index; ExprPtr value; };
struct ArrayLit { std::vector<ExprPtr> elements; };
struct Tuple { std::vector<ExprPtr> elements; };
struct Seq { ExprPtr first; ExprPtr second; };

using ExprNode = std::variant<IntLit, FloatLit, BoolLit, UnitLit, Var, QualVar, Lambda, App, Let, If, Binary, Get,
                              Set, ArrayLit, Tuple, Seq>;

struct Expr {
  Loc loc;
  ExprNode node;

  template <typename T>
  const T* as() const { return std::get_if<T>(&node); }
};

template <typename T>
ExprPtr make(Loc loc, T node) {
  return std::make_shared<const Expr>(Expr{loc, ExprNode{std::move(node)}});
}

struct Open {
  std::string unit;
};
struct TopLet {
  bool recursive = false;
  std::string name;
  std::vector<Param> params;
  ExprPtr bound;
};

struct Item {
  Loc loc;
  std::variant<Open, TopLet> node;
};

struct SurfaceUnit {
  std::string unit_name;
  std::vector<Item> items;
};

/// "dir/rec_residual.mx" -> "Rec_residual".
std::string unit_name_from_path(std::string_view path);

/// Parses a unit. Throws CompileError on syntax errors and duplicate
/// top-level names.
SurfaceUnit parse_unit(std::string_view source, std::string unit_name);

/// Parses a single expression (tests and tooling).
ExprPtr parse_expr(std::string_view source);

/// Fully parenthesized concrete syntax that re-parses to the same tree.
std::string print_expr(const Expr& e);
std::string print_unit(const SurfaceUnit& u);

/// Structural equality ignoring locations.
bool structurally_equal(const Expr& a, const Expr& b);
bool structurally_equal(const SurfaceUnit& a, const SurfaceUnit& b);

bool is_syntactic_value(const Expr& e);

// ---- lexer (shared with the interface-file parser) ----

enum class Tok : std::uint8_t {
  Int, Float, LIdent, UIdent, TyVar,
  KwLet, KwRec, KwIn, KwFun, KwIf, KwThen, KwElse, KwTrue, KwFalse, KwOpen, KwMod, KwVal,
  LParen, RParen, ArrOpen, ArrClose, Comma, Semi, SemiSemi, Dot, Arrow, Assign, Equal, Colon, Star,
  Plus, Minus, Slash, PlusDot, MinusDot, StarDot, SlashDot, Lt, Gt, Le, Ge, AndAnd, OrOr,
  Eof,
};

struct Token {
  Tok kind;
  std::string text;
  Loc loc;
  std::uint64_t int_value = 0;
  double float_value = 0.0;
};

std::vector<Token> tokenize(std::string_view source);
std::string_view describe(Tok t);

}  // namespace mlspec::surface

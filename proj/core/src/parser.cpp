#include <cctype>
#include <limits>
#include <set>

#include "mlspec/surface.hpp"

namespace mlspec::surface {

std::string_view spelling(BinOp op) {
  switch (op) {
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Mul: return "*";
    case BinOp::Div: return "/";
    case BinOp::Mod: return "mod";
    case BinOp::FAdd: return "+.";
    case BinOp::FSub: return "-.";
    case BinOp::FMul: return "*.";
    case BinOp::FDiv: return "/.";
    case BinOp::Eq: return "=";
    case BinOp::Lt: return "<";
    case BinOp::Gt: return ">";
    case BinOp::Le: return "<=";
    case BinOp::Ge: return ">=";
    case BinOp::And: return "&&";
    case BinOp::Or: return "||";
  }
  return "?";
}

std::string unit_name_from_path(std::string_view path) {
  auto slash = path.find_last_of("/\\");
  if (slash != std::string_view::npos) path.remove_prefix(slash + 1);
  auto dot = path.find('.');
  if (dot != std::string_view::npos) path = path.substr(0, dot);
  std::string name(path);
  if (!name.empty()) name[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(name[0])));
  return name;
}

namespace {

class Parser {
 public:
  explicit Parser(std::string_view source) : toks_(tokenize(source)) {}

  SurfaceUnit unit(std::string unit_name) {
    SurfaceUnit u{std::move(unit_name), {}};
    std::set<std::string> names;
    while (!at(Tok::Eof)) {
      if (accept(Tok::SemiSemi)) continue;
      Loc loc = cur().loc;
      if (accept(Tok::KwOpen)) {
        std::string name = expect(Tok::UIdent, "unit name after 'open'").text;
        u.items.push_back(Item{loc, Open{std::move(name)}});
      } else if (accept(Tok::KwLet)) {
        TopLet let;
        let.recursive = accept(Tok::KwRec);
        const Token& name_tok = expect(Tok::LIdent, "binding name");
        let.name = name_tok.text;
        let.params = params();
        expect(Tok::Equal, "'='");
        let.bound = seq();
        if (!names.insert(let.name).second)
          throw CompileError(name_tok.loc, "duplicate top-level definition of '" + let.name + "'");
        u.items.push_back(Item{loc, std::move(let)});
      } else {
        fail("'let' or 'open' at top level");
      }
    }
    return u;
  }

  ExprPtr whole_expr() {
    ExprPtr e = seq();
    expect(Tok::Eof, "end of input");
    return e;
  }

 private:
  const Token& cur() const { return toks_[pos_]; }
  const Token& ahead(std::size_t n) const { return toks_[std::min(pos_ + n, toks_.size() - 1)]; }
  bool at(Tok t) const { return cur().kind == t; }

  bool accept(Tok t) {
    if (!at(t)) return false;
    ++pos_;
    return true;
  }

  const Token& expect(Tok t, std::string_view what) {
    if (!at(t)) fail(what);
    return toks_[pos_++];
  }

  [[noreturn]] void fail(std::string_view expected) const {
    const Token& t = cur();
    std::string found = t.kind == Tok::Eof ? "end of input" : "'" + t.text + "'";
    throw CompileError(t.loc, "syntax error: expected " + std::string(expected) + ", found " + found);
  }

  bool starts_param() const {
    if (at(Tok::LIdent)) return true;
    if (!at(Tok::LParen)) return false;
    return ahead(1).kind == Tok::RParen || ahead(1).kind == Tok::LIdent;
  }

  Param param() {
    if (at(Tok::LIdent)) return Param::named(toks_[pos_++].text);
    expect(Tok::LParen, "parameter");
    if (accept(Tok::RParen)) return Param{Param::Kind::Unit, {}};
    Param p{Param::Kind::Name, {expect(Tok::LIdent, "parameter name").text}};
    while (accept(Tok::Comma)) {
      p.kind = Param::Kind::Tuple;
      p.names.push_back(expect(Tok::LIdent, "parameter name").text);
    }
    expect(Tok::RParen, "')'");
    return p;
  }

  std::vector<Param> params() {
    std::vector<Param> ps;
    while (starts_param()) ps.push_back(param());
    return ps;
  }

  ExprPtr seq() {
    ExprPtr first = noseq();
    if (at(Tok::Semi)) {
      Loc loc = cur().loc;
      ++pos_;
      return make(loc, Seq{first, seq()});
    }
    return first;
  }

  ExprPtr noseq() {
    Loc loc = cur().loc;
    if (accept(Tok::KwLet)) {
      Let let;
      let.recursive = accept(Tok::KwRec);
      let.name = expect(Tok::LIdent, "binding name").text;
      let.params = params();
      expect(Tok::Equal, "'='");
      let.bound = seq();
      expect(Tok::KwIn, "'in'");
      let.body = seq();
      return make(loc, std::move(let));
    }
    if (accept(Tok::KwFun)) {
      Lambda lam;
      lam.params = params();
      if (lam.params.empty()) fail("parameter after 'fun'");
      expect(Tok::Arrow, "'->'");
      lam.body = seq();
      return make(loc, std::move(lam));
    }
    if (accept(Tok::KwIf)) {
      ExprPtr c = seq();
      expect(Tok::KwThen, "'then'");
      ExprPtr t = noseq();
      ExprPtr e = accept(Tok::KwElse) ? noseq() : make(t->loc, UnitLit{});
      return make(loc, If{c, t, e});
    }
    ExprPtr lhs = or_expr();
    if (at(Tok::Assign)) {
      const Get* g = lhs->as<Get>();
      if (!g) throw CompileError(cur().loc, "syntax error: '<-' requires an array access on its left");
      ++pos_;
      return make(lhs->loc, Set{g->array, g->index, noseq()});
    }
    return lhs;
  }

  ExprPtr or_expr() {
    ExprPtr lhs = and_expr();
    if (at(Tok::OrOr)) {
      Loc loc = cur().loc;
      ++pos_;
      return make(loc, Binary{BinOp::Or, lhs, or_expr()});
    }
    return lhs;
  }

  ExprPtr and_expr() {
    ExprPtr lhs = cmp_expr();
    if (at(Tok::AndAnd)) {
      Loc loc = cur().loc;
      ++pos_;
      return make(loc, Binary{BinOp::And, lhs, and_expr()});
    }
    return lhs;
  }

  template <typename Next>
  ExprPtr left_assoc(Next next, std::initializer_list<std::pair<Tok, BinOp>> ops) {
    ExprPtr lhs = (this->*next)();
    for (;;) {
      bool matched = false;
      for (auto [tok, op] : ops) {
        if (at(tok)) {
          Loc loc = cur().loc;
          ++pos_;
          lhs = make(loc, Binary{op, lhs, (this->*next)()});
          matched = true;
          break;
        }
      }
      if (!matched) return lhs;
    }
  }

  ExprPtr cmp_expr() {
    return left_assoc(&Parser::add_expr, {{Tok::Equal, BinOp::Eq},
                                          {Tok::Lt, BinOp::Lt},
                                          {Tok::Gt, BinOp::Gt},
                                          {Tok::Le, BinOp::Le},
                                          {Tok::Ge, BinOp::Ge}});
  }

  ExprPtr add_expr() {
    return left_assoc(&Parser::mul_expr, {{Tok::Plus, BinOp::Add},
                                          {Tok::Minus, BinOp::Sub},
                                          {Tok::PlusDot, BinOp::FAdd},
                                          {Tok::MinusDot, BinOp::FSub}});
  }

  ExprPtr mul_expr() {
    return left_assoc(&Parser::unary_expr, {{Tok::Star, BinOp::Mul},
                                            {Tok::Slash, BinOp::Div},
                                            {Tok::KwMod, BinOp::Mod},
                                            {Tok::StarDot, BinOp::FMul},
                                            {Tok::SlashDot, BinOp::FDiv}});
  }

  ExprPtr unary_expr() {
    Loc loc = cur().loc;
    if (accept(Tok::Minus)) {
      if (at(Tok::Int)) {
        std::uint64_t v = toks_[pos_++].int_value;
        return make(loc, IntLit{static_cast<std::int64_t>(0 - v)});
      }
      if (at(Tok::Float)) return make(loc, FloatLit{-toks_[pos_++].float_value});
      return make(loc, Binary{BinOp::Sub, make(loc, IntLit{0}), unary_expr()});
    }
    if (accept(Tok::MinusDot)) {
      if (at(Tok::Float)) return make(loc, FloatLit{-toks_[pos_++].float_value});
      return make(loc, Binary{BinOp::FSub, make(loc, FloatLit{0.0}), unary_expr()});
    }
    if (at(Tok::KwLet) || at(Tok::KwFun) || at(Tok::KwIf)) return noseq();
    return app_expr();
  }

  bool starts_atom() const {
    switch (cur().kind) {
      case Tok::Int:
      case Tok::Float:
      case Tok::KwTrue:
      case Tok::KwFalse:
      case Tok::LIdent:
      case Tok::UIdent:
      case Tok::LParen:
      case Tok::ArrOpen:
        return true;
      default:
        return false;
    }
  }

  ExprPtr app_expr() {
    ExprPtr head = postfix();
    while (starts_atom()) {
      Loc loc = cur().loc;
      head = make(loc, App{head, postfix()});
    }
    return head;
  }

  ExprPtr postfix() {
    ExprPtr e = atom();
    while (at(Tok::Dot) && ahead(1).kind == Tok::LParen) {
      Loc loc = cur().loc;
      pos_ += 2;
      ExprPtr index = seq();
      expect(Tok::RParen, "')'");
      e = make(loc, Get{e, index});
    }
    return e;
  }

  ExprPtr atom() {
    const Token& t = cur();
    Loc loc = t.loc;
    switch (t.kind) {
      case Tok::Int: {
        ++pos_;
        if (t.int_value > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max()))
          throw CompileError(loc, "integer literal out of range: " + t.text);
        return make(loc, IntLit{static_cast<std::int64_t>(t.int_value)});
      }
      case Tok::Float:
        ++pos_;
        return make(loc, FloatLit{t.float_value});
      case Tok::KwTrue:
        ++pos_;
        return make(loc, BoolLit{true});
      case Tok::KwFalse:
        ++pos_;
        return make(loc, BoolLit{false});
      case Tok::LIdent:
        ++pos_;
        return make(loc, Var{t.text});
      case Tok::UIdent: {
        ++pos_;
        expect(Tok::Dot, "'.' after unit name");
        std::string name = expect(Tok::LIdent, "identifier after unit name").text;
        return make(loc, QualVar{t.text, std::move(name)});
      }
      case Tok::LParen: {
        ++pos_;
        if (accept(Tok::RParen)) return make(loc, UnitLit{});
        ExprPtr first = noseq();
        if (at(Tok::Comma)) {
          Tuple tup{{first}};
          while (accept(Tok::Comma)) tup.elements.push_back(noseq());
          expect(Tok::RParen, "')'");
          return make(loc, std::move(tup));
        }
        if (at(Tok::Semi)) {
          Loc sloc = cur().loc;
          ++pos_;
          first = make(sloc, Seq{first, seq()});
        }
        expect(Tok::RParen, "')'");
        return first;
      }
      case Tok::ArrOpen: {
        ++pos_;
        ArrayLit lit;
        while (!at(Tok::ArrClose)) {
          lit.elements.push_back(noseq());
          if (!accept(Tok::Semi)) break;
        }
        expect(Tok::ArrClose, "'|]'");
        return make(loc, std::move(lit));
      }
      default:
        fail("expression");
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace

SurfaceUnit parse_unit(std::string_view source, std::string unit_name) {
  return Parser(source).unit(std::move(unit_name));
}

ExprPtr parse_expr(std::string_view source) { return Parser(source).whole_expr(); }

bool is_syntactic_value(const Expr& e) {
  return std::visit(
      [](const auto& n) -> bool {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, IntLit> || std::is_same_v<T, FloatLit> || std::is_same_v<T, BoolLit> ||
                      std::is_same_v<T, UnitLit> || std::is_same_v<T, Var> || std::is_same_v<T, QualVar> ||
                      std::is_same_v<T, Lambda>) {
          return true;
        } else if constexpr (std::is_same_v<T, Tuple>) {
          for (const auto& el : n.elements)
            if (!is_syntactic_value(*el)) return false;
          return true;
        } else {
          return false;
        }
      },
      e.node);
}

}  // namespace mlspec::surface

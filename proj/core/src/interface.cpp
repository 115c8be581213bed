#include "mlspec/errors.hpp"
#include "mlspec/typing.hpp"

namespace mlspec::typing {

using surface::Tok;
using surface::Token;

namespace {

class TypeParser {
 public:
  explicit TypeParser(std::string_view text) : toks_(surface::tokenize(text)) {}

  SchemeMap interface() {
    SchemeMap out;
    while (!at(Tok::Eof)) {
      if (accept(Tok::SemiSemi)) continue;
      expect(Tok::KwVal, "'val'");
      const Token& name = expect(Tok::LIdent, "value name");
      expect(Tok::Colon, "':'");
      TypeScheme s = scheme();
      if (!out.emplace(name.text, std::move(s)).second)
        throw CompileError(name.loc, "duplicate declaration of '" + name.text + "'");
    }
    return out;
  }

  TypeScheme whole() {
    TypeScheme s = scheme();
    expect(Tok::Eof, "end of input");
    return s;
  }

 private:
  bool at(Tok t) const { return toks_[pos_].kind == t; }
  bool accept(Tok t) {
    if (!at(t)) return false;
    ++pos_;
    return true;
  }
  const Token& expect(Tok t, std::string_view what) {
    if (!at(t)) {
      const Token& c = toks_[pos_];
      throw CompileError(c.loc, "syntax error in interface: expected " + std::string(what) + ", found " +
                                    (c.kind == Tok::Eof ? std::string("end of input") : "'" + c.text + "'"));
    }
    return toks_[pos_++];
  }

  TypeScheme scheme() {
    names_.clear();
    Ty body = arrow();
    TypeScheme s{{}, body};
    for (const auto& [n, id] : names_) s.quantified.insert(id);
    return s;
  }

  Ty arrow() {
    Ty lhs = product();
    if (accept(Tok::Arrow)) return Ty::arrow(lhs, arrow());
    return lhs;
  }

  Ty product() {
    std::vector<Ty> parts{postfix()};
    while (accept(Tok::Star)) parts.push_back(postfix());
    return parts.size() == 1 ? parts[0] : Ty::tuple(std::move(parts));
  }

  Ty postfix() {
    Ty t = atom();
    while (at(Tok::LIdent) && toks_[pos_].text == "array") {
      ++pos_;
      t = Ty::array(t);
    }
    return t;
  }

  Ty atom() {
    const Token& t = toks_[pos_];
    if (accept(Tok::TyVar)) {
      auto [it, inserted] = names_.try_emplace(t.text, TyVarId{});
      if (inserted) it->second = fresh_tyvar();
      return Ty::var(it->second);
    }
    if (accept(Tok::LParen)) {
      Ty inner = arrow();
      expect(Tok::RParen, "')'");
      return inner;
    }
    const Token& name = expect(Tok::LIdent, "type");
    if (name.text == "int") return Ty::int_();
    if (name.text == "float") return Ty::float_();
    if (name.text == "bool") return Ty::bool_();
    if (name.text == "unit") return Ty::unit();
    throw CompileError(name.loc, "unknown type constructor " + name.text);
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::map<std::string, TyVarId> names_;
};

}  // namespace

SchemeMap parse_interface(std::string_view text) { return TypeParser(text).interface(); }

TypeScheme parse_type_scheme(std::string_view text) { return TypeParser(text).whole(); }

}  // namespace mlspec::typing

#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "mlspec/surface.hpp"

namespace mlspec::surface {

std::string_view describe(Tok t) {
  switch (t) {
    case Tok::Int: return "integer literal";
    case Tok::Float: return "float literal";
    case Tok::LIdent: return "identifier";
    case Tok::UIdent: return "unit name";
    case Tok::TyVar: return "type variable";
    case Tok::KwLet: return "'let'";
    case Tok::KwRec: return "'rec'";
    case Tok::KwIn: return "'in'";
    case Tok::KwFun: return "'fun'";
    case Tok::KwIf: return "'if'";
    case Tok::KwThen: return "'then'";
    case Tok::KwElse: return "'else'";
    case Tok::KwTrue: return "'true'";
    case Tok::KwFalse: return "'false'";
    case Tok::KwOpen: return "'open'";
    case Tok::KwMod: return "'mod'";
    case Tok::KwVal: return "'val'";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::ArrOpen: return "'[|'";
    case Tok::ArrClose: return "'|]'";
    case Tok::Comma: return "','";
    case Tok::Semi: return "';'";
    case Tok::SemiSemi: return "';;'";
    case Tok::Dot: return "'.'";
    case Tok::Arrow: return "'->'";
    case Tok::Assign: return "'<-'";
    case Tok::Equal: return "'='";
    case Tok::Colon: return "':'";
    case Tok::Star: return "'*'";
    case Tok::Plus: return "'+'";
    case Tok::Minus: return "'-'";
    case Tok::Slash: return "'/'";
    case Tok::PlusDot: return "'+.'";
    case Tok::MinusDot: return "'-.'";
    case Tok::StarDot: return "'*.'";
    case Tok::SlashDot: return "'/.'";
    case Tok::Lt: return "'<'";
    case Tok::Gt: return "'>'";
    case Tok::Le: return "'<='";
    case Tok::Ge: return "'>='";
    case Tok::AndAnd: return "'&&'";
    case Tok::OrOr: return "'||'";
    case Tok::Eof: return "end of input";
  }
  return "token";
}

namespace {

const std::unordered_map<std::string_view, Tok>& keywords() {
  static const std::unordered_map<std::string_view, Tok> table{
      {"let", Tok::KwLet},   {"rec", Tok::KwRec},     {"in", Tok::KwIn},     {"fun", Tok::KwFun},
      {"if", Tok::KwIf},     {"then", Tok::KwThen},   {"else", Tok::KwElse}, {"true", Tok::KwTrue},
      {"false", Tok::KwFalse}, {"open", Tok::KwOpen}, {"mod", Tok::KwMod},   {"val", Tok::KwVal},
  };
  return table;
}

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_trivia();
      Loc loc = here();
      if (pos_ >= src_.size()) {
        out.push_back(Token{Tok::Eof, "", loc});
        return out;
      }
      out.push_back(next_token(loc));
    }
  }

 private:
  Loc here() const { return Loc{line_, col_, pos_}; }

  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
  }

  void advance(std::size_t n = 1) {
    for (std::size_t i = 0; i < n && pos_ < src_.size(); ++i) {
      if (src_[pos_] == '\n') {
        ++line_;
        col_ = 1;
      } else {
        ++col_;
      }
      ++pos_;
    }
  }

  void skip_trivia() {
    for (;;) {
      while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) advance();
      if (peek() == '(' && peek(1) == '*') {
        skip_comment();
        continue;
      }
      return;
    }
  }

  void skip_comment() {
    Loc start = here();
    int depth = 0;
    do {
      if (pos_ >= src_.size()) throw CompileError(start, "unterminated comment");
      if (peek() == '(' && peek(1) == '*') {
        ++depth;
        advance(2);
      } else if (peek() == '*' && peek(1) == ')') {
        --depth;
        advance(2);
      } else {
        advance();
      }
    } while (depth > 0);
  }

  Token number(Loc loc) {
    std::size_t start = pos_;
    while (std::isdigit(static_cast<unsigned char>(peek()))) advance();
    bool is_float = false;
    if (peek() == '.' && peek(1) != '(') {
      is_float = true;
      advance();
      while (std::isdigit(static_cast<unsigned char>(peek()))) advance();
      if (peek() == 'e' || peek() == 'E') {
        std::size_t save_pos = pos_;
        std::size_t save_col = col_;
        advance();
        if (peek() == '+' || peek() == '-') advance();
        if (!std::isdigit(static_cast<unsigned char>(peek()))) {
          pos_ = save_pos;
          col_ = save_col;
        } else {
          while (std::isdigit(static_cast<unsigned char>(peek()))) advance();
        }
      }
    }
    std::string text(src_.substr(start, pos_ - start));
    Token tok{is_float ? Tok::Float : Tok::Int, text, loc};
    if (is_float) {
      auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), tok.float_value);
      if (ec != std::errc{} || !std::isfinite(tok.float_value))
        throw CompileError(loc, "float literal out of range: " + text);
    } else {
      auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), tok.int_value);
      if (ec != std::errc{} || tok.int_value > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max()) + 1)
        throw CompileError(loc, "integer literal out of range: " + text);
    }
    return tok;
  }

  Token next_token(Loc loc) {
    char c = peek();
    if (std::isdigit(static_cast<unsigned char>(c))) return number(loc);
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (is_ident_char(peek())) advance();
      std::string text(src_.substr(start, pos_ - start));
      if (auto it = keywords().find(text); it != keywords().end()) return Token{it->second, text, loc};
      return Token{std::isupper(static_cast<unsigned char>(c)) ? Tok::UIdent : Tok::LIdent, text, loc};
    }
    if (c == '\'' && std::isalpha(static_cast<unsigned char>(peek(1)))) {
      std::size_t start = pos_;
      advance();
      while (is_ident_char(peek())) advance();
      return Token{Tok::TyVar, std::string(src_.substr(start, pos_ - start)), loc};
    }

    struct Punct {
      std::string_view text;
      Tok kind;
    };
    // Longest match first.
    static constexpr Punct puncts[] = {
        {";;", Tok::SemiSemi}, {"[|", Tok::ArrOpen}, {"|]", Tok::ArrClose}, {"->", Tok::Arrow},
        {"<-", Tok::Assign},   {"<=", Tok::Le},      {">=", Tok::Ge},       {"&&", Tok::AndAnd},
        {"||", Tok::OrOr},     {"+.", Tok::PlusDot}, {"-.", Tok::MinusDot}, {"*.", Tok::StarDot},
        {"/.", Tok::SlashDot}, {"(", Tok::LParen},   {")", Tok::RParen},    {",", Tok::Comma},
        {";", Tok::Semi},      {".", Tok::Dot},      {"=", Tok::Equal},     {":", Tok::Colon},
        {"*", Tok::Star},      {"+", Tok::Plus},     {"-", Tok::Minus},     {"/", Tok::Slash},
        {"<", Tok::Lt},        {">", Tok::Gt},
    };
    for (const Punct& p : puncts) {
      if (src_.substr(pos_, p.text.size()) == p.text) {
        advance(p.text.size());
        return Token{p.kind, std::string(p.text), loc};
      }
    }
    throw CompileError(loc, std::string("unexpected character '") + c + "'");
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
};

}  // namespace

std::vector<Token> tokenize(std::string_view source) { return Lexer(source).run(); }

}  // namespace mlspec::surface

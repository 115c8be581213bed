#include "mlspec/sexpr.hpp"

#include <cctype>
#include <charconv>

#include "mlspec/errors.hpp"

namespace mlspec::sexpr {

const std::string& Sexp::text() const {
  if (!is_atom()) throw ArtifactError("expected an atom, found " + print(*this));
  return std::get<std::string>(value);
}

const std::vector<Sexp>& Sexp::items() const {
  if (!is_list()) throw ArtifactError("expected a list, found '" + std::get<std::string>(value) + "'");
  return std::get<std::vector<Sexp>>(value);
}

bool Sexp::has_head(std::string_view head) const {
  if (!is_list()) return false;
  const auto& xs = std::get<std::vector<Sexp>>(value);
  return !xs.empty() && xs[0].is_atom() && xs[0].text() == head;
}

namespace {

class Reader {
 public:
  explicit Reader(std::string_view src) : src_(src) {}

  Sexp top() {
    Sexp s = read();
    skip_space();
    if (pos_ != src_.size()) throw ArtifactError("trailing input after s-expression at offset " + std::to_string(pos_));
    return s;
  }

 private:
  void skip_space() {
    for (;;) {
      while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      if (pos_ < src_.size() && src_[pos_] == ';') {
        while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
        continue;
      }
      return;
    }
  }

  Sexp read() {
    skip_space();
    if (pos_ >= src_.size()) throw ArtifactError("unexpected end of s-expression input");
    char c = src_[pos_];
    if (c == ')') throw ArtifactError("unbalanced ')' at offset " + std::to_string(pos_));
    if (c == '(') {
      ++pos_;
      std::vector<Sexp> items;
      for (;;) {
        skip_space();
        if (pos_ >= src_.size()) throw ArtifactError("unterminated list");
        if (src_[pos_] == ')') {
          ++pos_;
          return Sexp::list(std::move(items));
        }
        items.push_back(read());
      }
    }
    std::size_t start = pos_;
    while (pos_ < src_.size() && !std::isspace(static_cast<unsigned char>(src_[pos_])) && src_[pos_] != '(' &&
           src_[pos_] != ')' && src_[pos_] != ';')
      ++pos_;
    return Sexp::atom(std::string(src_.substr(start, pos_ - start)));
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

void print_to(std::string& out, const Sexp& s) {
  if (s.is_atom()) {
    out += s.text();
    return;
  }
  out += '(';
  bool first = true;
  for (const Sexp& x : s.items()) {
    if (!first) out += ' ';
    first = false;
    print_to(out, x);
  }
  out += ')';
}

const Sexp& arg(const Sexp& s, std::size_t i, std::size_t expected) {
  const auto& xs = s.items();
  if (xs.size() != expected + 1)
    throw ArtifactError("arity mismatch in " + print(s) + ": expected " + std::to_string(expected) + " argument(s)");
  return xs[i + 1];
}

}  // namespace

Sexp parse(std::string_view text) { return Reader(text).top(); }

std::string print(const Sexp& s) {
  std::string out;
  print_to(out, s);
  return out;
}

std::uint64_t parse_uint(const Sexp& s) {
  const std::string& t = s.text();
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || ptr != t.data() + t.size()) throw ArtifactError("expected a non-negative integer, found '" + t + "'");
  return v;
}

Sexp type_to_sexp(const Ty& t) {
  switch (t.tag()) {
    case Ty::Tag::Int: return Sexp::atom("int");
    case Ty::Tag::Float: return Sexp::atom("float");
    case Ty::Tag::Bool: return Sexp::atom("bool");
    case Ty::Tag::Unit: return Sexp::atom("unit");
    case Ty::Tag::Var: return Sexp::list({Sexp::atom("tvar"), Sexp::atom(std::to_string(t.var_id().value))});
    case Ty::Tag::Array: return Sexp::list({Sexp::atom("array"), type_to_sexp(t.elem())});
    case Ty::Tag::Arrow: return Sexp::list({Sexp::atom("arrow"), type_to_sexp(t.from()), type_to_sexp(t.to())});
    case Ty::Tag::Tuple: {
      std::vector<Sexp> items{Sexp::atom("tuple")};
      for (const Ty& a : t.args()) items.push_back(type_to_sexp(a));
      return Sexp::list(std::move(items));
    }
  }
  return Sexp::atom("?");
}

Ty type_from_sexp(const Sexp& s) {
  if (s.is_atom()) {
    const std::string& t = s.text();
    if (t == "int") return Ty::int_();
    if (t == "float") return Ty::float_();
    if (t == "bool") return Ty::bool_();
    if (t == "unit") return Ty::unit();
    throw ArtifactError("unknown type '" + t + "'");
  }
  const auto& xs = s.items();
  if (xs.empty() || !xs[0].is_atom()) throw ArtifactError("malformed type " + print(s));
  const std::string& head = xs[0].text();
  if (head == "tvar") return Ty::var(TyVarId{static_cast<std::uint32_t>(parse_uint(arg(s, 0, 1)))});
  if (head == "array") return Ty::array(type_from_sexp(arg(s, 0, 1)));
  if (head == "arrow") return Ty::arrow(type_from_sexp(arg(s, 0, 2)), type_from_sexp(arg(s, 1, 2)));
  if (head == "tuple") {
    if (xs.size() < 3) throw ArtifactError("tuple type needs at least two components");
    std::vector<Ty> parts;
    for (std::size_t i = 1; i < xs.size(); ++i) parts.push_back(type_from_sexp(xs[i]));
    return Ty::tuple(std::move(parts));
  }
  throw ArtifactError("unknown type constructor '" + head + "'");
}

Sexp scheme_to_sexp(const TypeScheme& s) {
  std::vector<Sexp> ids;
  for (TyVarId q : s.quantified) ids.push_back(Sexp::atom(std::to_string(q.value)));
  return Sexp::list({Sexp::atom("forall"), Sexp::list(std::move(ids)), type_to_sexp(s.body)});
}

TypeScheme scheme_from_sexp(const Sexp& s) {
  if (!s.has_head("forall")) throw ArtifactError("expected (forall ...), found " + print(s));
  TypeScheme out;
  for (const Sexp& id : arg(s, 0, 2).items())
    out.quantified.insert(TyVarId{static_cast<std::uint32_t>(parse_uint(id))});
  out.body = type_from_sexp(arg(s, 1, 2));
  for (TyVarId q : out.quantified)
    if (!occurs_in(q, out.body)) throw ArtifactError("quantified variable " + std::to_string(q.value) + " not in scheme body");
  return out;
}

}  // namespace mlspec::sexpr

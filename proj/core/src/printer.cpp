#include <array>
#include <charconv>
#include <cmath>
#include <cstring>
#include <sstream>

#include "mlspec/surface.hpp"

namespace mlspec::surface {

namespace {

std::string float_text(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  std::string s(buf.data(), ptr);
  if (s.find_first_of(".n") != std::string::npos) return s;  // has a point, or inf/nan
  auto e = s.find('e');
  if (e == std::string::npos) return s + ".";
  return s.insert(e, ".");
}

void print_param(std::ostream& os, const Param& p) {
  switch (p.kind) {
    case Param::Kind::Name: os << p.names[0]; break;
    case Param::Kind::Unit: os << "()"; break;
    case Param::Kind::Tuple:
      os << '(';
      for (std::size_t i = 0; i < p.names.size(); ++i) os << (i ? ", " : "") << p.names[i];
      os << ')';
      break;
  }
}

void print_params(std::ostream& os, const std::vector<Param>& ps) {
  for (const Param& p : ps) {
    os << ' ';
    print_param(os, p);
  }
}

void print(std::ostream& os, const Expr& e);

struct PrintVisitor {
  std::ostream& os;

  void operator()(const IntLit& n) const {
    if (n.value < 0)
      os << '(' << n.value << ')';
    else
      os << n.value;
  }
  void operator()(const FloatLit& n) const {
    if (std::signbit(n.value))
      os << "(-" << float_text(-n.value) << ')';
    else
      os << float_text(n.value);
  }
  void operator()(const BoolLit& n) const { os << (n.value ? "true" : "false"); }
  void operator()(const UnitLit&) const { os << "()"; }
  void operator()(const Var& n) const { os << n.name; }
  void operator()(const QualVar& n) const { os << n.unit << '.' << n.name; }
  void operator()(const Lambda& n) const {
    os << "(fun";
    print_params(os, n.params);
    os << " -> ";
    print(os, *n.body);
    os << ')';
  }
  void operator()(const App& n) const {
    os << '(';
    print(os, *n.fn);
    os << ' ';
    print(os, *n.arg);
    os << ')';
  }
  void operator()(const Let& n) const {
    os << "(let " << (n.recursive ? "rec " : "") << n.name;
    print_params(os, n.params);
    os << " = ";
    print(os, *n.bound);
    os << " in ";
    print(os, *n.body);
    os << ')';
  }
  void operator()(const If& n) const {
    os << "(if ";
    print(os, *n.cond);
    os << " then ";
    print(os, *n.then_branch);
    os << " else ";
    print(os, *n.else_branch);
    os << ')';
  }
  void operator()(const Binary& n) const {
    os << '(';
    print(os, *n.lhs);
    os << ' ' << spelling(n.op) << ' ';
    print(os, *n.rhs);
    os << ')';
  }
  void operator()(const Get& n) const {
    print(os, *n.array);
    os << ".(";
    print(os, *n.index);
    os << ')';
  }
  void operator()(const Set& n) const {
    os << '(';
    print(os, *n.array);
    os << ".(";
    print(os, *n.index);
    os << ") <- ";
    print(os, *n.value);
    os << ')';
  }
  void operator()(const ArrayLit& n) const {
    os << "[|";
    for (std::size_t i = 0; i < n.elements.size(); ++i) {
      if (i) os << "; ";
      print(os, *n.elements[i]);
    }
    os << "|]";
  }
  void operator()(const Tuple& n) const {
    os << '(';
    for (std::size_t i = 0; i < n.elements.size(); ++i) {
      if (i) os << ", ";
      print(os, *n.elements[i]);
    }
    os << ')';
  }
  void operator()(const Seq& n) const {
    os << '(';
    print(os, *n.first);
    os << "; ";
    print(os, *n.second);
    os << ')';
  }
};

void print(std::ostream& os, const Expr& e) { std::visit(PrintVisitor{os}, e.node); }

bool same_float(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

bool eq(const ExprPtr& a, const ExprPtr& b) { return structurally_equal(*a, *b); }

bool eq(const std::vector<ExprPtr>& a, const std::vector<ExprPtr>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!eq(a[i], b[i])) return false;
  return true;
}

struct EqVisitor {
  bool operator()(const IntLit& a, const IntLit& b) const { return a.value == b.value; }
  bool operator()(const FloatLit& a, const FloatLit& b) const { return same_float(a.value, b.value); }
  bool operator()(const BoolLit& a, const BoolLit& b) const { return a.value == b.value; }
  bool operator()(const UnitLit&, const UnitLit&) const { return true; }
  bool operator()(const Var& a, const Var& b) const { return a.name == b.name; }
  bool operator()(const QualVar& a, const QualVar& b) const { return a.unit == b.unit && a.name == b.name; }
  bool operator()(const Lambda& a, const Lambda& b) const { return a.params == b.params && eq(a.body, b.body); }
  bool operator()(const App& a, const App& b) const { return eq(a.fn, b.fn) && eq(a.arg, b.arg); }
  bool operator()(const Let& a, const Let& b) const {
    return a.recursive == b.recursive && a.name == b.name && a.params == b.params && eq(a.bound, b.bound) &&
           eq(a.body, b.body);
  }
  bool operator()(const If& a, const If& b) const {
    return eq(a.cond, b.cond) && eq(a.then_branch, b.then_branch) && eq(a.else_branch, b.else_branch);
  }
  bool operator()(const Binary& a, const Binary& b) const {
    return a.op == b.op && eq(a.lhs, b.lhs) && eq(a.rhs, b.rhs);
  }
  bool operator()(const Get& a, const Get& b) const { return eq(a.array, b.array) && eq(a.index, b.index); }
  bool operator()(const Set& a, const Set& b) const {
    return eq(a.array, b.array) && eq(a.index, b.index) && eq(a.value, b.value);
  }
  bool operator()(const ArrayLit& a, const ArrayLit& b) const { return eq(a.elements, b.elements); }
  bool operator()(const Tuple& a, const Tuple& b) const { return eq(a.elements, b.elements); }
  bool operator()(const Seq& a, const Seq& b) const { return eq(a.first, b.first) && eq(a.second, b.second); }
  template <typename A, typename B>
  bool operator()(const A&, const B&) const {
    return false;
  }
};

}  // namespace

std::string print_expr(const Expr& e) {
  std::ostringstream os;
  print(os, e);
  return os.str();
}

std::string print_unit(const SurfaceUnit& u) {
  std::ostringstream os;
  for (const Item& item : u.items) {
    if (const auto* o = std::get_if<Open>(&item.node)) {
      os << "open " << o->unit << '\n';
    } else {
      const auto& let = std::get<TopLet>(item.node);
      os << "let " << (let.recursive ? "rec " : "") << let.name;
      print_params(os, let.params);
      os << " = ";
      print(os, *let.bound);
      os << "\n;;\n";
    }
  }
  return os.str();
}

bool structurally_equal(const Expr& a, const Expr& b) { return std::visit(EqVisitor{}, a.node, b.node); }

bool structurally_equal(const SurfaceUnit& a, const SurfaceUnit& b) {
  if (a.unit_name != b.unit_name || a.items.size() != b.items.size()) return false;
  for (std::size_t i = 0; i < a.items.size(); ++i) {
    const Item& x = a.items[i];
    const Item& y = b.items[i];
    if (x.node.index() != y.node.index()) return false;
    if (const auto* o = std::get_if<Open>(&x.node)) {
      if (o->unit != std::get<Open>(y.node).unit) return false;
      continue;
    }
    const auto& l = std::get<TopLet>(x.node);
    const auto& r = std::get<TopLet>(y.node);
    if (l.recursive != r.recursive || l.name != r.name || l.params != r.params || !eq(l.bound, r.bound))
      return false;
  }
  return true;
}

}  // namespace mlspec::surface

#include "mlspec/runtime.hpp"

#include <charconv>
#include <cmath>
#include <compare>
#include <exception>
#include <limits>
#include <ostream>
#include <unordered_map>

#include <json.hpp>
#include <pthread.h>

#include "mlspec/errors.hpp"

namespace mlspec::runtime {

using namespace mlspec::ir;

std::string_view repr_name(ArrayCell::Repr r) {
  switch (r) {
    case ArrayCell::Repr::Int: return "IntRepr";
    case ArrayCell::Repr::Float: return "FloatRepr";
    case ArrayCell::Repr::Addr: return "AddrRepr";
  }
  return "?";
}

ArrayCell::ArrayCell(Repr repr, std::size_t length, const Value& init) : repr_(repr), length_(length) {
  switch (repr) {
    case Repr::Int:
      ints_.assign(length, 0);
      if (init.as<bool>()) immediate_ = Immediate::Bool;
      if (init.as<std::monostate>()) immediate_ = Immediate::Unit;
      break;
    case Repr::Float: floats_.assign(length, 0.0); break;
    case Repr::Addr: addrs_.assign(length, init); return;
  }
  for (std::size_t i = 0; i < length; ++i) store(i, init);
}

Value ArrayCell::load(std::size_t i) const {
  switch (repr_) {
    case Repr::Int:
      switch (immediate_) {
        case Immediate::Int: return Value::int_(ints_[i]);
        case Immediate::Bool: return Value::bool_(ints_[i] != 0);
        case Immediate::Unit: return Value::unit();
      }
      break;
    case Repr::Float: return Value::float_(floats_[i]);
    case Repr::Addr: return addrs_[i];
  }
  return Value::unit();
}

void ArrayCell::store(std::size_t i, const Value& v) {
  switch (repr_) {
    case Repr::Int:
      if (const auto* x = v.as<std::int64_t>()) {
        ints_[i] = *x;
      } else if (const auto* b = v.as<bool>()) {
        ints_[i] = *b ? 1 : 0;
      } else if (v.as<std::monostate>()) {
        ints_[i] = 0;
      } else {
        throw KindSoundnessViolation("storing a non-immediate value into an IntRepr array");
      }
      return;
    case Repr::Float:
      if (const auto* x = v.as<double>()) {
        floats_[i] = *x;
        return;
      }
      throw KindSoundnessViolation("storing a non-float value into a FloatRepr array");
    case Repr::Addr: addrs_[i] = v; return;
  }
}

std::uint64_t AccessStats::gen_pct_tenths() const {
  std::uint64_t total = all();
  if (total == 0) return 0;
  return (gen() * 1000 + total / 2) / total;
}

Value make_array(const ArrayKind& kind, std::int64_t length, const Value& init) {
  if (length < 0) throw RuntimeError("Array.make: negative length " + std::to_string(length));
  auto n = static_cast<std::size_t>(length);
  ArrayCell::Repr repr;
  switch (kind.tag()) {
    case ArrayKind::Tag::Int:
      if (!init.is_immediate()) throw KindSoundnessViolation("int array created with a non-immediate initializer");
      repr = ArrayCell::Repr::Int;
      break;
    case ArrayKind::Tag::Float:
      if (!init.is_float()) throw KindSoundnessViolation("float array created with a non-float initializer");
      repr = ArrayCell::Repr::Float;
      break;
    case ArrayKind::Tag::Addr: repr = ArrayCell::Repr::Addr; break;
    default:
      if (n == 0)
        repr = ArrayCell::Repr::Addr;
      else if (init.is_float())
        repr = ArrayCell::Repr::Float;
      else if (init.is_immediate())
        repr = ArrayCell::Repr::Int;
      else
        repr = ArrayCell::Repr::Addr;
  }
  return Value{std::make_shared<ArrayCell>(repr, n, init)};
}

std::string format_float(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  std::string s(buf, ptr);
  if (s.find_first_not_of("-0123456789") == std::string::npos) s += '.';
  return s;
}

namespace {

std::partial_ordering compare(const Value& a, const Value& b);

std::partial_ordering compare_seq(std::size_t n, auto&& at_a, auto&& at_b) {
  for (std::size_t i = 0; i < n; ++i) {
    auto c = compare(at_a(i), at_b(i));
    if (c != std::partial_ordering::equivalent) return c;
  }
  return std::partial_ordering::equivalent;
}

std::partial_ordering compare(const Value& a, const Value& b) {
  if (const auto* x = a.as<std::int64_t>()) return *x <=> *b.as<std::int64_t>();
  if (const auto* x = a.as<double>()) return *x <=> *b.as<double>();
  if (const auto* x = a.as<bool>()) return *x <=> *b.as<bool>();
  if (a.as<std::monostate>()) return std::partial_ordering::equivalent;
  if (const auto* x = a.as<std::shared_ptr<const TupleValue>>()) {
    const auto& y = *b.as<std::shared_ptr<const TupleValue>>();
    return compare_seq((*x)->elements.size(), [&](std::size_t i) { return (*x)->elements[i]; },
                       [&](std::size_t i) { return y->elements[i]; });
  }
  if (const auto* x = a.as<std::shared_ptr<ArrayCell>>()) {
    const auto& y = *b.as<std::shared_ptr<ArrayCell>>();
    if ((*x)->length() != y->length()) return (*x)->length() <=> y->length();
    return compare_seq((*x)->length(), [&](std::size_t i) { return (*x)->load(i); },
                       [&](std::size_t i) { return y->load(i); });
  }
  throw RuntimeError("compare: functional value");
}

constexpr std::size_t kMaxDepth = 100000;
constexpr std::size_t kEvalStackBytes = std::size_t{512} << 20;

// Runs `fn` on a thread with a stack large enough for kMaxDepth nested evaluations.
template <typename F>
void with_large_stack(F& fn) {
  pthread_attr_t attr;
  pthread_attr_init(&attr);
  pthread_attr_setstacksize(&attr, kEvalStackBytes);
  pthread_t thread;
  auto trampoline = [](void* p) -> void* {
    (*static_cast<F*>(p))();
    return nullptr;
  };
  int rc = pthread_create(&thread, &attr, trampoline, &fn);
  pthread_attr_destroy(&attr);
  if (rc != 0) {
    fn();
    return;
  }
  pthread_join(thread, nullptr);
}

class Evaluator {
 public:
  explicit Evaluator(const EvalOptions& options) : options_(options) {}

  EvalResult run(const std::vector<IrUnit>& units) {
    for (const IrUnit& u : units) {
      auto& table = globals_[u.name];
      for (const Binding& b : u.bindings) table[b.name] = eval(b.term, nullptr);
    }
    return EvalResult{std::move(output_), stats_};
  }

 private:
  void emit(std::string_view s) {
    output_ += s;
    if (options_.echo) *options_.echo << s;
  }

  static Env bind(Env env, const std::string& name, Value v) {
    return std::make_shared<const Frame>(Frame{name, std::move(v), std::move(env)});
  }

  static const Value& lookup(const Env& env, const std::string& name) {
    for (const Frame* f = env.get(); f; f = f->next.get())
      if (f->name == name) return f->value;
    throw InternalError("unbound local '" + name + "' at runtime");
  }

  const Value& global(const GlobalVar& g) const {
    auto u = globals_.find(g.unit);
    if (u != globals_.end()) {
      auto it = u->second.find(g.name);
      if (it != u->second.end()) return it->second;
    }
    throw RuntimeError("unresolved global " + g.unit + "." + g.name);
  }

  static std::int64_t as_int(const Value& v) {
    if (const auto* x = v.as<std::int64_t>()) return *x;
    throw InternalError("expected an int value, found " + value_to_string(v));
  }
  static double as_float(const Value& v) {
    if (const auto* x = v.as<double>()) return *x;
    throw InternalError("expected a float value, found " + value_to_string(v));
  }
  static bool as_bool(const Value& v) {
    if (const auto* x = v.as<bool>()) return *x;
    throw InternalError("expected a bool value, found " + value_to_string(v));
  }
  static ArrayCell& as_array(const Value& v) {
    if (const auto* x = v.as<std::shared_ptr<ArrayCell>>()) return **x;
    throw InternalError("expected an array value, found " + value_to_string(v));
  }

  std::size_t checked_index(const ArrayCell& a, const Value& index) const {
    std::int64_t i = as_int(index);
    if (i < 0 || static_cast<std::uint64_t>(i) >= a.length())
      throw RuntimeError("index out of bounds: " + std::to_string(i) + " not in [0, " + std::to_string(a.length()) + ")");
    return static_cast<std::size_t>(i);
  }

  void count(AccessCounts& counts, const ArrayKind& kind, const ArrayCell& a, bool read) {
    if (kind.is_generic()) {
      ++counts.gen;
      if (read && a.repr() == ArrayCell::Repr::Float) ++stats_.float_boxings;
      return;
    }
    ArrayCell::Repr expected = kind.tag() == ArrayKind::Tag::Int     ? ArrayCell::Repr::Int
                               : kind.tag() == ArrayKind::Tag::Float ? ArrayCell::Repr::Float
                                                                     : ArrayCell::Repr::Addr;
    if (a.repr() != expected)
      throw KindSoundnessViolation(std::string(read ? "read" : "write") + " with kind " + print_kind(kind) + " on a " +
                                   std::string(repr_name(a.repr())) + " array");
    switch (kind.tag()) {
      case ArrayKind::Tag::Int: ++counts.spec_int; break;
      case ArrayKind::Tag::Float: ++counts.spec_float; break;
      default: ++counts.spec_addr; break;
    }
  }

  Value prim(PrimOp op, const std::vector<Value>& a) {
    auto wrap = [](std::uint64_t x) { return Value::int_(static_cast<std::int64_t>(x)); };
    switch (op) {
      case PrimOp::AddI: return wrap(static_cast<std::uint64_t>(as_int(a[0])) + static_cast<std::uint64_t>(as_int(a[1])));
      case PrimOp::SubI: return wrap(static_cast<std::uint64_t>(as_int(a[0])) - static_cast<std::uint64_t>(as_int(a[1])));
      case PrimOp::MulI: return wrap(static_cast<std::uint64_t>(as_int(a[0])) * static_cast<std::uint64_t>(as_int(a[1])));
      case PrimOp::DivI:
      case PrimOp::ModI: {
        std::int64_t x = as_int(a[0]);
        std::int64_t y = as_int(a[1]);
        if (y == 0) throw RuntimeError("division by zero");
        if (y == -1) return op == PrimOp::DivI ? wrap(0 - static_cast<std::uint64_t>(x)) : Value::int_(0);
        return Value::int_(op == PrimOp::DivI ? x / y : x % y);
      }
      case PrimOp::AddF: return Value::float_(as_float(a[0]) + as_float(a[1]));
      case PrimOp::SubF: return Value::float_(as_float(a[0]) - as_float(a[1]));
      case PrimOp::MulF: return Value::float_(as_float(a[0]) * as_float(a[1]));
      case PrimOp::DivF: return Value::float_(as_float(a[0]) / as_float(a[1]));
      case PrimOp::Eq: return Value::bool_(compare(a[0], a[1]) == std::partial_ordering::equivalent);
      case PrimOp::Lt: return Value::bool_(compare(a[0], a[1]) == std::partial_ordering::less);
      case PrimOp::Gt: return Value::bool_(compare(a[0], a[1]) == std::partial_ordering::greater);
      case PrimOp::Le: {
        auto c = compare(a[0], a[1]);
        return Value::bool_(c == std::partial_ordering::less || c == std::partial_ordering::equivalent);
      }
      case PrimOp::Ge: {
        auto c = compare(a[0], a[1]);
        return Value::bool_(c == std::partial_ordering::greater || c == std::partial_ordering::equivalent);
      }
      case PrimOp::PrintInt: emit(std::to_string(as_int(a[0]))); return Value::unit();
      case PrimOp::PrintFloat: emit(format_float(as_float(a[0]))); return Value::unit();
      case PrimOp::Newline: emit("\n"); return Value::unit();
      case PrimOp::FloatOfInt: return Value::float_(static_cast<double>(as_int(a[0])));
      case PrimOp::IntOfFloat: {
        double x = as_float(a[0]);
        if (!(std::fabs(x) < 9.2e18)) return Value::int_(std::numeric_limits<std::int64_t>::min());
        return Value::int_(static_cast<std::int64_t>(x));
      }
    }
    throw InternalError("unknown primitive");
  }

  void tick() {
    if (++steps_ > options_.step_budget) throw RuntimeError("step budget exceeded");
  }

  Value eval(TermPtr t, Env env) {
    struct DepthGuard {
      std::size_t& d;
      explicit DepthGuard(std::size_t& depth) : d(depth) {
        if (++d > kMaxDepth) {
          --d;
          throw RuntimeError("stack overflow");
        }
      }
      ~DepthGuard() { --d; }
    } guard(depth_);

    for (;;) {
      tick();
      const Term& term = *t;
      if (const auto* c = term.as<Const>()) {
        return std::visit(
            [](const auto& x) -> Value {
              using T = std::decay_t<decltype(x)>;
              if constexpr (std::is_same_v<T, std::monostate>)
                return Value::unit();
              else
                return Value{x};
            },
            c->value);
      }
      if (const auto* v = term.as<Var>()) return lookup(env, v->name);
      if (const auto* g = term.as<GlobalVar>()) return global(*g);
      if (const auto* sp = term.as<Specialized>()) {
        t = sp->inner;
        continue;
      }
      if (const auto* f = term.as<Fun>()) {
        return Value{std::make_shared<const Closure>(Closure{f->params, f->body, env, {}, {}})};
      }
      if (const auto* l = term.as<Let>()) {
        if (l->recursive) {
          const auto* f = l->bound->as<Fun>();
          if (!f) throw InternalError("let rec of a non-function");
          env = bind(env, l->name, Value{std::make_shared<const Closure>(Closure{f->params, f->body, env, l->name, {}})});
        } else {
          Value bound = eval(l->bound, env);
          env = bind(env, l->name, std::move(bound));
        }
        t = l->body;
        continue;
      }
      if (const auto* i = term.as<If>()) {
        t = as_bool(eval(i->cond, env)) ? i->then_branch : i->else_branch;
        continue;
      }
      if (const auto* s = term.as<Seq>()) {
        eval(s->first, env);
        t = s->second;
        continue;
      }
      if (const auto* app = term.as<App>()) {
        Value fn = eval(app->fn, env);
        std::vector<Value> args;
        args.reserve(app->args.size());
        for (const TermPtr& a : app->args) args.push_back(eval(a, env));
        for (;;) {
          const auto* cp = fn.as<std::shared_ptr<const Closure>>();
          if (!cp) throw InternalError("application of a non-function value");
          const Closure& c = **cp;
          std::vector<Value> all = c.applied;
          all.insert(all.end(), std::make_move_iterator(args.begin()), std::make_move_iterator(args.end()));
          if (all.size() < c.params.size()) {
            return Value{std::make_shared<const Closure>(Closure{c.params, c.body, c.env, c.self_name, std::move(all)})};
          }
          Env callee_env = c.env;
          if (!c.self_name.empty()) callee_env = bind(callee_env, c.self_name, fn);
          for (std::size_t k = 0; k < c.params.size(); ++k) callee_env = bind(callee_env, c.params[k], all[k]);
          if (all.size() == c.params.size()) {
            t = c.body;
            env = std::move(callee_env);
            break;
          }
          fn = eval(c.body, callee_env);
          args.assign(all.begin() + static_cast<std::ptrdiff_t>(c.params.size()), all.end());
          tick();
        }
        continue;
      }
      if (const auto* p = term.as<Prim>()) {
        std::vector<Value> args;
        args.reserve(p->args.size());
        for (const TermPtr& a : p->args) args.push_back(eval(a, env));
        return prim(p->op, args);
      }
      if (const auto* g = term.as<ArrayGet>()) {
        Value arr = eval(g->array, env);
        Value idx = eval(g->index, env);
        ArrayCell& a = as_array(arr);
        std::size_t i = checked_index(a, idx);
        count(stats_.reads, g->kind, a, true);
        return a.load(i);
      }
      if (const auto* s = term.as<ArraySet>()) {
        Value arr = eval(s->array, env);
        Value idx = eval(s->index, env);
        Value val = eval(s->value, env);
        ArrayCell& a = as_array(arr);
        std::size_t i = checked_index(a, idx);
        count(stats_.writes, s->kind, a, false);
        a.store(i, val);
        return Value::unit();
      }
      if (const auto* m = term.as<ArrayMake>()) {
        Value n = eval(m->length, env);
        Value init = eval(m->init, env);
        return make_array(m->kind, as_int(n), init);
      }
      if (const auto* lit = term.as<ArrayLit>()) {
        std::vector<Value> elems;
        elems.reserve(lit->elements.size());
        for (const TermPtr& e : lit->elements) elems.push_back(eval(e, env));
        Value out = make_array(lit->kind, static_cast<std::int64_t>(elems.size()),
                               !elems.empty()                          ? elems.front()
                               : lit->kind.tag() == ArrayKind::Tag::Float ? Value::float_(0.0)
                                                                          : Value::unit());
        ArrayCell& a = as_array(out);
        for (std::size_t k = 0; k < elems.size(); ++k) a.store(k, elems[k]);
        return out;
      }
      if (const auto* len = term.as<ArrayLen>()) {
        return Value::int_(static_cast<std::int64_t>(as_array(eval(len->array, env)).length()));
      }
      if (const auto* tup = term.as<Tuple>()) {
        auto out = std::make_shared<TupleValue>();
        out->elements.reserve(tup->elements.size());
        for (const TermPtr& e : tup->elements) out->elements.push_back(eval(e, env));
        return Value{std::shared_ptr<const TupleValue>(std::move(out))};
      }
      if (const auto* proj = term.as<TupleProj>()) {
        Value v = eval(proj->tuple, env);
        const auto* tv = v.as<std::shared_ptr<const TupleValue>>();
        if (!tv || proj->index >= (*tv)->elements.size()) throw InternalError("bad tuple projection");
        return (*tv)->elements[proj->index];
      }
      throw InternalError("unhandled IR node");
    }
  }

  EvalOptions options_;
  std::unordered_map<std::string, std::unordered_map<std::string, Value>> globals_;
  std::string output_;
  AccessStats stats_;
  std::uint64_t steps_ = 0;
  std::size_t depth_ = 0;
};

nlohmann::ordered_json counts_json(const AccessCounts& c) {
  return nlohmann::ordered_json{{"all", c.all()},
                                {"gen", c.gen},
                                {"spec_int", c.spec_int},
                                {"spec_float", c.spec_float},
                                {"spec_addr", c.spec_addr}};
}

}  // namespace

EvalResult eval_program(const std::vector<IrUnit>& units, const EvalOptions& options) {
  EvalResult result;
  std::exception_ptr error;
  auto job = [&] {
    try {
      result = Evaluator(options).run(units);
    } catch (...) {
      error = std::current_exception();
    }
  };
  with_large_stack(job);
  if (error) std::rethrow_exception(error);
  return result;
}

std::string report_stats(const AccessStats& s, StatsFormat format) {
  std::uint64_t tenths = s.gen_pct_tenths();
  if (format == StatsFormat::Json) {
    nlohmann::ordered_json j{{"all", s.all()},
                             {"gen", s.gen()},
                             {"spec_int", s.spec_int()},
                             {"spec_float", s.spec_float()},
                             {"spec_addr", s.spec_addr()},
                             {"gen_pct", static_cast<double>(tenths) / 10.0},
                             {"float_boxings", s.float_boxings},
                             {"reads", counts_json(s.reads)},
                             {"writes", counts_json(s.writes)}};
    return j.dump() + "\n";
  }
  std::string pct = std::to_string(tenths / 10) + "." + std::to_string(tenths % 10);
  std::string out = "all\tgen\tspec_int\tspec_float\tspec_addr\tgen_pct\tfloat_boxings\n";
  for (std::uint64_t v : {s.all(), s.gen(), s.spec_int(), s.spec_float(), s.spec_addr()}) out += std::to_string(v) + "\t";
  out += pct + "\t" + std::to_string(s.float_boxings) + "\n";
  return out;
}

std::string value_to_string(const Value& v) {
  if (const auto* x = v.as<std::int64_t>()) return std::to_string(*x);
  if (const auto* x = v.as<double>()) return format_float(*x);
  if (const auto* x = v.as<bool>()) return *x ? "true" : "false";
  if (v.as<std::monostate>()) return "()";
  if (const auto* x = v.as<std::shared_ptr<const TupleValue>>()) {
    std::string out = "(";
    for (std::size_t i = 0; i < (*x)->elements.size(); ++i) {
      if (i) out += ", ";
      out += value_to_string((*x)->elements[i]);
    }
    return out + ")";
  }
  if (const auto* x = v.as<std::shared_ptr<ArrayCell>>()) {
    std::string out = "[|";
    for (std::size_t i = 0; i < (*x)->length(); ++i) {
      if (i) out += "; ";
      out += value_to_string((*x)->load(i));
    }
    return out + "|]";
  }
  return "<fun>";
}

}  // namespace mlspec::runtime

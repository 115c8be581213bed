#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "mlspec/ir.hpp"

namespace mlspec::runtime {

struct TupleValue;
struct Closure;
class ArrayCell;

struct Value {
  std::variant<std::int64_t, double, bool, std::monostate, std::shared_ptr<const TupleValue>,
               std::shared_ptr<const Closure>, std::shared_ptr<ArrayCell>>
      v;

  static Value int_(std::int64_t x) { return Value{x}; }
  static Value float_(double x) { return Value{x}; }
  static Value bool_(bool x) { return Value{x}; }
  static Value unit() { return Value{std::monostate{}}; }

  template <typename T>
  const T* as() const { return std::get_if<T>(&v); }
  bool is_float() const { return v.index() == 1; }
  bool is_immediate() const { return v.index() <= 3 && v.index() != 1; }
};

struct TupleValue {
  std::vector<Value> elements;
};

struct Frame;
using Env = std::shared_ptr<const Frame>;
struct Frame {
  std::string name;
  Value value;
  Env next;
};

struct Closure {
  std::vector<std::string> params;
  ir::TermPtr body;
  Env env;
  std::string self_name;       // non-empty for local `let rec`
  std::vector<Value> applied;  // arguments of a partial application
};

/// Array storage with a representation fixed at creation.
class ArrayCell {
 public:
  enum class Repr : std::uint8_t { Int, Float, Addr };
  /// What an IntRepr array holds; all three are immediates.
  enum class Immediate : std::uint8_t { Int, Bool, Unit };

  ArrayCell(Repr repr, std::size_t length, const Value& init);

  Repr repr() const { return repr_; }
  std::size_t length() const { return length_; }

  /// Unchecked against kinds; throws KindSoundnessViolation if `v` cannot
  /// live in this representation.
  Value load(std::size_t i) const;
  void store(std::size_t i, const Value& v);

 private:
  Repr repr_;
  Immediate immediate_ = Immediate::Int;
  std::size_t length_;
  std::vector<std::int64_t> ints_;
  std::vector<double> floats_;
  std::vector<Value> addrs_;
};

std::string_view repr_name(ArrayCell::Repr r);

struct AccessCounts {
  std::uint64_t gen = 0;
  std::uint64_t spec_int = 0;
  std::uint64_t spec_float = 0;
  std::uint64_t spec_addr = 0;

  std::uint64_t all() const { return gen + spec_int + spec_float + spec_addr; }
  friend bool operator==(const AccessCounts&, const AccessCounts&) = default;
};

struct AccessStats {
  AccessCounts reads;
  AccessCounts writes;
  std::uint64_t float_boxings = 0;

  std::uint64_t all() const { return reads.all() + writes.all(); }
  std::uint64_t gen() const { return reads.gen + writes.gen; }
  std::uint64_t spec_int() const { return reads.spec_int + writes.spec_int; }
  std::uint64_t spec_float() const { return reads.spec_float + writes.spec_float; }
  std::uint64_t spec_addr() const { return reads.spec_addr + writes.spec_addr; }
  /// Tenths of a percent, rounded half up; 0 when no access happened.
  std::uint64_t gen_pct_tenths() const;
  double gen_pct() const { return static_cast<double>(gen_pct_tenths()) / 10.0; }

  friend bool operator==(const AccessStats&, const AccessStats&) = default;
};

/// Generic kinds pick the representation from the initializer; zero-length
/// generic arrays are AddrRepr.
Value make_array(const ir::ArrayKind& kind, std::int64_t length, const Value& init);

struct EvalOptions {
  std::uint64_t step_budget = 1'000'000'000;
  std::ostream* echo = nullptr;  // receives program output as it is produced
};

struct EvalResult {
  std::string output;
  AccessStats stats;
};

/// Evaluates the top-level bindings of `units` in order (dependencies first,
/// entry last). Throws RuntimeError or KindSoundnessViolation.
EvalResult eval_program(const std::vector<ir::IrUnit>& units, const EvalOptions& options = {});

enum class StatsFormat { Tsv, Json };
std::string report_stats(const AccessStats& stats, StatsFormat format);

/// Shortest round-trip decimal, with a trailing '.' when it would otherwise
/// read as an integer.
std::string format_float(double x);

std::string value_to_string(const Value& v);

}  // namespace mlspec::runtime

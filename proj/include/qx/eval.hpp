#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

#include "qx/expr.hpp"
#include "qx/value.hpp"

namespace qx {

/// Error codes shared by the evaluator and the wire protocol. The first
/// seven are evaluation errors; the rest only occur on the wire.
enum class ErrorCode {
  unbound_var,
  type_error,
  div_zero,
  fuel_exhausted,
  arity_error,
  empty_list,
  unliftable_result,
  parse_error,
  version_mismatch,
  overloaded,
};

/// Wire token, e.g. "div-zero".
std::string_view to_string(ErrorCode code);
std::optional<ErrorCode> error_code_from_string(std::string_view token);
bool is_eval_error_code(ErrorCode code);

struct EvalError {
  ErrorCode code;
  std::string detail;

  friend bool operator==(const EvalError& a, const EvalError& b) { return a.code == b.code; }
};

/// Thrown inside builtins; caught by evaluate().
class EvalFailure : public std::runtime_error {
 public:
  EvalFailure(ErrorCode code, const std::string& detail);
  EvalError error;
};

inline constexpr std::uint64_t kDefaultFuel = 10'000'000;

/// Step budget. Every AST node visited costs one unit.
class Fuel {
 public:
  explicit Fuel(std::uint64_t budget = kDefaultFuel);
  std::uint64_t budget() const { return budget_; }

 private:
  std::uint64_t budget_;
};

class EvalResult {
 public:
  EvalResult(Value v) : r_(std::move(v)) {}
  EvalResult(EvalError e) : r_(std::move(e)) {}

  bool ok() const { return r_.index() == 0; }
  explicit operator bool() const { return ok(); }
  const Value& value() const;
  const EvalError& error() const;
  /// Fuel units actually consumed.
  std::uint64_t steps = 0;

 private:
  std::variant<Value, EvalError> r_;
};

/// Call-by-value, left-to-right evaluation with builtins as the outermost
/// frame. Runs on an explicit continuation stack: recursion depth is bounded
/// by fuel and memory, not by the native stack.
EvalResult evaluate(const Expr& e, Fuel fuel = Fuel{});

/// Literal form of a data value. Functions, non-finite floats and lists
/// nested deeper than kMaxNesting yield unliftable-result.
std::variant<Expr, EvalError> value_to_expr(const Value& v);

/// Inverse of value_to_expr; `e` must satisfy is_literal().
Value literal_to_value(const Expr& e);

/// evaluate() followed by value_to_expr(): what a worker sends back.
std::variant<Expr, EvalError> evaluate_to_literal(const Expr& e, Fuel fuel = Fuel{});

// Builtin library.

enum class BuiltinKind { plain, map, filter, foldl };

struct Builtin {
  std::string_view name;
  int arity;
  BuiltinKind kind;
  /// Semantics for plain builtins; the machine drives the higher-order ones.
  Value (*apply)(std::span<const Value> args, std::uint64_t& fuel);
};

std::span<const Builtin> builtin_table();
const Builtin* find_builtin(std::string_view name);

}  // namespace qx

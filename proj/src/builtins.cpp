#include <array>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "qx/eval.hpp"

namespace qx {

namespace {

using Args = std::span<const Value>;

const char* type_name(const Value& v) {
  switch (v.v.index()) {
    case 0: return "int";
    case 1: return "float";
    case 2: return "bool";
    case 3: return "str";
    case 4: return "unit";
    case 5: return "list";
    default: return "function";
  }
}

[[noreturn]] void type_error(std::string_view fn, const std::string& what) {
  throw EvalFailure(ErrorCode::type_error, std::string(fn) + ": " + what);
}

[[noreturn]] void bad_operands(std::string_view fn, const Value& a, const Value& b) {
  type_error(fn, std::string("unsupported operands ") + type_name(a) + " and " + type_name(b));
}

[[noreturn]] void bad_operand(std::string_view fn, const Value& a) {
  type_error(fn, std::string("unsupported operand ") + type_name(a));
}

const std::vector<Value>& as_list(std::string_view fn, const Value& v) {
  if (auto* l = v.get_if<ListRef>()) return (*l)->items;
  type_error(fn, std::string("expected list, got ") + type_name(v));
}

std::int64_t as_int(std::string_view fn, const Value& v) {
  if (auto* i = v.get_if<std::int64_t>()) return *i;
  type_error(fn, std::string("expected int, got ") + type_name(v));
}

bool as_bool(std::string_view fn, const Value& v) {
  if (auto* b = v.get_if<bool>()) return *b;
  type_error(fn, std::string("expected bool, got ") + type_name(v));
}

// Two's-complement wrapping integer arithmetic.
std::int64_t wrap_add(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) + static_cast<std::uint64_t>(b));
}
std::int64_t wrap_sub(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) - static_cast<std::uint64_t>(b));
}
std::int64_t wrap_mul(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) * static_cast<std::uint64_t>(b));
}

template <typename IntOp, typename FloatOp>
Value arith(std::string_view fn, Args args, IntOp int_op, FloatOp float_op) {
  const Value& a = args[0];
  const Value& b = args[1];
  if (auto* x = a.get_if<std::int64_t>()) {
    if (auto* y = b.get_if<std::int64_t>()) return int_op(*x, *y);
  } else if (auto* x = a.get_if<double>()) {
    if (auto* y = b.get_if<double>()) return float_op(*x, *y);
  }
  bad_operands(fn, a, b);
}

Value b_add(Args a, std::uint64_t&) {
  return arith("add", a, wrap_add, [](double x, double y) { return x + y; });
}
Value b_sub(Args a, std::uint64_t&) {
  return arith("sub", a, wrap_sub, [](double x, double y) { return x - y; });
}
Value b_mul(Args a, std::uint64_t&) {
  return arith("mul", a, wrap_mul, [](double x, double y) { return x * y; });
}
Value b_div(Args a, std::uint64_t&) {
  return arith(
      "div", a,
      [](std::int64_t x, std::int64_t y) -> std::int64_t {
        if (y == 0) throw EvalFailure(ErrorCode::div_zero, "integer division by zero");
        if (y == -1) return wrap_sub(0, x);
        return x / y;
      },
      [](double x, double y) { return x / y; });
}
Value b_mod(Args a, std::uint64_t&) {
  return arith(
      "mod", a,
      [](std::int64_t x, std::int64_t y) -> std::int64_t {
        if (y == 0) throw EvalFailure(ErrorCode::div_zero, "integer modulo by zero");
        if (y == -1) return 0;
        return x % y;
      },
      [](double x, double y) { return std::fmod(x, y); });
}
Value b_neg(Args a, std::uint64_t&) {
  if (auto* x = a[0].get_if<std::int64_t>()) return wrap_sub(0, *x);
  if (auto* x = a[0].get_if<double>()) return -*x;
  bad_operand("neg", a[0]);
}

// Ordering over same-typed int, float, bool or str operands.
template <typename Cmp>
Value compare(std::string_view fn, Args args, Cmp cmp) {
  const Value& a = args[0];
  const Value& b = args[1];
  if (a.v.index() == b.v.index()) {
    if (auto* x = a.get_if<std::int64_t>()) return cmp(*x, *b.get_if<std::int64_t>());
    if (auto* x = a.get_if<double>()) return cmp(*x, *b.get_if<double>());
    if (auto* x = a.get_if<bool>()) return cmp(*x, *b.get_if<bool>());
    if (auto* x = a.get_if<std::string>()) return cmp(*x, *b.get_if<std::string>());
  }
  bad_operands(fn, a, b);
}

Value b_lt(Args a, std::uint64_t&) {
  return compare("lt", a, [](const auto& x, const auto& y) { return x < y; });
}
Value b_le(Args a, std::uint64_t&) {
  return compare("le", a, [](const auto& x, const auto& y) { return x <= y; });
}
Value b_gt(Args a, std::uint64_t&) {
  return compare("gt", a, [](const auto& x, const auto& y) { return x > y; });
}
Value b_ge(Args a, std::uint64_t&) {
  return compare("ge", a, [](const auto& x, const auto& y) { return x >= y; });
}

// Structural equality over data values. Iterative so deeply nested lists
// cannot overflow the native stack.
bool data_equal(std::string_view fn, const Value& a, const Value& b) {
  std::vector<std::pair<const Value*, const Value*>> work{{&a, &b}};
  while (!work.empty()) {
    auto [x, y] = work.back();
    work.pop_back();
    if (x->is_function() || y->is_function() || x->v.index() != y->v.index()) bad_operands(fn, *x, *y);
    if (auto* i = x->get_if<std::int64_t>()) {
      if (*i != *y->get_if<std::int64_t>()) return false;
    } else if (auto* d = x->get_if<double>()) {
      if (!(*d == *y->get_if<double>())) return false;
    } else if (auto* p = x->get_if<bool>()) {
      if (*p != *y->get_if<bool>()) return false;
    } else if (auto* s = x->get_if<std::string>()) {
      if (*s != *y->get_if<std::string>()) return false;
    } else if (auto* l = x->get_if<ListRef>()) {
      const auto& xs = (*l)->items;
      const auto& ys = (*y->get_if<ListRef>())->items;
      if (xs.size() != ys.size()) return false;
      for (std::size_t i = xs.size(); i-- > 0;) work.emplace_back(&xs[i], &ys[i]);
    }
  }
  return true;
}

Value b_eq(Args a, std::uint64_t&) { return data_equal("eq", a[0], a[1]); }
Value b_ne(Args a, std::uint64_t&) { return !data_equal("ne", a[0], a[1]); }

Value b_and(Args a, std::uint64_t&) { return as_bool("and", a[0]) && as_bool("and", a[1]); }
Value b_or(Args a, std::uint64_t&) { return as_bool("or", a[0]) || as_bool("or", a[1]); }
Value b_not(Args a, std::uint64_t&) { return !as_bool("not", a[0]); }

Value b_to_float(Args a, std::uint64_t&) {
  if (auto* x = a[0].get_if<std::int64_t>()) return static_cast<double>(*x);
  if (auto* x = a[0].get_if<double>()) return *x;
  bad_operand("toFloat", a[0]);
}

Value b_to_int(Args a, std::uint64_t&) {
  if (auto* x = a[0].get_if<std::int64_t>()) return *x;
  if (auto* x = a[0].get_if<double>()) {
    double t = std::trunc(*x);
    // [-2^63, 2^63) is exactly representable at both ends.
    if (!std::isfinite(t) || t < -9223372036854775808.0 || t >= 9223372036854775808.0) {
      type_error("toInt", "value " + std::to_string(*x) + " not representable as int");
    }
    return static_cast<std::int64_t>(t);
  }
  bad_operand("toInt", a[0]);
}

Value b_sqrt(Args a, std::uint64_t&) {
  if (auto* x = a[0].get_if<double>()) return std::sqrt(*x);
  bad_operand("sqrt", a[0]);
}

Value b_abs(Args a, std::uint64_t&) {
  if (auto* x = a[0].get_if<double>()) return std::fabs(*x);
  if (auto* x = a[0].get_if<std::int64_t>()) return *x < 0 ? wrap_sub(0, *x) : *x;
  bad_operand("abs", a[0]);
}

Value b_min(Args a, std::uint64_t&) {
  return arith(
      "min", a, [](std::int64_t x, std::int64_t y) { return y < x ? y : x; },
      [](double x, double y) { return y < x ? y : x; });
}
Value b_max(Args a, std::uint64_t&) {
  return arith(
      "max", a, [](std::int64_t x, std::int64_t y) { return y > x ? y : x; },
      [](double x, double y) { return y > x ? y : x; });
}

Value b_cons(Args a, std::uint64_t&) {
  const auto& tail = as_list("cons", a[1]);
  std::vector<Value> out;
  out.reserve(tail.size() + 1);
  out.push_back(a[0]);
  out.insert(out.end(), tail.begin(), tail.end());
  return make_list(std::move(out));
}

Value b_head(Args a, std::uint64_t&) {
  const auto& xs = as_list("head", a[0]);
  if (xs.empty()) throw EvalFailure(ErrorCode::empty_list, "head of empty list");
  return xs.front();
}

Value b_tail(Args a, std::uint64_t&) {
  const auto& xs = as_list("tail", a[0]);
  if (xs.empty()) throw EvalFailure(ErrorCode::empty_list, "tail of empty list");
  return make_list(std::vector<Value>(xs.begin() + 1, xs.end()));
}

Value b_is_empty(Args a, std::uint64_t&) { return as_list("isEmpty", a[0]).empty(); }

Value b_length(Args a, std::uint64_t&) {
  return static_cast<std::int64_t>(as_list("length", a[0]).size());
}

Value b_append(Args a, std::uint64_t&) {
  const auto& xs = as_list("append", a[0]);
  const auto& ys = as_list("append", a[1]);
  std::vector<Value> out;
  out.reserve(xs.size() + ys.size());
  out.insert(out.end(), xs.begin(), xs.end());
  out.insert(out.end(), ys.begin(), ys.end());
  return make_list(std::move(out));
}

Value b_sum(Args a, std::uint64_t&) {
  const auto& xs = as_list("sum", a[0]);
  if (xs.empty()) return std::int64_t{0};
  if (xs.front().get_if<std::int64_t>()) {
    std::int64_t total = 0;
    for (const auto& x : xs) total = wrap_add(total, as_int("sum", x));
    return total;
  }
  if (const double* first = xs.front().get_if<double>()) {
    double total = *first;
    for (std::size_t i = 1; i < xs.size(); ++i) {
      const double* d = xs[i].get_if<double>();
      if (!d) type_error("sum", std::string("mixed list: float and ") + type_name(xs[i]));
      total += *d;
    }
    return total;
  }
  type_error("sum", std::string("expected list of int or float, found ") + type_name(xs.front()));
}

// Materializing a range costs one fuel unit per element, so a single call
// cannot allocate more than the remaining budget allows.
Value b_range(Args a, std::uint64_t& fuel) {
  std::int64_t lo = as_int("range", a[0]);
  std::int64_t hi = as_int("range", a[1]);
  if (lo > hi) return make_list({});
  std::uint64_t span = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo);
  if (span >= fuel) throw EvalFailure(ErrorCode::fuel_exhausted, "range too large for remaining fuel");
  std::uint64_t count = span + 1;
  fuel -= count;
  std::vector<Value> out;
  out.reserve(count);
  for (std::uint64_t k = 0; k < count; ++k) out.emplace_back(wrap_add(lo, static_cast<std::int64_t>(k)));
  return make_list(std::move(out));
}

constexpr std::array kBuiltins = {
    Builtin{"add", 2, BuiltinKind::plain, b_add},
    Builtin{"sub", 2, BuiltinKind::plain, b_sub},
    Builtin{"mul", 2, BuiltinKind::plain, b_mul},
    Builtin{"div", 2, BuiltinKind::plain, b_div},
    Builtin{"mod", 2, BuiltinKind::plain, b_mod},
    Builtin{"neg", 1, BuiltinKind::plain, b_neg},
    Builtin{"lt", 2, BuiltinKind::plain, b_lt},
    Builtin{"le", 2, BuiltinKind::plain, b_le},
    Builtin{"gt", 2, BuiltinKind::plain, b_gt},
    Builtin{"ge", 2, BuiltinKind::plain, b_ge},
    Builtin{"eq", 2, BuiltinKind::plain, b_eq},
    Builtin{"ne", 2, BuiltinKind::plain, b_ne},
    Builtin{"and", 2, BuiltinKind::plain, b_and},
    Builtin{"or", 2, BuiltinKind::plain, b_or},
    Builtin{"not", 1, BuiltinKind::plain, b_not},
    Builtin{"toFloat", 1, BuiltinKind::plain, b_to_float},
    Builtin{"toInt", 1, BuiltinKind::plain, b_to_int},
    Builtin{"sqrt", 1, BuiltinKind::plain, b_sqrt},
    Builtin{"abs", 1, BuiltinKind::plain, b_abs},
    Builtin{"min", 2, BuiltinKind::plain, b_min},
    Builtin{"max", 2, BuiltinKind::plain, b_max},
    Builtin{"cons", 2, BuiltinKind::plain, b_cons},
    Builtin{"head", 1, BuiltinKind::plain, b_head},
    Builtin{"tail", 1, BuiltinKind::plain, b_tail},
    Builtin{"isEmpty", 1, BuiltinKind::plain, b_is_empty},
    Builtin{"length", 1, BuiltinKind::plain, b_length},
    Builtin{"append", 2, BuiltinKind::plain, b_append},
    Builtin{"map", 2, BuiltinKind::map, nullptr},
    Builtin{"filter", 2, BuiltinKind::filter, nullptr},
    Builtin{"foldl", 3, BuiltinKind::foldl, nullptr},
    Builtin{"sum", 1, BuiltinKind::plain, b_sum},
    Builtin{"range", 2, BuiltinKind::plain, b_range},
};

}  // namespace

std::span<const Builtin> builtin_table() { return kBuiltins; }

const Builtin* find_builtin(std::string_view name) {
  static const auto index = [] {
    std::unordered_map<std::string_view, const Builtin*> m;
    for (const auto& b : kBuiltins) m.emplace(b.name, &b);
    return m;
  }();
  auto it = index.find(name);
  return it == index.end() ? nullptr : it->second;
}

}  // namespace qx

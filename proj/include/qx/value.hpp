#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "qx/expr.hpp"

namespace qx {

struct Value;
struct EnvFrame;
struct ListData;
struct Builtin;

/// Immutable environment chain; lookup is innermost-first. A null Env is the
/// empty environment (builtins are resolved after it).
using Env = std::shared_ptr<const EnvFrame>;
using ListRef = std::shared_ptr<const ListData>;

struct Closure {
  Expr lambda;  // always a Lam node
  Env env;
};

/// A builtin, possibly partially applied. `applied` holds fewer arguments
/// than the builtin's arity.
struct BuiltinRef {
  const Builtin* fn;
  ListRef applied;
};

struct Value {
  std::variant<std::int64_t, double, bool, std::string, Unit, ListRef, Closure, BuiltinRef> v;

  Value() : v(Unit{}) {}
  Value(std::int64_t i) : v(i) {}
  Value(int i) : v(std::int64_t{i}) {}
  Value(double d) : v(d) {}
  Value(bool b) : v(b) {}
  Value(std::string s) : v(std::move(s)) {}
  Value(const char* s) : v(std::string(s)) {}
  Value(Unit u) : v(u) {}
  Value(ListRef l) : v(std::move(l)) {}
  Value(Closure c) : v(std::move(c)) {}
  Value(BuiltinRef b) : v(std::move(b)) {}

  template <typename T>
  const T* get_if() const {
    return std::get_if<T>(&v);
  }
  bool is_function() const {
    return std::holds_alternative<Closure>(v) || std::holds_alternative<BuiltinRef>(v);
  }
};

/// List storage. Destruction of long chains of nested lists or closures is
/// iterative, so dropping a deep value cannot exhaust the native stack.
struct ListData {
  std::vector<Value> items;

  explicit ListData(std::vector<Value> xs) : items(std::move(xs)) {}
  ~ListData();
};

struct EnvFrame {
  std::string name;
  Value value;
  Env parent;
  // For a letrec frame, `value` holds the bound lambda as a Closure whose
  // env is ignored; lookup yields a closure over this very frame.
  bool self_ref = false;

  EnvFrame(std::string n, Value v, Env p, bool self = false)
      : name(std::move(n)), value(std::move(v)), parent(std::move(p)), self_ref(self) {}
  ~EnvFrame();
};

Value make_list(std::vector<Value> items);
const std::vector<Value>& list_items(const ListRef& l);

/// Structural equality; floats compare by bit pattern, functions by identity.
bool operator==(const Value& a, const Value& b);

/// Human-readable rendering for diagnostics and test output.
std::string describe(const Value& v);

}  // namespace qx

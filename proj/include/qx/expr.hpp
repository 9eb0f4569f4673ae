#pragma once

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace qx {

/// Identifier in the quotation language: `[A-Za-z_][A-Za-z0-9_']*`, not a
/// reserved word. Equality is exact string equality.
using Ident = std::string;

bool is_reserved_word(std::string_view word);
bool is_valid_ident(std::string_view name);

struct Unit {
  friend bool operator==(Unit, Unit) { return true; }
};

struct ExprNode;

/// Immutable, shared handle to a quotation AST node. Copies are cheap and
/// share structure; there is no null state.
class Expr {
 public:
  explicit Expr(std::shared_ptr<const ExprNode> node);

  const ExprNode& node() const { return *node_; }
  const ExprNode* get() const { return node_.get(); }

  template <typename T>
  const T* as() const;

  friend bool operator==(const Expr& a, const Expr& b);

 private:
  std::shared_ptr<const ExprNode> node_;
};

struct LitInt {
  std::int64_t value;
};
struct LitFloat {
  double value;
};
struct LitBool {
  bool value;
};
struct LitStr {
  std::string value;
};
struct LitUnit {};
struct Var {
  Ident name;
};
struct Lam {
  Ident param;
  Expr body;
};
struct App {
  Expr fn;
  Expr arg;
};
struct Let {
  Ident name;
  Expr bound;
  Expr body;
};
/// `bound` is always a Lam.
struct LetRec {
  Ident name;
  Expr bound;
  Expr body;
};
struct If {
  Expr cond;
  Expr then_branch;
  Expr else_branch;
};
struct ListLit {
  std::vector<Expr> items;
};

struct ExprNode {
  std::variant<LitInt, LitFloat, LitBool, LitStr, LitUnit, Var, Lam, App, Let, LetRec, If, ListLit> v;
};

template <typename T>
const T* Expr::as() const {
  return std::get_if<T>(&node_->v);
}

// Constructors. Each validates the node invariants and throws
// std::invalid_argument on violation (bad identifier, non-finite float,
// letrec over a non-lambda, string that is not valid UTF-8).
Expr lit_int(std::int64_t value);
Expr lit_float(double value);
Expr lit_bool(bool value);
Expr lit_str(std::string value);
Expr lit_unit();
Expr var(Ident name);
Expr lam(Ident param, Expr body);
Expr app(Expr fn, Expr arg);
Expr let_in(Ident name, Expr bound, Expr body);
Expr letrec_in(Ident name, Expr bound, Expr body);
Expr if_then_else(Expr cond, Expr then_branch, Expr else_branch);
Expr list_of(std::vector<Expr> items);

/// Curried application: call(f, {a, b}) is App(App(f, a), b).
Expr call(Expr fn, std::initializer_list<Expr> args);
/// Curried application of a named function: call("add", {a, b}).
Expr call(std::string_view fn, std::initializer_list<Expr> args);

/// True for int/float/bool/str/unit and lists whose items are all literals.
bool is_literal(const Expr& e);

std::set<Ident> free_vars(const Expr& e);

/// Capture-avoiding substitution of `replacement` for the free occurrences of
/// `name`. A binder is renamed (`x` -> `x'`, `x'2`, `x'3`, ...) only when it
/// would capture a free variable of `replacement`.
Expr substitute(const Expr& e, const Ident& name, const Expr& replacement);

// Host values that can be spliced into a quotation.

struct HostValue;
using HostList = std::vector<HostValue>;
using HostFunction = std::function<HostValue(const HostValue&)>;

struct HostValue {
  std::variant<std::int64_t, double, bool, std::string, Unit, HostList, HostFunction> v;

  HostValue(std::int64_t i) : v(i) {}
  HostValue(int i) : v(std::int64_t{i}) {}
  HostValue(double d) : v(d) {}
  HostValue(bool b) : v(b) {}
  HostValue(std::string s) : v(std::move(s)) {}
  HostValue(const char* s) : v(std::string(s)) {}
  HostValue(Unit u) : v(u) {}
  HostValue(HostList items) : v(std::move(items)) {}
  HostValue(HostFunction fn) : v(std::move(fn)) {}
};

class UnliftableValue : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Turns a host scalar or (nested) list into the corresponding literal.
/// Functions and non-finite floats throw UnliftableValue.
Expr lift(const HostValue& v);

}  // namespace qx

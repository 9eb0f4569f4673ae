#pragma once

// Quotation to ECMAScript translation.

#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qx/expr.hpp"
#include "qx/value.hpp"

namespace qx::js {

class JsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// JavaScript spelling of a quotation identifier: `'` becomes `$p`, and
/// names that JavaScript reserves (or `RT`) get a trailing `$`.
std::string mangle(const Ident& name);

/// String literal with `"`, `\`, control characters and U+2028/U+2029
/// escaped; other UTF-8 passes through.
std::string quote(std::string_view s);

/// Number literal text; floats use the shortest round-trip form.
std::string number(std::int64_t i);
std::string number(double d);

/// Expression text for `e`. Free variables must be in `globals` (prior
/// definitions and stubs) or name builtins, which become RT.<name>.
/// Throws JsError on an unbound name.
std::string translate(const Expr& e, const std::set<Ident>& globals = {});

/// Curried client stub forwarding its arguments to RT.rpc.
std::string rpc_stub(const Ident& name, int arity);

/// Tagged-object literal for a scalar or list value; throws JsError for
/// functions and non-finite floats.
std::string encode_value(const Value& v);

/// The RT runtime object: curried builtins, list helpers and the abstract
/// RT.rpc hook.
const std::string& preamble();

/// A translation unit: preamble, then definitions in order, then stubs.
class Module {
 public:
  /// Translates `e` against the stubs and the definitions added before it.
  /// Throws JsError on a duplicate or unbound name.
  void define(const Ident& name, const Expr& e);
  void add_stub(const Ident& name, int arity);

  const std::vector<std::pair<Ident, std::string>>& definitions() const { return defs_; }
  const std::vector<std::pair<Ident, int>>& stubs() const { return stubs_; }

  /// Definitions and stubs only.
  std::string emit_body() const;
  /// preamble() followed by emit_body().
  std::string emit() const;

 private:
  void claim(const Ident& name);

  std::set<Ident> names_;
  std::vector<std::pair<Ident, std::string>> defs_;
  std::vector<std::pair<Ident, int>> stubs_;
};

/// Parses `name:arity,...` (empty text gives no stubs). Throws JsError.
std::vector<std::pair<Ident, int>> parse_rpc_list(std::string_view text);

/// Module with the given stubs and one definition `name = e`; `e` may
/// refer to the stubs.
Module build_module(const Ident& name, const Expr& e, const std::vector<std::pair<Ident, int>>& stubs);

}  // namespace qx::js

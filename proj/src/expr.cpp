#include "qx/expr.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <utility>

#include "qx/syntax.hpp"

namespace qx {

namespace {

constexpr std::array<std::string_view, 14> kReserved = {
    "int", "float", "bool", "str", "unit", "var", "lam",
    "app", "let", "letrec", "if", "list", "true", "false"};

Expr make(auto node) {
  return Expr(std::make_shared<const ExprNode>(ExprNode{std::move(node)}));
}

const Ident& checked(const Ident& name) {
  if (!is_valid_ident(name)) {
    throw std::invalid_argument("invalid identifier: '" + name + "'");
  }
  return name;
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

bool equal(const Expr& a, const Expr& b) {
  if (a.get() == b.get()) return true;
  const auto& x = a.node().v;
  const auto& y = b.node().v;
  if (x.index() != y.index()) return false;
  return std::visit(
      overloaded{
          [&](const LitInt& n) { return n.value == std::get<LitInt>(y).value; },
          [&](const LitFloat& n) {
            return std::bit_cast<std::uint64_t>(n.value) ==
                   std::bit_cast<std::uint64_t>(std::get<LitFloat>(y).value);
          },
          [&](const LitBool& n) { return n.value == std::get<LitBool>(y).value; },
          [&](const LitStr& n) { return n.value == std::get<LitStr>(y).value; },
          [&](const LitUnit&) { return true; },
          [&](const Var& n) { return n.name == std::get<Var>(y).name; },
          [&](const Lam& n) {
            const auto& m = std::get<Lam>(y);
            return n.param == m.param && equal(n.body, m.body);
          },
          [&](const App& n) {
            const auto& m = std::get<App>(y);
            return equal(n.fn, m.fn) && equal(n.arg, m.arg);
          },
          [&](const Let& n) {
            const auto& m = std::get<Let>(y);
            return n.name == m.name && equal(n.bound, m.bound) && equal(n.body, m.body);
          },
          [&](const LetRec& n) {
            const auto& m = std::get<LetRec>(y);
            return n.name == m.name && equal(n.bound, m.bound) && equal(n.body, m.body);
          },
          [&](const If& n) {
            const auto& m = std::get<If>(y);
            return equal(n.cond, m.cond) && equal(n.then_branch, m.then_branch) &&
                   equal(n.else_branch, m.else_branch);
          },
          [&](const ListLit& n) {
            const auto& m = std::get<ListLit>(y);
            if (n.items.size() != m.items.size()) return false;
            for (std::size_t i = 0; i < n.items.size(); ++i) {
              if (!equal(n.items[i], m.items[i])) return false;
            }
            return true;
          },
      },
      x);
}

// Walks `e` with a multiset of names bound by enclosing binders.
void collect_free(const Expr& e, std::multiset<Ident>& bound, std::set<Ident>& out) {
  std::visit(overloaded{
                 [&](const Var& n) {
                   if (!bound.contains(n.name)) out.insert(n.name);
                 },
                 [&](const Lam& n) {
                   auto it = bound.insert(n.param);
                   collect_free(n.body, bound, out);
                   bound.erase(it);
                 },
                 [&](const App& n) {
                   collect_free(n.fn, bound, out);
                   collect_free(n.arg, bound, out);
                 },
                 [&](const Let& n) {
                   collect_free(n.bound, bound, out);
                   auto it = bound.insert(n.name);
                   collect_free(n.body, bound, out);
                   bound.erase(it);
                 },
                 [&](const LetRec& n) {
                   auto it = bound.insert(n.name);
                   collect_free(n.bound, bound, out);
                   collect_free(n.body, bound, out);
                   bound.erase(it);
                 },
                 [&](const If& n) {
                   collect_free(n.cond, bound, out);
                   collect_free(n.then_branch, bound, out);
                   collect_free(n.else_branch, bound, out);
                 },
                 [&](const ListLit& n) {
                   for (const auto& item : n.items) collect_free(item, bound, out);
                 },
                 [](const auto&) {},
             },
             e.node().v);
}

bool occurs_free(const Expr& e, const Ident& name) { return free_vars(e).contains(name); }

// Smallest `base'`, `base'2`, `base'3`, ... not in `avoid`.
Ident fresh_name(const Ident& base, const std::set<Ident>& avoid) {
  Ident candidate = base + "'";
  for (unsigned n = 2; avoid.contains(candidate); ++n) {
    candidate = base + "'" + std::to_string(n);
  }
  return candidate;
}

struct Substituter {
  const Ident& name;
  const Expr& replacement;
  std::set<Ident> replacement_free;

  Expr run(const Expr& e) {
    return std::visit(
        overloaded{
            [&](const Var& n) -> Expr { return n.name == name ? replacement : e; },
            [&](const Lam& n) -> Expr {
              if (n.param == name || !occurs_free(n.body, name)) return e;
              auto [param, body] = rebind(n.param, {n.body});
              return lam(param, run(body[0]));
            },
            [&](const App& n) -> Expr { return app(run(n.fn), run(n.arg)); },
            [&](const Let& n) -> Expr {
              Expr bound = run(n.bound);
              if (n.name == name || !occurs_free(n.body, name)) {
                return let_in(n.name, bound, n.body);
              }
              auto [binder, body] = rebind(n.name, {n.body});
              return let_in(binder, bound, run(body[0]));
            },
            [&](const LetRec& n) -> Expr {
              if (n.name == name || (!occurs_free(n.bound, name) && !occurs_free(n.body, name))) {
                return e;
              }
              auto [binder, parts] = rebind(n.name, {n.bound, n.body});
              return letrec_in(binder, run(parts[0]), run(parts[1]));
            },
            [&](const If& n) -> Expr {
              return if_then_else(run(n.cond), run(n.then_branch), run(n.else_branch));
            },
            [&](const ListLit& n) -> Expr {
              std::vector<Expr> items;
              items.reserve(n.items.size());
              for (const auto& item : n.items) items.push_back(run(item));
              return list_of(std::move(items));
            },
            [&](const auto&) -> Expr { return e; },
        },
        e.node().v);
  }

  // Renames `binder` within `scope` when it would capture a free variable of
  // the replacement; otherwise returns everything unchanged.
  std::pair<Ident, std::vector<Expr>> rebind(const Ident& binder, std::vector<Expr> scope) {
    if (!replacement_free.contains(binder)) return {binder, std::move(scope)};
    std::set<Ident> avoid = replacement_free;
    for (const auto& part : scope) avoid.merge(free_vars(part));
    Ident renamed = fresh_name(binder, avoid);
    for (auto& part : scope) part = substitute(part, binder, var(renamed));
    return {renamed, std::move(scope)};
  }
};

}  // namespace

bool is_reserved_word(std::string_view word) {
  for (auto r : kReserved) {
    if (r == word) return true;
  }
  return false;
}

bool is_valid_ident(std::string_view name) {
  if (name.empty()) return false;
  auto alpha = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; };
  if (!alpha(name[0])) return false;
  for (char c : name.substr(1)) {
    if (!alpha(c) && !(c >= '0' && c <= '9') && c != '\'') return false;
  }
  return !is_reserved_word(name);
}

Expr::Expr(std::shared_ptr<const ExprNode> node) : node_(std::move(node)) {
  if (!node_) throw std::invalid_argument("null expression node");
}

bool operator==(const Expr& a, const Expr& b) { return equal(a, b); }

Expr lit_int(std::int64_t value) { return make(LitInt{value}); }

Expr lit_float(double value) {
  if (!std::isfinite(value)) throw std::invalid_argument("float literal must be finite");
  return make(LitFloat{value});
}

Expr lit_bool(bool value) { return make(LitBool{value}); }

Expr lit_str(std::string value) {
  if (!is_valid_utf8(value)) throw std::invalid_argument("string literal is not valid UTF-8");
  return make(LitStr{std::move(value)});
}

Expr lit_unit() {
  static const Expr unit = make(LitUnit{});
  return unit;
}

Expr var(Ident name) {
  checked(name);
  return make(Var{std::move(name)});
}

Expr lam(Ident param, Expr body) {
  checked(param);
  return make(Lam{std::move(param), std::move(body)});
}

Expr app(Expr fn, Expr arg) { return make(App{std::move(fn), std::move(arg)}); }

Expr let_in(Ident name, Expr bound, Expr body) {
  checked(name);
  return make(Let{std::move(name), std::move(bound), std::move(body)});
}

Expr letrec_in(Ident name, Expr bound, Expr body) {
  checked(name);
  if (!bound.as<Lam>()) throw std::invalid_argument("letrec bound form must be a lambda");
  return make(LetRec{std::move(name), std::move(bound), std::move(body)});
}

Expr if_then_else(Expr cond, Expr then_branch, Expr else_branch) {
  return make(If{std::move(cond), std::move(then_branch), std::move(else_branch)});
}

Expr list_of(std::vector<Expr> items) { return make(ListLit{std::move(items)}); }

Expr call(Expr fn, std::initializer_list<Expr> args) {
  for (const auto& arg : args) fn = app(std::move(fn), arg);
  return fn;
}

Expr call(std::string_view fn, std::initializer_list<Expr> args) {
  return call(var(Ident(fn)), args);
}

bool is_literal(const Expr& e) {
  return std::visit(overloaded{
                        [](const LitInt&) { return true; },
                        [](const LitFloat&) { return true; },
                        [](const LitBool&) { return true; },
                        [](const LitStr&) { return true; },
                        [](const LitUnit&) { return true; },
                        [](const ListLit& n) {
                          for (const auto& item : n.items) {
                            if (!is_literal(item)) return false;
                          }
                          return true;
                        },
                        [](const auto&) { return false; },
                    },
                    e.node().v);
}

std::set<Ident> free_vars(const Expr& e) {
  std::multiset<Ident> bound;
  std::set<Ident> out;
  collect_free(e, bound, out);
  return out;
}

Expr substitute(const Expr& e, const Ident& name, const Expr& replacement) {
  Substituter s{name, replacement, free_vars(replacement)};
  return s.run(e);
}

Expr lift(const HostValue& v) {
  return std::visit(overloaded{
                        [](std::int64_t i) { return lit_int(i); },
                        [](double d) {
                          if (!std::isfinite(d)) throw UnliftableValue("non-finite float");
                          return lit_float(d);
                        },
                        [](bool b) { return lit_bool(b); },
                        [](const std::string& s) {
                          if (!is_valid_utf8(s)) throw UnliftableValue("string is not valid UTF-8");
                          return lit_str(s);
                        },
                        [](Unit) { return lit_unit(); },
                        [](const HostList& items) {
                          std::vector<Expr> out;
                          out.reserve(items.size());
                          for (const auto& item : items) out.push_back(lift(item));
                          return list_of(std::move(out));
                        },
                        [](const HostFunction&) -> Expr {
                          throw UnliftableValue("functions cannot be lifted into a quotation");
                        },
                    },
                    v.v);
}

}  // namespace qx

#include "qx/jsgen.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <optional>

#include "qx/eval.hpp"
#include "qx/syntax.hpp"

namespace qx::js {

namespace {

constexpr std::array<std::string_view, 52> kJsReserved = {
    "break",     "case",     "catch",   "class",      "const",     "continue", "debugger", "default",
    "delete",    "do",       "else",    "enum",       "export",    "extends",  "false",    "finally",
    "for",       "function", "if",      "import",     "in",        "instanceof", "new",    "null",
    "return",    "super",    "switch",  "this",       "throw",     "true",     "try",      "typeof",
    "var",       "void",     "while",   "with",       "yield",     "let",      "static",   "implements",
    "interface", "package",  "private", "protected",  "public",    "await",    "arguments", "eval",
    "undefined", "NaN",      "Infinity", "RT"};

bool js_reserved(std::string_view s) {
  for (auto r : kJsReserved) {
    if (r == s) return true;
  }
  return false;
}

const char* kPreamble = R"js(var RT = (function () {
  "use strict";
  var nil = {$: 0};
  function cons(h, t) { return {$: 1, $0: h, $1: t}; }
  function fail(code, detail) {
    var e = new Error(detail);
    e.code = code;
    throw e;
  }
  function toArray(l) {
    var out = [];
    while (l.$ === 1) { out.push(l.$0); l = l.$1; }
    return out;
  }
  function fromArray(xs) {
    var l = nil;
    for (var i = xs.length - 1; i >= 0; i--) { l = cons(xs[i], l); }
    return l;
  }
  function isCell(v) { return v !== null && typeof v === "object"; }
  function equal(a, b) {
    while (isCell(a) && isCell(b)) {
      if (a.$ !== b.$) { return false; }
      if (a.$ === 0) { return true; }
      if (!equal(a.$0, b.$0)) { return false; }
      a = a.$1;
      b = b.$1;
    }
    return a === b;
  }
  function isInt(x) { return typeof x === "number" && Math.floor(x) === x; }
  function nonEmpty(name, l) {
    if (l.$ === 0) { fail("empty-list", name + " of empty list"); }
    return l;
  }
  function fn2(f) { return function (a) { return function (b) { return f(a, b); }; }; }
  function fn3(f) {
    return function (a) { return function (b) { return function (c) { return f(a, b, c); }; }; };
  }
  return {
    add: fn2(function (a, b) { return a + b; }),
    sub: fn2(function (a, b) { return a - b; }),
    mul: fn2(function (a, b) { return a * b; }),
    div: fn2(function (a, b) {
      if (isInt(a) && isInt(b)) {
        if (b === 0) { fail("div-zero", "integer division by zero"); }
        return Math.trunc(a / b);
      }
      return a / b;
    }),
    mod: fn2(function (a, b) {
      if (b === 0) { fail("div-zero", "integer division by zero"); }
      return a % b;
    }),
    neg: function (a) { return -a; },
    lt: fn2(function (a, b) { return a < b; }),
    le: fn2(function (a, b) { return a <= b; }),
    gt: fn2(function (a, b) { return a > b; }),
    ge: fn2(function (a, b) { return a >= b; }),
    eq: fn2(equal),
    ne: fn2(function (a, b) { return !equal(a, b); }),
    and: fn2(function (a, b) { return a && b; }),
    or: fn2(function (a, b) { return a || b; }),
    not: function (a) { return !a; },
    toFloat: function (a) { return a; },
    toInt: function (a) { return Math.trunc(a); },
    sqrt: function (a) { return Math.sqrt(a); },
    abs: function (a) { return Math.abs(a); },
    min: fn2(function (a, b) { return b < a ? b : a; }),
    max: fn2(function (a, b) { return b > a ? b : a; }),
    cons: fn2(cons),
    head: function (l) { return nonEmpty("head", l).$0; },
    tail: function (l) { return nonEmpty("tail", l).$1; },
    isEmpty: function (l) { return l.$ === 0; },
    length: function (l) { return toArray(l).length; },
    append: fn2(function (a, b) {
      var xs = toArray(a);
      var l = b;
      for (var i = xs.length - 1; i >= 0; i--) { l = cons(xs[i], l); }
      return l;
    }),
    map: fn2(function (f, l) { return fromArray(toArray(l).map(function (x) { return f(x); })); }),
    filter: fn2(function (f, l) { return fromArray(toArray(l).filter(function (x) { return f(x); })); }),
    foldl: fn3(function (f, acc, l) {
      var xs = toArray(l);
      for (var i = 0; i < xs.length; i++) { acc = f(acc)(xs[i]); }
      return acc;
    }),
    sum: function (l) {
      var xs = toArray(l);
      var s = 0;
      for (var i = 0; i < xs.length; i++) { s += xs[i]; }
      return s;
    },
    range: fn2(function (lo, hi) {
      var l = nil;
      for (var i = hi; i >= lo; i--) { l = cons(i, l); }
      return l;
    }),
    // Arguments arrive in the tagged encoding; a transport replaces this.
    rpc: function (name, args) { fail("rpc-unbound", "no transport bound for " + name); }
  };
})();
)js";

class Translator {
 public:
  explicit Translator(const std::set<Ident>& globals) : globals_(globals) {}

  void emit(std::string& out, const Expr& e) {
    const auto& v = e.node().v;
    if (auto* n = std::get_if<LitInt>(&v)) {
      out += number(n->value);
    } else if (auto* n = std::get_if<LitFloat>(&v)) {
      out += number(n->value);
    } else if (auto* n = std::get_if<LitBool>(&v)) {
      out += n->value ? "true" : "false";
    } else if (auto* n = std::get_if<LitStr>(&v)) {
      out += quote(n->value);
    } else if (std::holds_alternative<LitUnit>(v)) {
      out += "null";
    } else if (auto* n = std::get_if<Var>(&v)) {
      out += reference(n->name);
    } else if (auto* n = std::get_if<Lam>(&v)) {
      out += "function (" + mangle(n->param) + ") { return ";
      bind(n->param);
      emit(out, n->body);
      unbind(n->param);
      out += "; }";
    } else if (auto* n = std::get_if<App>(&v)) {
      if (auto cell = saturated_cons(*n)) {
        emit_cell(out, cell->first, cell->second);
        return;
      }
      bool wrap = n->fn.as<Lam>() != nullptr;
      if (wrap) out += '(';
      emit(out, n->fn);
      if (wrap) out += ')';
      out += '(';
      emit(out, n->arg);
      out += ')';
    } else if (auto* n = std::get_if<Let>(&v)) {
      out += "(function (" + mangle(n->name) + ") { return ";
      bind(n->name);
      emit(out, n->body);
      unbind(n->name);
      out += "; })(";
      emit(out, n->bound);
      out += ')';
    } else if (auto* n = std::get_if<LetRec>(&v)) {
      std::string f = mangle(n->name);
      bind(n->name);
      out += "(function () { var " + f + " = ";
      emit(out, n->bound);
      out += "; return ";
      emit(out, n->body);
      out += "; })()";
      unbind(n->name);
    } else if (auto* n = std::get_if<If>(&v)) {
      out += '(';
      emit(out, n->cond);
      out += " ? ";
      emit(out, n->then_branch);
      out += " : ";
      emit(out, n->else_branch);
      out += ')';
    } else if (auto* n = std::get_if<ListLit>(&v)) {
      for (const auto& item : n->items) {
        out += "{$: 1, $0: ";
        emit(out, item);
        out += ", $1: ";
      }
      out += "{$: 0}";
      out.append(n->items.size(), '}');
    }
  }

 private:
  bool local(const Ident& name) const { return scope_.count(name) > 0; }

  std::string reference(const Ident& name) {
    if (local(name) || globals_.count(name)) return mangle(name);
    if (find_builtin(name)) return "RT." + name;
    throw JsError("unbound name " + name);
  }

  // cons h t with cons meaning the builtin.
  std::optional<std::pair<Expr, Expr>> saturated_cons(const App& outer) {
    const auto* inner = outer.fn.as<App>();
    if (!inner) return std::nullopt;
    const auto* fn = inner->fn.as<Var>();
    if (!fn || fn->name != "cons" || local("cons") || globals_.count("cons")) return std::nullopt;
    return std::make_pair(inner->arg, outer.arg);
  }

  void emit_cell(std::string& out, const Expr& head, const Expr& tail) {
    out += "{$: 1, $0: ";
    emit(out, head);
    out += ", $1: ";
    emit(out, tail);
    out += '}';
  }

  void bind(const Ident& name) { scope_.insert(name); }
  void unbind(const Ident& name) { scope_.erase(scope_.find(name)); }

  const std::set<Ident>& globals_;
  std::multiset<Ident> scope_;
};

}  // namespace

std::string mangle(const Ident& name) {
  if (!is_valid_ident(name)) throw JsError("invalid identifier " + name);
  std::string out;
  for (char c : name) {
    if (c == '\'') {
      out += "$p";
    } else {
      out += c;
    }
  }
  if (js_reserved(out)) out += '$';
  return out;
}

std::string quote(std::string_view s) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out = "\"";
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    auto u = static_cast<unsigned char>(c);
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (u < 0x20 || u == 0x7F) {
          out += "\\u00";
          out += kHex[u >> 4];
          out += kHex[u & 0xF];
        } else if (u == 0xE2 && i + 2 < s.size() && static_cast<unsigned char>(s[i + 1]) == 0x80 &&
                   (static_cast<unsigned char>(s[i + 2]) == 0xA8 || static_cast<unsigned char>(s[i + 2]) == 0xA9)) {
          // Line and paragraph separators end a string literal in older engines.
          out += static_cast<unsigned char>(s[i + 2]) == 0xA8 ? "\\u2028" : "\\u2029";
          i += 2;
        } else {
          out += c;
        }
    }
  }
  out += '"';
  return out;
}

std::string number(std::int64_t i) { return std::to_string(i); }

std::string number(double d) {
  if (!std::isfinite(d)) throw JsError("non-finite number");
  return format_float(d);
}

std::string translate(const Expr& e, const std::set<Ident>& globals) {
  std::string out;
  Translator(globals).emit(out, e);
  return out;
}

std::string rpc_stub(const Ident& name, int arity) {
  if (arity < 0) throw JsError("negative arity for " + name);
  std::string out = "var " + mangle(name) + " = ";
  std::string args;
  if (arity == 0) out += "function () { return ";
  for (int i = 0; i < arity; ++i) {
    std::string a = "a" + std::to_string(i);
    out += "function (" + a + ") { return ";
    args += (i ? ", " : "") + a;
  }
  out += "RT.rpc(" + quote(name) + ", [" + args + "]); }";
  for (int i = 1; i < arity; ++i) out += "; }";
  out += ";";
  return out;
}

std::string encode_value(const Value& v) {
  if (const auto* i = v.get_if<std::int64_t>()) return number(*i);
  if (const auto* d = v.get_if<double>()) return number(*d);
  if (const auto* b = v.get_if<bool>()) return *b ? "true" : "false";
  if (const auto* s = v.get_if<std::string>()) return quote(*s);
  if (v.get_if<Unit>()) return "null";
  if (const auto* l = v.get_if<ListRef>()) {
    std::string out;
    const auto& items = list_items(*l);
    for (const auto& item : items) out += "{$: 1, $0: " + encode_value(item) + ", $1: ";
    out += "{$: 0}";
    out.append(items.size(), '}');
    return out;
  }
  throw JsError("functions have no JavaScript value encoding");
}

const std::string& preamble() {
  static const std::string text = kPreamble;
  return text;
}

void Module::claim(const Ident& name) {
  if (!names_.insert(name).second) throw JsError("duplicate name " + name);
}

void Module::define(const Ident& name, const Expr& e) {
  std::string body = translate(e, names_);
  claim(name);
  defs_.emplace_back(name, std::move(body));
}

void Module::add_stub(const Ident& name, int arity) {
  if (arity < 0) throw JsError("negative arity for " + name);
  claim(name);
  stubs_.emplace_back(name, arity);
}

std::string Module::emit_body() const {
  std::string out;
  for (const auto& [name, body] : defs_) out += "var " + mangle(name) + " = " + body + ";\n";
  for (const auto& [name, arity] : stubs_) out += rpc_stub(name, arity) + "\n";
  return out;
}

std::string Module::emit() const { return preamble() + emit_body(); }

std::vector<std::pair<Ident, int>> parse_rpc_list(std::string_view text) {
  std::vector<std::pair<Ident, int>> out;
  if (text.empty()) return out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find(',', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view item = text.substr(start, end - start);
    std::size_t colon = item.rfind(':');
    if (colon == std::string_view::npos || colon == 0 || colon + 1 == item.size()) {
      throw JsError("bad rpc entry '" + std::string(item) + "', expected name:arity");
    }
    std::string_view digits = item.substr(colon + 1);
    int arity = 0;
    auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), arity);
    if (ec != std::errc{} || p != digits.data() + digits.size() || arity < 0) {
      throw JsError("bad arity in rpc entry '" + std::string(item) + "'");
    }
    Ident name(item.substr(0, colon));
    if (!is_valid_ident(name)) throw JsError("invalid identifier " + name);
    out.emplace_back(std::move(name), arity);
    start = end + 1;
  }
  return out;
}

Module build_module(const Ident& name, const Expr& e, const std::vector<std::pair<Ident, int>>& stubs) {
  Module m;
  for (const auto& [stub, arity] : stubs) m.add_stub(stub, arity);
  m.define(name, e);
  return m;
}

}  // namespace qx::js

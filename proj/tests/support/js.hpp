#pragma once

// A small ECMAScript 5 parser covering what the translator and its runtime
// preamble emit, plus a scope checker and a decoder for tagged list values.
// Test-only; it knows nothing about the translator's internals.

#include <cctype>
#include <charconv>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "qx/value.hpp"

namespace qx::jscheck {

class SyntaxError : public std::runtime_error {
 public:
  SyntaxError(std::size_t at, const std::string& what)
      : std::runtime_error("offset " + std::to_string(at) + ": " + what), offset(at) {}
  std::size_t offset;
};

enum class Tok { ident, number, string, punct, end };

struct Token {
  Tok kind;
  std::string text;  // raw source text
  std::size_t at;
};

inline std::vector<Token> lex(const std::string& src) {
  static const char* puncts[] = {"===", "!==", "==", "!=", "<=", ">=", "&&", "||", "++", "--", "+=", "-=",
                                 "(",   ")",   "{",  "}",  "[",  "]",  ";",  ",",  ".",  "?",  ":",  "=",
                                 "<",   ">",   "+",  "-",  "*",  "/",  "%",  "!"};
  std::vector<Token> out;
  std::size_t i = 0;
  auto ident_start = [](char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$'; };
  auto ident_part = [&](char c) { return ident_start(c) || std::isdigit(static_cast<unsigned char>(c)); };
  while (i < src.size()) {
    char c = src[i];
    if (c == ' ' || c == '\n' || c == '\t' || c == '\r') {
      ++i;
    } else if (src.compare(i, 2, "//") == 0) {
      while (i < src.size() && src[i] != '\n') ++i;
    } else if (src.compare(i, 2, "/*") == 0) {
      auto end = src.find("*/", i + 2);
      if (end == std::string::npos) throw SyntaxError(i, "unterminated comment");
      i = end + 2;
    } else if (ident_start(c)) {
      std::size_t s = i;
      while (i < src.size() && ident_part(src[i])) ++i;
      out.push_back({Tok::ident, src.substr(s, i - s), s});
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t s = i;
      while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) ++i;
      if (i < src.size() && src[i] == '.') {
        ++i;
        if (i >= src.size() || !std::isdigit(static_cast<unsigned char>(src[i]))) throw SyntaxError(i, "bad number");
        while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) ++i;
      }
      if (i < src.size() && (src[i] == 'e' || src[i] == 'E')) {
        ++i;
        if (i < src.size() && (src[i] == '+' || src[i] == '-')) ++i;
        if (i >= src.size() || !std::isdigit(static_cast<unsigned char>(src[i]))) throw SyntaxError(i, "bad exponent");
        while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) ++i;
      }
      if (i < src.size() && ident_part(src[i])) throw SyntaxError(i, "identifier directly after number");
      out.push_back({Tok::number, src.substr(s, i - s), s});
    } else if (c == '"' || c == '\'') {
      std::size_t s = i++;
      while (true) {
        if (i >= src.size() || src[i] == '\n') throw SyntaxError(s, "unterminated string");
        if (src[i] == c) break;
        if (src[i] == '\\') {
          ++i;
          if (i >= src.size()) throw SyntaxError(i, "unterminated escape");
          if (src[i] == 'u') {
            for (int k = 1; k <= 4; ++k) {
              if (i + k >= src.size() || !std::isxdigit(static_cast<unsigned char>(src[i + k]))) {
                throw SyntaxError(i, "bad \\u escape");
              }
            }
            i += 4;
          }
        }
        ++i;
      }
      ++i;
      out.push_back({Tok::string, src.substr(s, i - s), s});
    } else {
      bool found = false;
      for (const char* p : puncts) {
        std::size_t n = std::char_traits<char>::length(p);
        if (src.compare(i, n, p) == 0) {
          out.push_back({Tok::punct, p, i});
          i += n;
          found = true;
          break;
        }
      }
      if (!found) throw SyntaxError(i, std::string("unexpected character '") + c + "'");
    }
  }
  out.push_back({Tok::end, "", src.size()});
  return out;
}

struct Node;
using NodeP = std::shared_ptr<Node>;

enum class K {
  // expressions
  number, string, ident, literal, object, array, function, call, new_, member, index, unary, binary, logical,
  assign, cond, update,
  // statements
  var, func_decl, ret, if_, while_, for_, throw_, block, expr_stmt, empty, program
};

struct Node {
  K kind;
  std::string text;                  // literal text, identifier, operator, property or function name
  std::vector<NodeP> kids;           // operands / statements / elements
  std::vector<std::string> keys;     // object keys, function params, var names
  std::size_t at = 0;
};

class Parser {
 public:
  explicit Parser(const std::string& src) : toks_(lex(src)) {}

  NodeP program() {
    auto p = node(K::program);
    while (peek().kind != Tok::end) p->kids.push_back(statement());
    return p;
  }

  NodeP single_expression() {
    auto e = expression();
    if (peek().kind != Tok::end) fail("trailing input");
    return e;
  }

 private:
  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  bool is(const char* p) const { return peek().kind == Tok::punct && peek().text == p; }
  bool is_word(const char* w) const { return peek().kind == Tok::ident && peek().text == w; }
  [[noreturn]] void fail(const std::string& what) const {
    throw SyntaxError(peek().at, what + " near '" + peek().text + "'");
  }
  void expect(const char* p) {
    if (!is(p)) fail(std::string("expected '") + p + "'");
    ++pos_;
  }
  bool accept(const char* p) {
    if (!is(p)) return false;
    ++pos_;
    return true;
  }
  NodeP node(K k, std::string text = {}) {
    auto n = std::make_shared<Node>();
    n->kind = k;
    n->text = std::move(text);
    n->at = peek().at;
    return n;
  }

  static bool reserved(const std::string& w) {
    static const std::set<std::string> words = {
        "break", "case",   "catch", "class",  "const", "continue", "debugger", "default", "delete",
        "do",    "else",   "enum",  "export", "extends", "false",  "finally",  "for",     "function",
        "if",    "import", "in",    "instanceof", "new", "null",  "return",   "super",   "switch",
        "this",  "throw",  "true",  "try",    "typeof", "var",    "void",     "while",   "with",
        "yield", "let",    "static", "implements", "interface", "package", "private", "protected", "public"};
    return words.count(w) > 0;
  }

  std::string binding_name() {
    if (peek().kind != Tok::ident || reserved(peek().text)) fail("expected a binding name");
    // Strict mode also forbids these as bindings.
    if (peek().text == "eval" || peek().text == "arguments") fail("restricted binding name");
    return toks_[pos_++].text;
  }

  NodeP statement() {
    if (accept(";")) return node(K::empty);
    if (is("{")) return block();
    if (is_word("var")) {
      auto v = var_decl();
      expect(";");
      return v;
    }
    if (is_word("function")) {
      ++pos_;
      auto f = function_rest(binding_name());
      f->kind = K::func_decl;
      return f;
    }
    if (is_word("return")) {
      ++pos_;
      auto r = node(K::ret);
      if (!is(";") && !is("}")) r->kids.push_back(expression());
      expect(";");
      return r;
    }
    if (is_word("if")) {
      ++pos_;
      auto n = node(K::if_);
      expect("(");
      n->kids.push_back(expression());
      expect(")");
      n->kids.push_back(statement());
      if (is_word("else")) {
        ++pos_;
        n->kids.push_back(statement());
      }
      return n;
    }
    if (is_word("while")) {
      ++pos_;
      auto n = node(K::while_);
      expect("(");
      n->kids.push_back(expression());
      expect(")");
      n->kids.push_back(statement());
      return n;
    }
    if (is_word("for")) {
      ++pos_;
      auto n = node(K::for_);
      expect("(");
      n->kids.push_back(is_word("var") ? var_decl() : is(";") ? node(K::empty) : expression());
      expect(";");
      n->kids.push_back(is(";") ? node(K::empty) : expression());
      expect(";");
      n->kids.push_back(is(")") ? node(K::empty) : expression());
      expect(")");
      n->kids.push_back(statement());
      return n;
    }
    if (is_word("throw")) {
      ++pos_;
      auto n = node(K::throw_);
      n->kids.push_back(expression());
      expect(";");
      return n;
    }
    if (peek().kind == Tok::ident && reserved(peek().text) && !is_word("function") && !is_word("new") &&
        !is_word("typeof") && !is_word("true") && !is_word("false") && !is_word("null")) {
      fail("unsupported statement");
    }
    auto n = node(K::expr_stmt);
    n->kids.push_back(expression());
    expect(";");
    return n;
  }

  NodeP block() {
    auto b = node(K::block);
    expect("{");
    while (!is("}")) {
      if (peek().kind == Tok::end) fail("unterminated block");
      b->kids.push_back(statement());
    }
    expect("}");
    return b;
  }

  NodeP var_decl() {
    ++pos_;  // var
    auto v = node(K::var);
    do {
      v->keys.push_back(binding_name());
      v->kids.push_back(accept("=") ? assignment() : nullptr);
    } while (accept(","));
    return v;
  }

  NodeP function_rest(std::string name) {
    auto f = node(K::function, std::move(name));
    expect("(");
    if (!is(")")) {
      do {
        auto p = binding_name();
        for (const auto& q : f->keys) {
          if (q == p) fail("duplicate parameter " + p);
        }
        f->keys.push_back(p);
      } while (accept(","));
    }
    expect(")");
    auto body = block();
    f->kids = std::move(body->kids);
    return f;
  }

  NodeP expression() {
    auto e = assignment();
    while (is(",")) fail("comma expressions are not emitted");
    return e;
  }

  NodeP assignment() {
    auto lhs = conditional();
    if (is("=") || is("+=") || is("-=")) {
      if (lhs->kind != K::ident && lhs->kind != K::member && lhs->kind != K::index) fail("invalid assignment target");
      auto n = node(K::assign, toks_[pos_++].text);
      n->kids = {lhs, assignment()};
      return n;
    }
    return lhs;
  }

  NodeP conditional() {
    auto c = logical_or();
    if (!accept("?")) return c;
    auto n = node(K::cond);
    auto t = assignment();
    expect(":");
    n->kids = {c, t, assignment()};
    return n;
  }

  NodeP logical_or() {
    auto l = logical_and();
    while (is("||")) {
      auto n = node(K::logical, toks_[pos_++].text);
      n->kids = {l, logical_and()};
      l = n;
    }
    return l;
  }

  NodeP logical_and() {
    auto l = equality();
    while (is("&&")) {
      auto n = node(K::logical, toks_[pos_++].text);
      n->kids = {l, equality()};
      l = n;
    }
    return l;
  }

  NodeP equality() {
    auto l = relational();
    while (is("===") || is("!==") || is("==") || is("!=")) {
      auto n = node(K::binary, toks_[pos_++].text);
      n->kids = {l, relational()};
      l = n;
    }
    return l;
  }

  NodeP relational() {
    auto l = additive();
    while (is("<") || is(">") || is("<=") || is(">=")) {
      auto n = node(K::binary, toks_[pos_++].text);
      n->kids = {l, additive()};
      l = n;
    }
    return l;
  }

  NodeP additive() {
    auto l = multiplicative();
    while (is("+") || is("-")) {
      auto n = node(K::binary, toks_[pos_++].text);
      n->kids = {l, multiplicative()};
      l = n;
    }
    return l;
  }

  NodeP multiplicative() {
    auto l = unary();
    while (is("*") || is("/") || is("%")) {
      auto n = node(K::binary, toks_[pos_++].text);
      n->kids = {l, unary()};
      l = n;
    }
    return l;
  }

  NodeP unary() {
    if (is("!") || is("-") || is("+") || is_word("typeof")) {
      auto n = node(K::unary, toks_[pos_++].text);
      n->kids = {unary()};
      return n;
    }
    if (is("++") || is("--")) fail("prefix update is not emitted");
    auto e = postfix();
    return e;
  }

  NodeP postfix() {
    auto e = call_member();
    if (is("++") || is("--")) {
      if (e->kind != K::ident && e->kind != K::member) fail("invalid update target");
      auto n = node(K::update, toks_[pos_++].text);
      n->kids = {e};
      return n;
    }
    return e;
  }

  NodeP call_member() {
    NodeP e;
    if (is_word("new")) {
      ++pos_;
      e = node(K::new_);
      e->kids.push_back(primary());
      expect("(");
      arguments(*e);
    } else {
      e = primary();
    }
    for (;;) {
      if (accept(".")) {
        if (peek().kind != Tok::ident) fail("expected property name");
        auto m = node(K::member, toks_[pos_++].text);
        m->kids = {e};
        e = m;
      } else if (accept("[")) {
        auto m = node(K::index);
        m->kids = {e, expression()};
        expect("]");
        e = m;
      } else if (accept("(")) {
        auto c = node(K::call);
        c->kids = {e};
        arguments(*c);
        e = c;
      } else {
        return e;
      }
    }
  }

  void arguments(Node& n) {
    if (!is(")")) {
      do n.kids.push_back(assignment());
      while (accept(","));
    }
    expect(")");
  }

  NodeP primary() {
    const Token& t = peek();
    if (t.kind == Tok::number) return advance(K::number);
    if (t.kind == Tok::string) return advance(K::string);
    if (accept("(")) {
      auto e = expression();
      expect(")");
      return e;
    }
    if (is("{")) return object();
    if (accept("[")) {
      auto a = node(K::array);
      if (!is("]")) {
        do a->kids.push_back(assignment());
        while (accept(","));
      }
      expect("]");
      return a;
    }
    if (t.kind == Tok::ident) {
      if (t.text == "true" || t.text == "false" || t.text == "null") return advance(K::literal);
      if (t.text == "function") {
        ++pos_;
        std::string name;
        if (!is("(")) name = binding_name();
        return function_rest(name);
      }
      if (reserved(t.text)) fail("reserved word in expression");
      return advance(K::ident);
    }
    fail("expected an expression");
  }

  NodeP advance(K k) {
    auto n = node(k, peek().text);
    ++pos_;
    return n;
  }

  NodeP object() {
    auto o = node(K::object);
    expect("{");
    std::set<std::string> seen;
    if (!is("}")) {
      do {
        if (peek().kind != Tok::ident && peek().kind != Tok::string && peek().kind != Tok::number) {
          fail("expected property key");
        }
        std::string key = toks_[pos_++].text;
        if (!seen.insert(key).second) fail("duplicate key " + key);
        expect(":");
        o->keys.push_back(key);
        o->kids.push_back(assignment());
      } while (accept(","));
    }
    expect("}");
    return o;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

inline NodeP parse_program(const std::string& src) { return Parser(src).program(); }
inline NodeP parse_expression(const std::string& src) { return Parser(src).single_expression(); }

// --- scope checking ------------------------------------------------------

/// Every identifier reference resolves to a parameter, a var or a function
/// declaration in an enclosing function (hoisted), a top-level declaration,
/// or one of `globals`. Returns the unresolved names.
class ScopeChecker {
 public:
  explicit ScopeChecker(std::set<std::string> globals) : globals_(std::move(globals)) {}

  std::set<std::string> check(const NodeP& program) {
    std::set<std::string> top;
    for (const auto& s : program->kids) declare(s, top);
    scopes_.push_back(top);
    for (const auto& s : program->kids) visit(s);
    scopes_.pop_back();
    return missing_;
  }

  /// Declared names of a program's top level.
  static std::set<std::string> top_level(const NodeP& program) {
    std::set<std::string> top;
    for (const auto& s : program->kids) declare(s, top);
    return top;
  }

 private:
  // Collects var and function declarations of one function body, without
  // descending into nested functions.
  static void declare(const NodeP& n, std::set<std::string>& into) {
    if (!n) return;
    switch (n->kind) {
      case K::var:
        into.insert(n->keys.begin(), n->keys.end());
        return;
      case K::func_decl: into.insert(n->text); return;
      case K::if_:
      case K::while_:
      case K::for_:
      case K::block:
        for (const auto& k : n->kids) declare(k, into);
        return;
      default: return;
    }
  }

  void visit(const NodeP& n) {
    if (!n) return;
    switch (n->kind) {
      case K::ident:
        if (!resolves(n->text)) missing_.insert(n->text);
        return;
      case K::member:
        visit(n->kids[0]);  // the property name is not a reference
        return;
      case K::function:
      case K::func_decl: {
        std::set<std::string> own(n->keys.begin(), n->keys.end());
        // A named function expression sees its own name.
        if (n->kind == K::function && !n->text.empty()) own.insert(n->text);
        for (const auto& s : n->kids) declare(s, own);
        scopes_.push_back(own);
        for (const auto& s : n->kids) visit(s);
        scopes_.pop_back();
        return;
      }
      default:
        for (const auto& k : n->kids) visit(k);
    }
  }

  bool resolves(const std::string& name) const {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      if (it->count(name)) return true;
    }
    return globals_.count(name) > 0;
  }

  std::set<std::string> globals_;
  std::vector<std::set<std::string>> scopes_;
  std::set<std::string> missing_;
};

// --- whole-module checks -------------------------------------------------

inline void rt_members(const NodeP& n, std::set<std::string>& out) {
  if (!n) return;
  if (n->kind == K::member && n->kids[0]->kind == K::ident && n->kids[0]->text == "RT") out.insert(n->text);
  for (const auto& k : n->kids) rt_members(k, out);
}

/// Keys of the object literal returned by `var RT = (function () { ... })();`.
inline std::set<std::string> runtime_exports(const std::string& preamble) {
  auto prog = parse_program(preamble);
  if (prog->kids.empty() || prog->kids[0]->kind != K::var || prog->kids[0]->keys.at(0) != "RT") {
    throw std::runtime_error("preamble does not start with var RT");
  }
  const auto& call = prog->kids[0]->kids.at(0);
  if (!call || call->kind != K::call || call->kids.at(0)->kind != K::function) {
    throw std::runtime_error("RT is not an immediately applied function");
  }
  for (const auto& s : call->kids[0]->kids) {
    if (s->kind == K::ret && !s->kids.empty() && s->kids[0]->kind == K::object) {
      const auto& keys = s->kids[0]->keys;
      return {keys.begin(), keys.end()};
    }
  }
  throw std::runtime_error("runtime returns no object");
}

/// Problems with a full module text: syntax errors, names that resolve
/// nowhere (host globals Math and Error aside), and RT members the
/// preamble does not export. Empty means the module is sound.
inline std::vector<std::string> module_problems(const std::string& text, const std::string& preamble) {
  std::vector<std::string> out;
  NodeP prog;
  try {
    prog = parse_program(text);
  } catch (const SyntaxError& e) {
    return {std::string("syntax: ") + e.what()};
  }
  for (const auto& name : ScopeChecker({"Math", "Error"}).check(prog)) out.push_back("unresolved " + name);
  std::set<std::string> used;
  rt_members(prog, used);
  auto exported = runtime_exports(preamble);
  for (const auto& name : used) {
    if (!exported.count(name)) out.push_back("missing RT." + name);
  }
  return out;
}

// --- value decoding ------------------------------------------------------

inline std::string unescape_string(const std::string& raw) {
  std::string out;
  for (std::size_t i = 1; i + 1 < raw.size(); ++i) {
    char c = raw[i];
    if (c != '\\') {
      out += c;
      continue;
    }
    char e = raw[++i];
    switch (e) {
      case 'n': out += '\n'; break;
      case 't': out += '\t'; break;
      case 'r': out += '\r'; break;
      case 'b': out += '\b'; break;
      case 'f': out += '\f'; break;
      case 'v': out += '\v'; break;
      case '0': out += '\0'; break;
      case 'u': {
        unsigned cp = static_cast<unsigned>(std::stoul(raw.substr(i + 1, 4), nullptr, 16));
        i += 4;
        if (cp >= 0xD800 && cp <= 0xDFFF) throw std::runtime_error("surrogate escapes are not emitted");
        if (cp < 0x80) {
          out += static_cast<char>(cp);
        } else if (cp < 0x800) {
          out += static_cast<char>(0xC0 | (cp >> 6));
          out += static_cast<char>(0x80 | (cp & 0x3F));
        } else {
          out += static_cast<char>(0xE0 | (cp >> 12));
          out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
          out += static_cast<char>(0x80 | (cp & 0x3F));
        }
        break;
      }
      default: out += e;
    }
  }
  return out;
}

/// Number text with `.` or an exponent decodes as a float, else as an int.
inline Value decode_number(const std::string& text, bool negative) {
  if (text.find_first_of(".eE") != std::string::npos) {
    double d = 0;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), d);
    if (ec != std::errc{} || p != text.data() + text.size()) throw std::runtime_error("bad float " + text);
    return negative ? -d : d;
  }
  if (negative) {
    // -9223372036854775808 has no positive counterpart.
    if (text == "9223372036854775808") return std::numeric_limits<std::int64_t>::min();
    return -static_cast<std::int64_t>(std::stoll(text));
  }
  return static_cast<std::int64_t>(std::stoll(text));
}

inline Value decode_value(const NodeP& n) {
  switch (n->kind) {
    case K::number: return decode_number(n->text, false);
    case K::unary:
      if (n->text == "-" && n->kids[0]->kind == K::number) return decode_number(n->kids[0]->text, true);
      break;
    case K::string: return unescape_string(n->text);
    case K::literal:
      if (n->text == "null") return Unit{};
      return n->text == "true";
    case K::object: {
      std::vector<Value> items;
      const Node* cell = n.get();
      for (;;) {
        std::map<std::string, NodeP> fields;
        for (std::size_t i = 0; i < cell->keys.size(); ++i) fields[cell->keys[i]] = cell->kids[i];
        auto tag = fields.find("$");
        if (tag == fields.end() || tag->second->kind != K::number) throw std::runtime_error("untagged object");
        if (tag->second->text == "0" && fields.size() == 1) break;
        if (tag->second->text != "1" || fields.size() != 3 || !fields.count("$0") || !fields.count("$1")) {
          throw std::runtime_error("malformed list cell");
        }
        items.push_back(decode_value(fields["$0"]));
        cell = fields["$1"].get();
        if (cell->kind != K::object) throw std::runtime_error("list tail is not a cell");
      }
      return make_list(std::move(items));
    }
    default: break;
  }
  throw std::runtime_error("not a value literal");
}

inline Value decode_value(const std::string& text) { return decode_value(parse_expression(text)); }

}  // namespace qx::jscheck

#include "qx/syntax.hpp"

#include <charconv>
#include <cmath>
#include <system_error>

namespace qx {

ParseError::ParseError(std::size_t offset, const std::string& message)
    : std::runtime_error("offset " + std::to_string(offset) + ": " + message),
      offset_(offset),
      message_(message) {}

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

bool is_delimiter(char c) { return is_space(c) || c == '(' || c == ')' || c == '"' || c == ';'; }

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

// Length of the UTF-8 sequence starting at s[i], or 0 if malformed.
std::size_t utf8_sequence_length(std::string_view s, std::size_t i) {
  auto byte = [&](std::size_t k) { return static_cast<unsigned char>(s[k]); };
  unsigned char lead = byte(i);
  if (lead < 0x80) return 1;
  std::size_t len;
  std::uint32_t cp;
  if ((lead & 0xE0) == 0xC0) {
    len = 2;
    cp = lead & 0x1F;
  } else if ((lead & 0xF0) == 0xE0) {
    len = 3;
    cp = lead & 0x0F;
  } else if ((lead & 0xF8) == 0xF0) {
    len = 4;
    cp = lead & 0x07;
  } else {
    return 0;
  }
  if (i + len > s.size()) return 0;
  for (std::size_t k = 1; k < len; ++k) {
    if ((byte(i + k) & 0xC0) != 0x80) return 0;
    cp = (cp << 6) | (byte(i + k) & 0x3F);
  }
  static constexpr std::uint32_t kMin[] = {0, 0, 0x80, 0x800, 0x10000};
  if (cp < kMin[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return 0;
  return len;
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

void print_into(std::string& out, const Expr& e) {
  const auto& v = e.node().v;
  if (auto* n = std::get_if<LitInt>(&v)) {
    out += "(int ";
    out += std::to_string(n->value);
    out += ')';
  } else if (auto* n = std::get_if<LitFloat>(&v)) {
    out += "(float ";
    out += format_float(n->value);
    out += ')';
  } else if (auto* n = std::get_if<LitBool>(&v)) {
    out += n->value ? "(bool true)" : "(bool false)";
  } else if (auto* n = std::get_if<LitStr>(&v)) {
    out += "(str ";
    out += quote_string(n->value);
    out += ')';
  } else if (std::holds_alternative<LitUnit>(v)) {
    out += "unit";
  } else if (auto* n = std::get_if<Var>(&v)) {
    out += "(var ";
    out += n->name;
    out += ')';
  } else if (auto* n = std::get_if<Lam>(&v)) {
    out += "(lam ";
    out += n->param;
    out += ' ';
    print_into(out, n->body);
    out += ')';
  } else if (auto* n = std::get_if<App>(&v)) {
    out += "(app ";
    print_into(out, n->fn);
    out += ' ';
    print_into(out, n->arg);
    out += ')';
  } else if (auto* n = std::get_if<Let>(&v)) {
    out += "(let ";
    out += n->name;
    out += ' ';
    print_into(out, n->bound);
    out += ' ';
    print_into(out, n->body);
    out += ')';
  } else if (auto* n = std::get_if<LetRec>(&v)) {
    out += "(letrec ";
    out += n->name;
    out += ' ';
    print_into(out, n->bound);
    out += ' ';
    print_into(out, n->body);
    out += ')';
  } else if (auto* n = std::get_if<If>(&v)) {
    out += "(if ";
    print_into(out, n->cond);
    out += ' ';
    print_into(out, n->then_branch);
    out += ' ';
    print_into(out, n->else_branch);
    out += ')';
  } else if (auto* n = std::get_if<ListLit>(&v)) {
    out += "(list";
    for (const auto& item : n->items) {
      out += ' ';
      print_into(out, item);
    }
    out += ')';
  }
}

}  // namespace

bool is_valid_utf8(std::string_view s) {
  for (std::size_t i = 0; i < s.size();) {
    std::size_t len = utf8_sequence_length(s, i);
    if (len == 0) return false;
    i += len;
  }
  return true;
}

std::string format_float(double d) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, d);
  std::string s(buf, end);
  if (s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

std::string quote_string(std::string_view s) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(s.size() + 2);
  out += '"';
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default: {
        auto u = static_cast<unsigned char>(c);
        if (u < 0x20 || u == 0x7F) {
          out += "\\u00";
          out += kHex[u >> 4];
          out += kHex[u & 0xF];
        } else {
          out += c;
        }
      }
    }
  }
  out += '"';
  return out;
}

void Reader::fail(std::size_t at, const std::string& message) const { throw ParseError(at, message); }

void Reader::skip_space() {
  while (pos_ < text_.size()) {
    char c = text_[pos_];
    if (is_space(c)) {
      ++pos_;
    } else if (c == ';') {
      while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
    } else {
      break;
    }
  }
}

bool Reader::at_end() {
  skip_space();
  return pos_ >= text_.size();
}

bool Reader::at_close() {
  skip_space();
  return pos_ < text_.size() && text_[pos_] == ')';
}

bool Reader::at_open() {
  skip_space();
  return pos_ < text_.size() && text_[pos_] == '(';
}

void Reader::expect_open() {
  skip_space();
  if (pos_ >= text_.size()) fail(pos_, "unexpected end of input, expected '('");
  if (text_[pos_] != '(') fail(pos_, "expected '('");
  ++pos_;
}

void Reader::expect_close() {
  skip_space();
  if (pos_ >= text_.size()) fail(pos_, "unexpected end of input, expected ')'");
  if (text_[pos_] != ')') fail(pos_, "expected ')'");
  ++pos_;
}

void Reader::expect_end() {
  skip_space();
  if (pos_ < text_.size()) fail(pos_, "trailing input after expression");
}

std::string_view Reader::read_atom() {
  skip_space();
  if (pos_ >= text_.size()) fail(pos_, "unexpected end of input");
  std::size_t start = pos_;
  while (pos_ < text_.size() && !is_delimiter(text_[pos_])) ++pos_;
  if (pos_ == start) fail(pos_, std::string("unexpected '") + text_[pos_] + "'");
  return text_.substr(start, pos_ - start);
}

std::string Reader::read_string() {
  skip_space();
  if (pos_ >= text_.size()) fail(pos_, "unexpected end of input, expected string");
  if (text_[pos_] != '"') fail(pos_, "expected string literal");
  ++pos_;
  std::string out;
  while (true) {
    if (pos_ >= text_.size()) fail(pos_, "unterminated string literal");
    char c = text_[pos_];
    if (c == '"') {
      ++pos_;
      return out;
    }
    if (c == '\\') {
      std::size_t at = pos_;
      if (++pos_ >= text_.size()) fail(pos_, "unterminated string literal");
      switch (text_[pos_++]) {
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case 'r': out += '\r'; break;
        case 'u': {
          auto read_unit = [&]() -> std::uint32_t {
            if (pos_ + 4 > text_.size()) fail(at, "truncated \\u escape");
            std::uint32_t cp = 0;
            for (int k = 0; k < 4; ++k) {
              int h = hex_value(text_[pos_ + k]);
              if (h < 0) fail(pos_ + k, "bad hex digit in \\u escape");
              cp = cp * 16 + static_cast<std::uint32_t>(h);
            }
            pos_ += 4;
            return cp;
          };
          std::uint32_t cp = read_unit();
          if (cp >= 0xDC00 && cp <= 0xDFFF) fail(at, "unpaired low surrogate in \\u escape");
          if (cp >= 0xD800 && cp <= 0xDBFF) {
            if (pos_ + 2 > text_.size() || text_[pos_] != '\\' || text_[pos_ + 1] != 'u') {
              fail(at, "unpaired high surrogate in \\u escape");
            }
            pos_ += 2;
            std::uint32_t low = read_unit();
            if (low < 0xDC00 || low > 0xDFFF) fail(at, "unpaired high surrogate in \\u escape");
            cp = 0x10000 + ((cp - 0xD800) << 10) + (low - 0xDC00);
          }
          append_utf8(out, cp);
          break;
        }
        default:
          fail(at, "unknown escape sequence");
      }
      continue;
    }
    if (static_cast<unsigned char>(c) < 0x80) {
      out += c;
      ++pos_;
      continue;
    }
    std::size_t len = utf8_sequence_length(text_, pos_);
    if (len == 0) fail(pos_, "invalid UTF-8 in string literal");
    out.append(text_.substr(pos_, len));
    pos_ += len;
  }
}

std::int64_t Reader::read_int() {
  std::size_t at = (skip_space(), pos_);
  auto tok = read_atom();
  std::int64_t value = 0;
  auto [end, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec == std::errc::result_out_of_range) fail(at, "integer literal out of 64-bit range");
  if (ec != std::errc{} || end != tok.data() + tok.size()) fail(at, "bad integer literal");
  return value;
}

std::uint64_t Reader::read_uint() {
  std::size_t at = (skip_space(), pos_);
  auto tok = read_atom();
  std::uint64_t value = 0;
  auto [end, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec == std::errc::result_out_of_range) fail(at, "unsigned literal out of 64-bit range");
  if (ec != std::errc{} || end != tok.data() + tok.size()) fail(at, "bad unsigned literal");
  return value;
}

double Reader::read_float() {
  std::size_t at = (skip_space(), pos_);
  auto tok = read_atom();
  for (char c : tok) {
    bool ok = (c >= '0' && c <= '9') || c == '.' || c == 'e' || c == 'E' || c == '-' || c == '+';
    if (!ok) fail(at, "bad float literal");
  }
  double value = 0;
  auto [end, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec == std::errc::result_out_of_range) fail(at, "float literal out of range");
  if (ec != std::errc{} || end != tok.data() + tok.size()) fail(at, "bad float literal");
  if (!std::isfinite(value)) fail(at, "float literal must be finite");
  return value;
}

Ident Reader::read_ident() {
  std::size_t at = (skip_space(), pos_);
  if (at < text_.size() && (text_[at] == '(' || text_[at] == ')')) fail(at, "expected identifier");
  auto tok = read_atom();
  if (is_reserved_word(tok)) fail(at, "reserved word '" + std::string(tok) + "' used as identifier");
  if (!is_valid_ident(tok)) fail(at, "bad identifier '" + std::string(tok) + "'");
  return Ident(tok);
}

Expr Reader::read_expr() { return read_form(0); }

Expr Reader::read_form(std::size_t depth) {
  if (depth >= kMaxNesting) fail(pos_, "expression nested too deeply");
  skip_space();
  if (pos_ >= text_.size()) fail(pos_, "unexpected end of input, expected expression");
  std::size_t start = pos_;
  if (text_[pos_] != '(') {
    auto tok = read_atom();
    if (tok == "unit") return lit_unit();
    if (is_reserved_word(tok)) fail(start, "reserved word '" + std::string(tok) + "' outside its form");
    fail(start, "bad token '" + std::string(tok) + "'");
  }
  ++pos_;
  skip_space();
  std::size_t head_at = pos_;
  if (pos_ < text_.size() && (text_[pos_] == '(' || text_[pos_] == ')')) {
    fail(head_at, "expected form keyword");
  }
  auto head = read_atom();
  auto sub = [&] { return read_form(depth + 1); };
  Expr result = [&]() -> Expr {
    if (head == "int") return lit_int(read_int());
    if (head == "float") return lit_float(read_float());
    if (head == "bool") {
      std::size_t at = (skip_space(), pos_);
      auto tok = read_atom();
      if (tok == "true") return lit_bool(true);
      if (tok == "false") return lit_bool(false);
      fail(at, "expected true or false");
    }
    if (head == "str") {
      std::string s = read_string();
      return lit_str(std::move(s));
    }
    if (head == "var") return var(read_ident());
    if (head == "lam") {
      Ident param = read_ident();
      return lam(std::move(param), sub());
    }
    if (head == "app") {
      Expr fn = sub();
      return app(std::move(fn), sub());
    }
    if (head == "let") {
      Ident name = read_ident();
      Expr bound = sub();
      return let_in(std::move(name), std::move(bound), sub());
    }
    if (head == "letrec") {
      Ident name = read_ident();
      std::size_t bound_at = (skip_space(), pos_);
      Expr bound = sub();
      if (!bound.as<Lam>()) fail(bound_at, "letrec bound form must be (lam ...)");
      return letrec_in(std::move(name), std::move(bound), sub());
    }
    if (head == "if") {
      Expr cond = sub();
      Expr then_branch = sub();
      return if_then_else(std::move(cond), std::move(then_branch), sub());
    }
    if (head == "list") {
      std::vector<Expr> items;
      while (!at_close()) {
        if (at_end()) fail(pos_, "unexpected end of input, expected ')'");
        items.push_back(sub());
      }
      return list_of(std::move(items));
    }
    if (head == "unit") fail(head_at, "'unit' is written bare, not as a form");
    fail(head_at, "unknown form '" + std::string(head) + "'");
  }();
  expect_close();
  return result;
}

Expr parse_expr(std::string_view text) {
  Reader reader(text);
  Expr e = reader.read_expr();
  reader.expect_end();
  return e;
}

std::string print_expr(const Expr& e) {
  std::string out;
  print_into(out, e);
  return out;
}

}  // namespace qx

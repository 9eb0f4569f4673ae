#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include "qx/expr.hpp"

namespace qx {

/// Parse failure with the byte offset where it was detected.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t offset, const std::string& message);

  std::size_t offset() const { return offset_; }
  const std::string& message() const { return message_; }

 private:
  std::size_t offset_;
  std::string message_;
};

/// Maximum form nesting accepted by the reader. Bounds native recursion for
/// untrusted input.
inline constexpr std::size_t kMaxNesting = 1024;

/// Parses exactly one expression in the canonical grammar. Whitespace and
/// `;` line comments are allowed between tokens.
Expr parse_expr(std::string_view text);

/// Canonical text: single spaces, no comments, shortest round-trip floats.
std::string print_expr(const Expr& e);

/// Shortest decimal that reads back to the same binary64, always containing
/// a `.` or an exponent.
std::string format_float(double d);

/// Double-quoted string literal with \" \\ \n \t \r and \u00XX escapes.
std::string quote_string(std::string_view s);

bool is_valid_utf8(std::string_view s);

/// Token-level cursor over s-expression text, shared by the expression
/// parser and the wire message decoder.
class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {}

  std::size_t offset() const { return pos_; }
  void skip_space();
  bool at_end();
  bool at_close();
  bool at_open();

  void expect_open();
  void expect_close();
  /// A bare token: a maximal run of bytes other than whitespace, parens,
  /// `"` and `;`.
  std::string_view read_atom();
  std::string read_string();
  std::int64_t read_int();
  std::uint64_t read_uint();
  Expr read_expr();
  /// Fails unless only whitespace and comments remain.
  void expect_end();

  [[noreturn]] void fail(std::size_t at, const std::string& message) const;

 private:
  Expr read_form(std::size_t depth);
  Ident read_ident();
  double read_float();

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace qx

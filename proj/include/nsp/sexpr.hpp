#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "nsp/core.hpp"

namespace nsp {

class ParseError : public Error {
public:
  ParseError(const std::string& msg, int line, int column)
      : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + msg),
        line_(line),
        column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

private:
  int line_;
  int column_;
};

struct SExpr {
  enum class Kind { Symbol, String, List };

  Kind kind = Kind::Symbol;
  std::string text;
  std::vector<SExpr> items;
  int line = 1;
  int column = 1;

  bool is_list() const { return kind == Kind::List; }
  bool is_symbol() const { return kind == Kind::Symbol; }
  bool is_symbol(std::string_view s) const { return kind == Kind::Symbol && text == s; }
  /// Head symbol of a non-empty list, or "" otherwise.
  const std::string& head() const;

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, line, column); }
};

/// Reads all top-level s-expressions. `;` starts a line comment; strings are
/// double-quoted with backslash escapes.
std::vector<SExpr> read_sexprs(std::string_view source);

std::string quote_string(const std::string& s);

}  // namespace nsp

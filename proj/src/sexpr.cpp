#include "nsp/sexpr.hpp"

#include <cctype>

namespace nsp {

const std::string& SExpr::head() const {
  static const std::string empty;
  if (kind != Kind::List || items.empty() || !items.front().is_symbol()) return empty;
  return items.front().text;
}

namespace {

class Reader {
public:
  explicit Reader(std::string_view src) : src_(src) {}

  std::vector<SExpr> read_all() {
    std::vector<SExpr> out;
    skip();
    while (pos_ < src_.size()) {
      out.push_back(read());
      skip();
    }
    return out;
  }

private:
  char peek() const { return src_[pos_]; }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip() {
    while (pos_ < src_.size()) {
      if (std::isspace(static_cast<unsigned char>(peek()))) {
        advance();
      } else if (peek() == ';') {
        while (pos_ < src_.size() && peek() != '\n') advance();
      } else {
        break;
      }
    }
  }

  SExpr read() {
    SExpr e;
    e.line = line_;
    e.column = col_;
    const char c = peek();
    if (c == '(') {
      e.kind = SExpr::Kind::List;
      advance();
      skip();
      while (pos_ < src_.size() && peek() != ')') {
        e.items.push_back(read());
        skip();
      }
      if (pos_ >= src_.size()) throw ParseError("unterminated list", e.line, e.column);
      advance();
    } else if (c == ')') {
      throw ParseError("unexpected ')'", line_, col_);
    } else if (c == '"') {
      e.kind = SExpr::Kind::String;
      advance();
      while (pos_ < src_.size() && peek() != '"') {
        if (peek() == '\\') {
          advance();
          if (pos_ >= src_.size()) break;
        }
        e.text.push_back(peek());
        advance();
      }
      if (pos_ >= src_.size()) throw ParseError("unterminated string", e.line, e.column);
      advance();
    } else {
      while (pos_ < src_.size()) {
        const char d = peek();
        if (std::isspace(static_cast<unsigned char>(d)) || d == '(' || d == ')' || d == ';' || d == '"') break;
        e.text.push_back(d);
        advance();
      }
    }
    return e;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

}  // namespace

std::vector<SExpr> read_sexprs(std::string_view source) { return Reader(source).read_all(); }

std::string quote_string(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace nsp

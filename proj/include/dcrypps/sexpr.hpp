#pragma once

// Reader for the parenthesized notation shared by model (.pam) and
// properties documents: lists (), vectors [], maps {}, symbols, :keywords,
// "strings", numbers. ';' starts a comment running to end of line.

#include <charconv>
#include <string>
#include <string_view>
#include <vector>

#include "dcrypps/error.hpp"

namespace dcrypps::sexpr {

enum class Kind { kList, kVector, kMap, kSymbol, kKeyword, kString, kNumber };

struct Datum {
  Kind kind = Kind::kSymbol;
  std::string text;  // symbol / keyword name (no colon) / string contents
  double number = 0.0;
  std::vector<Datum> items;  // list, vector, or map (alternating key, value)
  SourceSpan span;

  bool is(Kind k) const { return kind == k; }
  bool is_symbol(std::string_view name) const {
    return kind == Kind::kSymbol && text == name;
  }
  bool is_keyword(std::string_view name) const {
    return kind == Kind::kKeyword && text == name;
  }
  bool is_sequence() const { return kind == Kind::kList || kind == Kind::kVector; }
  // Symbols and keywords both name things.
  bool is_name() const { return kind == Kind::kSymbol || kind == Kind::kKeyword; }
};

inline const char* kind_name(Kind k) {
  switch (k) {
    case Kind::kList: return "list";
    case Kind::kVector: return "vector";
    case Kind::kMap: return "map";
    case Kind::kSymbol: return "symbol";
    case Kind::kKeyword: return "keyword";
    case Kind::kString: return "string";
    case Kind::kNumber: return "number";
  }
  return "?";
}

namespace detail {

class Reader {
 public:
  Reader(std::string_view src, std::string file) : src_(src), file_(std::move(file)) {}

  std::vector<Datum> read_all() {
    std::vector<Datum> out;
    for (;;) {
      skip_ws();
      if (at_end()) break;
      out.push_back(read_datum());
    }
    return out;
  }

 private:
  std::string_view src_;
  std::string file_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;

  bool at_end() const { return pos_ >= src_.size(); }
  char peek() const { return src_[pos_]; }

  SourceSpan here() const { return SourceSpan{file_, line_, col_}; }

  char advance() {
    char c = src_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  void skip_ws() {
    while (!at_end()) {
      char c = peek();
      if (c == ';') {
        while (!at_end() && peek() != '\n') advance();
      } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == ',') {
        advance();
      } else {
        break;
      }
    }
  }

  static bool is_delim(char c) {
    return c == '(' || c == ')' || c == '[' || c == ']' || c == '{' || c == '}' ||
           c == '"' || c == ';' || c == ' ' || c == '\t' || c == '\n' || c == '\r' ||
           c == ',';
  }

  Datum read_datum() {
    SourceSpan start = here();
    char c = peek();
    switch (c) {
      case '(': return read_seq(Kind::kList, ')', start);
      case '[': return read_seq(Kind::kVector, ']', start);
      case '{': return read_seq(Kind::kMap, '}', start);
      case ')':
      case ']':
      case '}':
        throw Error(ErrorCode::kParse,
                    std::string("unbalanced delimiter: unexpected '") + c + "'", start);
      case '"': return read_string(start);
      default: return read_atom(start);
    }
  }

  Datum read_seq(Kind kind, char close, const SourceSpan& start) {
    advance();  // opener
    Datum d;
    d.kind = kind;
    d.span = start;
    for (;;) {
      skip_ws();
      if (at_end()) {
        throw Error(ErrorCode::kParse,
                    std::string("unbalanced delimiter: missing '") + close + "'", start);
      }
      char c = peek();
      if (c == close) {
        advance();
        break;
      }
      if (c == ')' || c == ']' || c == '}') {
        throw Error(ErrorCode::kParse,
                    std::string("unbalanced delimiter: expected '") + close + "' but found '" +
                        c + "'",
                    here());
      }
      d.items.push_back(read_datum());
    }
    if (kind == Kind::kMap && d.items.size() % 2 != 0) {
      throw Error(ErrorCode::kParse, "map literal needs an even number of forms", start);
    }
    return d;
  }

  Datum read_string(const SourceSpan& start) {
    advance();  // opening quote
    Datum d;
    d.kind = Kind::kString;
    d.span = start;
    for (;;) {
      if (at_end()) throw Error(ErrorCode::kParse, "unterminated string", start);
      char c = advance();
      if (c == '"') break;
      if (c == '\\') {
        if (at_end()) throw Error(ErrorCode::kParse, "unterminated string", start);
        char e = advance();
        switch (e) {
          case 'n': d.text.push_back('\n'); break;
          case 't': d.text.push_back('\t'); break;
          default: d.text.push_back(e); break;
        }
      } else {
        d.text.push_back(c);
      }
    }
    return d;
  }

  Datum read_atom(const SourceSpan& start) {
    std::size_t begin = pos_;
    while (!at_end() && !is_delim(peek())) advance();
    std::string_view tok = src_.substr(begin, pos_ - begin);
    Datum d;
    d.span = start;
    if (tok.size() > 1 && tok.front() == ':') {
      d.kind = Kind::kKeyword;
      d.text = std::string(tok.substr(1));
      return d;
    }
    if (looks_numeric(tok)) {
      double v = 0.0;
      std::string_view digits = tok.front() == '+' ? tok.substr(1) : tok;
      auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
      if (ec != std::errc() || ptr != digits.data() + digits.size()) {
        throw Error(ErrorCode::kParse, "malformed number '" + std::string(tok) + "'", start);
      }
      d.kind = Kind::kNumber;
      d.number = v;
      d.text = std::string(tok);
      return d;
    }
    d.kind = Kind::kSymbol;
    d.text = std::string(tok);
    return d;
  }

  static bool looks_numeric(std::string_view tok) {
    std::size_t i = 0;
    if (i < tok.size() && (tok[i] == '-' || tok[i] == '+')) ++i;
    if (i < tok.size() && tok[i] == '.') ++i;
    return i < tok.size() && tok[i] >= '0' && tok[i] <= '9';
  }
};

}  // namespace detail

inline std::vector<Datum> read(std::string_view source, std::string file = {}) {
  return detail::Reader(source, std::move(file)).read_all();
}

}  // namespace dcrypps::sexpr

#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace econoforge::inference {

/// Minimal SMT-LIB s-expression: an atom (symbol, numeral, keyword, string
/// literal) or a parenthesised list.
struct SExpr {
  enum class Kind { Atom, String, List };

  Kind kind = Kind::Atom;
  std::string text;  // atom spelling or decoded string literal
  std::vector<SExpr> items;
  std::size_t line = 1;
  std::size_t column = 1;

  bool is_atom() const noexcept { return kind == Kind::Atom; }
  bool is_list() const noexcept { return kind == Kind::List; }
  bool is_atom(std::string_view s) const noexcept { return kind == Kind::Atom && text == s; }
};

/// Parses a sequence of top-level s-expressions. `;` starts a comment,
/// `|...|` is a quoted symbol. Throws ParseError on unbalanced input.
std::vector<SExpr> parse_sexprs(std::string_view text);

}  // namespace econoforge::inference

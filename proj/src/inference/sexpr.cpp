#include "econoforge/inference/sexpr.hpp"

#include "econoforge/core/errors.hpp"

namespace econoforge::inference {

std::vector<SExpr> parse_sexprs(std::string_view text) {
  std::vector<SExpr> top;
  std::vector<SExpr> stack;  // open lists
  std::size_t line = 1, col = 1;
  std::size_t i = 0;

  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < text.size(); ++k, ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  auto emit = [&](SExpr e) {
    if (stack.empty()) {
      top.push_back(std::move(e));
    } else {
      stack.back().items.push_back(std::move(e));
    }
  };

  while (i < text.size()) {
    char c = text[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      advance(1);
    } else if (c == ';') {
      while (i < text.size() && text[i] != '\n') advance(1);
    } else if (c == '(') {
      SExpr list;
      list.kind = SExpr::Kind::List;
      list.line = line;
      list.column = col;
      stack.push_back(std::move(list));
      advance(1);
    } else if (c == ')') {
      if (stack.empty()) throw ParseError(line, col, "unbalanced ')'");
      SExpr done = std::move(stack.back());
      stack.pop_back();
      advance(1);
      emit(std::move(done));
    } else if (c == '"') {
      SExpr s;
      s.kind = SExpr::Kind::String;
      s.line = line;
      s.column = col;
      advance(1);
      for (;;) {
        if (i >= text.size()) throw ParseError(s.line, s.column, "unterminated string literal");
        if (text[i] == '"') {
          if (i + 1 < text.size() && text[i + 1] == '"') {
            s.text.push_back('"');
            advance(2);
            continue;
          }
          advance(1);
          break;
        }
        s.text.push_back(text[i]);
        advance(1);
      }
      emit(std::move(s));
    } else if (c == '|') {
      SExpr s;
      s.line = line;
      s.column = col;
      advance(1);
      while (i < text.size() && text[i] != '|') {
        s.text.push_back(text[i]);
        advance(1);
      }
      if (i >= text.size()) throw ParseError(s.line, s.column, "unterminated quoted symbol");
      advance(1);
      emit(std::move(s));
    } else {
      SExpr a;
      a.line = line;
      a.column = col;
      while (i < text.size()) {
        char d = text[i];
        if (d == ' ' || d == '\t' || d == '\r' || d == '\n' || d == '(' || d == ')' || d == ';' ||
            d == '"' || d == '|') {
          break;
        }
        a.text.push_back(d);
        advance(1);
      }
      emit(std::move(a));
    }
  }
  if (!stack.empty()) {
    throw ParseError(stack.back().line, stack.back().column, "unclosed '('");
  }
  return top;
}

}  // namespace econoforge::inference

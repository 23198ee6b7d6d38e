#include "econoforge/dsl/parser.hpp"

#include <charconv>
#include <map>
#include <optional>

#include "econoforge/core/errors.hpp"

namespace econoforge::dsl {
namespace {

enum class Tok { Ident, Int, Real, String, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;  // identifier, punctuation, decoded string, or number spelling
  std::size_t column = 0;
};

std::size_t utf8_column(std::string_view line, std::size_t byte_offset) {
  std::size_t col = 1;
  for (std::size_t i = 0; i < byte_offset && i < line.size(); ++i) {
    if ((static_cast<unsigned char>(line[i]) & 0xC0) != 0x80) ++col;
  }
  return col;
}

bool valid_utf8(std::string_view s, std::size_t& bad) {
  for (std::size_t i = 0; i < s.size();) {
    auto c = static_cast<unsigned char>(s[i]);
    std::size_t n = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xE ? 3 : (c >> 3) == 0x1E ? 4 : 0;
    if (n == 0 || i + n > s.size()) {
      bad = i;
      return false;
    }
    for (std::size_t k = 1; k < n; ++k) {
      if ((static_cast<unsigned char>(s[i + k]) & 0xC0) != 0x80) {
        bad = i;
        return false;
      }
    }
    i += n;
  }
  return true;
}

class LineLexer {
 public:
  LineLexer(std::string_view line, std::size_t line_no) : line_(line), line_no_(line_no) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < line_.size()) {
      char c = line_[i];
      if (c == ' ' || c == '\t' || c == '\r') {
        ++i;
        continue;
      }
      if (c == '#') break;
      std::size_t start = i;
      if (is_ident_start(c)) {
        while (i < line_.size() && is_ident_char(line_[i])) ++i;
        out.push_back({Tok::Ident, std::string(line_.substr(start, i - start)), col(start)});
      } else if (is_digit(c) || (c == '-' && i + 1 < line_.size() && is_digit(line_[i + 1]))) {
        out.push_back(number(i));
      } else if (c == '"') {
        out.push_back(string(i));
      } else {
        static constexpr std::string_view kTwo[] = {"->", "==", "!=", "<=", ">="};
        bool matched = false;
        for (auto p : kTwo) {
          if (line_.substr(i, 2) == p) {
            out.push_back({Tok::Punct, std::string(p), col(i)});
            i += 2;
            matched = true;
            break;
          }
        }
        if (!matched) {
          if (std::string_view("<>=()[],").find(c) == std::string_view::npos) {
            throw ParseError(line_no_, col(i), std::string("unexpected character '") + c + "'");
          }
          out.push_back({Tok::Punct, std::string(1, c), col(i)});
          ++i;
        }
      }
    }
    out.push_back({Tok::End, "", col(line_.size())});
    return out;
  }

 private:
  static bool is_digit(char c) { return c >= '0' && c <= '9'; }
  static bool is_ident_start(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
  }
  static bool is_ident_char(char c) { return is_ident_start(c) || is_digit(c); }

  std::size_t col(std::size_t offset) const { return utf8_column(line_, offset); }

  Token number(std::size_t& i) {
    std::size_t start = i;
    if (line_[i] == '-') ++i;
    while (i < line_.size() && is_digit(line_[i])) ++i;
    bool real = false;
    if (i + 1 < line_.size() && line_[i] == '.' && is_digit(line_[i + 1])) {
      real = true;
      ++i;
      while (i < line_.size() && is_digit(line_[i])) ++i;
    }
    if (i < line_.size() && (line_[i] == 'e' || line_[i] == 'E')) {
      std::size_t j = i + 1;
      if (j < line_.size() && (line_[j] == '+' || line_[j] == '-')) ++j;
      if (j < line_.size() && is_digit(line_[j])) {
        real = true;
        i = j;
        while (i < line_.size() && is_digit(line_[i])) ++i;
      }
    }
    if (i < line_.size() && is_ident_char(line_[i])) {
      throw ParseError(line_no_, col(start), "malformed number");
    }
    return {real ? Tok::Real : Tok::Int, std::string(line_.substr(start, i - start)), col(start)};
  }

  Token string(std::size_t& i) {
    std::size_t start = i++;
    std::string value;
    while (i < line_.size() && line_[i] != '"') {
      if (line_[i] == '\\') {
        if (i + 1 >= line_.size() || (line_[i + 1] != '"' && line_[i + 1] != '\\')) {
          throw ParseError(line_no_, col(i), "invalid escape in string (only \\\" and \\\\)");
        }
        ++i;
      }
      value.push_back(line_[i++]);
    }
    if (i >= line_.size()) throw ParseError(line_no_, col(start), "unterminated string");
    ++i;
    return {Tok::String, std::move(value), col(start)};
  }

  std::string_view line_;
  std::size_t line_no_;
};

struct FieldSpelling {
  std::string_view name;
  Field field;
};

constexpr FieldSpelling kFields[] = {
    {"firm_id", Field::FirmId},
    {"id", Field::FirmId},
    {"name", Field::Name},
    {"sector", Field::Sector},
    {"region", Field::Region},
    {"region_code", Field::Region},
    {"year", Field::Year},
    {"lat", Field::Lat},
    {"lon", Field::Lon},
    {"revenue", Field::Revenue},
    {"revenue_cents", Field::Revenue},
    {"expenses", Field::Expenses},
    {"expenses_cents", Field::Expenses},
    {"employee_expenses", Field::EmployeeExpenses},
    {"employee_expenses_cents", Field::EmployeeExpenses},
    {"cash_flow", Field::CashFlow},
    {"cash_flow_cents", Field::CashFlow},
};

class RuleParser {
 public:
  RuleParser(std::vector<Token> tokens, std::size_t line_no, const ParseOptions& options)
      : toks_(std::move(tokens)), line_no_(line_no), options_(options) {}

  bool empty() const { return toks_.front().kind == Tok::End; }

  Constraint parse() {
    const Token& head = expect_ident("rule keyword");
    ConstraintPayload payload;
    if (head.text == "sector_total") {
      payload = sector_total();
    } else if (head.text == "cap") {
      payload = degree_cap();
    } else if (head.text == "fixed") {
      payload = fixed_edge();
    } else if (head.text == "bound") {
      payload = edge_bound();
    } else if (head.text == "forbid") {
      payload = Forbid{pair_predicate()};
    } else {
      fail(head, "unknown rule kind '" + head.text +
                     "' (expected sector_total, cap, fixed, bound or forbid)");
    }
    Constraint c;
    c.payload = std::move(payload);
    if (peek_ident("as")) {
      next();
      const Token& name = expect(Tok::String, "rule name string");
      if (name.text.empty()) fail(name, "rule name must not be empty");
      c.id = name.text;
      c.explicit_id = true;
    } else {
      c.id = default_constraint_id(c.payload);
    }
    if (peek().kind != Tok::End) fail(peek(), "unexpected '" + peek().text + "' after rule");
    return c;
  }

 private:
  [[noreturn]] void fail(const Token& at, const std::string& msg) const {
    throw ParseError(line_no_, at.column, msg);
  }

  const Token& peek() const { return toks_[pos_]; }
  const Token& next() {
    const Token& t = toks_[pos_];
    if (t.kind != Tok::End) ++pos_;
    return t;
  }
  bool peek_ident(std::string_view word) const {
    return peek().kind == Tok::Ident && peek().text == word;
  }
  bool peek_punct(std::string_view p) const {
    return peek().kind == Tok::Punct && peek().text == p;
  }

  const Token& expect(Tok kind, std::string_view what) {
    if (peek().kind != kind) {
      fail(peek(), "expected " + std::string(what) + describe_found());
    }
    return next();
  }
  const Token& expect_ident(std::string_view what) { return expect(Tok::Ident, what); }
  void expect_word(std::string_view word) {
    if (!peek_ident(word)) fail(peek(), "expected '" + std::string(word) + "'" + describe_found());
    next();
  }
  void expect_punct(std::string_view p) {
    if (!peek_punct(p)) fail(peek(), "expected '" + std::string(p) + "'" + describe_found());
    next();
  }
  std::string describe_found() const {
    if (peek().kind == Tok::End) return " but reached end of line";
    return " but found '" + peek().text + "'";
  }

  std::int64_t integer(bool non_negative) {
    const Token& t = peek();
    if (t.kind == Tok::Real) fail(t, "integer literal required");
    expect(Tok::Int, "integer");
    std::int64_t v = 0;
    auto res = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (res.ec != std::errc{}) fail(t, "integer literal out of range");
    if (non_negative && v < 0) fail(t, "negative literal where a non-negative value is required");
    return v;
  }

  SectorCode sector() {
    const Token& t = peek();
    if (t.kind != Tok::Ident && t.kind != Tok::String) fail(t, "expected sector code" + describe_found());
    next();
    check_sector(t, t.text);
    return SectorCode(t.text);
  }

  void check_sector(const Token& at, const std::string& code) const {
    if (!SectorCode::is_valid(code)) fail(at, "invalid sector code '" + code + "'");
    if (options_.sectors && !options_.sectors->contains(code)) {
      fail(at, "unknown sector '" + code + "'");
    }
  }

  FirmId firm_ref() {
    const Token& t = peek();
    if (t.kind != Tok::Ident && t.kind != Tok::String) fail(t, "expected firm id" + describe_found());
    next();
    if (t.text.empty()) fail(t, "firm id must not be empty");
    return t.text;
  }

  SectorTotal sector_total() {
    SectorTotal s;
    s.from = sector();
    expect_punct("->");
    s.to = sector();
    expect_punct("=");
    s.amount_cents = integer(true);
    if (peek_ident("tol")) {
      next();
      s.tolerance_cents = integer(true);
    }
    return s;
  }

  DegreeCap degree_cap() {
    DegreeCap c;
    const Token& dir = expect_ident("'out' or 'in'");
    if (dir.text == "out") {
      c.direction = Direction::Out;
    } else if (dir.text == "in") {
      c.direction = Direction::In;
    } else {
      fail(dir, "expected 'out' or 'in'");
    }
    expect_word("for");
    c.firms = predicate();
    expect_word("to");
    c.counterparties = predicate();
    expect_punct("<=");
    c.max_count = integer(true);
    return c;
  }

  FixedEdge fixed_edge() {
    FixedEdge f;
    const Token& src_tok = peek();
    f.src = firm_ref();
    expect_punct("->");
    f.dst = firm_ref();
    if (f.src == f.dst) fail(src_tok, "fixed edge endpoints must differ");
    expect_punct("=");
    f.amount_cents = integer(true);
    return f;
  }

  EdgeBound edge_bound() {
    EdgeBound b;
    b.pairs = pair_predicate();
    expect_word("in");
    expect_punct("[");
    const Token& lo_tok = peek();
    b.lo_cents = integer(true);
    expect_punct(",");
    b.hi_cents = integer(true);
    expect_punct("]");
    if (b.lo_cents > b.hi_cents) fail(lo_tok, "lower bound exceeds upper bound");
    return b;
  }

  PairPredicate pair_predicate() {
    PairPredicate p;
    p.src = predicate();
    expect_punct("->");
    p.dst = predicate();
    return p;
  }

  FirmPredicate predicate() {
    expect_word("firm");
    expect_punct("(");
    FirmPredicate p;
    if (peek_punct(")")) {
      next();
      return p;
    }
    p.conditions.push_back(condition());
    while (peek_ident("and")) {
      next();
      p.conditions.push_back(condition());
    }
    if (peek_ident("or")) fail(peek(), "'or' is not supported; write one rule per alternative");
    expect_punct(")");
    return p;
  }

  Condition condition() {
    const Token& name = expect_ident("field name");
    std::optional<Field> field;
    for (const auto& f : kFields) {
      if (f.name == name.text) field = f.field;
    }
    if (!field) fail(name, "unknown field '" + name.text + "'");
    Condition c;
    c.field = *field;
    const Token& op_tok = peek();
    if (peek_ident("in")) {
      c.op = CompareOp::In;
    } else if (op_tok.kind == Tok::Punct) {
      static const std::map<std::string, CompareOp, std::less<>> kOps = {
          {"==", CompareOp::Eq}, {"!=", CompareOp::Ne}, {"<", CompareOp::Lt},
          {"<=", CompareOp::Le}, {">", CompareOp::Gt},  {">=", CompareOp::Ge}};
      auto it = kOps.find(op_tok.text);
      if (it == kOps.end()) fail(op_tok, "expected comparison operator" + describe_found());
      c.op = it->second;
    } else {
      fail(op_tok, "expected comparison operator" + describe_found());
    }
    next();

    FieldType type = field_type(c.field);
    if (type == FieldType::String) {
      if (c.op == CompareOp::In) {
        expect_punct("[");
        std::vector<std::string> items;
        do {
          const Token& s = expect(Tok::String, "string literal");
          if (c.field == Field::Sector) check_sector(s, s.text);
          items.push_back(s.text);
        } while (peek_punct(",") && (next(), true));
        expect_punct("]");
        c.value = std::move(items);
      } else {
        if (c.op != CompareOp::Eq && c.op != CompareOp::Ne) {
          fail(op_tok, "string fields support only ==, != and in");
        }
        const Token& s = expect(Tok::String, "string literal");
        if (c.field == Field::Sector) check_sector(s, s.text);
        c.value = s.text;
      }
    } else {
      if (c.op == CompareOp::In) fail(op_tok, "'in' applies to string fields only");
      const Token& lit = peek();
      if (type == FieldType::Integer) {
        c.value = integer(false);
      } else {
        if (lit.kind != Tok::Int && lit.kind != Tok::Real) fail(lit, "expected number" + describe_found());
        next();
        double v = 0;
        auto res = std::from_chars(lit.text.data(), lit.text.data() + lit.text.size(), v);
        if (res.ec != std::errc{}) fail(lit, "number out of range");
        c.value = v;
      }
    }
    return c;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::size_t line_no_;
  const ParseOptions& options_;
};

// Returns nullopt for blank and comment-only lines.
std::optional<Constraint> parse_line(std::string_view line, std::size_t line_no,
                                     const ParseOptions& options) {
  std::size_t bad = 0;
  if (!valid_utf8(line, bad)) throw ParseError(line_no, utf8_column(line, bad), "invalid UTF-8");
  RuleParser parser(LineLexer(line, line_no).run(), line_no, options);
  if (parser.empty()) return std::nullopt;
  return parser.parse();
}

template <typename OnError>
ConstraintSet parse_impl(std::string_view text, const ParseOptions& options, OnError&& on_error) {
  ConstraintSet set;
  std::map<std::string, std::size_t> seen;  // id -> defining line
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    ++line_no;
    try {
      if (auto c = parse_line(line, line_no, options)) {
        if (auto it = seen.find(c->id); it != seen.end() || c->id == kNonNegativityId) {
          std::string msg = c->explicit_id ? "duplicate rule name '" + c->id + "'"
                                           : "duplicate rule";
          if (it != seen.end()) msg += " (first defined on line " + std::to_string(it->second) + ")";
          throw ParseError(line_no, 1, msg);
        }
        seen.emplace(c->id, line_no);
        set.add(std::move(*c));
      }
    } catch (const ParseError& e) {
      on_error(e);
    }
    if (end == text.size()) break;
    start = end + 1;
  }
  return set;
}

}  // namespace

ConstraintSet parse_rules(std::string_view text, const ParseOptions& options) {
  return parse_impl(text, options, [](const ParseError& e) { throw e; });
}

ParseOutcome parse_rules_collect(std::string_view text, const ParseOptions& options) {
  ParseOutcome out;
  out.set = parse_impl(text, options, [&](const ParseError& e) {
    out.errors.push_back({e.line(), e.column(), e.message()});
  });
  return out;
}

}  // namespace econoforge::dsl

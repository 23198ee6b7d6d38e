#include "econoforge/inference/smtlib.hpp"

#include <charconv>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "econoforge/core/errors.hpp"
#include "econoforge/inference/sexpr.hpp"

namespace econoforge::inference {
namespace {

bool plain_symbol_char(char c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '.' ||
         c == '-';
}

void append_encoded(std::string& out, std::string_view id) {
  static constexpr char kHex[] = "0123456789abcdef";
  for (char c : id) {
    if (plain_symbol_char(c)) {
      out.push_back(c);
    } else {
      auto b = static_cast<unsigned char>(c);
      out.push_back('$');
      out.push_back(kHex[b >> 4]);
      out.push_back(kHex[b & 0xF]);
    }
  }
}

std::optional<std::string> decode_id(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '$') {
      if (i + 2 >= s.size()) return std::nullopt;
      unsigned v = 0;
      auto res = std::from_chars(s.data() + i + 1, s.data() + i + 3, v, 16);
      if (res.ec != std::errc{} || res.ptr != s.data() + i + 3) return std::nullopt;
      out.push_back(static_cast<char>(v));
      i += 2;
    } else if (plain_symbol_char(s[i])) {
      out.push_back(s[i]);
    } else {
      return std::nullopt;
    }
  }
  if (out.empty()) return std::nullopt;
  return out;
}

std::string numeral(Cents v) {
  if (v < 0) return "(- " + std::to_string(-v) + ")";
  return std::to_string(v);
}

// 0 terms -> "0", 1 term -> itself, otherwise (+ ...)
std::string sum_of(const std::vector<std::string>& terms) {
  if (terms.empty()) return "0";
  if (terms.size() == 1) return terms.front();
  std::size_t len = 4;
  for (const auto& t : terms) len += t.size() + 1;
  std::string out;
  out.reserve(len);
  out += "(+";
  for (const auto& t : terms) {
    out.push_back(' ');
    out += t;
  }
  out.push_back(')');
  return out;
}

std::vector<bool> mask(const dsl::FirmPredicate& p, const FirmIndex& idx) {
  std::vector<bool> out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out[i] = dsl::eval_predicate(p, idx.at(i));
  return out;
}

}  // namespace

std::string pair_variable_name(std::string_view src, std::string_view dst) {
  std::string out = "w_";
  append_encoded(out, src);
  out.push_back('_');
  append_encoded(out, dst);
  return out;
}

std::string indicator_variable_name(std::string_view src, std::string_view dst) {
  std::string out = "b_";
  append_encoded(out, src);
  out.push_back('_');
  append_encoded(out, dst);
  return out;
}

std::optional<std::pair<FirmId, FirmId>> decode_pair_variable(std::string_view name) {
  if (name.substr(0, 2) != "w_") return std::nullopt;
  std::string_view rest = name.substr(2);
  auto sep = rest.find('_');
  if (sep == std::string_view::npos || rest.find('_', sep + 1) != std::string_view::npos) {
    return std::nullopt;
  }
  auto src = decode_id(rest.substr(0, sep));
  auto dst = decode_id(rest.substr(sep + 1));
  if (!src || !dst) return std::nullopt;
  return std::make_pair(*src, *dst);
}

SmtDocument emit_smtlib(std::span<const FirmRecord> firms, const dsl::ConstraintSet& cs) {
  const FirmIndex idx(firms);
  const std::size_t n = idx.size();

  std::vector<std::pair<std::vector<bool>, std::vector<bool>>> forbids;
  for (const auto& [c, f] : cs.of_kind<dsl::Forbid>()) {
    forbids.emplace_back(mask(f->pairs.src, idx), mask(f->pairs.dst, idx));
  }
  auto admissible = [&](std::size_t i, std::size_t j) {
    if (i == j) return false;
    for (const auto& [s, d] : forbids) {
      if (s[i] && d[j]) return false;
    }
    return true;
  };

  // Variable names, computed once; FirmIndex order is lexicographic by id.
  std::unordered_map<std::uint64_t, std::string> var;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (!admissible(i, j)) continue;
      pairs.emplace_back(i, j);
      var.emplace((static_cast<std::uint64_t>(i) << 32) | j,
                  pair_variable_name(idx.at(i).firm_id, idx.at(j).firm_id));
    }
  }
  auto w = [&](std::size_t i, std::size_t j) -> const std::string* {
    auto it = var.find((static_cast<std::uint64_t>(i) << 32) | j);
    return it == var.end() ? nullptr : &it->second;
  };

  // Indicator pairs for every (cap, subject) counterparty.
  struct CapRows {
    const dsl::Constraint* c;
    std::vector<std::pair<std::size_t, std::vector<std::pair<std::size_t, std::size_t>>>> rows;
  };
  std::vector<CapRows> caps;
  std::set<std::pair<std::size_t, std::size_t>> indicator_pairs;
  for (const auto& [c, cap] : cs.of_kind<dsl::DegreeCap>()) {
    auto subject = mask(cap->firms, idx);
    auto other = mask(cap->counterparties, idx);
    CapRows cr{c, {}};
    for (std::size_t f = 0; f < n; ++f) {
      if (!subject[f]) continue;
      std::vector<std::pair<std::size_t, std::size_t>> touched;
      for (std::size_t g = 0; g < n; ++g) {
        if (!other[g]) continue;
        auto p = cap->direction == dsl::Direction::Out ? std::make_pair(f, g) : std::make_pair(g, f);
        if (!w(p.first, p.second)) continue;
        touched.push_back(p);
        indicator_pairs.insert(p);
      }
      cr.rows.emplace_back(f, std::move(touched));
    }
    caps.push_back(std::move(cr));
  }

  SmtDocument doc;
  std::string& out = doc.text;
  out.reserve(pairs.size() * 64 + 4096);
  out += "; firm-to-firm transaction inference, ";
  out += std::to_string(n);
  out += " firms\n";
  out += "(set-option :produce-models true)\n";
  out += "(set-info :smt-lib-version 2.6)\n";
  out += "(set-logic QF_LIA)\n";

  for (const auto& [i, j] : pairs) {
    out += "(declare-const ";
    out += *w(i, j);
    out += " Int)\n";
  }
  std::map<std::pair<std::size_t, std::size_t>, std::string> bvar;
  for (const auto& [i, j] : indicator_pairs) {
    auto name = indicator_variable_name(idx.at(i).firm_id, idx.at(j).firm_id);
    out += "(declare-const ";
    out += name;
    out += " Bool)\n";
    bvar.emplace(std::make_pair(i, j), std::move(name));
  }
  doc.stats.pair_variables = pairs.size();
  doc.stats.indicator_variables = indicator_pairs.size();

  auto assert_line = [&](const std::string& term) {
    out += "(assert ";
    out += term;
    out += ")\n";
    ++doc.stats.assertions;
  };

  out += "; nonneg\n";
  for (const auto& [i, j] : pairs) assert_line("(>= " + *w(i, j) + " 0)");

  for (const auto& [c, st] : cs.of_kind<dsl::SectorTotal>()) {
    std::vector<std::string> terms;
    for (const auto& [i, j] : pairs) {
      if (idx.at(i).sector == st->from && idx.at(j).sector == st->to) terms.push_back(*w(i, j));
    }
    const std::string sum = sum_of(terms);
    out += "; " + c->id + "\n";
    assert_line("(and (<= " + numeral(st->amount_cents - st->tolerance_cents) + " " + sum +
                ") (<= " + sum + " " + numeral(st->amount_cents + st->tolerance_cents) + "))");
  }

  if (!caps.empty()) out += "; degree indicators\n";
  for (const auto& [p, b] : bvar) assert_line("(=> (> " + *w(p.first, p.second) + " 0) " + b + ")");
  for (const auto& cr : caps) {
    const auto& cap = std::get<dsl::DegreeCap>(cr.c->payload);
    out += "; " + cr.c->id + "\n";
    for (const auto& [f, touched] : cr.rows) {
      std::vector<std::string> terms;
      terms.reserve(touched.size());
      for (const auto& p : touched) terms.push_back("(ite " + bvar.at(p) + " 1 0)");
      assert_line("(<= " + sum_of(terms) + " " + numeral(cap.max_count) + ")");
    }
  }

  for (const auto& [c, fx] : cs.of_kind<dsl::FixedEdge>()) {
    auto i = idx.find(fx->src);
    auto j = idx.find(fx->dst);
    const std::string* v = (i && j) ? w(*i, *j) : nullptr;
    out += "; " + c->id + "\n";
    assert_line("(= " + (v ? *v : std::string("0")) + " " + numeral(fx->amount_cents) + ")");
  }

  for (const auto& [c, b] : cs.of_kind<dsl::EdgeBound>()) {
    auto src_ok = mask(b->pairs.src, idx);
    auto dst_ok = mask(b->pairs.dst, idx);
    out += "; " + c->id + "\n";
    const std::string lo = numeral(b->lo_cents);
    const std::string hi = numeral(b->hi_cents);
    for (std::size_t i = 0; i < n; ++i) {
      if (!src_ok[i]) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j || !dst_ok[j]) continue;
        const std::string* v = w(i, j);
        const std::string& term = v ? *v : std::string("0");
        assert_line("(and (<= " + lo + " " + term + ") (<= " + term + " " + hi + "))");
      }
    }
  }

  out += "(check-sat)\n(get-model)\n";
  return doc;
}

SmtModelResult parse_smt_model(std::string_view text, std::span<const FirmRecord> firms,
                               const SmtModelMeta& meta) {
  auto exprs = parse_sexprs(text);
  if (exprs.empty()) throw ParseError(1, 1, "empty solver output");
  const SExpr& head = exprs.front();
  if (head.is_list() && !head.items.empty() && head.items.front().is_atom("error")) {
    throw ParseError(head.line, head.column, "solver reported an error");
  }
  SmtModelResult result;
  if (head.is_atom("unsat")) {
    result.outcome = SmtOutcome::Unsat;
    return result;
  }
  if (head.is_atom("unknown")) {
    result.outcome = SmtOutcome::Unknown;
    return result;
  }
  if (!head.is_atom("sat")) {
    throw ParseError(head.line, head.column, "expected sat, unsat or unknown");
  }
  if (exprs.size() < 2 || !exprs[1].is_list()) {
    throw ParseError(head.line, head.column, "sat without a model");
  }
  if (exprs.size() > 2) {
    throw ParseError(exprs[2].line, exprs[2].column, "unexpected text after the model");
  }
  const SExpr& model = exprs[1];
  std::size_t first = 0;
  if (!model.items.empty() && model.items.front().is_atom("model")) first = 1;

  const FirmIndex idx(firms);
  TransactionModel tm;
  tm.model_id = meta.model_id;
  tm.dataset_id = meta.dataset_id;
  tm.year = meta.year;
  tm.constraint_set_id = meta.constraint_set_id;
  tm.provenance = Provenance::ExternalSmt;

  for (std::size_t k = first; k < model.items.size(); ++k) {
    const SExpr& def = model.items[k];
    if (!def.is_list() || def.items.size() != 5 || !def.items[0].is_atom("define-fun") ||
        !def.items[1].is_atom() || !def.items[2].is_list() || !def.items[2].items.empty() ||
        !def.items[3].is_atom()) {
      throw ParseError(def.line, def.column, "expected (define-fun <name> () <sort> <value>)");
    }
    const std::string& name = def.items[1].text;
    if (def.items[3].text != "Int") continue;
    auto pair = decode_pair_variable(name);
    if (!pair) continue;

    const SExpr& value = def.items[4];
    Cents amount = 0;
    auto read_numeral = [&](const SExpr& atom) {
      Cents v = 0;
      const std::string& t = atom.text;
      auto res = std::from_chars(t.data(), t.data() + t.size(), v);
      if (!atom.is_atom() || t.empty() || res.ec != std::errc{} || res.ptr != t.data() + t.size() ||
          t.front() == '-') {
        throw ParseError(atom.line, atom.column, "expected an integer numeral");
      }
      return v;
    };
    if (value.is_atom()) {
      amount = read_numeral(value);
    } else if (value.is_list() && value.items.size() == 2 && value.items[0].is_atom("-")) {
      amount = -read_numeral(value.items[1]);
    } else {
      throw ParseError(value.line, value.column, "unsupported value term");
    }
    if (!idx.get(pair->first) || !idx.get(pair->second)) {
      throw DomainError("solver model references unknown firm in '" + name + "'");
    }
    if (amount < 0) throw DomainError("negative amount for '" + name + "'");
    if (amount == 0) continue;
    tm.edges.push_back({pair->first, pair->second, amount});
  }
  normalize_edges(tm.edges);
  result.outcome = SmtOutcome::Sat;
  result.model = std::move(tm);
  return result;
}

namespace {

enum class Sort { Int, Bool };

class ScriptChecker {
 public:
  SmtCheckResult run(std::string_view doc) {
    SmtCheckResult r;
    try {
      auto cmds = parse_sexprs(doc);
      bool logic_set = false;
      std::size_t tail = 0;  // 1 after check-sat, 2 after get-model
      for (const auto& cmd : cmds) {
        if (!cmd.is_list() || cmd.items.empty() || !cmd.items[0].is_atom()) {
          fail(cmd, "top-level item is not a command");
        }
        const std::string& name = cmd.items[0].text;
        if (tail == 2) fail(cmd, "command after (get-model)");
        if (name == "set-option" || name == "set-info") {
          if (cmd.items.size() != 3 || cmd.items[1].text.empty() || cmd.items[1].text[0] != ':') {
            fail(cmd, name + " expects a keyword and a value");
          }
          if (name == "set-option" && logic_set) fail(cmd, "set-option after set-logic");
        } else if (name == "set-logic") {
          if (logic_set) fail(cmd, "duplicate set-logic");
          if (cmd.items.size() != 2 || !cmd.items[1].is_atom("QF_LIA")) {
            fail(cmd, "expected (set-logic QF_LIA)");
          }
          logic_set = true;
        } else if (name == "declare-const") {
          require_logic(cmd, logic_set);
          if (tail) fail(cmd, "declaration after (check-sat)");
          if (cmd.items.size() != 3 || !cmd.items[1].is_atom() || !cmd.items[2].is_atom()) {
            fail(cmd, "expected (declare-const <symbol> <sort>)");
          }
          const std::string& sym = cmd.items[1].text;
          if (!valid_symbol(sym)) fail(cmd, "invalid symbol '" + sym + "'");
          Sort sort;
          if (cmd.items[2].text == "Int") {
            sort = Sort::Int;
          } else if (cmd.items[2].text == "Bool") {
            sort = Sort::Bool;
          } else {
            fail(cmd, "unsupported sort '" + cmd.items[2].text + "'");
          }
          if (!symbols_.emplace(sym, sort).second) fail(cmd, "symbol '" + sym + "' declared twice");
          ++r.declarations;
        } else if (name == "assert") {
          require_logic(cmd, logic_set);
          if (tail) fail(cmd, "assertion after (check-sat)");
          if (cmd.items.size() != 2) fail(cmd, "assert takes exactly one term");
          if (sort_of(cmd.items[1]) != Sort::Bool) fail(cmd, "asserted term is not Boolean");
          ++r.assertions;
        } else if (name == "check-sat") {
          if (cmd.items.size() != 1) fail(cmd, "check-sat takes no arguments");
          if (tail) fail(cmd, "duplicate check-sat");
          tail = 1;
        } else if (name == "get-model") {
          if (cmd.items.size() != 1 || tail != 1) fail(cmd, "get-model must follow check-sat");
          tail = 2;
        } else {
          fail(cmd, "unknown command '" + name + "'");
        }
      }
      if (!logic_set) throw ParseError(1, 1, "missing set-logic");
      if (tail != 2) throw ParseError(1, 1, "script must end with (check-sat) (get-model)");
      r.ok = true;
    } catch (const ParseError& e) {
      r.ok = false;
      r.error = e.what();
    }
    return r;
  }

 private:
  [[noreturn]] static void fail(const SExpr& at, const std::string& msg) {
    throw ParseError(at.line, at.column, msg);
  }
  static void require_logic(const SExpr& at, bool set) {
    if (!set) fail(at, "command before set-logic");
  }
  static bool valid_symbol(const std::string& s) {
    if (s.empty() || (s[0] >= '0' && s[0] <= '9')) return false;
    for (char c : s) {
      bool ok = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') ||
                std::string_view("~!@$%^&*_-+=<>.?/").find(c) != std::string_view::npos;
      if (!ok) return false;
    }
    return true;
  }
  static bool is_numeral(const std::string& s) {
    if (s.empty()) return false;
    if (s.size() > 1 && s[0] == '0') return false;
    for (char c : s) {
      if (c < '0' || c > '9') return false;
    }
    return true;
  }

  Sort sort_of(const SExpr& t) const {
    if (t.kind == SExpr::Kind::String) fail(t, "string literal in term");
    if (t.is_atom()) {
      if (is_numeral(t.text)) return Sort::Int;
      if (t.text == "true" || t.text == "false") return Sort::Bool;
      auto it = symbols_.find(t.text);
      if (it == symbols_.end()) fail(t, "undeclared symbol '" + t.text + "'");
      return it->second;
    }
    if (t.items.empty() || !t.items[0].is_atom()) fail(t, "malformed application");
    const std::string& op = t.items[0].text;
    const std::size_t argc = t.items.size() - 1;
    auto args_are = [&](Sort s) {
      for (std::size_t k = 1; k < t.items.size(); ++k) {
        if (sort_of(t.items[k]) != s) fail(t.items[k], "argument of '" + op + "' has wrong sort");
      }
    };
    if (op == "and" || op == "or") {
      if (argc < 1) fail(t, op + " needs arguments");
      args_are(Sort::Bool);
      return Sort::Bool;
    }
    if (op == "not") {
      if (argc != 1) fail(t, "not takes one argument");
      args_are(Sort::Bool);
      return Sort::Bool;
    }
    if (op == "=>") {
      if (argc < 2) fail(t, "=> needs two arguments");
      args_are(Sort::Bool);
      return Sort::Bool;
    }
    if (op == "<=" || op == "<" || op == ">=" || op == ">") {
      if (argc < 2) fail(t, op + " needs two arguments");
      args_are(Sort::Int);
      return Sort::Bool;
    }
    if (op == "=" || op == "distinct") {
      if (argc < 2) fail(t, op + " needs two arguments");
      Sort s = sort_of(t.items[1]);
      args_are(s);
      return Sort::Bool;
    }
    if (op == "+" || op == "*") {
      if (argc < 2) fail(t, op + " needs two arguments");
      args_are(Sort::Int);
      return Sort::Int;
    }
    if (op == "-") {
      if (argc < 1) fail(t, "- needs arguments");
      args_are(Sort::Int);
      return Sort::Int;
    }
    if (op == "ite") {
      if (argc != 3) fail(t, "ite takes three arguments");
      if (sort_of(t.items[1]) != Sort::Bool) fail(t.items[1], "ite condition is not Boolean");
      Sort s = sort_of(t.items[2]);
      if (sort_of(t.items[3]) != s) fail(t.items[3], "ite branches differ in sort");
      return s;
    }
    fail(t, "unknown function '" + op + "'");
  }

  std::unordered_map<std::string, Sort> symbols_;
};

}  // namespace

SmtCheckResult check_smtlib(std::string_view doc) { return ScriptChecker{}.run(doc); }

}  // namespace econoforge::inference

#include "econoforge/dsl/constraint.hpp"

#include <algorithm>
#include <charconv>

#include "econoforge/core/errors.hpp"
#include "econoforge/core/hash.hpp"

namespace econoforge::dsl {

FieldType field_type(Field f) noexcept {
  switch (f) {
    case Field::FirmId:
    case Field::Name:
    case Field::Sector:
    case Field::Region:
      return FieldType::String;
    case Field::Lat:
    case Field::Lon:
      return FieldType::Real;
    default:
      return FieldType::Integer;
  }
}

std::string_view field_name(Field f) noexcept {
  switch (f) {
    case Field::FirmId:
      return "firm_id";
    case Field::Name:
      return "name";
    case Field::Sector:
      return "sector";
    case Field::Region:
      return "region";
    case Field::Year:
      return "year";
    case Field::Lat:
      return "lat";
    case Field::Lon:
      return "lon";
    case Field::Revenue:
      return "revenue";
    case Field::Expenses:
      return "expenses";
    case Field::EmployeeExpenses:
      return "employee_expenses";
    case Field::CashFlow:
      return "cash_flow";
  }
  return "?";
}

std::string_view op_symbol(CompareOp op) noexcept {
  switch (op) {
    case CompareOp::Eq:
      return "==";
    case CompareOp::Ne:
      return "!=";
    case CompareOp::Lt:
      return "<";
    case CompareOp::Le:
      return "<=";
    case CompareOp::Gt:
      return ">";
    case CompareOp::Ge:
      return ">=";
    case CompareOp::In:
      return "in";
  }
  return "?";
}

std::string_view kind_name(ConstraintKind k) noexcept {
  switch (k) {
    case ConstraintKind::NonNegativity:
      return "nonneg";
    case ConstraintKind::SectorTotal:
      return "sector_total";
    case ConstraintKind::DegreeCap:
      return "cap";
    case ConstraintKind::FixedEdge:
      return "fixed";
    case ConstraintKind::EdgeBound:
      return "bound";
    case ConstraintKind::Forbid:
      return "forbid";
  }
  return "?";
}

ConstraintSet::ConstraintSet() {
  constraints_.push_back(Constraint{std::string(kNonNegativityId), false, NonNegativity{}});
}

const Constraint* ConstraintSet::find(std::string_view id) const {
  auto it = std::find_if(constraints_.begin(), constraints_.end(),
                         [id](const Constraint& c) { return c.id == id; });
  return it == constraints_.end() ? nullptr : &*it;
}

void ConstraintSet::add(Constraint c) {
  if (std::holds_alternative<NonNegativity>(c.payload)) {
    throw DomainError("non-negativity is implicit and cannot be added");
  }
  if (find(c.id)) throw DomainError("duplicate constraint id '" + c.id + "'");
  constraints_.push_back(std::move(c));
}

std::string ConstraintSet::id() const { return "cs-" + sha1_hex(pretty_print(*this)).substr(0, 12); }

namespace {

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string format_real(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, res.ptr);
  if (s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

std::string format_literal(const Literal& lit) {
  struct Visitor {
    std::string operator()(std::int64_t v) const { return std::to_string(v); }
    std::string operator()(double v) const { return format_real(v); }
    std::string operator()(const std::string& v) const { return quote(v); }
    std::string operator()(const std::vector<std::string>& vs) const {
      std::string out = "[";
      for (std::size_t i = 0; i < vs.size(); ++i) {
        if (i) out += ", ";
        out += quote(vs[i]);
      }
      return out + "]";
    }
  };
  return std::visit(Visitor{}, lit);
}

std::string format_predicate(const FirmPredicate& p) {
  std::string out = "firm(";
  for (std::size_t i = 0; i < p.conditions.size(); ++i) {
    const auto& c = p.conditions[i];
    if (i) out += " and ";
    out += field_name(c.field);
    out += ' ';
    out += op_symbol(c.op);
    out += ' ';
    out += format_literal(c.value);
  }
  return out + ")";
}

std::string format_pair(const PairPredicate& p) {
  return format_predicate(p.src) + " -> " + format_predicate(p.dst);
}

}  // namespace

std::string canonical_text(const ConstraintPayload& payload) {
  struct Visitor {
    std::string operator()(const NonNegativity&) const { return "nonneg"; }
    std::string operator()(const SectorTotal& s) const {
      return "sector_total " + s.from.str() + " -> " + s.to.str() + " = " +
             std::to_string(s.amount_cents) + " tol " + std::to_string(s.tolerance_cents);
    }
    std::string operator()(const DegreeCap& c) const {
      return std::string("cap ") + (c.direction == Direction::Out ? "out" : "in") + " for " +
             format_predicate(c.firms) + " to " + format_predicate(c.counterparties) +
             " <= " + std::to_string(c.max_count);
    }
    std::string operator()(const FixedEdge& f) const {
      return "fixed " + quote(f.src) + " -> " + quote(f.dst) + " = " +
             std::to_string(f.amount_cents);
    }
    std::string operator()(const EdgeBound& b) const {
      return "bound " + format_pair(b.pairs) + " in [" + std::to_string(b.lo_cents) + ", " +
             std::to_string(b.hi_cents) + "]";
    }
    std::string operator()(const Forbid& f) const { return "forbid " + format_pair(f.pairs); }
  };
  return std::visit(Visitor{}, payload);
}

std::string default_constraint_id(const ConstraintPayload& payload) {
  auto kind = static_cast<ConstraintKind>(payload.index());
  if (kind == ConstraintKind::NonNegativity) return std::string(kNonNegativityId);
  return std::string(kind_name(kind)) + ":" + sha1_hex(canonical_text(payload)).substr(0, 8);
}

std::string pretty_print(const ConstraintSet& set) {
  std::string out;
  for (const auto& c : set.constraints()) {
    if (c.kind() == ConstraintKind::NonNegativity) continue;
    out += canonical_text(c.payload);
    if (c.explicit_id) out += " as " + quote(c.id);
    out += '\n';
  }
  return out;
}

namespace {

const std::string& string_field(Field f, const FirmRecord& r) {
  switch (f) {
    case Field::FirmId:
      return r.firm_id;
    case Field::Name:
      return r.name;
    case Field::Sector:
      return r.sector.str();
    default:
      return r.region_code;
  }
}

std::int64_t integer_field(Field f, const FirmRecord& r) {
  switch (f) {
    case Field::Year:
      return r.year;
    case Field::Revenue:
      return r.revenue_cents;
    case Field::Expenses:
      return r.expenses_cents;
    case Field::EmployeeExpenses:
      return r.employee_expenses_cents;
    default:
      return r.cash_flow_cents;
  }
}

template <typename T>
bool compare(CompareOp op, const T& lhs, const T& rhs) {
  switch (op) {
    case CompareOp::Eq:
      return lhs == rhs;
    case CompareOp::Ne:
      return lhs != rhs;
    case CompareOp::Lt:
      return lhs < rhs;
    case CompareOp::Le:
      return lhs <= rhs;
    case CompareOp::Gt:
      return lhs > rhs;
    case CompareOp::Ge:
      return lhs >= rhs;
    case CompareOp::In:
      return false;
  }
  return false;
}

double as_real(const Literal& lit) {
  if (const auto* i = std::get_if<std::int64_t>(&lit)) return static_cast<double>(*i);
  return std::get<double>(lit);
}

}  // namespace

bool eval_condition(const Condition& c, const FirmRecord& f) {
  switch (field_type(c.field)) {
    case FieldType::String: {
      const std::string& v = string_field(c.field, f);
      if (c.op == CompareOp::In) {
        const auto& set = std::get<std::vector<std::string>>(c.value);
        return std::find(set.begin(), set.end(), v) != set.end();
      }
      return compare(c.op, v, std::get<std::string>(c.value));
    }
    case FieldType::Integer:
      return compare(c.op, integer_field(c.field, f), std::get<std::int64_t>(c.value));
    case FieldType::Real: {
      if (!f.location) return false;
      double v = c.field == Field::Lat ? f.location->lat : f.location->lon;
      return compare(c.op, v, as_real(c.value));
    }
  }
  return false;
}

bool eval_predicate(const FirmPredicate& p, const FirmRecord& f) {
  for (const auto& c : p.conditions) {
    if (!eval_condition(c, f)) return false;
  }
  return true;
}

std::vector<Constraint> io_table_to_constraints(const IOTable& table, Cents tolerance_cents) {
  if (tolerance_cents < 0) throw DomainError("tolerance must be non-negative");
  std::vector<Constraint> out;
  out.reserve(table.entries.size());
  for (const auto& [pair, amount] : table.entries) {
    ConstraintPayload payload = SectorTotal{pair.from, pair.to, amount, tolerance_cents};
    out.push_back(Constraint{default_constraint_id(payload), false, std::move(payload)});
  }
  return out;
}

}  // namespace econoforge::dsl

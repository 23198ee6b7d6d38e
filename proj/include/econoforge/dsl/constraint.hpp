#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "econoforge/core/types.hpp"

namespace econoforge::dsl {

/// FirmRecord fields a predicate may reference.
enum class Field {
  FirmId,
  Name,
  Sector,
  Region,
  Year,
  Lat,
  Lon,
  Revenue,
  Expenses,
  EmployeeExpenses,
  CashFlow,
};

enum class CompareOp { Eq, Ne, Lt, Le, Gt, Ge, In };

enum class FieldType { String, Integer, Real };

FieldType field_type(Field f) noexcept;
std::string_view field_name(Field f) noexcept;
std::string_view op_symbol(CompareOp op) noexcept;

using Literal = std::variant<std::int64_t, double, std::string, std::vector<std::string>>;

struct Condition {
  Field field = Field::FirmId;
  CompareOp op = CompareOp::Eq;
  Literal value;

  friend bool operator==(const Condition&, const Condition&) = default;
};

/// Conjunction of conditions; an empty predicate matches every firm.
struct FirmPredicate {
  std::vector<Condition> conditions;

  friend bool operator==(const FirmPredicate&, const FirmPredicate&) = default;
};

struct PairPredicate {
  FirmPredicate src;
  FirmPredicate dst;

  friend bool operator==(const PairPredicate&, const PairPredicate&) = default;
};

enum class Direction { Out, In };

struct NonNegativity {
  friend bool operator==(const NonNegativity&, const NonNegativity&) = default;
};

struct SectorTotal {
  SectorCode from;
  SectorCode to;
  Cents amount_cents = 0;
  Cents tolerance_cents = 0;

  friend bool operator==(const SectorTotal&, const SectorTotal&) = default;
};

/// For every firm matching `firms`, the number of distinct counterparties
/// matching `counterparties` it trades with in `direction` is at most max_count.
struct DegreeCap {
  FirmPredicate firms;
  FirmPredicate counterparties;
  Direction direction = Direction::Out;
  std::int64_t max_count = 0;

  friend bool operator==(const DegreeCap&, const DegreeCap&) = default;
};

struct FixedEdge {
  FirmId src;
  FirmId dst;
  Cents amount_cents = 0;

  friend bool operator==(const FixedEdge&, const FixedEdge&) = default;
};

/// Every ordered pair (i != j) matching the predicate carries an amount in
/// [lo, hi]; absent edges count as 0.
struct EdgeBound {
  PairPredicate pairs;
  Cents lo_cents = 0;
  Cents hi_cents = 0;

  friend bool operator==(const EdgeBound&, const EdgeBound&) = default;
};

struct Forbid {
  PairPredicate pairs;

  friend bool operator==(const Forbid&, const Forbid&) = default;
};

enum class ConstraintKind { NonNegativity, SectorTotal, DegreeCap, FixedEdge, EdgeBound, Forbid };

std::string_view kind_name(ConstraintKind k) noexcept;

using ConstraintPayload =
    std::variant<NonNegativity, SectorTotal, DegreeCap, FixedEdge, EdgeBound, Forbid>;

struct Constraint {
  std::string id;
  bool explicit_id = false;  // set by `as "name"`
  ConstraintPayload payload;

  ConstraintKind kind() const noexcept { return static_cast<ConstraintKind>(payload.index()); }

  friend bool operator==(const Constraint&, const Constraint&) = default;
};

inline constexpr std::string_view kNonNegativityId = "nonneg";

/// Parsed rules. The implicit NonNegativity constraint is always first.
class ConstraintSet {
 public:
  ConstraintSet();

  const std::vector<Constraint>& constraints() const noexcept { return constraints_; }
  std::size_t size() const noexcept { return constraints_.size(); }
  const Constraint* find(std::string_view id) const;

  /// Appends `c`; throws DomainError when the id is already taken.
  void add(Constraint c);

  /// Stable identifier derived from the canonical text of every rule.
  std::string id() const;

  template <typename T>
  std::vector<std::pair<const Constraint*, const T*>> of_kind() const {
    std::vector<std::pair<const Constraint*, const T*>> out;
    for (const auto& c : constraints_) {
      if (const auto* p = std::get_if<T>(&c.payload)) out.emplace_back(&c, p);
    }
    return out;
  }

  friend bool operator==(const ConstraintSet&, const ConstraintSet&) = default;

 private:
  std::vector<Constraint> constraints_;
};

/// Canonical one-line text of a rule, without its `as` clause.
std::string canonical_text(const ConstraintPayload& payload);

/// `<kind>:<first 8 hex of sha1(canonical text)>`
std::string default_constraint_id(const ConstraintPayload& payload);

/// One canonical rule per line; explicit ids are kept via `as`.
std::string pretty_print(const ConstraintSet& set);

bool eval_predicate(const FirmPredicate& p, const FirmRecord& f);
bool eval_condition(const Condition& c, const FirmRecord& f);

/// One SectorTotal per table entry, amounts copied verbatim.
std::vector<Constraint> io_table_to_constraints(const IOTable& table, Cents tolerance_cents);

}  // namespace econoforge::dsl

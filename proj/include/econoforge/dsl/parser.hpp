#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "econoforge/core/types.hpp"
#include "econoforge/dsl/constraint.hpp"

namespace econoforge::dsl {

/// Rule language, one statement per line, `#` starts a comment:
///
///   rule      = statement [ "as" STRING ] ;
///   statement = "sector_total" SECTOR "->" SECTOR "=" INT [ "tol" INT ]
///             | "cap" ( "out" | "in" ) "for" pred "to" pred "<=" INT
///             | "fixed" FIRM "->" FIRM "=" INT
///             | "bound" pred "->" pred "in" "[" INT "," INT "]"
///             | "forbid" pred "->" pred ;
///   pred      = "firm" "(" [ cond { "and" cond } ] ")" ;
///   cond      = FIELD ( "==" | "!=" | "<" | "<=" | ">" | ">=" ) literal
///             | FIELD "in" "[" STRING { "," STRING } "]" ;
///
/// The full grammar with lexical rules lives in docs/rules-format.md.
struct ParseOptions {
  /// When set, sector codes are checked against it.
  const SectorRegistry* sectors = nullptr;
};

struct ParseDiagnostic {
  std::size_t line = 0;
  std::size_t column = 0;
  std::string message;

  friend bool operator==(const ParseDiagnostic&, const ParseDiagnostic&) = default;
};

struct ParseOutcome {
  ConstraintSet set;  // every rule that parsed
  std::vector<ParseDiagnostic> errors;
};

/// Throws ParseError for the first bad rule.
ConstraintSet parse_rules(std::string_view text, const ParseOptions& options = {});

/// Keeps going after a bad line and reports every error.
ParseOutcome parse_rules_collect(std::string_view text, const ParseOptions& options = {});

}  // namespace econoforge::dsl

#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>

#include "econoforge/core/types.hpp"
#include "econoforge/dsl/constraint.hpp"

namespace econoforge::inference {

struct SmtEncodingStats {
  std::size_t pair_variables = 0;
  std::size_t indicator_variables = 0;
  std::size_t assertions = 0;
};

struct SmtDocument {
  std::string text;
  SmtEncodingStats stats;
};

/// Exact QF_LIA encoding of the inference problem.
///
/// One Int variable w_<src>_<dst> per ordered pair of distinct firms not
/// matched by a Forbid, in lexicographic (src, dst) order. Assertions, in
/// order: w >= 0 per pair; one window per SectorTotal; (=> (> w 0) b) per
/// pair touched by a degree cap; one counting bound per (cap, subject firm);
/// one equality per FixedEdge; one interval per (EdgeBound, matching pair).
/// Pairs without a variable are encoded as the constant 0.
SmtDocument emit_smtlib(std::span<const FirmRecord> firms, const dsl::ConstraintSet& cs);

/// Symbol for the amount flowing src -> dst. Characters outside [A-Za-z0-9.-]
/// are written as $XX (hex byte) so the name splits back unambiguously.
std::string pair_variable_name(std::string_view src, std::string_view dst);
std::string indicator_variable_name(std::string_view src, std::string_view dst);
std::optional<std::pair<FirmId, FirmId>> decode_pair_variable(std::string_view name);

struct SmtModelMeta {
  std::string model_id;
  std::string dataset_id;
  int year = 0;
  std::string constraint_set_id;
};

enum class SmtOutcome { Sat, Unsat, Unknown };

struct SmtModelResult {
  SmtOutcome outcome = SmtOutcome::Unknown;
  std::optional<TransactionModel> model;  // set for Sat only
};

/// Reads solver output (`sat` followed by a model, `unsat` or `unknown`).
/// Zero-valued pair variables are omitted from the model. Throws ParseError
/// on malformed text and DomainError for negative amounts or unknown firms.
SmtModelResult parse_smt_model(std::string_view text, std::span<const FirmRecord> firms,
                               const SmtModelMeta& meta);

struct SmtCheckResult {
  bool ok = false;
  std::string error;
  std::size_t declarations = 0;
  std::size_t assertions = 0;
};

/// Structural well-formedness of an SMT-LIB 2.6 script as emitted here:
/// known commands, declared-before-use symbols, sort-correct terms in the
/// QF_LIA fragment, and a trailing (check-sat) (get-model).
SmtCheckResult check_smtlib(std::string_view doc);

}  // namespace econoforge::inference

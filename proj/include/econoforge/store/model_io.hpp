#pragma once

#include <json.hpp>
#include <string>
#include <string_view>

#include "econoforge/core/types.hpp"

namespace econoforge::store {

/// Insertion-ordered JSON, so serialized field order is fixed by the code.
using Json = nlohmann::ordered_json;

inline constexpr int kModelSchema = 1;
/// Largest integer a double represents exactly (2^53 - 1).
inline constexpr Cents kMaxSafeJsonInteger = 9007199254740991LL;

/// Integer when |v| <= 2^53 - 1, decimal string otherwise.
Json cents_to_json(Cents v);
/// Accepts either form; throws DomainError on anything else.
Cents cents_from_json(const Json& j);

Json residuals_to_json(const ResidualReport& r);
ResidualReport residuals_from_json(const Json& j);

Json model_to_json(const TransactionModel& m);
/// Throws DomainError on a schema version mismatch or malformed content.
TransactionModel model_from_json(const Json& j);

/// Two-space indented, trailing newline. Equal models give equal bytes.
std::string save_model(const TransactionModel& m);
/// ParseError for invalid JSON (with line/column), DomainError otherwise.
TransactionModel load_model(std::string_view text);

/// Parses JSON text, mapping syntax errors to ParseError with line/column.
Json parse_json(std::string_view text);

/// Letters, digits, '.', '_' and '-' only; no leading '.'. Keeps ids usable as
/// file names and URL path segments.
bool is_safe_id(std::string_view id) noexcept;

}  // namespace econoforge::store

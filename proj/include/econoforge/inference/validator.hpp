#pragma once

#include <span>

#include "econoforge/core/types.hpp"
#include "econoforge/dsl/constraint.hpp"

namespace econoforge::inference {

/// Exact integer check of every constraint in `cs` against `model`.
///
/// `firms` are the firm records of the model's year. Absent edges count as 0.
/// Throws DomainError when an edge endpoint is not among `firms` or the
/// edge list has self-edges or duplicate pairs.
///
/// SectorTotal residuals are |achieved - target|; the constraint holds when
/// the residual is within its tolerance. max_relative_residual is the largest
/// residual/target over SectorTotals with a positive target.
ResidualReport validate(const TransactionModel& model, std::span<const FirmRecord> firms,
                        const dsl::ConstraintSet& cs);

/// Convenience overload for a bare edge list.
ResidualReport validate(std::span<const Edge> edges, std::span<const FirmRecord> firms,
                        const dsl::ConstraintSet& cs);

}  // namespace econoforge::inference

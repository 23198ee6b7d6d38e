#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stop_token>
#include <string>
#include <vector>

#include "econoforge/core/types.hpp"
#include "econoforge/dsl/constraint.hpp"

namespace econoforge::inference {

struct SolverParams {
  int max_iterations = 200;
  double tolerance = 1e-6;  // relative, per sector pair
  /// Recorded for reproducibility; the construction itself is deterministic
  /// and breaks every tie by ascending firm id.
  std::uint64_t seed = 0;
};

enum class SolveStatus { Satisfied, Residual, InfeasibleDetected };

std::string_view to_string(SolveStatus s) noexcept;

struct SolveReport {
  SolveStatus status = SolveStatus::Residual;
  int iterations = 0;
  ResidualReport residuals;
  std::int64_t wall_time_ms = 0;
  /// Constraint ids that witness infeasibility (InfeasibleDetected only).
  std::vector<std::string> witnesses;
  std::string message;
};

struct SolveResult {
  TransactionModel model;
  SolveReport report;
};

/// Receives (iteration, current max relative residual) during rebalancing.
using ProgressFn = std::function<void(int, double)>;

class SolveCancelled : public std::exception {
 public:
  const char* what() const noexcept override { return "solve cancelled"; }
};

struct SolveContext {
  std::stop_token stop;
  ProgressFn progress;
};

/// Builds a transaction model that satisfies `cs` where it can:
///
///  1. gravity allocation of each SectorTotal over its non-forbidden
///     candidate pairs, proportional to size_out(i) * size_in(j) with
///     size_out = max(expenses, 1) and size_in = max(revenue, 1);
///  2. repair: fixed edges as hard values, degree caps by keeping the
///     heaviest counterparties, edge bounds by clamping, moving removed mass
///     onto surviving edges of the same sector pair;
///  3. proportional rescaling per sector pair until the relative residual is
///     below params.tolerance, then largest-remainder rounding to cents.
///
/// The returned report is the validator's verdict on the rounded model.
/// Throws SolveCancelled when `ctx.stop` is triggered.
SolveResult solve_heuristic(std::span<const FirmRecord> firms, const dsl::ConstraintSet& cs,
                            const SolverParams& params, const SolveContext& ctx = {});

/// Distributes `total` over `weights` (non-negative reals whose sum is
/// rescaled to `total` first) as integers: floors, then one extra unit to
/// the largest fractional remainders, ties to the lower index.
std::vector<Cents> largest_remainder_round(std::span<const double> weights, Cents total);

/// Candidate pairs a SectorTotal may allocate to: every (i in from, j in to),
/// i != j, not matched by any Forbid. Indices refer to FirmIndex order.
std::vector<std::pair<std::size_t, std::size_t>> candidate_pairs(const FirmIndex& firms,
                                                                 const dsl::SectorTotal& total,
                                                                 const dsl::ConstraintSet& cs);

/// Number of candidate pairs after the repair phase removes pairs trimmed by
/// degree caps, for every SectorTotal combined.
std::size_t admissible_after_repair(std::span<const FirmRecord> firms,
                                    const dsl::ConstraintSet& cs);

}  // namespace econoforge::inference

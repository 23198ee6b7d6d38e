#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace econoforge {

/// Money is always integer euro-cents.
using Cents = std::int64_t;
using FirmId = std::string;

/// Top-level industry section code, e.g. "A" (agriculture) or "C" (manufacturing).
/// Codes are 1..8 characters of [A-Z0-9], starting with a letter.
class SectorCode {
 public:
  SectorCode() = default;
  explicit SectorCode(std::string code);

  static bool is_valid(std::string_view code) noexcept;

  const std::string& str() const noexcept { return code_; }

  friend auto operator<=>(const SectorCode&, const SectorCode&) = default;

 private:
  std::string code_;
};

struct LatLon {
  double lat = 0.0;
  double lon = 0.0;

  friend bool operator==(const LatLon&, const LatLon&) = default;
};

/// One firm-year observation. Expenses are stored as spent magnitudes, so
/// cash flow is revenue + expenses.
struct FirmRecord {
  FirmId firm_id;
  std::string name;
  std::optional<LatLon> location;  // absent when the source row had no coordinates
  SectorCode sector;
  std::string region_code;  // hierarchical, '/'-separated
  int year = 0;
  Cents revenue_cents = 0;
  Cents expenses_cents = 0;
  Cents employee_expenses_cents = 0;
  Cents cash_flow_cents = 0;

  friend bool operator==(const FirmRecord&, const FirmRecord&) = default;
};

/// Returns a description of the first invariant `f` violates, or nullopt.
std::optional<std::string> check_firm(const FirmRecord& f);

/// revenue + expenses; throws DomainError on overflow.
Cents compute_cash_flow(Cents revenue_cents, Cents expenses_cents);

/// Dataset-scoped closed set of sector codes.
class SectorRegistry {
 public:
  void add(const SectorCode& code, std::string name = {});
  bool contains(const SectorCode& code) const { return entries_.contains(code); }
  bool contains(std::string_view code) const;
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const std::map<SectorCode, std::string>& entries() const noexcept { return entries_; }

  friend bool operator==(const SectorRegistry&, const SectorRegistry&) = default;

 private:
  std::map<SectorCode, std::string> entries_;
};

struct SectorPair {
  SectorCode from;
  SectorCode to;

  friend auto operator<=>(const SectorPair&, const SectorPair&) = default;
};

/// Sector-to-sector monetary flow totals for one year.
struct IOTable {
  int year = 0;
  std::map<SectorPair, Cents> entries;

  friend bool operator==(const IOTable&, const IOTable&) = default;
};

/// Throws DomainError if an amount is negative or a sector is unregistered.
void check_io_table(const IOTable& table, const SectorRegistry& sectors);

struct Edge {
  FirmId src;
  FirmId dst;
  Cents amount_cents = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

enum class Provenance { HeuristicSolver, ExternalSmt, Imported };

std::string_view to_string(Provenance p) noexcept;
Provenance provenance_from_string(std::string_view s);

struct SectorPairResidual {
  std::string constraint_id;
  SectorPair pair;
  Cents target_cents = 0;
  Cents achieved_cents = 0;
  Cents residual_cents = 0;  // |achieved - target|

  friend bool operator==(const SectorPairResidual&, const SectorPairResidual&) = default;
};

/// Violation is measured in cents for money constraints and in counterparty
/// counts for degree caps.
struct ConstraintOutcome {
  std::string constraint_id;
  bool satisfied = true;
  std::int64_t violation = 0;

  friend bool operator==(const ConstraintOutcome&, const ConstraintOutcome&) = default;
};

struct ResidualReport {
  std::vector<SectorPairResidual> sector_pairs;
  std::vector<ConstraintOutcome> constraints;
  double max_relative_residual = 0.0;

  bool all_constraints_satisfied() const noexcept;

  friend bool operator==(const ResidualReport&, const ResidualReport&) = default;
};

/// Inferred weighted directed firm-to-firm graph.
struct TransactionModel {
  std::string model_id;
  std::string dataset_id;
  int year = 0;
  std::string constraint_set_id;
  std::vector<Edge> edges;
  ResidualReport residuals;
  Provenance provenance = Provenance::Imported;

  friend bool operator==(const TransactionModel&, const TransactionModel&) = default;
};

/// Sorts edges by (src, dst) and checks the structural invariants: no
/// self-edges, one edge per ordered pair, positive amounts. Throws DomainError.
void normalize_edges(std::vector<Edge>& edges);

/// Read-only view over the firms of one year, indexed by firm id.
class FirmIndex {
 public:
  explicit FirmIndex(std::span<const FirmRecord> firms);

  std::size_t size() const noexcept { return by_id_.size(); }
  /// Firms in ascending firm_id order.
  const FirmRecord& at(std::size_t i) const { return *by_id_[i]; }
  std::optional<std::size_t> find(std::string_view firm_id) const;
  const FirmRecord* get(std::string_view firm_id) const;

 private:
  std::vector<const FirmRecord*> by_id_;
  std::unordered_map<std::string_view, std::size_t> lookup_;
};

}  // namespace econoforge

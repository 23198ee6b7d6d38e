#pragma once

#include <optional>
#include <set>
#include <span>
#include <string_view>
#include <vector>

#include "econoforge/core/types.hpp"
#include "econoforge/geo/hex.hpp"

namespace econoforge::flow {

enum class FlowDirection { Outward, Inward };

/// "out-of-selection" | "into-selection"
std::string_view to_string(FlowDirection d) noexcept;

/// Aggregate of every model edge between two bins. A bin is empty when the
/// firm on that side has no coordinates.
struct FlowArc {
  std::optional<geo::HexIndex> from_bin;
  std::optional<geo::HexIndex> to_bin;
  Cents amount_cents = 0;
  FlowDirection direction = FlowDirection::Outward;
  double relative_weight = 0.0;  // amount / largest amount in the response

  friend bool operator==(const FlowArc&, const FlowArc&) = default;
};

struct SelectionStats {
  Cents inflow_cents = 0;
  Cents outflow_cents = 0;
  double pct_inward = 0.0;
  double pct_outward = 0.0;
  Cents overall_flow_cents = 0;
  /// Money moving between two selected firms, whether or not it is counted.
  Cents internal_cents = 0;

  friend bool operator==(const SelectionStats&, const SelectionStats&) = default;
};

struct FlowOptions {
  /// Count edges between two selected firms as both inflow and outflow (and
  /// emit them as arcs). Off by default.
  bool include_internal = false;
};

struct FlowResult {
  int resolution = 0;
  std::size_t selected_firms = 0;
  std::vector<FlowArc> arcs;  // outward first, then by (from_bin, to_bin)
  SelectionStats stats;

  friend bool operator==(const FlowResult&, const FlowResult&) = default;
};

/// Flows of the firms located in `selection`. Throws NotFound when no firm
/// lies in that bin.
FlowResult flows_for_selection(const TransactionModel& model, std::span<const FirmRecord> firms,
                               const geo::HexIndex& selection, const FlowOptions& options = {});

/// Flows of an arbitrary firm set, arcs grouped at `resolution`. The stats
/// depend only on the set, never on the resolution.
FlowResult flows_for_firms(const TransactionModel& model, std::span<const FirmRecord> firms,
                           const std::set<FirmId>& selected, int resolution,
                           const FlowOptions& options = {});

/// Firms with at least one incident edge.
std::set<FirmId> model_membership(const TransactionModel& model);

struct AmountChange {
  FirmId src;
  FirmId dst;
  Cents amount_a = 0;
  Cents amount_b = 0;
  Cents delta = 0;  // b - a

  friend bool operator==(const AmountChange&, const AmountChange&) = default;
};

struct SectorPairDelta {
  SectorPair pair;
  Cents total_a = 0;
  Cents total_b = 0;
  Cents delta = 0;

  friend bool operator==(const SectorPairDelta&, const SectorPairDelta&) = default;
};

struct ModelDiff {
  std::vector<Edge> additions;  // in b only
  std::vector<Edge> removals;   // in a only
  std::vector<AmountChange> changes;
  std::vector<SectorPairDelta> sector_pairs;  // pairs whose totals differ

  bool empty() const noexcept {
    return additions.empty() && removals.empty() && changes.empty() && sector_pairs.empty();
  }

  friend bool operator==(const ModelDiff&, const ModelDiff&) = default;
};

/// Throws DomainError when the models belong to different datasets or an
/// edge endpoint is missing from its firm list.
ModelDiff compare_models(const TransactionModel& a, std::span<const FirmRecord> firms_a,
                         const TransactionModel& b, std::span<const FirmRecord> firms_b);

}  // namespace econoforge::flow

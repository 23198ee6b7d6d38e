#include "econoforge/flow/flows.hpp"

#include <algorithm>
#include <map>
#include <tuple>

#include "econoforge/core/errors.hpp"

namespace econoforge::flow {

std::string_view to_string(FlowDirection d) noexcept {
  return d == FlowDirection::Outward ? "out-of-selection" : "into-selection";
}

namespace {

using BinKey = std::optional<geo::HexIndex>;
using ArcKey = std::tuple<FlowDirection, BinKey, BinKey>;

BinKey bin_of(const FirmRecord* f, int resolution) {
  if (!f || !f->location) return std::nullopt;
  return geo::bin_point(*f->location, resolution);
}

}  // namespace

FlowResult flows_for_firms(const TransactionModel& model, std::span<const FirmRecord> firms,
                           const std::set<FirmId>& selected, int resolution,
                           const FlowOptions& options) {
  geo::edge_length_m(resolution);  // validates
  const FirmIndex idx(firms);
  FlowResult out;
  out.resolution = resolution;
  out.selected_firms = selected.size();

  std::map<ArcKey, Cents> arcs;
  for (const auto& e : model.edges) {
    const bool src_in = selected.contains(e.src);
    const bool dst_in = selected.contains(e.dst);
    if (!src_in && !dst_in) continue;
    const FirmRecord* src = idx.get(e.src);
    const FirmRecord* dst = idx.get(e.dst);
    if (!src || !dst) throw DomainError("model edge " + e.src + "->" + e.dst + " references an unknown firm");
    const BinKey from = bin_of(src, resolution);
    const BinKey to = bin_of(dst, resolution);
    if (src_in && dst_in) {
      out.stats.internal_cents += e.amount_cents;
      if (!options.include_internal) continue;
      out.stats.outflow_cents += e.amount_cents;
      out.stats.inflow_cents += e.amount_cents;
      arcs[{FlowDirection::Outward, from, to}] += e.amount_cents;
      arcs[{FlowDirection::Inward, from, to}] += e.amount_cents;
    } else if (src_in) {
      out.stats.outflow_cents += e.amount_cents;
      arcs[{FlowDirection::Outward, from, to}] += e.amount_cents;
    } else {
      out.stats.inflow_cents += e.amount_cents;
      arcs[{FlowDirection::Inward, from, to}] += e.amount_cents;
    }
  }

  Cents largest = 0;
  for (const auto& [key, amount] : arcs) largest = std::max(largest, amount);
  for (const auto& [key, amount] : arcs) {
    FlowArc a;
    a.direction = std::get<0>(key);
    a.from_bin = std::get<1>(key);
    a.to_bin = std::get<2>(key);
    a.amount_cents = amount;
    a.relative_weight = amount == largest ? 1.0 : static_cast<double>(amount) / static_cast<double>(largest);
    out.arcs.push_back(a);
  }

  auto& s = out.stats;
  s.overall_flow_cents = s.inflow_cents + s.outflow_cents;
  if (s.overall_flow_cents > 0) {
    s.pct_inward = 100.0 * static_cast<double>(s.inflow_cents) / static_cast<double>(s.overall_flow_cents);
    s.pct_outward = 100.0 - s.pct_inward;
  }
  return out;
}

FlowResult flows_for_selection(const TransactionModel& model, std::span<const FirmRecord> firms,
                               const geo::HexIndex& selection, const FlowOptions& options) {
  std::set<FirmId> selected;
  for (const auto& f : firms) {
    if (f.location && geo::bin_point(*f.location, selection.resolution) == selection) {
      selected.insert(f.firm_id);
    }
  }
  if (selected.empty()) throw NotFound("no firms in bin " + geo::to_string(selection));
  return flows_for_firms(model, firms, selected, selection.resolution, options);
}

std::set<FirmId> model_membership(const TransactionModel& model) {
  std::set<FirmId> out;
  for (const auto& e : model.edges) {
    out.insert(e.src);
    out.insert(e.dst);
  }
  return out;
}

namespace {

std::map<std::pair<FirmId, FirmId>, Cents> by_pair(const TransactionModel& m) {
  std::map<std::pair<FirmId, FirmId>, Cents> out;
  for (const auto& e : m.edges) out[{e.src, e.dst}] += e.amount_cents;
  return out;
}

std::map<SectorPair, Cents> sector_totals(const TransactionModel& m, std::span<const FirmRecord> firms) {
  const FirmIndex idx(firms);
  std::map<SectorPair, Cents> out;
  for (const auto& e : m.edges) {
    const FirmRecord* s = idx.get(e.src);
    const FirmRecord* d = idx.get(e.dst);
    if (!s || !d) {
      throw DomainError("model '" + m.model_id + "' edge " + e.src + "->" + e.dst + " references an unknown firm");
    }
    out[SectorPair{s->sector, d->sector}] += e.amount_cents;
  }
  return out;
}

}  // namespace

ModelDiff compare_models(const TransactionModel& a, std::span<const FirmRecord> firms_a,
                         const TransactionModel& b, std::span<const FirmRecord> firms_b) {
  if (a.dataset_id != b.dataset_id) {
    throw DomainError("models belong to different datasets ('" + a.dataset_id + "' and '" + b.dataset_id + "')");
  }
  ModelDiff diff;
  const auto pa = by_pair(a);
  const auto pb = by_pair(b);
  for (const auto& [key, amount] : pa) {
    auto it = pb.find(key);
    if (it == pb.end()) {
      diff.removals.push_back({key.first, key.second, amount});
    } else if (it->second != amount) {
      diff.changes.push_back({key.first, key.second, amount, it->second, it->second - amount});
    }
  }
  for (const auto& [key, amount] : pb) {
    if (!pa.contains(key)) diff.additions.push_back({key.first, key.second, amount});
  }

  const auto sa = sector_totals(a, firms_a);
  const auto sb = sector_totals(b, firms_b);
  std::set<SectorPair> pairs;
  for (const auto& [p, v] : sa) pairs.insert(p);
  for (const auto& [p, v] : sb) pairs.insert(p);
  for (const auto& p : pairs) {
    const Cents ta = sa.contains(p) ? sa.at(p) : 0;
    const Cents tb = sb.contains(p) ? sb.at(p) : 0;
    if (ta != tb) diff.sector_pairs.push_back({p, ta, tb, tb - ta});
  }
  return diff;
}

}  // namespace econoforge::flow

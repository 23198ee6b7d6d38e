#include "econoforge/inference/validator.hpp"

#include <cstdlib>
#include <map>
#include <unordered_map>

#include "econoforge/core/errors.hpp"

namespace econoforge::inference {
namespace {

struct IndexedEdge {
  std::size_t src;
  std::size_t dst;
  Cents amount;
};

std::uint64_t pair_key(std::size_t i, std::size_t j) {
  return (static_cast<std::uint64_t>(i) << 32) | static_cast<std::uint64_t>(j);
}

std::vector<bool> match_all(const dsl::FirmPredicate& p, const FirmIndex& idx) {
  std::vector<bool> out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out[i] = dsl::eval_predicate(p, idx.at(i));
  return out;
}

Cents abs_diff(Cents a, Cents b) { return a > b ? a - b : b - a; }

}  // namespace

ResidualReport validate(const TransactionModel& model, std::span<const FirmRecord> firms,
                        const dsl::ConstraintSet& cs) {
  return validate(std::span<const Edge>(model.edges), firms, cs);
}

ResidualReport validate(std::span<const Edge> edges, std::span<const FirmRecord> firms,
                        const dsl::ConstraintSet& cs) {
  const FirmIndex idx(firms);
  const std::size_t n = idx.size();

  std::vector<IndexedEdge> indexed;
  indexed.reserve(edges.size());
  std::unordered_map<std::uint64_t, Cents> weight;
  weight.reserve(edges.size() * 2);
  for (const auto& e : edges) {
    auto s = idx.find(e.src);
    auto d = idx.find(e.dst);
    if (!s) throw DomainError("dangling firm id '" + e.src + "' in model edge");
    if (!d) throw DomainError("dangling firm id '" + e.dst + "' in model edge");
    if (*s == *d) throw DomainError("self-edge on firm '" + e.src + "'");
    if (!weight.emplace(pair_key(*s, *d), e.amount_cents).second) {
      throw DomainError("duplicate edge " + e.src + "->" + e.dst);
    }
    indexed.push_back({*s, *d, e.amount_cents});
  }

  std::map<SectorPair, Cents> sector_sums;
  for (const auto& e : indexed) {
    sector_sums[SectorPair{idx.at(e.src).sector, idx.at(e.dst).sector}] += e.amount;
  }

  ResidualReport report;
  for (const auto& c : cs.constraints()) {
    ConstraintOutcome out{c.id, true, 0};

    if (std::holds_alternative<dsl::NonNegativity>(c.payload)) {
      for (const auto& e : indexed) {
        if (e.amount < 0) out.violation += -e.amount;
      }
    } else if (const auto* st = std::get_if<dsl::SectorTotal>(&c.payload)) {
      SectorPair pair{st->from, st->to};
      auto it = sector_sums.find(pair);
      Cents achieved = it == sector_sums.end() ? 0 : it->second;
      Cents residual = abs_diff(achieved, st->amount_cents);
      report.sector_pairs.push_back({c.id, pair, st->amount_cents, achieved, residual});
      if (residual > st->tolerance_cents) out.violation = residual - st->tolerance_cents;
      if (st->amount_cents > 0) {
        double rel = static_cast<double>(residual) / static_cast<double>(st->amount_cents);
        report.max_relative_residual = std::max(report.max_relative_residual, rel);
      }
    } else if (const auto* cap = std::get_if<dsl::DegreeCap>(&c.payload)) {
      auto subject = match_all(cap->firms, idx);
      auto counterparty = match_all(cap->counterparties, idx);
      std::vector<std::int64_t> degree(n, 0);
      for (const auto& e : indexed) {
        if (e.amount <= 0) continue;
        if (cap->direction == dsl::Direction::Out) {
          if (counterparty[e.dst]) ++degree[e.src];
        } else {
          if (counterparty[e.src]) ++degree[e.dst];
        }
      }
      for (std::size_t i = 0; i < n; ++i) {
        if (subject[i] && degree[i] > cap->max_count) out.violation += degree[i] - cap->max_count;
      }
    } else if (const auto* fx = std::get_if<dsl::FixedEdge>(&c.payload)) {
      Cents achieved = 0;
      auto s = idx.find(fx->src);
      auto d = idx.find(fx->dst);
      if (s && d) {
        auto it = weight.find(pair_key(*s, *d));
        if (it != weight.end()) achieved = it->second;
      }
      out.violation = abs_diff(achieved, fx->amount_cents);
    } else if (const auto* b = std::get_if<dsl::EdgeBound>(&c.payload)) {
      auto src_ok = match_all(b->pairs.src, idx);
      auto dst_ok = match_all(b->pairs.dst, idx);
      std::int64_t n_src = 0, n_dst = 0, n_both = 0;
      for (std::size_t i = 0; i < n; ++i) {
        n_src += src_ok[i];
        n_dst += dst_ok[i];
        n_both += src_ok[i] && dst_ok[i];
      }
      std::int64_t matching_pairs = n_src * n_dst - n_both;
      std::int64_t present = 0;
      for (const auto& e : indexed) {
        if (!src_ok[e.src] || !dst_ok[e.dst]) continue;
        ++present;
        if (e.amount < b->lo_cents) out.violation += b->lo_cents - e.amount;
        if (e.amount > b->hi_cents) out.violation += e.amount - b->hi_cents;
      }
      out.violation += (matching_pairs - present) * b->lo_cents;
    } else if (const auto* f = std::get_if<dsl::Forbid>(&c.payload)) {
      auto src_ok = match_all(f->pairs.src, idx);
      auto dst_ok = match_all(f->pairs.dst, idx);
      for (const auto& e : indexed) {
        if (src_ok[e.src] && dst_ok[e.dst]) out.violation += std::llabs(e.amount);
      }
    }

    out.satisfied = out.violation == 0;
    report.constraints.push_back(std::move(out));
  }
  return report;
}

}  // namespace econoforge::inference

#include "econoforge/core/types.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "econoforge/core/errors.hpp"

namespace econoforge {

SectorCode::SectorCode(std::string code) : code_(std::move(code)) {
  if (!is_valid(code_)) {
    throw DomainError("invalid sector code '" + code_ + "'");
  }
}

bool SectorCode::is_valid(std::string_view code) noexcept {
  if (code.empty() || code.size() > 8) return false;
  if (code.front() < 'A' || code.front() > 'Z') return false;
  return std::all_of(code.begin(), code.end(), [](char c) {
    return (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
  });
}

std::optional<std::string> check_firm(const FirmRecord& f) {
  if (f.firm_id.empty()) return "firm_id is empty";
  if (f.location) {
    const auto [lat, lon] = *f.location;
    if (!std::isfinite(lat) || lat < -90.0 || lat > 90.0) return "lat out of range [-90, 90]";
    if (!std::isfinite(lon) || lon < -180.0 || lon > 180.0) return "lon out of range [-180, 180]";
  }
  if (f.employee_expenses_cents < 0) {
    return "domain bound violated: employee_expenses_cents must be non-negative";
  }
  if (f.expenses_cents < 0) return "expenses_cents is a spent magnitude and must be non-negative";
  Cents expected = 0;
  if (__builtin_add_overflow(f.revenue_cents, f.expenses_cents, &expected)) {
    return "revenue_cents + expenses_cents overflows";
  }
  if (f.cash_flow_cents != expected) {
    return "cash_flow_cents must equal revenue_cents + expenses_cents";
  }
  return std::nullopt;
}

Cents compute_cash_flow(Cents revenue_cents, Cents expenses_cents) {
  Cents out = 0;
  if (__builtin_add_overflow(revenue_cents, expenses_cents, &out)) {
    throw DomainError("cash flow overflows 64-bit cents");
  }
  return out;
}

void SectorRegistry::add(const SectorCode& code, std::string name) {
  entries_.insert_or_assign(code, std::move(name));
}

bool SectorRegistry::contains(std::string_view code) const {
  if (!SectorCode::is_valid(code)) return false;
  return entries_.contains(SectorCode(std::string(code)));
}

void check_io_table(const IOTable& table, const SectorRegistry& sectors) {
  for (const auto& [pair, amount] : table.entries) {
    if (amount < 0) {
      throw DomainError("IO table " + std::to_string(table.year) + ": negative amount for " +
                        pair.from.str() + "->" + pair.to.str());
    }
    for (const auto* s : {&pair.from, &pair.to}) {
      if (!sectors.contains(*s)) {
        throw DomainError("IO table " + std::to_string(table.year) + ": unknown sector '" +
                          s->str() + "'");
      }
    }
  }
}

std::string_view to_string(Provenance p) noexcept {
  switch (p) {
    case Provenance::HeuristicSolver:
      return "heuristic-solver";
    case Provenance::ExternalSmt:
      return "external-smt";
    case Provenance::Imported:
      return "imported";
  }
  return "imported";
}

Provenance provenance_from_string(std::string_view s) {
  if (s == "heuristic-solver") return Provenance::HeuristicSolver;
  if (s == "external-smt") return Provenance::ExternalSmt;
  if (s == "imported") return Provenance::Imported;
  throw DomainError("unknown provenance '" + std::string(s) + "'");
}

bool ResidualReport::all_constraints_satisfied() const noexcept {
  return std::all_of(constraints.begin(), constraints.end(),
                     [](const ConstraintOutcome& c) { return c.satisfied; });
}

void normalize_edges(std::vector<Edge>& edges) {
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return std::tie(a.src, a.dst) < std::tie(b.src, b.dst);
  });
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const Edge& e = edges[i];
    if (e.src == e.dst) throw DomainError("self-edge on firm '" + e.src + "'");
    if (e.amount_cents <= 0) {
      throw DomainError("edge " + e.src + "->" + e.dst + " has non-positive amount");
    }
    if (i > 0 && edges[i - 1].src == e.src && edges[i - 1].dst == e.dst) {
      throw DomainError("duplicate edge " + e.src + "->" + e.dst);
    }
  }
}

FirmIndex::FirmIndex(std::span<const FirmRecord> firms) {
  by_id_.reserve(firms.size());
  for (const auto& f : firms) by_id_.push_back(&f);
  std::sort(by_id_.begin(), by_id_.end(),
            [](const FirmRecord* a, const FirmRecord* b) { return a->firm_id < b->firm_id; });
  lookup_.reserve(by_id_.size());
  for (std::size_t i = 0; i < by_id_.size(); ++i) {
    if (!lookup_.emplace(by_id_[i]->firm_id, i).second) {
      throw DomainError("duplicate firm id '" + by_id_[i]->firm_id + "' within one year");
    }
  }
}

std::optional<std::size_t> FirmIndex::find(std::string_view firm_id) const {
  auto it = lookup_.find(firm_id);
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

const FirmRecord* FirmIndex::get(std::string_view firm_id) const {
  auto idx = find(firm_id);
  return idx ? by_id_[*idx] : nullptr;
}

}  // namespace econoforge

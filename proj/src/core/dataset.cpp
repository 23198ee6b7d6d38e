#include "econoforge/core/dataset.hpp"

#include <algorithm>
#include <set>
#include <tuple>

#include "econoforge/core/errors.hpp"

namespace econoforge {

void RegionTable::add(RegionInfo info) {
  if (info.code.empty()) throw DomainError("region code is empty");
  if (info.area_km2 && !(*info.area_km2 > 0.0)) {
    throw DomainError("region '" + info.code + "' has non-positive area");
  }
  std::string key = info.code;
  entries_.insert_or_assign(std::move(key), std::move(info));
}

const RegionInfo* RegionTable::find(std::string_view code) const {
  auto it = entries_.find(std::string(code));
  return it == entries_.end() ? nullptr : &it->second;
}

bool RegionTable::has_level(int level) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [level](const auto& kv) { return kv.second.level == level; });
}

int region_level(std::string_view code) {
  if (code.empty()) return 0;
  return 1 + static_cast<int>(std::count(code.begin(), code.end(), '/'));
}

std::string region_prefix(std::string_view code, int level) {
  std::size_t pos = 0;
  for (int seg = 0; seg < level; ++seg) {
    pos = code.find('/', pos);
    if (pos == std::string_view::npos) return std::string(code);
    if (seg + 1 < level) ++pos;
  }
  return std::string(code.substr(0, pos));
}

std::vector<int> Dataset::years() const {
  std::set<int> ys;
  for (const auto& f : firms) ys.insert(f.year);
  return {ys.begin(), ys.end()};
}

bool Dataset::has_year(int year) const { return !firms_in_year(year).empty(); }

std::span<const FirmRecord> Dataset::firms_in_year(int year) const {
  auto lo = std::lower_bound(firms.begin(), firms.end(), year,
                             [](const FirmRecord& f, int y) { return f.year < y; });
  auto hi = std::upper_bound(lo, firms.end(), year,
                             [](int y, const FirmRecord& f) { return y < f.year; });
  return {lo, hi};
}

std::optional<int> Dataset::previous_year(int year) const {
  std::optional<int> best;
  for (int y : years()) {
    if (y < year) best = y;
  }
  return best;
}

void finalize_dataset(Dataset& ds) {
  std::sort(ds.firms.begin(), ds.firms.end(), [](const FirmRecord& a, const FirmRecord& b) {
    return std::tie(a.year, a.firm_id) < std::tie(b.year, b.firm_id);
  });
  for (std::size_t i = 0; i < ds.firms.size(); ++i) {
    const FirmRecord& f = ds.firms[i];
    if (auto err = check_firm(f)) {
      throw DomainError("firm '" + f.firm_id + "' (" + std::to_string(f.year) + "): " + *err);
    }
    if (i > 0 && ds.firms[i - 1].year == f.year && ds.firms[i - 1].firm_id == f.firm_id) {
      throw DomainError("duplicate (firm_id, year): " + f.firm_id + ", " + std::to_string(f.year));
    }
    if (!ds.sectors.contains(f.sector)) {
      throw DomainError("firm '" + f.firm_id + "' references unknown sector '" + f.sector.str() +
                        "'");
    }
    if (!ds.regions.empty() && !ds.regions.find(f.region_code)) {
      throw DomainError("firm '" + f.firm_id + "' references unknown region '" + f.region_code +
                        "'");
    }
  }
  for (auto& [year, table] : ds.io_tables) {
    if (table.year != year) throw DomainError("IO table keyed under the wrong year");
    check_io_table(table, ds.sectors);
  }
}

void recompute_manifest_totals(Dataset& ds) {
  auto& m = ds.manifest;
  m.firm_counts.clear();
  m.cash_flow_totals.clear();
  m.io_totals.clear();
  for (const auto& f : ds.firms) {
    m.firm_counts[f.year] += 1;
    m.cash_flow_totals[f.year] += f.cash_flow_cents;
  }
  for (const auto& [year, table] : ds.io_tables) {
    Cents total = 0;
    for (const auto& [pair, amount] : table.entries) total += amount;
    m.io_totals[year] = total;
  }
}

DatasetSummary dataset_summary(const Dataset& ds) {
  DatasetSummary s;
  s.sectors = ds.sectors;
  for (const auto& f : ds.firms) {
    s.firm_counts[f.year] += 1;
    s.cash_flow_totals[f.year] += f.cash_flow_cents;
  }
  for (const auto& [year, count] : s.firm_counts) s.years.push_back(year);
  return s;
}

}  // namespace econoforge

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "econoforge/core/types.hpp"

namespace econoforge {

/// One row of the region table. Levels are the number of '/'-separated
/// segments in the code ("AT" is level 1, "AT/3" level 2, ...).
struct RegionInfo {
  std::string code;
  int level = 1;
  std::string name;
  std::optional<double> area_km2;
  std::optional<LatLon> centroid;

  friend bool operator==(const RegionInfo&, const RegionInfo&) = default;
};

class RegionTable {
 public:
  void add(RegionInfo info);
  const RegionInfo* find(std::string_view code) const;
  bool has_level(int level) const;
  const std::map<std::string, RegionInfo>& entries() const noexcept { return entries_; }
  bool empty() const noexcept { return entries_.empty(); }

  friend bool operator==(const RegionTable&, const RegionTable&) = default;

 private:
  std::map<std::string, RegionInfo> entries_;
};

/// Number of '/'-separated segments of a region code.
int region_level(std::string_view code);
/// The first `level` segments of `code` (the whole code if it is shallower).
std::string region_prefix(std::string_view code, int level);

/// Exact totals recorded alongside a dataset so that a reload can be audited.
struct Manifest {
  std::map<int, std::int64_t> firm_counts;
  std::map<int, Cents> cash_flow_totals;
  std::map<int, Cents> io_totals;
  /// file name -> sha256 hex of the stored bytes
  std::map<std::string, std::string> checksums;
  /// Synthetic datasets only: region code -> "growth" | "decline" between
  /// consecutive years.
  std::map<std::string, std::string> planted_trends;
  std::optional<std::uint64_t> seed;

  friend bool operator==(const Manifest&, const Manifest&) = default;
};

struct Dataset {
  std::string dataset_id;
  SectorRegistry sectors;
  RegionTable regions;
  std::vector<FirmRecord> firms;  // sorted by (year, firm_id)
  std::map<int, IOTable> io_tables;
  Manifest manifest;

  std::vector<int> years() const;
  bool has_year(int year) const;
  /// Firms of `year` in ascending firm_id order; empty span for unknown years.
  std::span<const FirmRecord> firms_in_year(int year) const;
  /// Closest year strictly before `year` that has firms.
  std::optional<int> previous_year(int year) const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Sorts firms, checks referential integrity and every record invariant.
/// Throws DomainError on the first problem.
void finalize_dataset(Dataset& ds);

/// Recomputes the count and total fields of the manifest from the data,
/// leaving checksums, trends and seed untouched.
void recompute_manifest_totals(Dataset& ds);

struct DatasetSummary {
  std::vector<int> years;
  SectorRegistry sectors;
  std::map<int, std::int64_t> firm_counts;
  std::map<int, Cents> cash_flow_totals;

  friend bool operator==(const DatasetSummary&, const DatasetSummary&) = default;
};

DatasetSummary dataset_summary(const Dataset& ds);

}  // namespace econoforge

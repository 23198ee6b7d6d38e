#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "econoforge/core/dataset.hpp"
#include "econoforge/core/types.hpp"

namespace econoforge::store {

/// Header columns of the firm file. cash_flow_cents may be left out of the
/// header entirely or left blank per row; it is then computed.
inline constexpr std::string_view kFirmColumns[] = {
    "firm_id", "name", "lat", "lon", "sector", "region_code", "year",
    "revenue_cents", "expenses_cents", "employee_expenses_cents", "cash_flow_cents"};
inline constexpr std::string_view kIoColumns[] = {"year", "from_sector", "to_sector", "amount_cents"};
inline constexpr std::string_view kSectorColumns[] = {"sector_code", "name"};
inline constexpr std::string_view kRegionColumns[] = {"region_code", "level", "name",
                                                      "area_km2", "centroid_lat", "centroid_lon"};

struct RowError {
  std::size_t line = 0;
  std::string message;

  friend bool operator==(const RowError&, const RowError&) = default;
};

struct FirmIngest {
  std::vector<FirmRecord> records;  // in file order
  std::vector<std::size_t> lines;   // source line of each record
  std::vector<RowError> errors;
};

struct IoIngest {
  std::map<int, IOTable> tables;
  std::vector<RowError> errors;
};

/// Partial-accept: bad rows land in `errors` with their line, good rows are
/// kept. A missing or wrong header throws ParseError. A repeated
/// (firm_id, year) is reported against the later row.
FirmIngest ingest_firms(std::string_view csv, const SectorRegistry* sectors = nullptr);

/// Same policy for IO rows; a repeated (year, from, to) is a row error.
IoIngest ingest_io_table(std::string_view csv, const SectorRegistry* sectors = nullptr);

/// Reference tables are all-or-nothing: the first bad row throws ParseError.
SectorRegistry ingest_sectors(std::string_view csv);
RegionTable ingest_regions(std::string_view csv);

std::string export_firms(std::span<const FirmRecord> firms);
std::string export_io_tables(const std::map<int, IOTable>& tables);
std::string export_sectors(const SectorRegistry& sectors);
std::string export_regions(const RegionTable& regions);

struct IngestSources {
  std::string dataset_id;
  std::string firms_csv;
  std::optional<std::string> io_csv;
  std::optional<std::string> sectors_csv;
  std::optional<std::string> regions_csv;
};

struct IngestReport {
  Dataset dataset;
  std::vector<RowError> firm_errors;
  std::vector<RowError> io_errors;

  bool clean() const noexcept { return firm_errors.empty() && io_errors.empty(); }
};

/// Builds a finalized dataset. Without a sector file the registry is the set
/// of codes seen in the firm and IO rows; without a region file the table
/// holds every firm region and its prefixes, with no names or areas. Firms
/// whose region is missing from a supplied table are rejected as row errors.
IngestReport ingest_dataset(const IngestSources& src);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

}  // namespace econoforge::store

#include "econoforge/store/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <tuple>

#include "econoforge/core/errors.hpp"
#include "econoforge/store/csv.hpp"

namespace econoforge::store {

namespace {

struct RowFailure {
  std::string message;
};

template <typename T>
T parse_int(std::string_view text, std::string_view column) {
  T v{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
    throw RowFailure{std::string(column) + ": expected an integer, got '" + std::string(text) + "'"};
  }
  return v;
}

double parse_real(std::string_view text, std::string_view column) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw RowFailure{std::string(column) + ": expected a number, got '" + std::string(text) + "'"};
  }
  return v;
}

SectorCode parse_sector(std::string_view text, std::string_view column, const SectorRegistry* reg) {
  if (!SectorCode::is_valid(text)) {
    throw RowFailure{std::string(column) + ": invalid sector code '" + std::string(text) + "'"};
  }
  SectorCode code{std::string(text)};
  if (reg && !reg->contains(code)) {
    throw RowFailure{std::string(column) + ": sector '" + std::string(text) + "' is not registered"};
  }
  return code;
}

std::string header_text(std::span<const std::string_view> cols) {
  std::string out;
  for (auto c : cols) {
    if (!out.empty()) out.push_back(',');
    out += c;
  }
  return out;
}

bool header_is(const CsvRow& row, std::span<const std::string_view> cols) {
  if (row.fields.size() != cols.size()) return false;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (row.fields[i] != cols[i]) return false;
  }
  return true;
}

/// Parses and checks the header; returns the data rows. `width` receives the
/// number of header columns.
std::vector<CsvRow> rows_after_header(std::string_view csv, std::span<const std::string_view> cols,
                                      std::span<const std::string_view> alt_cols = {},
                                      std::size_t* width = nullptr) {
  auto rows = parse_csv(csv);
  if (rows.empty()) throw ParseError(1, 1, "missing header row, expected '" + header_text(cols) + "'");
  if (!header_is(rows.front(), cols) && (alt_cols.empty() || !header_is(rows.front(), alt_cols))) {
    throw ParseError(rows.front().line, 1, "header must be '" + header_text(cols) + "'");
  }
  if (width) *width = rows.front().fields.size();
  rows.erase(rows.begin());
  return rows;
}

void check_width(const CsvRow& row, std::size_t width) {
  if (row.fields.size() != width) {
    throw RowFailure{"expected " + std::to_string(width) + " fields, got " +
                     std::to_string(row.fields.size())};
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw DomainError("cannot format number");
  return std::string(buf, ptr);
}

FirmIngest ingest_firms(std::string_view csv, const SectorRegistry* sectors) {
  const std::span<const std::string_view> full(kFirmColumns);
  const auto short_cols = full.first(full.size() - 1);
  std::size_t width = 0;
  auto rows = rows_after_header(csv, full, short_cols, &width);
  const bool has_cash_column = width == full.size();

  FirmIngest out;
  std::map<std::pair<std::string, int>, std::size_t> seen;
  for (const auto& row : rows) {
    try {
      check_width(row, width);
      const auto& c = row.fields;
      FirmRecord f;
      f.firm_id = c[0];
      if (f.firm_id.empty()) throw RowFailure{"firm_id: must not be empty"};
      f.name = c[1];
      if (c[2].empty() != c[3].empty()) throw RowFailure{"lat/lon: give both coordinates or neither"};
      if (!c[2].empty()) f.location = LatLon{parse_real(c[2], "lat"), parse_real(c[3], "lon")};
      f.sector = parse_sector(c[4], "sector", sectors);
      f.region_code = c[5];
      if (f.region_code.empty()) throw RowFailure{"region_code: must not be empty"};
      f.year = parse_int<int>(c[6], "year");
      f.revenue_cents = parse_int<Cents>(c[7], "revenue_cents");
      f.expenses_cents = parse_int<Cents>(c[8], "expenses_cents");
      f.employee_expenses_cents = parse_int<Cents>(c[9], "employee_expenses_cents");
      if (has_cash_column && !c[10].empty()) {
        f.cash_flow_cents = parse_int<Cents>(c[10], "cash_flow_cents");
      } else {
        try {
          f.cash_flow_cents = compute_cash_flow(f.revenue_cents, f.expenses_cents);
        } catch (const DomainError& e) {
          throw RowFailure{e.what()};
        }
      }
      if (auto err = check_firm(f)) throw RowFailure{*err};
      auto [it, fresh] = seen.emplace(std::pair{f.firm_id, f.year}, row.line);
      if (!fresh) {
        throw RowFailure{"duplicate (firm_id, year) (" + f.firm_id + ", " + std::to_string(f.year) +
                         "), first seen on line " + std::to_string(it->second)};
      }
      out.records.push_back(std::move(f));
      out.lines.push_back(row.line);
    } catch (const RowFailure& e) {
      out.errors.push_back({row.line, e.message});
    }
  }
  return out;
}

IoIngest ingest_io_table(std::string_view csv, const SectorRegistry* sectors) {
  auto rows = rows_after_header(csv, kIoColumns);
  IoIngest out;
  for (const auto& row : rows) {
    try {
      check_width(row, std::size(kIoColumns));
      const int year = parse_int<int>(row.fields[0], "year");
      SectorPair pair{parse_sector(row.fields[1], "from_sector", sectors),
                      parse_sector(row.fields[2], "to_sector", sectors)};
      const Cents amount = parse_int<Cents>(row.fields[3], "amount_cents");
      if (amount < 0) throw RowFailure{"amount_cents: must be non-negative"};
      auto& table = out.tables[year];
      table.year = year;
      if (!table.entries.emplace(pair, amount).second) {
        throw RowFailure{"duplicate sector pair " + pair.from.str() + " -> " + pair.to.str() + " in " +
                         std::to_string(year)};
      }
    } catch (const RowFailure& e) {
      out.errors.push_back({row.line, e.message});
    }
  }
  return out;
}

SectorRegistry ingest_sectors(std::string_view csv) {
  SectorRegistry reg;
  for (const auto& row : rows_after_header(csv, kSectorColumns)) {
    try {
      check_width(row, std::size(kSectorColumns));
      auto code = parse_sector(row.fields[0], "sector_code", nullptr);
      if (reg.contains(code)) throw RowFailure{"duplicate sector '" + code.str() + "'"};
      reg.add(code, row.fields[1]);
    } catch (const RowFailure& e) {
      throw ParseError(row.line, 1, e.message);
    }
  }
  return reg;
}

RegionTable ingest_regions(std::string_view csv) {
  RegionTable table;
  for (const auto& row : rows_after_header(csv, kRegionColumns)) {
    try {
      check_width(row, std::size(kRegionColumns));
      const auto& c = row.fields;
      RegionInfo info;
      info.code = c[0];
      if (info.code.empty()) throw RowFailure{"region_code: must not be empty"};
      if (table.find(info.code)) throw RowFailure{"duplicate region '" + info.code + "'"};
      info.level = parse_int<int>(c[1], "level");
      if (info.level != region_level(info.code)) {
        throw RowFailure{"level: " + info.code + " has " + std::to_string(region_level(info.code)) +
                         " segments"};
      }
      info.name = c[2];
      if (!c[3].empty()) {
        info.area_km2 = parse_real(c[3], "area_km2");
        if (*info.area_km2 <= 0.0) throw RowFailure{"area_km2: must be positive"};
      }
      if (c[4].empty() != c[5].empty()) throw RowFailure{"centroid: give both coordinates or neither"};
      if (!c[4].empty()) info.centroid = LatLon{parse_real(c[4], "centroid_lat"), parse_real(c[5], "centroid_lon")};
      table.add(std::move(info));
    } catch (const RowFailure& e) {
      throw ParseError(row.line, 1, e.message);
    }
  }
  return table;
}

std::string export_firms(std::span<const FirmRecord> firms) {
  std::string out = csv_line({kFirmColumns, kFirmColumns + std::size(kFirmColumns)});
  for (const auto& f : firms) {
    out += csv_line({f.firm_id, f.name, f.location ? format_double(f.location->lat) : "",
                     f.location ? format_double(f.location->lon) : "", f.sector.str(), f.region_code,
                     std::to_string(f.year), std::to_string(f.revenue_cents),
                     std::to_string(f.expenses_cents), std::to_string(f.employee_expenses_cents),
                     std::to_string(f.cash_flow_cents)});
  }
  return out;
}

std::string export_io_tables(const std::map<int, IOTable>& tables) {
  std::string out = csv_line({kIoColumns, kIoColumns + std::size(kIoColumns)});
  for (const auto& [year, table] : tables) {
    for (const auto& [pair, amount] : table.entries) {
      out += csv_line({std::to_string(year), pair.from.str(), pair.to.str(), std::to_string(amount)});
    }
  }
  return out;
}

std::string export_sectors(const SectorRegistry& sectors) {
  std::string out = csv_line({kSectorColumns, kSectorColumns + std::size(kSectorColumns)});
  for (const auto& [code, name] : sectors.entries()) out += csv_line({code.str(), name});
  return out;
}

std::string export_regions(const RegionTable& regions) {
  std::string out = csv_line({kRegionColumns, kRegionColumns + std::size(kRegionColumns)});
  for (const auto& [code, r] : regions.entries()) {
    out += csv_line({r.code, std::to_string(r.level), r.name, r.area_km2 ? format_double(*r.area_km2) : "",
                     r.centroid ? format_double(r.centroid->lat) : "",
                     r.centroid ? format_double(r.centroid->lon) : ""});
  }
  return out;
}

IngestReport ingest_dataset(const IngestSources& src) {
  IngestReport report;
  Dataset& ds = report.dataset;
  ds.dataset_id = src.dataset_id;

  std::optional<SectorRegistry> registry;
  if (src.sectors_csv) registry = ingest_sectors(*src.sectors_csv);
  const SectorRegistry* reg = registry ? &*registry : nullptr;

  auto firms = ingest_firms(src.firms_csv, reg);
  report.firm_errors = std::move(firms.errors);
  if (src.io_csv) {
    auto io = ingest_io_table(*src.io_csv, reg);
    ds.io_tables = std::move(io.tables);
    report.io_errors = std::move(io.errors);
  }

  if (src.regions_csv) {
    ds.regions = ingest_regions(*src.regions_csv);
    for (std::size_t i = 0; i < firms.records.size(); ++i) {
      auto& f = firms.records[i];
      if (!ds.regions.find(f.region_code)) {
        report.firm_errors.push_back({firms.lines[i], "region_code: region '" + f.region_code +
                                                          "' is not in the region table"});
        continue;
      }
      ds.firms.push_back(std::move(f));
    }
    std::sort(report.firm_errors.begin(), report.firm_errors.end(),
              [](const RowError& a, const RowError& b) { return a.line < b.line; });
  } else {
    ds.firms = std::move(firms.records);
    for (const auto& f : ds.firms) {
      for (int level = 1; level <= region_level(f.region_code); ++level) {
        const auto code = region_prefix(f.region_code, level);
        if (!ds.regions.find(code)) ds.regions.add(RegionInfo{code, level, "", std::nullopt, std::nullopt});
      }
    }
  }

  if (registry) {
    ds.sectors = std::move(*registry);
  } else {
    for (const auto& f : ds.firms) ds.sectors.add(f.sector);
    for (const auto& [year, table] : ds.io_tables) {
      for (const auto& [pair, amount] : table.entries) {
        ds.sectors.add(pair.from);
        ds.sectors.add(pair.to);
      }
    }
  }

  finalize_dataset(ds);
  recompute_manifest_totals(ds);
  return report;
}

}  // namespace econoforge::store

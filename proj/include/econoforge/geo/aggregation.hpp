#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "econoforge/core/dataset.hpp"
#include "econoforge/core/types.hpp"
#include "econoforge/geo/hex.hpp"

namespace econoforge::geo {

enum class Metric { FirmCount, CashFlow };

std::string_view to_string(Metric m) noexcept;
/// "firm_count" | "cash_flow"; throws DomainError otherwise.
Metric metric_from_string(std::string_view s);

struct BinMetrics {
  HexIndex index;
  LatLon center;
  std::int64_t firm_count = 0;
  Cents cash_flow_cents = 0;
  /// Share of the layer metric per sector, in percent. Falls back to firm
  /// shares when the bin's cash flow is zero.
  std::map<SectorCode, double> sector_breakdown;
  std::optional<std::int64_t> delta_vs_previous_year;

  std::int64_t value(Metric m) const noexcept { return m == Metric::FirmCount ? firm_count : cash_flow_cents; }

  friend bool operator==(const BinMetrics&, const BinMetrics&) = default;
};

/// Firms without coordinates cannot be binned; they are counted here so the
/// layer can be reconciled with dataset totals.
struct LayerMeta {
  std::int64_t total_firms = 0;
  std::int64_t located_firms = 0;
  std::int64_t unlocated_firms = 0;
  Cents total_cash_flow_cents = 0;
  Cents located_cash_flow_cents = 0;

  friend bool operator==(const LayerMeta&, const LayerMeta&) = default;
};

struct HexBinLayer {
  int year = 0;
  int resolution = 0;
  Metric metric = Metric::FirmCount;
  std::vector<BinMetrics> bins;  // ascending (q, r)
  LayerMeta meta;

  const BinMetrics* find(const HexIndex& h) const;

  friend bool operator==(const HexBinLayer&, const HexBinLayer&) = default;
};

/// Bins `firms` (all of one year). Independent of input order.
HexBinLayer aggregate_firms(std::span<const FirmRecord> firms, int year, int resolution, Metric metric);

/// Throws NotFound for a year without firms.
HexBinLayer aggregate_bins(const Dataset& ds, int year, int resolution, Metric metric);

struct DeltaBin {
  HexIndex index;
  LatLon center;
  std::int64_t previous = 0;
  std::int64_t current = 0;
  std::int64_t delta = 0;      // current - previous; the sign picks the colour
  std::int64_t magnitude = 0;  // |delta|; drives the height

  friend bool operator==(const DeltaBin&, const DeltaBin&) = default;
};

struct DeltaLayer {
  int year = 0;
  int previous_year = 0;
  int resolution = 0;
  Metric metric = Metric::FirmCount;
  std::vector<DeltaBin> bins;  // union of both layers, ascending (q, r)

  friend bool operator==(const DeltaLayer&, const DeltaLayer&) = default;
};

/// Bins present in only one layer count as 0 in the other. Throws
/// DomainError when the resolutions differ.
DeltaLayer temporal_delta(const HexBinLayer& current, const HexBinLayer& previous, Metric metric);

/// Fills delta_vs_previous_year on every bin of `current`.
void annotate_deltas(HexBinLayer& current, const HexBinLayer& previous);

struct KeyframeBin {
  HexIndex index;
  LatLon center;
  double value = 0.0;

  friend bool operator==(const KeyframeBin&, const KeyframeBin&) = default;
};

struct KeyframeLayer {
  int resolution = 0;
  double alpha = 0.0;
  Metric metric = Metric::FirmCount;
  std::vector<KeyframeBin> bins;
};

/// value = (1 - alpha) * previous + alpha * current per bin of the union.
/// Throws DomainError for alpha outside [0, 1] or a resolution mismatch.
KeyframeLayer interpolate_keyframes(const HexBinLayer& previous, const HexBinLayer& current,
                                    double alpha, Metric metric);

struct RegionMetrics {
  std::string region_code;
  std::string name;
  std::int64_t firm_count = 0;
  Cents cash_flow_cents = 0;
  std::map<SectorCode, double> sector_breakdown;
  std::optional<double> area_km2;
  std::optional<double> normalized;  // metric / area_km2

  friend bool operator==(const RegionMetrics&, const RegionMetrics&) = default;
};

/// Groups the year's firms by the first `level` segments of their region
/// code. Throws NotFound for an unknown year, DomainError for a level the
/// hierarchy does not have or, when normalizing, a region without an area.
std::vector<RegionMetrics> aggregate_regions(const Dataset& ds, int year, int level, Metric metric,
                                             bool normalize);

/// Same grouping over an explicit firm list.
std::vector<RegionMetrics> aggregate_regions(std::span<const FirmRecord> firms, const RegionTable& regions,
                                             int level, Metric metric, bool normalize);

/// Memo of computed layers keyed by an opaque string; concurrent readers,
/// exclusive writers.
class LayerCache {
 public:
  std::shared_ptr<const HexBinLayer> get_or_compute(const std::string& key,
                                                    const std::function<HexBinLayer()>& compute);
  void clear();
  std::size_t size() const;

 private:
  mutable std::shared_mutex mutex_;
  std::map<std::string, std::shared_ptr<const HexBinLayer>> layers_;
};

}  // namespace econoforge::geo

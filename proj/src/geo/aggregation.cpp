#include "econoforge/geo/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "econoforge/core/errors.hpp"

namespace econoforge::geo {

std::string_view to_string(Metric m) noexcept {
  return m == Metric::FirmCount ? "firm_count" : "cash_flow";
}

Metric metric_from_string(std::string_view s) {
  if (s == "firm_count") return Metric::FirmCount;
  if (s == "cash_flow") return Metric::CashFlow;
  throw DomainError("unknown metric '" + std::string(s) + "' (expected firm_count or cash_flow)");
}

const BinMetrics* HexBinLayer::find(const HexIndex& h) const {
  auto it = std::lower_bound(bins.begin(), bins.end(), h,
                             [](const BinMetrics& b, const HexIndex& k) { return b.index < k; });
  if (it == bins.end() || it->index != h) return nullptr;
  return &*it;
}

namespace {

struct Accumulator {
  std::int64_t firm_count = 0;
  Cents cash_flow = 0;
  std::map<SectorCode, std::pair<std::int64_t, Cents>> by_sector;

  void add(const FirmRecord& f) {
    ++firm_count;
    cash_flow += f.cash_flow_cents;
    auto& s = by_sector[f.sector];
    ++s.first;
    s.second += f.cash_flow_cents;
  }

  std::map<SectorCode, double> breakdown(Metric metric) const {
    std::map<SectorCode, double> out;
    const bool by_cash = metric == Metric::CashFlow && cash_flow != 0;
    const double total = by_cash ? static_cast<double>(cash_flow) : static_cast<double>(firm_count);
    if (total == 0.0) return out;
    for (const auto& [sector, v] : by_sector) {
      const double part = by_cash ? static_cast<double>(v.second) : static_cast<double>(v.first);
      out[sector] = 100.0 * part / total;
    }
    return out;
  }
};

void check_same_resolution(const HexBinLayer& a, const HexBinLayer& b) {
  if (a.resolution != b.resolution) {
    throw DomainError("layers have different resolutions (" + std::to_string(a.resolution) + " and " +
                      std::to_string(b.resolution) + ")");
  }
}

// Walks the union of two sorted bin lists.
template <typename Fn>
void merge_bins(const HexBinLayer& a, const HexBinLayer& b, Fn&& fn) {
  std::size_t i = 0, j = 0;
  while (i < a.bins.size() || j < b.bins.size()) {
    if (j == b.bins.size() || (i < a.bins.size() && a.bins[i].index < b.bins[j].index)) {
      fn(&a.bins[i], nullptr);
      ++i;
    } else if (i == a.bins.size() || b.bins[j].index < a.bins[i].index) {
      fn(nullptr, &b.bins[j]);
      ++j;
    } else {
      fn(&a.bins[i], &b.bins[j]);
      ++i;
      ++j;
    }
  }
}

}  // namespace

HexBinLayer aggregate_firms(std::span<const FirmRecord> firms, int year, int resolution, Metric metric) {
  edge_length_m(resolution);  // validates
  HexBinLayer layer;
  layer.year = year;
  layer.resolution = resolution;
  layer.metric = metric;

  std::map<HexIndex, Accumulator> acc;
  for (const auto& f : firms) {
    ++layer.meta.total_firms;
    layer.meta.total_cash_flow_cents += f.cash_flow_cents;
    if (!f.location) {
      ++layer.meta.unlocated_firms;
      continue;
    }
    ++layer.meta.located_firms;
    layer.meta.located_cash_flow_cents += f.cash_flow_cents;
    acc[bin_point(*f.location, resolution)].add(f);
  }
  layer.bins.reserve(acc.size());
  for (const auto& [index, a] : acc) {
    BinMetrics b;
    b.index = index;
    b.center = hex_center(index);
    b.firm_count = a.firm_count;
    b.cash_flow_cents = a.cash_flow;
    b.sector_breakdown = a.breakdown(metric);
    layer.bins.push_back(std::move(b));
  }
  return layer;
}

HexBinLayer aggregate_bins(const Dataset& ds, int year, int resolution, Metric metric) {
  auto firms = ds.firms_in_year(year);
  if (firms.empty()) throw NotFound("no firms for year " + std::to_string(year));
  return aggregate_firms(firms, year, resolution, metric);
}

DeltaLayer temporal_delta(const HexBinLayer& current, const HexBinLayer& previous, Metric metric) {
  check_same_resolution(current, previous);
  DeltaLayer out;
  out.year = current.year;
  out.previous_year = previous.year;
  out.resolution = current.resolution;
  out.metric = metric;
  merge_bins(current, previous, [&](const BinMetrics* now, const BinMetrics* before) {
    DeltaBin d;
    d.index = now ? now->index : before->index;
    d.center = now ? now->center : before->center;
    d.current = now ? now->value(metric) : 0;
    d.previous = before ? before->value(metric) : 0;
    d.delta = d.current - d.previous;
    d.magnitude = d.delta < 0 ? -d.delta : d.delta;
    out.bins.push_back(d);
  });
  return out;
}

void annotate_deltas(HexBinLayer& current, const HexBinLayer& previous) {
  check_same_resolution(current, previous);
  for (auto& b : current.bins) {
    const BinMetrics* before = previous.find(b.index);
    b.delta_vs_previous_year = b.value(current.metric) - (before ? before->value(current.metric) : 0);
  }
}

KeyframeLayer interpolate_keyframes(const HexBinLayer& previous, const HexBinLayer& current,
                                    double alpha, Metric metric) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("alpha must be in [0, 1]");
  check_same_resolution(previous, current);
  KeyframeLayer out;
  out.resolution = current.resolution;
  out.alpha = alpha;
  out.metric = metric;
  merge_bins(previous, current, [&](const BinMetrics* before, const BinMetrics* now) {
    KeyframeBin k;
    k.index = now ? now->index : before->index;
    k.center = now ? now->center : before->center;
    const double a = before ? static_cast<double>(before->value(metric)) : 0.0;
    const double b = now ? static_cast<double>(now->value(metric)) : 0.0;
    k.value = (1.0 - alpha) * a + alpha * b;
    out.bins.push_back(k);
  });
  return out;
}

std::vector<RegionMetrics> aggregate_regions(std::span<const FirmRecord> firms, const RegionTable& regions,
                                             int level, Metric metric, bool normalize) {
  if (level < 1) throw DomainError("region level must be >= 1");
  if (!regions.empty()) {
    if (!regions.has_level(level)) {
      throw DomainError("region level " + std::to_string(level) + " does not exist in the region table");
    }
  } else {
    int deepest = 0;
    for (const auto& f : firms) deepest = std::max(deepest, region_level(f.region_code));
    if (level > deepest) {
      throw DomainError("region level " + std::to_string(level) + " does not exist in the region hierarchy");
    }
  }

  std::map<std::string, Accumulator> acc;
  for (const auto& f : firms) acc[region_prefix(f.region_code, level)].add(f);

  std::vector<RegionMetrics> out;
  out.reserve(acc.size());
  for (const auto& [code, a] : acc) {
    RegionMetrics m;
    m.region_code = code;
    m.firm_count = a.firm_count;
    m.cash_flow_cents = a.cash_flow;
    m.sector_breakdown = a.breakdown(metric);
    if (const RegionInfo* info = regions.find(code)) {
      m.name = info->name;
      m.area_km2 = info->area_km2;
    }
    if (normalize) {
      if (!m.area_km2 || !(*m.area_km2 > 0.0)) {
        throw DomainError("region '" + code + "' has no positive area_km2; cannot normalize");
      }
      const double value = static_cast<double>(metric == Metric::FirmCount ? m.firm_count : m.cash_flow_cents);
      m.normalized = value / *m.area_km2;
    }
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<RegionMetrics> aggregate_regions(const Dataset& ds, int year, int level, Metric metric,
                                             bool normalize) {
  auto firms = ds.firms_in_year(year);
  if (firms.empty()) throw NotFound("no firms for year " + std::to_string(year));
  return aggregate_regions(firms, ds.regions, level, metric, normalize);
}

std::shared_ptr<const HexBinLayer> LayerCache::get_or_compute(const std::string& key,
                                                              const std::function<HexBinLayer()>& compute) {
  {
    std::shared_lock lock(mutex_);
    if (auto it = layers_.find(key); it != layers_.end()) return it->second;
  }
  auto fresh = std::make_shared<const HexBinLayer>(compute());
  std::unique_lock lock(mutex_);
  return layers_.emplace(key, fresh).first->second;
}

void LayerCache::clear() {
  std::unique_lock lock(mutex_);
  layers_.clear();
}

std::size_t LayerCache::size() const {
  std::shared_lock lock(mutex_);
  return layers_.size();
}

}  // namespace econoforge::geo

#include "econoforge/store/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "econoforge/core/errors.hpp"

namespace econoforge::store {

namespace {

// Order in which sections are handed out, biggest sectors first.
constexpr std::array<std::pair<const char*, const char*>, 21> kSections{{
    {"C", "Manufacturing"},
    {"A", "Agriculture, forestry and fishing"},
    {"G", "Wholesale and retail trade"},
    {"F", "Construction"},
    {"H", "Transportation and storage"},
    {"M", "Professional, scientific and technical activities"},
    {"J", "Information and communication"},
    {"K", "Financial and insurance activities"},
    {"I", "Accommodation and food service activities"},
    {"N", "Administrative and support service activities"},
    {"D", "Electricity, gas, steam and air conditioning supply"},
    {"E", "Water supply, sewerage and waste management"},
    {"L", "Real estate activities"},
    {"Q", "Human health and social work activities"},
    {"B", "Mining and quarrying"},
    {"P", "Education"},
    {"R", "Arts, entertainment and recreation"},
    {"S", "Other service activities"},
    {"O", "Public administration and defence"},
    {"T", "Activities of households as employers"},
    {"U", "Activities of extraterritorial organisations"},
}};

struct State {
  const char* name;
  double area_km2;
};
constexpr std::array<State, 9> kStates{{{"Burgenland", 3965.0},
                                        {"Kaernten", 9536.0},
                                        {"Niederoesterreich", 19180.0},
                                        {"Oberoesterreich", 11982.0},
                                        {"Salzburg", 7155.0},
                                        {"Steiermark", 16401.0},
                                        {"Tirol", 12648.0},
                                        {"Vorarlberg", 2602.0},
                                        {"Wien", 415.0}}};

constexpr double kMinLat = 46.5, kMaxLat = 48.9, kMinLon = 9.6, kMaxLon = 17.1;

// The standard distributions are implementation-defined; these are not, so a
// seed gives the same dataset with any standard library.
class Draw {
 public:
  explicit Draw(std::uint64_t seed) : rng_(seed) {}

  double unit() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }
  std::uint64_t below(std::uint64_t n) { return rng_() % n; }
  double normal() {
    const double u1 = 1.0 - unit();  // (0, 1]
    const double u2 = unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 rng_;
};

Cents scale(Cents v, double f) { return static_cast<Cents>(std::llround(static_cast<double>(v) * f)); }

std::string pad(int v, int width) {
  auto s = std::to_string(v);
  return std::string(static_cast<std::size_t>(std::max(0, width - static_cast<int>(s.size()))), '0') + s;
}

struct District {
  std::string code;
  LatLon center;
  double factor;  // year-over-year scale of every firm in it
};

}  // namespace

void check_spec(const SyntheticSpec& spec) {
  if (spec.firms < 1 || spec.firms > 1'000'000) throw DomainError("firms must be in [1, 1000000]");
  if (spec.sectors < 1 || spec.sectors > static_cast<int>(kSections.size())) {
    throw DomainError("sectors must be in [1, " + std::to_string(kSections.size()) + "]");
  }
  if (spec.districts < 1 || spec.districts > 9 * 99) throw DomainError("districts must be in [1, 891]");
  if (spec.years < 1 || spec.years > 50) throw DomainError("years must be in [1, 50]");
  if (spec.first_year < 1900 || spec.first_year > 2100) throw DomainError("first_year must be in [1900, 2100]");
  if (!(spec.unlocated_share >= 0.0 && spec.unlocated_share < 1.0)) {
    throw DomainError("unlocated_share must be in [0, 1)");
  }
}

Dataset generate_synthetic(const SyntheticSpec& spec) {
  check_spec(spec);
  Draw draw(spec.seed);
  Dataset ds;
  ds.dataset_id = spec.dataset_id.empty() ? "synthetic-" + std::to_string(spec.seed) : spec.dataset_id;
  ds.manifest.seed = spec.seed;

  for (int i = 0; i < spec.sectors; ++i) ds.sectors.add(SectorCode(kSections[i].first), kSections[i].second);

  // Regions: country, all nine states, districts spread over the states.
  ds.regions.add(RegionInfo{"AT", 1, "Austria", 83879.0, LatLon{47.6, 14.1}});
  for (int s = 0; s < 9; ++s) {
    ds.regions.add(RegionInfo{"AT/" + std::to_string(s + 1), 2, kStates[s].name, kStates[s].area_km2, std::nullopt});
  }
  std::vector<District> districts;
  std::array<int, 9> per_state{};
  for (int d = 0; d < spec.districts; ++d) {
    const int state = d % 9 + 1;
    const int n = ++per_state[state - 1];
    District dist;
    dist.code = "AT/" + std::to_string(state) + "/" + std::to_string(state) + pad(n, 2);
    dist.center = LatLon{draw.uniform(kMinLat + 0.2, kMaxLat - 0.2), draw.uniform(kMinLon + 0.2, kMaxLon - 0.2)};
    const bool grows = draw.below(2) == 0;
    dist.factor = grows ? draw.uniform(1.05, 1.25) : draw.uniform(0.75, 0.95);
    const double area = std::round(draw.uniform(150.0, 1500.0) * 10.0) / 10.0;
    ds.regions.add(RegionInfo{dist.code, 3, "District " + std::to_string(state) + pad(n, 2), area, dist.center});
    districts.push_back(std::move(dist));
  }
  // Make sure both trends are present whenever there are two districts.
  if (districts.size() > 1) {
    const bool all_up = std::all_of(districts.begin(), districts.end(), [](const District& d) { return d.factor > 1.0; });
    const bool all_down = std::all_of(districts.begin(), districts.end(), [](const District& d) { return d.factor < 1.0; });
    if (all_up || all_down) districts.back().factor = 2.0 - districts.back().factor;
  }
  if (spec.years > 1) {
    for (const auto& d : districts) ds.manifest.planted_trends[d.code] = d.factor > 1.0 ? "growth" : "decline";
  }

  // Base-year firms.
  const int id_width = std::max(4, static_cast<int>(std::to_string(spec.firms).size()));
  std::vector<FirmRecord> base;
  std::vector<std::size_t> district_of;
  for (int i = 0; i < spec.firms; ++i) {
    FirmRecord f;
    f.firm_id = "F" + pad(i + 1, id_width);
    f.name = "Firm " + pad(i + 1, id_width);
    // The first firms cover every sector once; the rest favour the front of
    // the section list.
    int sector = i;
    if (i >= spec.sectors) {
      const double u = draw.unit();
      sector = std::min(spec.sectors - 1, static_cast<int>(u * u * spec.sectors));
    }
    f.sector = SectorCode(kSections[sector].first);
    const std::size_t d = draw.below(districts.size());
    district_of.push_back(d);
    f.region_code = districts[d].code;
    if (draw.unit() >= spec.unlocated_share) {
      const double lat = districts[d].center.lat + 0.08 * draw.normal();
      const double lon = districts[d].center.lon + 0.12 * draw.normal();
      f.location = LatLon{std::clamp(lat, kMinLat, kMaxLat), std::clamp(lon, kMinLon, kMaxLon)};
    }
    f.year = spec.first_year;
    const double revenue = std::exp(std::log(2e8) + 1.1 * draw.normal());
    f.revenue_cents = std::clamp<Cents>(static_cast<Cents>(revenue), 1'000'000, 1'000'000'000'000);
    f.expenses_cents = scale(f.revenue_cents, draw.uniform(0.6, 0.95));
    f.employee_expenses_cents = scale(f.expenses_cents, draw.uniform(0.15, 0.45));
    f.cash_flow_cents = compute_cash_flow(f.revenue_cents, f.expenses_cents);
    base.push_back(std::move(f));
  }

  // Later years: same firms, scaled by the district trend with a little
  // per-firm noise that never flips the direction.
  std::vector<FirmRecord> current = base;
  for (int y = 0; y < spec.years; ++y) {
    if (y > 0) {
      for (std::size_t i = 0; i < current.size(); ++i) {
        auto& f = current[i];
        const double factor = districts[district_of[i]].factor * draw.uniform(0.99, 1.01);
        f.year = spec.first_year + y;
        f.revenue_cents = scale(f.revenue_cents, factor);
        f.expenses_cents = scale(f.expenses_cents, factor);
        f.employee_expenses_cents = scale(f.employee_expenses_cents, factor);
        f.cash_flow_cents = compute_cash_flow(f.revenue_cents, f.expenses_cents);
      }
    }
    ds.firms.insert(ds.firms.end(), current.begin(), current.end());

    // IO table of this year.
    std::map<SectorCode, Cents> expenses;
    std::map<SectorCode, int> counts;
    for (const auto& f : current) {
      expenses[f.sector] += f.expenses_cents;
      counts[f.sector] += 1;
    }
    IOTable table;
    table.year = spec.first_year + y;
    for (const auto& [from, spent] : expenses) {
      std::vector<std::pair<SectorCode, double>> targets;
      for (const auto& [to, n] : counts) {
        if (from == to && n < 2) continue;  // a single firm cannot trade with itself
        if (draw.unit() < 0.7) targets.emplace_back(to, draw.uniform(0.2, 1.0));
      }
      if (targets.empty()) continue;
      double total_w = 0.0;
      for (const auto& t : targets) total_w += t.second;
      const double budget = static_cast<double>(spent) * draw.uniform(0.25, 0.45);
      for (const auto& [to, w] : targets) {
        const auto amount = static_cast<Cents>(std::floor(budget * w / total_w));
        if (amount > 0) table.entries[SectorPair{from, to}] = amount;
      }
    }
    ds.io_tables[table.year] = std::move(table);
  }

  finalize_dataset(ds);
  recompute_manifest_totals(ds);
  return ds;
}

std::string io_table_rules(const Dataset& ds, int year) {
  std::string out;
  auto it = ds.io_tables.find(year);
  if (it == ds.io_tables.end()) return out;
  for (const auto& [pair, amount] : it->second.entries) {
    out += "sector_total " + pair.from.str() + " -> " + pair.to.str() + " = " + std::to_string(amount) + "\n";
  }
  return out;
}

}  // namespace econoforge::store

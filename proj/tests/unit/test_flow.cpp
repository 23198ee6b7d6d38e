#include <doctest.h>

#include <random>

#include "econoforge/core/errors.hpp"
#include "econoforge/dsl/parser.hpp"
#include "econoforge/flow/flows.hpp"
#include "econoforge/inference/validator.hpp"
#include "oracles.hpp"

using namespace econoforge;
using namespace econoforge::flow;

namespace {

struct Fixture {
  std::vector<FirmRecord> firms;
  TransactionModel model;
};

Fixture random_fixture(std::uint64_t seed, int n_firms, int n_edges) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> lat(47.0, 48.5), lon(13.0, 16.5);
  Fixture fx;
  for (int i = 0; i < n_firms; ++i) {
    std::optional<LatLon> loc;
    if (rng() % 10) loc = LatLon{lat(rng), lon(rng)};
    fx.firms.push_back(oracle::firm("h" + std::to_string(i), rng() % 2 ? "A" : "C", 100, 100, 2014, loc));
  }
  std::map<std::pair<std::string, std::string>, Cents> edges;
  for (int k = 0; k < n_edges; ++k) {
    auto a = rng() % n_firms, b = rng() % n_firms;
    if (a == b) continue;
    edges[{fx.firms[a].firm_id, fx.firms[b].firm_id}] = 1 + static_cast<Cents>(rng() % 100000);
  }
  for (const auto& [k, v] : edges) fx.model.edges.push_back({k.first, k.second, v});
  fx.model.dataset_id = "ds";
  return fx;
}

}  // namespace

TEST_CASE("single edge from the selected firm") {
  std::vector<FirmRecord> firms{oracle::firm("a", "A", 1, 1, 2014, LatLon{48.2, 16.3}),
                                oracle::firm("b", "C", 1, 1, 2014, LatLon{47.0, 15.4})};
  TransactionModel m;
  m.edges = {{"a", "b", 500}};
  auto sel = geo::bin_point(48.2, 16.3, 6);
  auto r = flows_for_selection(m, firms, sel);
  REQUIRE(r.arcs.size() == 1);
  CHECK(r.arcs[0].direction == FlowDirection::Outward);
  CHECK(r.arcs[0].from_bin == sel);
  CHECK(r.arcs[0].to_bin == geo::bin_point(47.0, 15.4, 6));
  CHECK(r.arcs[0].amount_cents == 500);
  CHECK(r.arcs[0].relative_weight == 1.0);
  CHECK(r.stats.pct_outward == 100.0);
  CHECK(r.stats.pct_inward == 0.0);
  CHECK(r.stats.overall_flow_cents == 500);
  CHECK(to_string(FlowDirection::Outward) == "out-of-selection");
}

TEST_CASE("no incident edges") {
  std::vector<FirmRecord> firms{oracle::firm("a", "A", 1, 1, 2014, LatLon{48.2, 16.3}),
                                oracle::firm("b", "C", 1, 1, 2014, LatLon{47.0, 15.4}),
                                oracle::firm("c", "C", 1, 1, 2014, LatLon{46.0, 14.4})};
  TransactionModel m;
  m.edges = {{"b", "c", 5}};
  auto r = flows_for_selection(m, firms, geo::bin_point(48.2, 16.3, 6));
  CHECK(r.arcs.empty());
  CHECK(r.stats == SelectionStats{});
}

TEST_CASE("unknown bin") {
  std::vector<FirmRecord> firms{oracle::firm("a", "A", 1, 1, 2014, LatLon{48.2, 16.3})};
  CHECK_THROWS_AS(flows_for_selection(TransactionModel{}, firms, geo::HexIndex{6, 0, 0}), NotFound);
}

TEST_CASE("internal edges are excluded unless asked for") {
  std::vector<FirmRecord> firms{oracle::firm("a", "A", 1, 1, 2014, LatLon{48.2, 16.3}),
                                oracle::firm("b", "C", 1, 1, 2014, LatLon{48.2, 16.3}),
                                oracle::firm("c", "C", 1, 1, 2014, LatLon{46.0, 14.4}),
                                oracle::firm("d", "C", 1, 1, 2014, std::nullopt)};
  TransactionModel m;
  m.edges = {{"a", "b", 10}, {"c", "a", 30}, {"b", "d", 20}};
  auto sel = geo::bin_point(48.2, 16.3, 10);
  auto plain = flows_for_selection(m, firms, sel);
  CHECK(plain.stats.inflow_cents == 30);
  CHECK(plain.stats.outflow_cents == 20);
  CHECK(plain.stats.internal_cents == 10);
  CHECK(plain.stats.pct_inward == 60.0);
  CHECK(plain.stats.pct_outward == 40.0);
  CHECK(plain.arcs.size() == 2);
  // the unlocated counterparty gets an arc with an empty bin
  bool saw_null = false;
  for (const auto& a : plain.arcs) saw_null = saw_null || !a.to_bin.has_value();
  CHECK(saw_null);

  auto with = flows_for_selection(m, firms, sel, FlowOptions{true});
  CHECK(with.stats.inflow_cents == 40);
  CHECK(with.stats.outflow_cents == 30);
  CHECK(with.arcs.size() == 4);
}

TEST_CASE("arc sums equal naive per-edge accumulation") {
  auto fx = random_fixture(12, 120, 900);
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 40; ++trial) {
    const auto& pick = fx.firms[rng() % fx.firms.size()];
    if (!pick.location) continue;
    int res = static_cast<int>(rng() % 9);
    auto sel = geo::bin_point(*pick.location, res);
    auto r = flows_for_selection(fx.model, fx.firms, sel);

    std::set<std::string> inside;
    for (const auto& f : fx.firms) {
      if (f.location && geo::bin_point(*f.location, res) == sel) inside.insert(f.firm_id);
    }
    Cents in = 0, out = 0;
    std::map<std::pair<int, std::string>, Cents> naive;  // (direction, other bin)
    std::map<std::string, const FirmRecord*> by_id;
    for (const auto& f : fx.firms) by_id[f.firm_id] = &f;
    auto bin_text = [&](const std::string& id) {
      const auto* f = by_id.at(id);
      return f->location ? geo::to_string(geo::bin_point(*f->location, res)) : std::string("-");
    };
    for (const auto& e : fx.model.edges) {
      bool s = inside.contains(e.src), d = inside.contains(e.dst);
      if (s && !d) {
        out += e.amount_cents;
        naive[{0, bin_text(e.dst)}] += e.amount_cents;
      } else if (d && !s) {
        in += e.amount_cents;
        naive[{1, bin_text(e.src)}] += e.amount_cents;
      }
    }
    CHECK(r.stats.inflow_cents == in);
    CHECK(r.stats.outflow_cents == out);
    std::map<std::pair<int, std::string>, Cents> got;
    Cents arc_in = 0, arc_out = 0;
    double max_w = 0;
    for (const auto& a : r.arcs) {
      bool outward = a.direction == FlowDirection::Outward;
      const auto& other = outward ? a.to_bin : a.from_bin;
      got[{outward ? 0 : 1, other ? geo::to_string(*other) : "-"}] += a.amount_cents;
      (outward ? arc_out : arc_in) += a.amount_cents;
      max_w = std::max(max_w, a.relative_weight);
      CHECK(a.relative_weight > 0.0);
      CHECK(a.relative_weight <= 1.0);
      CHECK((outward ? a.from_bin : a.to_bin) == sel);
    }
    CHECK(got == naive);
    CHECK(arc_in == r.stats.inflow_cents);
    CHECK(arc_out == r.stats.outflow_cents);
    if (!r.arcs.empty()) CHECK(max_w == 1.0);
    if (r.stats.overall_flow_cents > 0) CHECK(r.stats.pct_inward + r.stats.pct_outward == 100.0);
  }
}

TEST_CASE("stats depend only on the selected firm set") {
  auto fx = random_fixture(14, 80, 500);
  std::set<FirmId> selected;
  for (std::size_t i = 0; i < fx.firms.size(); i += 7) selected.insert(fx.firms[i].firm_id);
  auto base = flows_for_firms(fx.model, fx.firms, selected, 0).stats;
  for (int res = 1; res <= geo::kMaxResolution; ++res) {
    CHECK(flows_for_firms(fx.model, fx.firms, selected, res).stats == base);
  }
}

TEST_CASE("model membership") {
  CHECK(model_membership(TransactionModel{}).empty());
  TransactionModel m;
  m.edges = {{"a", "b", 1}};
  CHECK(model_membership(m) == std::set<FirmId>{"a", "b"});
  auto fx = random_fixture(15, 60, 40);
  std::set<FirmId> expected;
  for (const auto& e : fx.model.edges) {
    expected.insert(e.src);
    expected.insert(e.dst);
  }
  CHECK(model_membership(fx.model) == expected);
}

TEST_CASE("compare models") {
  std::vector<FirmRecord> firms{oracle::firm("a", "A", 1, 1), oracle::firm("b", "C", 1, 1),
                                oracle::firm("c", "C", 1, 1)};
  TransactionModel x, y;
  x.dataset_id = y.dataset_id = "ds";
  SUBCASE("identical models") {
    x.edges = {{"a", "b", 3}};
    CHECK(compare_models(x, firms, x, firms).empty());
  }
  SUBCASE("disjoint single edges") {
    x.edges = {{"a", "b", 3}};
    y.edges = {{"b", "c", 4}};
    auto d = compare_models(x, firms, y, firms);
    CHECK(d.additions == std::vector<Edge>{{"b", "c", 4}});
    CHECK(d.removals == std::vector<Edge>{{"a", "b", 3}});
    auto back = compare_models(y, firms, x, firms);
    CHECK(back.additions == d.removals);
    CHECK(back.removals == d.additions);
  }
  SUBCASE("dataset mismatch") {
    y.dataset_id = "other";
    CHECK_THROWS_AS(compare_models(x, firms, y, firms), DomainError);
  }
  SUBCASE("roll-up equals the difference of validator sector sums") {
    auto fx = random_fixture(16, 40, 200);
    auto fy = random_fixture(17, 40, 200);
    auto d = compare_models(fx.model, fx.firms, fy.model, fx.firms);
    auto cs = dsl::parse_rules(
        "sector_total A -> A = 0\nsector_total A -> C = 0\nsector_total C -> A = 0\nsector_total C -> C = 0");
    auto ra = inference::validate(fx.model, fx.firms, cs);
    auto rb = inference::validate(fy.model, fx.firms, cs);
    std::map<SectorPair, Cents> expected;
    for (std::size_t i = 0; i < ra.sector_pairs.size(); ++i) {
      Cents delta = rb.sector_pairs[i].achieved_cents - ra.sector_pairs[i].achieved_cents;
      if (delta) expected[ra.sector_pairs[i].pair] = delta;
    }
    std::map<SectorPair, Cents> got;
    for (const auto& s : d.sector_pairs) got[s.pair] = s.delta;
    CHECK(got == expected);
    std::size_t shared = 0;
    for (const auto& c : d.changes) shared += c.delta != 0;
    CHECK(shared == d.changes.size());
  }
}

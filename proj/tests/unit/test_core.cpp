#include <doctest.h>

#include "econoforge/core/dataset.hpp"
#include "econoforge/core/errors.hpp"
#include "econoforge/core/hash.hpp"
#include "econoforge/core/types.hpp"
#include "oracles.hpp"

using namespace econoforge;

TEST_CASE("sector codes are short uppercase identifiers") {
  CHECK(SectorCode::is_valid("A"));
  CHECK(SectorCode::is_valid("C10"));
  CHECK_FALSE(SectorCode::is_valid(""));
  CHECK_FALSE(SectorCode::is_valid("a"));
  CHECK_FALSE(SectorCode::is_valid("1A"));
  CHECK_FALSE(SectorCode::is_valid("ABCDEFGHI"));
  CHECK_THROWS_AS(SectorCode("x"), DomainError);
  CHECK(SectorCode("C") < SectorCode("D"));
}

TEST_CASE("firm invariants") {
  auto f = oracle::firm("f1", "C", 100, 40, 2014, LatLon{48.2, 16.37});
  CHECK_FALSE(check_firm(f).has_value());

  SUBCASE("latitude range") {
    f.location = LatLon{90.5, 0};
    CHECK(check_firm(f).has_value());
  }
  SUBCASE("longitude range") {
    f.location = LatLon{0, -180.01};
    CHECK(check_firm(f).has_value());
  }
  SUBCASE("employee expenses are a domain bound") {
    f.employee_expenses_cents = -1;
    auto err = check_firm(f);
    REQUIRE(err.has_value());
    CHECK(err->find("domain bound") != std::string::npos);
  }
  SUBCASE("cash flow is revenue plus spent expenses") {
    f.cash_flow_cents = 60;
    CHECK(check_firm(f).has_value());
    CHECK(compute_cash_flow(100, 40) == 140);
  }
  SUBCASE("missing coordinates are allowed") {
    f.location.reset();
    CHECK_FALSE(check_firm(f).has_value());
  }
}

TEST_CASE("cash flow overflow is rejected") {
  CHECK_THROWS_AS(compute_cash_flow(INT64_MAX, 1), DomainError);
}

TEST_CASE("IO table checks") {
  SectorRegistry reg;
  reg.add(SectorCode("A"));
  reg.add(SectorCode("C"));
  IOTable t;
  t.year = 2014;
  t.entries[{SectorCode("C"), SectorCode("A")}] = 3200000000000;
  CHECK_NOTHROW(check_io_table(t, reg));
  t.entries[{SectorCode("C"), SectorCode("B")}] = 1;
  CHECK_THROWS_AS(check_io_table(t, reg), DomainError);
  t.entries.erase({SectorCode("C"), SectorCode("B")});
  t.entries[{SectorCode("A"), SectorCode("C")}] = -5;
  CHECK_THROWS_AS(check_io_table(t, reg), DomainError);
}

TEST_CASE("normalize_edges sorts and rejects malformed graphs") {
  std::vector<Edge> e{{"b", "a", 3}, {"a", "b", 2}};
  normalize_edges(e);
  CHECK(e.front().src == "a");

  std::vector<Edge> self{{"a", "a", 1}};
  CHECK_THROWS_AS(normalize_edges(self), DomainError);
  std::vector<Edge> dup{{"a", "b", 1}, {"a", "b", 2}};
  CHECK_THROWS_AS(normalize_edges(dup), DomainError);
  std::vector<Edge> zero{{"a", "b", 0}};
  CHECK_THROWS_AS(normalize_edges(zero), DomainError);
}

TEST_CASE("provenance strings") {
  for (auto p : {Provenance::HeuristicSolver, Provenance::ExternalSmt, Provenance::Imported}) {
    CHECK(provenance_from_string(to_string(p)) == p);
  }
  CHECK(to_string(Provenance::ExternalSmt) == "external-smt");
  CHECK_THROWS(provenance_from_string("magic"));
}

TEST_CASE("FirmIndex orders by id and finds firms") {
  std::vector<FirmRecord> firms{oracle::firm("z", "A", 1, 1), oracle::firm("b", "A", 1, 1),
                                oracle::firm("m", "C", 1, 1)};
  FirmIndex idx(firms);
  REQUIRE(idx.size() == 3);
  CHECK(idx.at(0).firm_id == "b");
  CHECK(idx.at(2).firm_id == "z");
  CHECK(idx.find("m") == std::optional<std::size_t>(1));
  CHECK_FALSE(idx.find("q").has_value());
  CHECK(idx.get("z") == &firms[0]);

  std::vector<FirmRecord> dup{oracle::firm("a", "A", 1, 1), oracle::firm("a", "A", 1, 1)};
  CHECK_THROWS_AS(FirmIndex{dup}, DomainError);
}

TEST_CASE("region codes") {
  CHECK(region_level("AT") == 1);
  CHECK(region_level("AT/9/901") == 3);
  CHECK(region_prefix("AT/9/901", 2) == "AT/9");
  CHECK(region_prefix("AT/9", 5) == "AT/9");
}

TEST_CASE("dataset summary") {
  Dataset ds;
  SUBCASE("empty dataset") {
    auto s = dataset_summary(ds);
    CHECK(s.years.empty());
    CHECK(s.firm_counts.empty());
  }
  SUBCASE("one firm") {
    ds.sectors.add(SectorCode("C"));
    ds.firms.push_back(oracle::firm("f1", "C", 10, 5));
    finalize_dataset(ds);
    auto s = dataset_summary(ds);
    CHECK(s.years == std::vector<int>{2014});
    CHECK(s.firm_counts.at(2014) == 1);
    CHECK(s.cash_flow_totals.at(2014) == 15);
  }
  SUBCASE("counts equal direct tallies") {
    ds.sectors.add(SectorCode("A"));
    ds.sectors.add(SectorCode("C"));
    for (int i = 0; i < 7; ++i) {
      ds.firms.push_back(oracle::firm("f" + std::to_string(i), i % 2 ? "A" : "C", i * 10, i, 2014 + i % 3));
    }
    finalize_dataset(ds);
    auto s = dataset_summary(ds);
    CHECK(s.years == std::vector<int>{2014, 2015, 2016});
    std::map<int, std::int64_t> counts;
    std::map<int, Cents> totals;
    for (const auto& f : ds.firms) {
      counts[f.year]++;
      totals[f.year] += f.revenue_cents + f.expenses_cents;
    }
    CHECK(s.firm_counts == counts);
    CHECK(s.cash_flow_totals == totals);
    CHECK(ds.firms_in_year(2015).size() == static_cast<std::size_t>(counts[2015]));
    CHECK(ds.previous_year(2016) == std::optional<int>(2015));
    CHECK_FALSE(ds.previous_year(2014).has_value());
  }
}

TEST_CASE("finalize_dataset rejects bad data") {
  Dataset ds;
  ds.sectors.add(SectorCode("C"));
  ds.firms.push_back(oracle::firm("f1", "C", 10, 5));
  SUBCASE("duplicate firm-year") {
    ds.firms.push_back(oracle::firm("f1", "C", 11, 5));
    CHECK_THROWS_AS(finalize_dataset(ds), DomainError);
  }
  SUBCASE("unknown sector") {
    ds.firms.push_back(oracle::firm("f2", "D", 11, 5));
    CHECK_THROWS_AS(finalize_dataset(ds), DomainError);
  }
  SUBCASE("unknown region when a table is present") {
    ds.regions.add(RegionInfo{"AT", 1, "Austria", 83879.0, std::nullopt});
    CHECK_THROWS_AS(finalize_dataset(ds), DomainError);
  }
}

TEST_CASE("hash digests match published test vectors") {
  CHECK(sha1_hex("abc") == "a9993e364706816aba3e25717850c26c9cd0d89d");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

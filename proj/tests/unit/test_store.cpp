#include <doctest.h>

#include <filesystem>
#include <random>
#include <set>

#include "econoforge/core/errors.hpp"
#include "econoforge/core/hash.hpp"
#include "econoforge/dsl/parser.hpp"
#include "econoforge/inference/solver.hpp"
#include "econoforge/inference/validator.hpp"
#include "econoforge/store/csv.hpp"
#include "econoforge/store/dataset_dir.hpp"
#include "econoforge/store/ingest.hpp"
#include "econoforge/store/model_io.hpp"
#include "econoforge/store/synthetic.hpp"
#include "oracles.hpp"

using namespace econoforge;
using namespace econoforge::store;

namespace {

const std::string kHeader =
    "firm_id,name,lat,lon,sector,region_code,year,revenue_cents,expenses_cents,employee_expenses_cents,"
    "cash_flow_cents\n";

struct TempDir {
  fs::path path;
  TempDir() {
    static int n = 0;
    std::random_device rd;
    path = fs::temp_directory_path() /
           ("ef-store-" + std::to_string(rd()) + "-" + std::to_string(n++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

std::map<std::string, std::string> dir_checksums(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = sha256_hex(read_file(e.path()));
  }
  return out;
}

}  // namespace

TEST_CASE("csv reader handles quoting") {
  auto rows = parse_csv("a,\"b,c\",\"say \"\"hi\"\"\"\r\n\n\"multi\nline\",,x\n");
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].line == 1);
  CHECK(rows[0].fields == std::vector<std::string>{"a", "b,c", "say \"hi\""});
  CHECK(rows[1].line == 3);
  CHECK(rows[1].fields == std::vector<std::string>{"multi\nline", "", "x"});

  CHECK(parse_csv("\xEF\xBB\xBFid\n1").at(0).fields == std::vector<std::string>{"id"});
  CHECK(parse_csv("").empty());
  CHECK(parse_csv("\"\",\"\"\n").at(0).fields == std::vector<std::string>{"", ""});
  CHECK(parse_csv("a,").at(0).fields == std::vector<std::string>{"a", ""});
  CHECK_THROWS_AS(parse_csv("\"open"), ParseError);
  CHECK_THROWS_AS(parse_csv("\"a\"b"), ParseError);
  CHECK_THROWS_AS(parse_csv("a\"b"), ParseError);
}

TEST_CASE("csv writer output parses back to the same fields") {
  std::mt19937_64 rng(3);
  const std::string alphabet = "ab,\"\n\r x";
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<std::vector<std::string>> table;
    std::string text;
    const std::size_t width = 1 + rng() % 4;
    for (int r = 0; r < 5; ++r) {
      std::vector<std::string> row;
      for (std::size_t c = 0; c < width; ++c) {
        std::string f;
        for (std::size_t k = rng() % 5; k > 0; --k) f.push_back(alphabet[rng() % alphabet.size()]);
        row.push_back(f);
      }
      // A row of one empty field is an empty line and would be dropped.
      if (width == 1 && row[0].empty()) row[0] = "z";
      table.push_back(row);
      text += csv_line(row);
    }
    auto parsed = parse_csv(text);
    REQUIRE(parsed.size() == table.size());
    for (std::size_t i = 0; i < table.size(); ++i) CHECK(parsed[i].fields == table[i]);
  }
}

TEST_CASE("ingest_firms") {
  SUBCASE("empty file with header") {
    auto r = ingest_firms(kHeader);
    CHECK(r.records.empty());
    CHECK(r.errors.empty());
  }
  SUBCASE("missing or wrong header") {
    CHECK_THROWS_AS(ingest_firms(""), ParseError);
    CHECK_THROWS_AS(ingest_firms("firm_id,name\n"), ParseError);
  }
  SUBCASE("negative employee expenses are rejected citing the bound") {
    auto r = ingest_firms(kHeader + "f1,Acme,48.2,16.3,C,AT/9/901,2014,100,50,-1,\n");
    CHECK(r.records.empty());
    REQUIRE(r.errors.size() == 1);
    CHECK(r.errors[0].line == 2);
    CHECK(r.errors[0].message.find("employee_expenses_cents must be non-negative") != std::string::npos);
  }
  SUBCASE("partial accept keeps good rows and reports line numbers") {
    auto r = ingest_firms(kHeader +
                          "f1,Acme,48.2,16.3,C,AT/9/901,2014,100,50,10,150\n"
                          "f2,Beta,48.2,,C,AT/9/901,2014,100,50,10,\n"
                          "f3,\"Gamma, Ltd\",,,A,AT/9/901,2014,7,3,0,\n"
                          "f4,Delta,48.2,16.3,C,AT/9/901,2014,100,50,10,999\n"
                          "f5,Eps,48.2,16.3,c,AT/9/901,2014,100,50,10,\n"
                          "f1,Dup,48.2,16.3,C,AT/9/901,2014,1,1,0,\n"
                          "f1,Next,48.2,16.3,C,AT/9/901,2015,1,1,0,\n"
                          "f6,Short,1,2\n"
                          "f7,Abc,91,0,C,AT/9/901,2014,1,1,0,\n");
    REQUIRE(r.records.size() == 3);
    CHECK(r.records[0].cash_flow_cents == 150);
    CHECK(r.records[1].name == "Gamma, Ltd");
    CHECK(!r.records[1].location);
    CHECK(r.records[1].cash_flow_cents == 10);
    CHECK(r.records[2].year == 2015);
    CHECK(r.lines == std::vector<std::size_t>{2, 4, 8});
    std::vector<std::size_t> bad;
    for (const auto& e : r.errors) bad.push_back(e.line);
    CHECK(bad == std::vector<std::size_t>{3, 5, 6, 7, 9, 10});
    CHECK(r.errors[3].message.find("first seen on line 2") != std::string::npos);
  }
  SUBCASE("cash flow column may be dropped from the header") {
    auto r = ingest_firms(
        "firm_id,name,lat,lon,sector,region_code,year,revenue_cents,expenses_cents,employee_expenses_cents\n"
        "f1,Acme,48.2,16.3,C,AT/9/901,2014,100,50,10\n");
    REQUIRE(r.records.size() == 1);
    CHECK(r.records[0].cash_flow_cents == 150);
  }
  SUBCASE("closed sector registry") {
    SectorRegistry reg;
    reg.add(SectorCode("A"));
    auto r = ingest_firms(kHeader + "f1,Acme,48.2,16.3,C,AT/9/901,2014,100,50,10,\n", &reg);
    CHECK(r.records.empty());
    CHECK(r.errors.size() == 1);
  }
}

TEST_CASE("ingest_io_table") {
  const std::string header = "year,from_sector,to_sector,amount_cents\n";
  CHECK(ingest_io_table(header).tables.empty());
  CHECK(ingest_io_table(header).errors.empty());

  auto one = ingest_io_table(header + "2014,C,A,3200000000000\n");
  REQUIRE(one.tables.size() == 1);
  CHECK(one.tables.at(2014).entries.at(SectorPair{SectorCode("C"), SectorCode("A")}) == 3200000000000);

  auto dup = ingest_io_table(header + "2014,C,A,1\n2014,C,A,2\n2015,C,A,2\n2014,C,B,-4\n");
  CHECK(dup.tables.at(2014).entries.size() == 1);
  CHECK(dup.tables.at(2015).entries.size() == 1);
  REQUIRE(dup.errors.size() == 2);
  CHECK(dup.errors[0].line == 3);
  CHECK(dup.errors[1].line == 5);

  std::mt19937_64 rng(5);
  std::map<int, IOTable> tables;
  const char* codes[] = {"A", "C", "F", "G", "K2"};
  for (int i = 0; i < 200; ++i) {
    int y = 2010 + static_cast<int>(rng() % 4);
    tables[y].year = y;
    tables[y].entries[SectorPair{SectorCode(codes[rng() % 5]), SectorCode(codes[rng() % 5])}] =
        static_cast<Cents>(rng() % 5'000'000'000'000);
  }
  auto back = ingest_io_table(export_io_tables(tables));
  CHECK(back.errors.empty());
  CHECK(back.tables == tables);
}

TEST_CASE("sector and region tables") {
  auto reg = ingest_sectors("sector_code,name\nC,Manufacturing\nA,\"Agriculture, forestry\"\n");
  CHECK(reg.size() == 2);
  CHECK(ingest_sectors(export_sectors(reg)) == reg);
  CHECK_THROWS_AS(ingest_sectors("sector_code,name\nC,x\nC,y\n"), ParseError);

  auto regions = ingest_regions(
      "region_code,level,name,area_km2,centroid_lat,centroid_lon\n"
      "AT,1,Austria,83879,,\n"
      "AT/9,2,Wien,414.87,48.2082,16.3738\n");
  REQUIRE(regions.find("AT/9"));
  CHECK(regions.find("AT/9")->area_km2 == 414.87);
  CHECK(!regions.find("AT")->centroid);
  CHECK(ingest_regions(export_regions(regions)) == regions);
  CHECK_THROWS_AS(ingest_regions("region_code,level,name,area_km2,centroid_lat,centroid_lon\nAT/9,1,W,,,\n"),
                  ParseError);
  CHECK_THROWS_AS(ingest_regions("region_code,level,name,area_km2,centroid_lat,centroid_lon\nAT,1,A,-3,,\n"),
                  ParseError);
}

TEST_CASE("model JSON") {
  TransactionModel m;
  m.model_id = "m1";
  m.dataset_id = "ds";
  m.year = 2014;
  m.constraint_set_id = "cs-0123456789ab";
  m.provenance = Provenance::HeuristicSolver;
  m.edges = {{"a", "b", 5}, {"b", "a", 9007199254740993LL}};
  m.residuals.sector_pairs = {{"sector_total:1", {SectorCode("C"), SectorCode("A")}, 10, 10, 0}};
  m.residuals.constraints = {{"nonneg", true, 0}, {"sector_total:1", true, 0}};
  m.residuals.max_relative_residual = 0.125;

  SUBCASE("round trip") {
    auto text = save_model(m);
    CHECK(load_model(text) == m);
    CHECK(save_model(load_model(text)) == text);
    // the large amount survives as a string
    CHECK(text.find("\"9007199254740993\"") != std::string::npos);
    CHECK(text.find("\"amount_cents\": 5") != std::string::npos);
    // stable field order
    CHECK(text.find("\"schema\"") < text.find("\"model_id\""));
    CHECK(text.find("\"edges\"") < text.find("\"residuals\""));
  }
  SUBCASE("empty-edge model") {
    TransactionModel empty;
    empty.model_id = "e";
    CHECK(load_model(save_model(empty)) == empty);
  }
  SUBCASE("schema mismatch") {
    auto j = model_to_json(m);
    j["schema"] = 2;
    CHECK_THROWS_AS(load_model(j.dump()), DomainError);
  }
  SUBCASE("malformed input") {
    CHECK_THROWS_AS(load_model("{\n  \"schema\": 1,\n  oops\n}"), ParseError);
    try {
      load_model("{\n  \"schema\": 1,\n  oops\n}");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
    }
    auto j = model_to_json(m);
    j["edges"][0]["amount_cents"] = 1.5;
    CHECK_THROWS_AS(load_model(j.dump()), DomainError);
    j = model_to_json(m);
    j["edges"].push_back(j["edges"][0]);
    j["edge_count"] = 3;
    CHECK_THROWS_AS(load_model(j.dump()), DomainError);
  }
  SUBCASE("10k-edge model is byte stable") {
    TransactionModel big = m;
    big.edges.clear();
    std::mt19937_64 rng(9);
    std::set<std::pair<std::string, std::string>> seen;
    while (big.edges.size() < 10000) {
      auto a = "f" + std::to_string(rng() % 400), b = "f" + std::to_string(rng() % 400);
      if (a == b || !seen.insert({a, b}).second) continue;
      big.edges.push_back({a, b, 1 + static_cast<Cents>(rng() % 1'000'000'000)});
    }
    normalize_edges(big.edges);
    const auto text = save_model(big);
    const auto digest = sha256_hex(text);
    CHECK(sha256_hex(save_model(load_model(text))) == digest);
    CHECK(sha256_hex(save_model(big)) == digest);
    CHECK(load_model(text).edges.size() == 10000);
  }
}

TEST_CASE("cents JSON encoding") {
  CHECK(cents_to_json(kMaxSafeJsonInteger).is_number_integer());
  CHECK(cents_to_json(kMaxSafeJsonInteger + 1).is_string());
  CHECK(cents_to_json(-kMaxSafeJsonInteger - 1) == "-9007199254740992");
  for (Cents v : {Cents{0}, Cents{-5}, kMaxSafeJsonInteger + 7, std::numeric_limits<Cents>::max()}) {
    CHECK(cents_from_json(cents_to_json(v)) == v);
  }
  CHECK_THROWS_AS(cents_from_json(Json("12x")), DomainError);
  CHECK_THROWS_AS(cents_from_json(Json(1.5)), DomainError);
}

TEST_CASE("synthetic generator") {
  SyntheticSpec spec;
  spec.firms = 500;
  spec.sectors = 8;
  spec.years = 2;
  spec.seed = 7;
  const Dataset ds = generate_synthetic(spec);

  SUBCASE("deterministic") {
    const Dataset again = generate_synthetic(spec);
    CHECK(again == ds);
    CHECK(export_firms(again.firms) == export_firms(ds.firms));
    spec.seed = 8;
    CHECK(generate_synthetic(spec).firms != ds.firms);
  }
  SUBCASE("manifest counts and totals") {
    CHECK(ds.sectors.size() == 8);
    CHECK(ds.years() == std::vector<int>{2014, 2015});
    CHECK(ds.manifest.firm_counts == std::map<int, std::int64_t>{{2014, 500}, {2015, 500}});
    for (int y : ds.years()) {
      Cents cash = 0;
      for (const auto& f : ds.firms_in_year(y)) cash += f.revenue_cents + f.expenses_cents;
      CHECK(ds.manifest.cash_flow_totals.at(y) == cash);
    }
    CHECK(ds.manifest.seed == 7u);
  }
  SUBCASE("IO totals stay below sector expenses") {
    for (const auto& [year, table] : ds.io_tables) {
      std::map<SectorCode, Cents> spent, carved;
      for (const auto& f : ds.firms_in_year(year)) spent[f.sector] += f.expenses_cents;
      for (const auto& [pair, amount] : table.entries) carved[pair.from] += amount;
      CHECK(!table.entries.empty());
      for (const auto& [s, amount] : carved) CHECK(amount <= spent[s]);
    }
  }
  SUBCASE("every firm moves with its district's planted trend") {
    REQUIRE(ds.manifest.planted_trends.size() == 24);
    std::set<std::string> kinds;
    for (const auto& [code, t] : ds.manifest.planted_trends) kinds.insert(t);
    CHECK(kinds == std::set<std::string>{"decline", "growth"});
    auto y0 = ds.firms_in_year(2014), y1 = ds.firms_in_year(2015);
    REQUIRE(y0.size() == y1.size());
    for (std::size_t i = 0; i < y0.size(); ++i) {
      REQUIRE(y0[i].firm_id == y1[i].firm_id);
      CHECK(y0[i].location == y1[i].location);
      const bool grew = y1[i].cash_flow_cents > y0[i].cash_flow_cents;
      const bool shrank = y1[i].cash_flow_cents < y0[i].cash_flow_cents;
      CHECK(grew != shrank);
      CHECK(ds.manifest.planted_trends.at(y0[i].region_code) == (grew ? "growth" : "decline"));
    }
  }
  SUBCASE("default IO rules are met by the solver") {
    for (int year : ds.years()) {
      auto cs = dsl::parse_rules(io_table_rules(ds, year), dsl::ParseOptions{&ds.sectors});
      auto firms = ds.firms_in_year(year);
      auto res = inference::solve_heuristic(firms, cs, {});
      CHECK(res.report.status == inference::SolveStatus::Satisfied);
      CHECK(inference::validate(res.model, firms, cs).all_constraints_satisfied());
    }
  }
  SUBCASE("spec checks") {
    spec.sectors = 0;
    CHECK_THROWS_AS(generate_synthetic(spec), DomainError);
    spec.sectors = 3;
    spec.unlocated_share = 1.0;
    CHECK_THROWS_AS(generate_synthetic(spec), DomainError);
    spec.unlocated_share = 0.2;
    spec.firms = 200;
    auto part = generate_synthetic(spec);
    std::size_t unlocated = 0;
    for (const auto& f : part.firms) unlocated += !f.location;
    CHECK(unlocated > 0);
    CHECK(unlocated < part.firms.size());
  }
}

TEST_CASE("dataset directories") {
  TempDir tmp;
  SyntheticSpec spec;
  spec.firms = 120;
  spec.seed = 11;
  const Dataset ds = generate_synthetic(spec);

  SUBCASE("save then load") {
    const Manifest written = save_dataset(ds, tmp.path);
    CHECK(written.checksums.size() == 4);
    Dataset back = load_dataset(tmp.path / ds.dataset_id);
    CHECK(back.manifest == written);
    back.manifest.checksums.clear();
    CHECK(back == ds);
    CHECK(list_datasets(tmp.path) == std::vector<std::string>{ds.dataset_id});
    // no temporary files are left behind
    for (const auto& e : fs::recursive_directory_iterator(tmp.path)) {
      CHECK(e.path().filename().string().find(".tmp.") == std::string::npos);
    }
  }
  SUBCASE("writing twice gives identical bytes") {
    save_dataset(ds, tmp.path / "one");
    save_dataset(generate_synthetic(spec), tmp.path / "two");
    CHECK(dir_checksums(tmp.path / "one") == dir_checksums(tmp.path / "two"));
  }
  SUBCASE("tampering is detected") {
    save_dataset(ds, tmp.path);
    const auto dir = tmp.path / ds.dataset_id;
    auto text = read_file(dir / "firms.csv");
    text[text.size() - 2] = text[text.size() - 2] == '1' ? '2' : '1';
    write_file_atomic(dir / "firms.csv", text);
    CHECK_THROWS_AS(load_dataset(dir), DomainError);
  }
  SUBCASE("recorded totals must match") {
    Dataset off = ds;
    off.manifest.cash_flow_totals[2014] += 1;
    save_dataset(off, tmp.path);
    CHECK_THROWS_AS(load_dataset(tmp.path / ds.dataset_id), DomainError);
  }
  SUBCASE("missing directory") {
    CHECK_THROWS_AS(load_dataset(tmp.path / "nope"), NotFound);
    CHECK(list_datasets(tmp.path / "nope").empty());
  }
  SUBCASE("models and rule files") {
    save_dataset(ds, tmp.path);
    const auto dir = tmp.path / ds.dataset_id;
    TransactionModel m;
    m.model_id = "m-b";
    m.dataset_id = ds.dataset_id;
    m.edges = {{"F0001", "F0002", 3}};
    store_model(dir, m);
    TransactionModel n = m;
    n.model_id = "m-a";
    store_model(dir, n);
    auto models = load_models(dir);
    REQUIRE(models.size() == 2);
    CHECK(models[0] == n);
    CHECK(models[1] == m);
    m.model_id = "../escape";
    CHECK_THROWS_AS(store_model(dir, m), DomainError);

    store_rules(dir, "cs-abc", "fixed a -> b = 1\n");
    CHECK(load_rules(dir, "cs-abc") == std::optional<std::string>("fixed a -> b = 1\n"));
    CHECK(!load_rules(dir, "cs-missing"));
  }
}

TEST_CASE("ingest_dataset") {
  SyntheticSpec spec;
  spec.firms = 500;
  spec.seed = 21;
  const Dataset ds = generate_synthetic(spec);
  const auto firms_csv = export_firms(ds.firms);

  SUBCASE("fixture CSV matches the generator manifest") {
    auto report = ingest_dataset({"copy", firms_csv, export_io_tables(ds.io_tables), export_sectors(ds.sectors),
                                  export_regions(ds.regions)});
    CHECK(report.clean());
    CHECK(report.dataset.firms_in_year(2014).size() == 500);
    CHECK(report.dataset.manifest.firm_counts == ds.manifest.firm_counts);
    CHECK(report.dataset.manifest.cash_flow_totals == ds.manifest.cash_flow_totals);
    CHECK(report.dataset.manifest.io_totals == ds.manifest.io_totals);
    CHECK(report.dataset.firms == ds.firms);
  }
  SUBCASE("idempotent") {
    IngestSources src{"x", firms_csv, export_io_tables(ds.io_tables), std::nullopt, std::nullopt};
    auto a = ingest_dataset(src);
    auto b = ingest_dataset(src);
    CHECK(a.dataset == b.dataset);
    // inferred reference tables
    CHECK(a.dataset.sectors.size() == ds.sectors.size());
    CHECK(a.dataset.regions.find("AT"));
    CHECK(a.dataset.regions.find("AT/1"));
  }
  SUBCASE("firms outside the region table are row errors") {
    auto report = ingest_dataset({"x", kHeader + "f1,A,,,C,AT/1/101,2014,1,1,0,\nf2,B,,,C,XX/1,2014,1,1,0,\n",
                                  std::nullopt, std::nullopt,
                                  "region_code,level,name,area_km2,centroid_lat,centroid_lon\nAT/1/101,3,d,,,\n"});
    CHECK(report.dataset.firms.size() == 1);
    REQUIRE(report.firm_errors.size() == 1);
    CHECK(report.firm_errors[0].line == 3);
  }
}

// Acceptance suite: one line per criterion, nonzero exit when any fails.
// Usage: acceptance <path to econoforge binary>

#include <httplib.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "econoforge/api/jobs.hpp"
#include "econoforge/api/queries.hpp"
#include "econoforge/api/server.hpp"
#include "econoforge/api/workspace.hpp"
#include "econoforge/dsl/parser.hpp"
#include "econoforge/flow/flows.hpp"
#include "econoforge/geo/aggregation.hpp"
#include "econoforge/inference/smtlib.hpp"
#include "econoforge/inference/solver.hpp"
#include "econoforge/inference/validator.hpp"
#include "econoforge/store/dataset_dir.hpp"
#include "econoforge/store/synthetic.hpp"
#include "oracles.hpp"

using namespace econoforge;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;
using store::Json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt_s(double s) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << s << " s";
  return os.str();
}

// The 500-firm fixture every map and flow criterion runs on.
const Dataset& fixture() {
  static const Dataset ds = [] {
    store::SyntheticSpec spec;  // 500 firms, 8 sectors, 2 years, seed 7
    return store::generate_synthetic(spec);
  }();
  return ds;
}

dsl::ConstraintSet io_rules(const Dataset& ds, int year, const std::string& extra = {}) {
  return dsl::parse_rules(store::io_table_rules(ds, year) + extra, dsl::ParseOptions{&ds.sectors});
}

const TransactionModel& fixture_model() {
  static const TransactionModel m = [] {
    const auto& ds = fixture();
    auto res = inference::solve_heuristic(ds.firms_in_year(2014), io_rules(ds, 2014), {});
    res.model.model_id = "fixture-2014";
    res.model.dataset_id = ds.dataset_id;
    res.model.year = 2014;
    return res.model;
  }();
  return m;
}

// ---------------------------------------------------------------------------

// Every weight vector in {0..10}^k over the candidate pairs of each instance.
Outcome validator_equivalence() {
  struct Shape {
    std::vector<FirmRecord> firms;
    std::vector<std::pair<std::string, std::string>> sector_pairs;
  };
  auto f = [](const std::string& id, const std::string& sector, Cents size, const std::string& region) {
    return oracle::firm(id, sector, size, size, 2014, LatLon{47.0 + static_cast<double>(size) / 100.0, 14.0}, region,
                        size * 10);
  };
  std::vector<Shape> shapes{
      {{f("c1", "C", 3, "R1"), f("a1", "A", 5, "R2")}, {{"C", "A"}, {"A", "C"}}},
      {{f("c1", "C", 3, "R1"), f("a1", "A", 5, "R2"), f("a2", "A", 2, "R1"), f("a3", "A", 4, "R2")}, {{"C", "A"}}},
      {{f("c1", "C", 3, "R1"), f("c2", "C", 1, "R2"), f("a1", "A", 5, "R2")}, {{"C", "A"}, {"A", "C"}}},
      {{f("c1", "C", 3, "R1"), f("c2", "C", 1, "R2"), f("a1", "A", 5, "R1"), f("a2", "A", 2, "R2")}, {{"C", "A"}}},
      {{f("c1", "C", 3, "R1"), f("c2", "C", 1, "R2"), f("a1", "A", 5, "R1"), f("a2", "A", 2, "R2")},
       {{"C", "C"}, {"A", "A"}}},
      {{f("c1", "C", 3, "R1"), f("c2", "C", 1, "R2"), f("a1", "A", 5, "R1"), f("g1", "G", 2, "R2"),
        f("g2", "G", 6, "R1")},
       {{"C", "A"}, {"A", "G"}}},
      {{f("c1", "C", 3, "R1"), f("a1", "A", 5, "R1"), f("g1", "G", 2, "R2"), f("g2", "G", 6, "R1"),
        f("g3", "G", 4, "R2")},
       {{"C", "A"}, {"G", "A"}}},
  };

  std::mt19937_64 rng(2024);
  auto pick = [&](std::int64_t lo, std::int64_t hi) { return lo + static_cast<std::int64_t>(rng() % (hi - lo + 1)); };
  std::size_t instances = 0, candidates = 0, mismatches = 0, satisfied = 0;
  std::size_t max_firms = 0, max_vars = 0;

  for (const auto& shape : shapes) {
    std::vector<std::pair<std::string, std::string>> vars;
    for (const auto& a : shape.firms) {
      for (const auto& b : shape.firms) {
        if (a.firm_id == b.firm_id) continue;
        for (const auto& [s, t] : shape.sector_pairs) {
          if (a.sector.str() == s && b.sector.str() == t) vars.emplace_back(a.firm_id, b.firm_id);
        }
      }
    }
    max_firms = std::max(max_firms, shape.firms.size());
    max_vars = std::max(max_vars, vars.size());

    for (int variant = 0; variant < 12; ++variant) {
      std::string rules;
      for (const auto& [s, t] : shape.sector_pairs) {
        std::size_t n = 0;
        for (const auto& v : vars) {
          const auto* src = &*std::find_if(shape.firms.begin(), shape.firms.end(), [&](auto& x) { return x.firm_id == v.first; });
          const auto* dst = &*std::find_if(shape.firms.begin(), shape.firms.end(), [&](auto& x) { return x.firm_id == v.second; });
          n += src->sector.str() == s && dst->sector.str() == t;
        }
        rules += "sector_total " + s + " -> " + t + " = " + std::to_string(pick(0, 10 * static_cast<std::int64_t>(n))) +
                 " tol " + std::to_string(pick(0, 3)) + "\n";
      }
      const auto& [s0, t0] = shape.sector_pairs.front();
      if (rng() % 2) {
        rules += std::string("cap ") + (rng() % 2 ? "out" : "in") + " for firm(sector == \"" + (rng() % 2 ? s0 : t0) +
                 "\") to firm(" + (rng() % 2 ? "region == \"R1\"" : "") + ") <= " + std::to_string(pick(0, 2)) + "\n";
      }
      if (rng() % 2) {
        const auto lo = pick(0, 3);
        rules += "bound firm(sector == \"" + s0 + "\") -> firm(employee_expenses >= " + std::to_string(pick(0, 40)) +
                 ") in [" + std::to_string(lo) + ", " + std::to_string(pick(lo, 10)) + "]\n";
      }
      if (rng() % 3 == 0) {
        const auto& v = vars[rng() % vars.size()];
        rules += "forbid firm(firm_id == \"" + v.first + "\") -> firm(firm_id == \"" + v.second + "\")\n";
      }
      if (rng() % 3 == 0) {
        const auto& v = vars[rng() % vars.size()];
        rules += "fixed " + v.first + " -> " + v.second + " = " + std::to_string(pick(0, 10)) + "\n";
      }
      const auto cs = dsl::parse_rules(rules);
      ++instances;

      std::vector<Cents> w(vars.size(), 0);
      for (;;) {
        std::vector<Edge> edges;
        for (std::size_t i = 0; i < vars.size(); ++i) {
          if (w[i] > 0) edges.push_back({vars[i].first, vars[i].second, w[i]});
        }
        const auto report = inference::validate(edges, shape.firms, cs);
        const auto naive = oracle::naive_check(oracle::edge_map(edges), shape.firms, cs);
        bool same = naive.size() == report.constraints.size();
        for (const auto& o : report.constraints) {
          auto it = naive.find(o.constraint_id);
          same = same && it != naive.end() && it->second == o.satisfied;
        }
        mismatches += !same;
        satisfied += report.all_constraints_satisfied();
        ++candidates;
        std::size_t k = 0;
        while (k < w.size() && w[k] == 10) w[k++] = 0;
        if (k == w.size()) break;
        ++w[k];
      }
    }
  }
  std::ostringstream os;
  os << instances << " instances (<= " << max_firms << " firms, <= 2 sector pairs, <= " << max_vars
     << " weight variables in 0..10), " << candidates << " candidate models, " << satisfied << " satisfying, "
     << mismatches << " verdict mismatches; tolerance exact";
  return {mismatches == 0, os.str()};
}

Outcome heuristic_satisfaction() {
  int satisfied = 0, inconsistent = 0, slow = 0, infeasible = 0;
  double worst = 0.0;
  for (int seed = 1; seed <= 50; ++seed) {
    store::SyntheticSpec spec;
    spec.firms = 100;
    spec.sectors = 5;
    spec.districts = 8;
    spec.years = 1;
    spec.seed = static_cast<std::uint64_t>(seed);
    const auto ds = store::generate_synthetic(spec);
    const auto firms = ds.firms_in_year(2014);
    std::mt19937_64 rng(static_cast<std::uint64_t>(1000 + seed));

    std::vector<SectorCode> codes;
    for (const auto& [code, name] : ds.sectors.entries()) codes.push_back(code);
    std::string extra;
    std::set<std::string> capped;
    while (capped.size() < 3) {
      const std::string head = std::string("cap ") + (rng() % 2 ? "out" : "in") + " for firm(sector == \"" +
                               codes[rng() % codes.size()].str() + "\")";
      if (capped.insert(head).second) extra += head + " to firm() <= " + std::to_string(10 + rng() % 31) + "\n";
    }
    // Fixed edges on pairs the IO table funds, each well under its sector target.
    const auto& io = ds.io_tables.at(2014).entries;
    std::set<std::pair<FirmId, FirmId>> used;
    for (int k = 0; k < 2;) {
      auto it = std::next(io.begin(), static_cast<long>(rng() % io.size()));
      std::vector<const FirmRecord*> src, dst;
      for (const auto& f : firms) {
        if (f.sector == it->first.from) src.push_back(&f);
        if (f.sector == it->first.to) dst.push_back(&f);
      }
      const auto* a = src[rng() % src.size()];
      const auto* b = dst[rng() % dst.size()];
      if (a->firm_id == b->firm_id || !used.insert({a->firm_id, b->firm_id}).second) continue;
      const Cents amount = 1 + static_cast<Cents>(rng() % static_cast<std::uint64_t>(std::max<Cents>(1, it->second / 50)));
      extra += "fixed " + a->firm_id + " -> " + b->firm_id + " = " + std::to_string(amount) + "\n";
      ++k;
    }
    const auto cs = io_rules(ds, 2014, extra);

    const auto t0 = Clock::now();
    const auto res = inference::solve_heuristic(firms, cs, {});
    const double dt = seconds_since(t0);
    worst = std::max(worst, dt);
    slow += dt >= 1.0;

    const auto check = inference::validate(res.model.edges, firms, cs);
    const bool exact = check.all_constraints_satisfied() && check.max_relative_residual == 0.0;
    bool consistent = check == res.report.residuals;
    switch (res.report.status) {
      case inference::SolveStatus::Satisfied:
        consistent = consistent && exact;
        ++satisfied;
        break;
      case inference::SolveStatus::Residual:
        consistent = consistent && !exact;
        break;
      case inference::SolveStatus::InfeasibleDetected:
        consistent = consistent && !res.report.witnesses.empty();
        ++infeasible;
        break;
    }
    inconsistent += !consistent;
  }
  std::ostringstream os;
  os << satisfied << "/50 satisfied (need >= 45), " << infeasible << " reported infeasible, " << inconsistent
     << " statuses inconsistent with the validator, slowest " << fmt_s(worst) << " (limit 1 s per instance)";
  return {satisfied >= 45 && inconsistent == 0 && slow == 0, os.str()};
}

Outcome gravity_check() {
  std::vector<FirmRecord> firms{oracle::firm("c1", "C", 1, 1), oracle::firm("c2", "C", 1, 3),
                                oracle::firm("a1", "A", 1, 1)};
  const auto res = inference::solve_heuristic(firms, dsl::parse_rules("sector_total C -> A = 100"), {});
  const std::vector<Edge> expected{{"c1", "a1", 25}, {"c2", "a1", 75}};
  const auto oracle_w = oracle::gravity_weights({firms[0], firms[1]}, {firms[2]}, 100);
  std::ostringstream os;
  os << "sizes 1:3, target 100 cents -> ";
  for (const auto& e : res.model.edges) os << e.src << "->" << e.dst << "=" << e.amount_cents << " ";
  os << "(hand oracle 25/75, formula oracle " << oracle_w[0] << "/" << oracle_w[1] << "); tolerance exact cents";
  return {res.model.edges == expected && oracle_w == std::vector<double>{25.0, 75.0} &&
              res.report.status == inference::SolveStatus::Satisfied,
          os.str()};
}

Outcome five_hundred_firms() {
  store::SyntheticSpec spec;
  spec.firms = 500;
  spec.sectors = 8;
  spec.years = 1;
  const auto ds = store::generate_synthetic(spec);
  const auto firms = ds.firms_in_year(2014);
  const std::string cap = "cap out for firm(sector == \"C\") to firm() <= 150\n";
  const auto cs = io_rules(ds, 2014, cap);

  auto t0 = Clock::now();
  const auto res = inference::solve_heuristic(firms, cs, {});
  const double solve_s = seconds_since(t0);
  const auto check = inference::validate(res.model.edges, firms, cs);
  const bool solved = check.all_constraints_satisfied() && check.max_relative_residual == 0.0;

  t0 = Clock::now();
  const auto doc = inference::emit_smtlib(firms, cs);
  const double emit_s = seconds_since(t0);
  const auto wf = inference::check_smtlib(doc.text);

  // pairs (n(n-1), no forbids) + one window per IO entry + for the cap: one
  // implication per pair leaving a C firm and one counting bound per C firm.
  const std::size_t n = firms.size();
  std::size_t c_firms = 0;
  for (const auto& f : firms) c_firms += f.sector.str() == "C";
  const std::size_t expected = n * (n - 1) + ds.io_tables.at(2014).entries.size() + c_firms * (n - 1) + c_firms;

  std::ostringstream os;
  os << n << " firms, " << ds.sectors.size() << " sectors: solve " << fmt_s(solve_s) << " (limit 30 s) "
     << (solved ? "validates satisfied" : "NOT satisfied") << "; emit " << fmt_s(emit_s) << " (limit 10 s), "
     << (wf.ok ? "well-formed" : "malformed: " + wf.error) << ", " << wf.assertions << " assertions (expected "
     << expected << ", exact). Exact-SMT timing for 500 firms is not reproduced: no solver is bundled";
  return {solve_s < 30.0 && solved && emit_s < 10.0 && wf.ok && wf.assertions == expected &&
              doc.stats.assertions == expected,
          os.str()};
}

Outcome smt_round_trip() {
  int ok = 0;
  std::string first_failure;
  for (int seed = 1; seed <= 10; ++seed) {
    store::SyntheticSpec spec;
    spec.firms = 12;
    spec.sectors = 3;
    spec.districts = 3;
    spec.years = 1;
    spec.seed = static_cast<std::uint64_t>(seed);
    const auto ds = store::generate_synthetic(spec);
    const auto firms = ds.firms_in_year(2014);
    const auto cs = io_rules(ds, 2014, "cap out for firm() to firm() <= 8\nforbid firm(firm_id == \"F0001\") -> firm()\n");

    const auto doc = inference::emit_smtlib(firms, cs);
    const auto solved = inference::solve_heuristic(firms, cs, {});
    oracle::SmtScript script(doc.text);
    std::vector<std::pair<std::string, std::string>> pairs;
    std::map<std::string, std::int64_t> ints;
    std::map<std::string, bool> bools;
    const auto em = oracle::edge_map(solved.model.edges);
    for (const auto& [name, sort] : script.declarations()) {
      if (sort == "Int") {
        auto p = *inference::decode_pair_variable(name);
        pairs.push_back(p);
        auto it = em.find(p);
        ints[name] = it == em.end() ? 0 : it->second;
      }
    }
    for (const auto& [name, sort] : script.declarations()) {
      if (sort == "Bool") bools[name] = ints.at("w" + name.substr(1)) > 0;
    }
    const auto text = oracle::solver_output(solved.model.edges, pairs);
    const auto parsed =
        inference::parse_smt_model(text, firms, inference::SmtModelMeta{"rt", ds.dataset_id, 2014, cs.id()});
    const bool pass = solved.report.status == inference::SolveStatus::Satisfied && parsed.model &&
                      parsed.model->edges == solved.model.edges &&
                      inference::validate(*parsed.model, firms, cs).all_constraints_satisfied() &&
                      script.holds(ints, bools);
    ok += pass;
    if (!pass && first_failure.empty()) first_failure = " (first failure: seed " + std::to_string(seed) + ")";
  }
  return {ok == 10, std::to_string(ok) + "/10 seeded instances round-trip to a satisfied model, assignment also "
                        "satisfies the script under the reference interpreter; exact" + first_failure};
}

Outcome conservation() {
  const auto& ds = fixture();
  std::size_t layers = 0, failures = 0;
  for (int year : ds.years()) {
    Cents total = 0;
    std::int64_t eligible = 0;
    for (const auto& f : ds.firms_in_year(year)) {
      total += f.cash_flow_cents;
      eligible += f.location.has_value();
    }
    const bool totals_match_manifest = ds.manifest.cash_flow_totals.at(year) == total;
    failures += !totals_match_manifest;
    std::vector<std::pair<Cents, std::int64_t>> region_sums;
    for (int level = 1; level <= 3; ++level) {
      Cents cash = 0;
      std::int64_t count = 0;
      for (const auto& r : geo::aggregate_regions(ds, year, level, geo::Metric::CashFlow, false)) {
        cash += r.cash_flow_cents;
        count += r.firm_count;
      }
      region_sums.emplace_back(cash, count);
    }
    for (int res = 0; res <= geo::kMaxResolution; ++res) {
      for (auto metric : {geo::Metric::CashFlow, geo::Metric::FirmCount}) {
        const auto layer = geo::aggregate_bins(ds, year, res, metric);
        Cents cash = 0;
        std::int64_t count = 0;
        for (const auto& b : layer.bins) {
          cash += b.cash_flow_cents;
          count += b.firm_count;
        }
        bool ok = cash == total && count == eligible;
        for (const auto& [rc, rn] : region_sums) ok = ok && rc == cash && rn == count;
        failures += !ok;
        ++layers;
      }
    }
  }
  std::ostringstream os;
  os << layers << " layers (resolutions 0.." << geo::kMaxResolution << ", " << ds.years().size()
     << " years, both metrics) and region levels 1..3 against naive firm sums: " << failures
     << " mismatches; exact integer equality";
  return {failures == 0, os.str()};
}

Outcome temporal() {
  const auto& ds = fixture();
  std::size_t endpoint_bad = 0, delta_bad = 0, trend_bad = 0, pure_bins = 0, districts = 0;
  const auto firms14 = ds.firms_in_year(2014);
  const auto firms15 = ds.firms_in_year(2015);
  for (int res = 0; res <= geo::kMaxResolution; ++res) {
    const auto a = geo::aggregate_bins(ds, 2014, res, geo::Metric::CashFlow);
    const auto b = geo::aggregate_bins(ds, 2015, res, geo::Metric::CashFlow);
    for (double alpha : {0.0, 1.0}) {
      const auto k = geo::interpolate_keyframes(a, b, alpha, geo::Metric::CashFlow);
      const auto& side = alpha == 0.0 ? a : b;
      for (const auto& kb : k.bins) {
        const auto* m = side.find(kb.index);
        const double want = m ? static_cast<double>(m->cash_flow_cents) : 0.0;
        endpoint_bad += kb.value != want;
      }
    }
    // Naive subtraction from per-firm sums.
    std::map<std::string, Cents> naive;
    std::map<std::string, std::set<std::string>> trend_of_bin;
    for (const auto& f : firms15) {
      const auto key = geo::to_string(geo::bin_point(*f.location, res));
      naive[key] += f.cash_flow_cents;
      trend_of_bin[key].insert(ds.manifest.planted_trends.at(f.region_code));
    }
    for (const auto& f : firms14) {
      const auto key = geo::to_string(geo::bin_point(*f.location, res));
      naive[key] -= f.cash_flow_cents;
      trend_of_bin[key].insert(ds.manifest.planted_trends.at(f.region_code));
    }
    const auto delta = geo::temporal_delta(b, a, geo::Metric::CashFlow);
    std::map<std::string, Cents> got;
    for (const auto& d : delta.bins) got[geo::to_string(d.index)] = d.delta;
    delta_bad += got != naive;
    // Bins holding firms of one trend only must move with that trend.
    for (const auto& d : delta.bins) {
      const auto& trends = trend_of_bin.at(geo::to_string(d.index));
      if (trends.size() != 1) continue;
      ++pure_bins;
      trend_bad += (*trends.begin() == "growth") != (d.delta > 0);
    }
  }
  const auto r14 = geo::aggregate_regions(ds, 2014, 3, geo::Metric::CashFlow, false);
  const auto r15 = geo::aggregate_regions(ds, 2015, 3, geo::Metric::CashFlow, false);
  for (std::size_t i = 0; i < r15.size(); ++i) {
    ++districts;
    const auto& trend = ds.manifest.planted_trends.at(r15[i].region_code);
    const bool grew = r15[i].cash_flow_cents > r14.at(i).cash_flow_cents;
    trend_bad += r14.at(i).region_code != r15[i].region_code || grew != (trend == "growth");
  }
  std::ostringstream os;
  os << "keyframe endpoints: " << endpoint_bad << " non-bit-exact bins; delta vs naive subtraction: " << delta_bad
     << "/13 resolutions differ; planted trends: " << trend_bad << " sign mismatches over " << districts
     << " districts and " << pure_bins << " single-trend bins; exact";
  return {endpoint_bad == 0 && delta_bad == 0 && trend_bad == 0 && pure_bins > 0, os.str()};
}

Outcome flow_stats() {
  const auto& ds = fixture();
  const auto& model = fixture_model();
  const auto firms = ds.firms_in_year(2014);
  std::mt19937_64 rng(77);
  int bad = 0, nonzero = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto& f = firms[rng() % firms.size()];
    const int res = static_cast<int>(rng() % (geo::kMaxResolution + 1));
    const auto sel = geo::bin_point(*f.location, res);
    const auto r = flow::flows_for_selection(model, firms, sel);
    std::set<FirmId> inside;
    for (const auto& g : firms) {
      if (geo::bin_point(*g.location, res) == sel) inside.insert(g.firm_id);
    }
    Cents naive_in = 0, naive_out = 0, arc_in = 0, arc_out = 0;
    for (const auto& e : model.edges) {
      const bool s = inside.contains(e.src), d = inside.contains(e.dst);
      if (s && !d) naive_out += e.amount_cents;
      if (d && !s) naive_in += e.amount_cents;
    }
    double max_w = 0.0;
    for (const auto& a : r.arcs) {
      (a.direction == flow::FlowDirection::Outward ? arc_out : arc_in) += a.amount_cents;
      max_w = std::max(max_w, a.relative_weight);
    }
    bool ok = arc_in == r.stats.inflow_cents && arc_out == r.stats.outflow_cents && naive_in == arc_in &&
              naive_out == arc_out;
    if (r.stats.overall_flow_cents > 0) {
      ++nonzero;
      ok = ok && r.stats.pct_inward + r.stats.pct_outward == 100.0 && max_w == 1.0;
    } else {
      ok = ok && r.arcs.empty();
    }
    bad += !ok;
  }
  std::ostringstream os;
  os << "100 random selections on the fixture model (" << model.edges.size() << " edges), " << nonzero
     << " with flow: " << bad << " violations of arc sums = stats = naive, pct sum = 100, max weight = 1; exact";
  return {bad == 0 && nonzero > 0, os.str()};
}

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) out += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return out + "'";
}

std::string run_capture(const std::string& cmd, int& status) {
  std::string out;
  FILE* p = popen((cmd + " 2>/dev/null").c_str(), "r");
  if (!p) {
    status = -1;
    return out;
  }
  char buf[65536];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, n);
  status = pclose(p);
  return out;
}

Outcome api_determinism(const std::string& cli_path) {
  const auto data = fs::temp_directory_path() / "econoforge_acceptance_data";
  fs::remove_all(data);
  const auto& ds = fixture();
  store::save_dataset(ds, data);
  auto other = fixture_model();
  other.model_id = "fixture-2014-empty";
  other.edges.clear();
  {
    api::Workspace ws(data);
    ws.add_model(fixture_model(), store::io_table_rules(ds, 2014));
    ws.add_model(other, std::nullopt);
  }
  api::Workspace ws(data);
  api::JobQueue jobs(ws, 1);
  api::Server server(ws, jobs, api::ServerOptions{"127.0.0.1", 0, "*"});
  const int port = server.start();
  httplib::Client client("127.0.0.1", port);

  const std::string id = ds.dataset_id;
  const auto sel = geo::to_string(geo::bin_point(*ds.firms_in_year(2014)[0].location, 6));
  const std::vector<std::string> gets{
      "/datasets",
      "/datasets/" + id + "/summary",
      "/datasets/" + id + "/bins?year=2014&resolution=5",
      "/datasets/" + id + "/bins?year=2015&resolution=7&mode=delta&metric=firm_count",
      "/datasets/" + id + "/bins?year=2014&resolution=8&model=fixture-2014&hide_unrepresented=true",
      "/datasets/" + id + "/regions?year=2015&level=2&normalize=true",
      "/models",
      "/models/fixture-2014",
      "/models/fixture-2014/flows?bin=" + sel,
      "/models/fixture-2014/diff/fixture-2014-empty",
      "/models/fixture-2014/export/smtlib",
  };
  int get_bad = 0;
  for (const auto& path : gets) {
    auto a = client.Get(path);
    auto b = client.Get(path);
    get_bad += !a || !b || a->status != 200 || a->body != b->body;
  }

  const std::string base = shell_quote(cli_path) + " --json ";
  const std::string src = " --data-dir " + shell_quote(data.string()) + " --dataset " + id;
  struct Pair {
    std::string cli;
    std::string path;
  };
  const std::vector<Pair> pairs{
      {"bins" + src + " --year 2014 --resolution 5", "/datasets/" + id + "/bins?year=2014&resolution=5"},
      {"bins" + src + " --year 2015 --resolution 7 --mode delta --metric firm_count",
       "/datasets/" + id + "/bins?year=2015&resolution=7&mode=delta&metric=firm_count"},
      {"bins" + src + " --year 2014 --resolution 8 --model fixture-2014 --hide-unrepresented",
       "/datasets/" + id + "/bins?year=2014&resolution=8&model=fixture-2014&hide_unrepresented=true"},
      {"diff" + src + " fixture-2014 fixture-2014-empty", "/models/fixture-2014/diff/fixture-2014-empty"},
  };
  int cli_bad = 0;
  for (const auto& p : pairs) {
    int status = 0;
    const auto out = run_capture(base + p.cli, status);
    auto api = client.Get(p.path);
    cli_bad += status != 0 || !api || out != api->body;
  }
  // Rule parsing: CLI reads a file, the API a JSON body.
  const auto rules_file = data / "probe.rules";
  const std::string rules = "sector_total C -> A = 100\ncap out for firm() to firm() <= 3\n";
  store::write_file_atomic(rules_file, rules);
  int status = 0;
  const auto parse_cli = run_capture(base + "parse-rules " + shell_quote(rules_file.string()) + src, status);
  auto parse_api = client.Post("/constraints/parse", Json{{"text", rules}, {"dataset_id", id}}.dump(), "application/json");
  cli_bad += status != 0 || !parse_api || parse_cli != parse_api->body;

  server.stop();
  std::ostringstream os;
  os << gets.size() << " GET routes requested twice: " << get_bad << " differ; " << pairs.size() + 1
     << " CLI --json outputs vs API bodies: " << cli_bad << " differ; byte-exact";
  return {get_bad == 0 && cli_bad == 0, os.str()};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: acceptance <path to econoforge binary>\n";
    return 2;
  }
  const std::string cli_path = argv[1];
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"validator matches the naive checker (limit 60 s)", validator_equivalence},
      {"heuristic satisfies seeded synthetic instances", heuristic_satisfaction},
      {"gravity allocation matches the hand oracle", gravity_check},
      {"500-firm solve and SMT-LIB emission", five_hundred_firms},
      {"SMT round trip", smt_round_trip},
      {"hexagon and region conservation", conservation},
      {"temporal properties", temporal},
      {"flow statistics", flow_stats},
      {"API determinism and CLI parity", [&] { return api_determinism(cli_path); }},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto& [name, fn] = criteria[i];
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double dt = seconds_since(t0);
    if (i == 0 && dt >= 60.0) {
      o.pass = false;
      o.detail += "; over the time limit";
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << i + 1 << "/" << criteria.size() << "] " << name << " ("
              << fmt_s(dt) << "): " << o.detail << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}

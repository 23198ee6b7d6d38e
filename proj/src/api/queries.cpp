#include "econoforge/api/queries.hpp"

#include <algorithm>
#include <charconv>

#include "econoforge/dsl/parser.hpp"
#include "econoforge/inference/smtlib.hpp"
#include "econoforge/inference/validator.hpp"

namespace econoforge::api {

using store::cents_to_json;

std::string render(const Json& body) { return body.dump() + "\n"; }

namespace {

const std::string* find_param(const Params& p, const std::string& key) {
  auto it = p.find(key);
  return it == p.end() ? nullptr : &it->second;
}

geo::Metric metric_param(const Params& p) {
  try {
    return geo::metric_from_string(string_param(p, "metric", "cash_flow"));
  } catch (const DomainError& e) {
    throw ApiError(400, e.what());
  }
}

const ModelEntry& require_same_dataset(const ModelEntry& m, const DatasetSnapshot& ds) {
  if (m->dataset_id != ds->dataset_id) {
    throw ApiError(400, "model '" + m->model_id + "' belongs to dataset '" + m->dataset_id + "'");
  }
  return m;
}

std::span<const FirmRecord> model_firms(const ModelEntry& m, const DatasetSnapshot& ds) {
  require_same_dataset(m, ds);
  auto firms = ds->firms_in_year(m->year);
  if (firms.empty()) {
    throw NotFound("dataset '" + ds->dataset_id + "' has no firms in " + std::to_string(m->year));
  }
  return firms;
}

std::vector<FirmRecord> restrict_to(std::span<const FirmRecord> firms, const std::set<FirmId>& keep) {
  std::vector<FirmRecord> out;
  for (const auto& f : firms) {
    if (keep.contains(f.firm_id)) out.push_back(f);
  }
  return out;
}

Json bin_json(const geo::BinMetrics& b, geo::Metric metric) {
  Json out;
  out["bin"] = geo::to_string(b.index);
  out["q"] = b.index.q;
  out["r"] = b.index.r;
  out["center"] = to_json(b.center);
  out["firm_count"] = b.firm_count;
  out["cash_flow_cents"] = cents_to_json(b.cash_flow_cents);
  out["value"] = cents_to_json(b.value(metric));
  out["sector_breakdown"] = to_json(b.sector_breakdown);
  out["delta_vs_previous_year"] = b.delta_vs_previous_year ? cents_to_json(*b.delta_vs_previous_year) : Json(nullptr);
  return out;
}

Json meta_json(const geo::LayerMeta& m) {
  Json out;
  out["total_firms"] = m.total_firms;
  out["located_firms"] = m.located_firms;
  out["unlocated_firms"] = m.unlocated_firms;
  out["total_cash_flow_cents"] = cents_to_json(m.total_cash_flow_cents);
  out["located_cash_flow_cents"] = cents_to_json(m.located_cash_flow_cents);
  return out;
}

Json edge_json(const Edge& e) {
  return Json{{"src", e.src}, {"dst", e.dst}, {"amount_cents", cents_to_json(e.amount_cents)}};
}

}  // namespace

int int_param(const Params& p, const std::string& key, std::optional<int> fallback) {
  const std::string* v = find_param(p, key);
  if (!v || v->empty()) {
    if (fallback) return *fallback;
    throw ApiError(400, "missing parameter '" + key + "'");
  }
  int out = 0;
  auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc{} || ptr != v->data() + v->size()) {
    throw ApiError(400, "parameter '" + key + "' must be an integer, got '" + *v + "'");
  }
  return out;
}

bool bool_param(const Params& p, const std::string& key, bool fallback) {
  const std::string* v = find_param(p, key);
  if (!v || v->empty()) return fallback;
  if (*v == "true" || *v == "1") return true;
  if (*v == "false" || *v == "0") return false;
  throw ApiError(400, "parameter '" + key + "' must be true or false, got '" + *v + "'");
}

std::string string_param(const Params& p, const std::string& key, std::optional<std::string> fallback) {
  const std::string* v = find_param(p, key);
  if (!v || v->empty()) {
    if (fallback) return *fallback;
    throw ApiError(400, "missing parameter '" + key + "'");
  }
  return *v;
}

Json to_json(const geo::HexIndex& h) { return geo::to_string(h); }

Json to_json(const LatLon& p) { return Json{{"lat", p.lat}, {"lon", p.lon}}; }

Json to_json(const std::map<SectorCode, double>& breakdown) {
  Json out = Json::object();
  for (const auto& [code, pct] : breakdown) out[code.str()] = pct;
  return out;
}

Json to_json(const flow::SelectionStats& s) {
  Json out;
  out["inflow_cents"] = cents_to_json(s.inflow_cents);
  out["outflow_cents"] = cents_to_json(s.outflow_cents);
  out["pct_inward"] = s.pct_inward;
  out["pct_outward"] = s.pct_outward;
  out["overall_flow_cents"] = cents_to_json(s.overall_flow_cents);
  out["internal_cents"] = cents_to_json(s.internal_cents);
  return out;
}

Json to_json(const inference::SolveReport& r) {
  Json out;
  out["status"] = std::string(inference::to_string(r.status));
  out["iterations"] = r.iterations;
  out["wall_time_ms"] = r.wall_time_ms;
  out["max_relative_residual"] = r.residuals.max_relative_residual;
  out["witnesses"] = r.witnesses;
  out["message"] = r.message;
  out["residuals"] = store::residuals_to_json(r.residuals);
  return out;
}

Json constraint_list(const dsl::ConstraintSet& cs) {
  Json out = Json::array();
  for (const auto& c : cs.constraints()) {
    out.push_back(Json{{"id", c.id},
                       {"kind", std::string(dsl::kind_name(c.kind()))},
                       {"explicit_id", c.explicit_id},
                       {"text", dsl::canonical_text(c.payload)}});
  }
  return out;
}

Json datasets_body(std::span<const DatasetSnapshot> datasets) {
  std::vector<std::string> versions;
  Json list = Json::array();
  for (const auto& ds : datasets) {
    versions.push_back(ds.version);
    Json row;
    row["dataset_id"] = ds->dataset_id;
    row["version"] = ds.version;
    row["years"] = ds->years();
    row["sectors"] = ds->sectors.size();
    list.push_back(std::move(row));
  }
  Json out;
  out["version"] = combine_versions(versions);
  out["datasets"] = std::move(list);
  return out;
}

Json summary_body(const DatasetSnapshot& ds) {
  const auto s = dataset_summary(*ds);
  Json out;
  out["dataset_id"] = ds->dataset_id;
  out["version"] = ds.version;
  out["years"] = s.years;
  Json sectors = Json::array();
  for (const auto& [code, name] : s.sectors.entries()) sectors.push_back(Json{{"code", code.str()}, {"name", name}});
  out["sectors"] = std::move(sectors);
  Json per_year = Json::array();
  for (int y : s.years) {
    Json row;
    row["year"] = y;
    row["firm_count"] = s.firm_counts.at(y);
    std::int64_t located = 0;
    for (const auto& f : ds->firms_in_year(y)) located += f.location.has_value();
    row["located_firms"] = located;
    row["cash_flow_cents"] = cents_to_json(s.cash_flow_totals.at(y));
    auto io = ds->manifest.io_totals.find(y);
    row["io_total_cents"] = io == ds->manifest.io_totals.end() ? Json(nullptr) : cents_to_json(io->second);
    per_year.push_back(std::move(row));
  }
  out["per_year"] = std::move(per_year);
  int max_level = 0;
  for (const auto& [code, r] : ds->regions.entries()) max_level = std::max(max_level, r.level);
  out["region_levels"] = max_level;
  Json trends = Json::object();
  for (const auto& [code, t] : ds->manifest.planted_trends) trends[code] = t;
  out["planted_trends"] = std::move(trends);
  return out;
}

BinsQuery BinsQuery::from(const Params& p) {
  BinsQuery q;
  q.year = int_param(p, "year");
  q.resolution = int_param(p, "resolution");
  if (q.resolution < 0 || q.resolution > geo::kMaxResolution) {
    throw ApiError(400, "resolution must be in [0, " + std::to_string(geo::kMaxResolution) + "]");
  }
  q.metric = metric_param(p);
  const auto mode = string_param(p, "mode", "absolute");
  if (mode != "absolute" && mode != "delta") throw ApiError(400, "mode must be 'absolute' or 'delta'");
  q.delta = mode == "delta";
  if (auto it = p.find("model"); it != p.end() && !it->second.empty()) q.model_id = it->second;
  q.hide_unrepresented = bool_param(p, "hide_unrepresented", false);
  if (q.hide_unrepresented && !q.model_id) throw ApiError(400, "hide_unrepresented needs a model");
  return q;
}

Json bins_body(const DatasetSnapshot& ds, const BinsQuery& q, const ModelEntry* model) {
  if (!ds->has_year(q.year)) throw NotFound("dataset '" + ds->dataset_id + "' has no year " + std::to_string(q.year));
  const auto prev_year = ds->previous_year(q.year);
  if (q.delta && !prev_year) {
    throw ApiError(400, "no delta for " + std::to_string(q.year) + ": it is the first year of the dataset");
  }
  if (q.model_id && (!model || model->model->model_id != *q.model_id)) throw NotFound("unknown model '" + *q.model_id + "'");
  if (model) require_same_dataset(*model, ds);

  // Layers restricted to a model's firms are cheap enough to recompute.
  auto layer_for = [&](int year) -> geo::HexBinLayer {
    if (q.hide_unrepresented) {
      const auto keep = flow::model_membership(*model->model);
      return geo::aggregate_firms(restrict_to(ds->firms_in_year(year), keep), year, q.resolution, q.metric);
    }
    const std::string key = std::to_string(year) + "|" + std::to_string(q.resolution) + "|" +
                            std::string(geo::to_string(q.metric));
    return *ds.cache->get_or_compute(key, [&] { return geo::aggregate_bins(*ds, year, q.resolution, q.metric); });
  };

  Json out;
  out["dataset_id"] = ds->dataset_id;
  out["version"] = model ? combine_versions({ds.version, model->version}) : ds.version;
  out["year"] = q.year;
  out["resolution"] = q.resolution;
  out["metric"] = std::string(geo::to_string(q.metric));
  out["mode"] = q.delta ? "delta" : "absolute";
  out["model_id"] = q.model_id ? Json(*q.model_id) : Json(nullptr);
  out["hide_unrepresented"] = q.hide_unrepresented;
  out["edge_length_m"] = geo::edge_length_m(q.resolution);

  geo::HexBinLayer current = layer_for(q.year);
  out["meta"] = meta_json(current.meta);
  Json bins = Json::array();
  if (q.delta) {
    const geo::HexBinLayer previous = layer_for(*prev_year);
    out["previous_year"] = *prev_year;
    for (const auto& b : geo::temporal_delta(current, previous, q.metric).bins) {
      Json row;
      row["bin"] = geo::to_string(b.index);
      row["q"] = b.index.q;
      row["r"] = b.index.r;
      row["center"] = to_json(b.center);
      row["previous"] = cents_to_json(b.previous);
      row["current"] = cents_to_json(b.current);
      row["delta"] = cents_to_json(b.delta);
      row["magnitude"] = cents_to_json(b.magnitude);
      bins.push_back(std::move(row));
    }
  } else {
    out["previous_year"] = prev_year ? Json(*prev_year) : Json(nullptr);
    if (prev_year) geo::annotate_deltas(current, layer_for(*prev_year));
    for (const auto& b : current.bins) bins.push_back(bin_json(b, q.metric));
  }
  out["bins"] = std::move(bins);
  return out;
}

RegionsQuery RegionsQuery::from(const Params& p) {
  RegionsQuery q;
  q.year = int_param(p, "year");
  q.level = int_param(p, "level", 1);
  q.metric = metric_param(p);
  q.normalize = bool_param(p, "normalize", false);
  return q;
}

Json regions_body(const DatasetSnapshot& ds, const RegionsQuery& q) {
  std::vector<geo::RegionMetrics> regions;
  try {
    regions = geo::aggregate_regions(*ds, q.year, q.level, q.metric, q.normalize);
  } catch (const DomainError& e) {
    throw ApiError(400, e.what());
  }
  Json out;
  out["dataset_id"] = ds->dataset_id;
  out["version"] = ds.version;
  out["year"] = q.year;
  out["level"] = q.level;
  out["metric"] = std::string(geo::to_string(q.metric));
  out["normalize"] = q.normalize;
  Json list = Json::array();
  for (const auto& r : regions) {
    Json row;
    row["region_code"] = r.region_code;
    row["name"] = r.name;
    row["firm_count"] = r.firm_count;
    row["cash_flow_cents"] = cents_to_json(r.cash_flow_cents);
    row["value"] = cents_to_json(q.metric == geo::Metric::FirmCount ? r.firm_count : r.cash_flow_cents);
    row["area_km2"] = r.area_km2 ? Json(*r.area_km2) : Json(nullptr);
    row["normalized"] = r.normalized ? Json(*r.normalized) : Json(nullptr);
    row["sector_breakdown"] = to_json(r.sector_breakdown);
    list.push_back(std::move(row));
  }
  out["regions"] = std::move(list);
  return out;
}

Json model_summary(const ModelEntry& m) {
  Json row;
  row["model_id"] = m->model_id;
  row["dataset_id"] = m->dataset_id;
  row["year"] = m->year;
  row["constraint_set_id"] = m->constraint_set_id;
  row["provenance"] = std::string(to_string(m->provenance));
  row["edge_count"] = m->edges.size();
  Cents total = 0;
  for (const auto& e : m->edges) total += e.amount_cents;
  row["total_cents"] = cents_to_json(total);
  row["max_relative_residual"] = m->residuals.max_relative_residual;
  row["all_satisfied"] = m->residuals.all_constraints_satisfied();
  row["has_rules"] = m.rules.has_value();
  row["version"] = m.version;
  return row;
}

Json models_body(std::span<const ModelEntry> models, const std::string& version) {
  std::vector<const ModelEntry*> sorted;
  for (const auto& m : models) sorted.push_back(&m);
  std::sort(sorted.begin(), sorted.end(),
            [](const ModelEntry* a, const ModelEntry* b) { return a->model->model_id < b->model->model_id; });
  Json list = Json::array();
  for (const auto* m : sorted) list.push_back(model_summary(*m));
  Json out;
  out["version"] = version;
  out["models"] = std::move(list);
  return out;
}

Json model_body(const ModelEntry& m) {
  Json out = store::model_to_json(*m.model);
  out["version"] = m.version;
  return out;
}

FlowsQuery FlowsQuery::from(const Params& p) {
  FlowsQuery q;
  const auto text = string_param(p, "bin");
  try {
    q.bin = geo::parse_hex_index(text);
  } catch (const DomainError& e) {
    throw ApiError(400, e.what());
  }
  if (p.contains("resolution") && !p.at("resolution").empty() && int_param(p, "resolution") != q.bin.resolution) {
    throw ApiError(400, "resolution " + p.at("resolution") + " disagrees with bin " + text);
  }
  q.include_internal = bool_param(p, "include_internal", false);
  return q;
}

Json flows_body(const ModelEntry& m, const DatasetSnapshot& ds, const FlowsQuery& q) {
  const auto firms = model_firms(m, ds);
  const auto result = flow::flows_for_selection(*m.model, firms, q.bin, flow::FlowOptions{q.include_internal});
  Json out;
  out["model_id"] = m->model_id;
  out["dataset_id"] = ds->dataset_id;
  out["version"] = combine_versions({ds.version, m.version});
  out["bin"] = geo::to_string(q.bin);
  out["resolution"] = result.resolution;
  out["center"] = to_json(geo::hex_center(q.bin));
  out["include_internal"] = q.include_internal;
  out["selected_firms"] = result.selected_firms;
  out["stats"] = to_json(result.stats);
  Json arcs = Json::array();
  for (const auto& a : result.arcs) {
    Json row;
    row["direction"] = std::string(flow::to_string(a.direction));
    row["from_bin"] = a.from_bin ? to_json(*a.from_bin) : Json(nullptr);
    row["from_center"] = a.from_bin ? to_json(geo::hex_center(*a.from_bin)) : Json(nullptr);
    row["to_bin"] = a.to_bin ? to_json(*a.to_bin) : Json(nullptr);
    row["to_center"] = a.to_bin ? to_json(geo::hex_center(*a.to_bin)) : Json(nullptr);
    row["amount_cents"] = cents_to_json(a.amount_cents);
    row["relative_weight"] = a.relative_weight;
    arcs.push_back(std::move(row));
  }
  out["arcs"] = std::move(arcs);
  return out;
}

Json diff_body(const ModelEntry& a, const DatasetSnapshot& ds_a, const ModelEntry& b, const DatasetSnapshot& ds_b) {
  flow::ModelDiff d;
  try {
    d = flow::compare_models(*a.model, model_firms(a, ds_a), *b.model, model_firms(b, ds_b));
  } catch (const DomainError& e) {
    throw ApiError(400, e.what());
  }
  Json out;
  out["a"] = a->model_id;
  out["b"] = b->model_id;
  out["version"] = combine_versions({a.version, b.version});
  out["identical"] = d.empty();
  Json adds = Json::array(), rems = Json::array(), changes = Json::array(), pairs = Json::array();
  for (const auto& e : d.additions) adds.push_back(edge_json(e));
  for (const auto& e : d.removals) rems.push_back(edge_json(e));
  for (const auto& c : d.changes) {
    changes.push_back(Json{{"src", c.src},
                           {"dst", c.dst},
                           {"amount_a_cents", cents_to_json(c.amount_a)},
                           {"amount_b_cents", cents_to_json(c.amount_b)},
                           {"delta_cents", cents_to_json(c.delta)}});
  }
  for (const auto& s : d.sector_pairs) {
    pairs.push_back(Json{{"from", s.pair.from.str()},
                         {"to", s.pair.to.str()},
                         {"total_a_cents", cents_to_json(s.total_a)},
                         {"total_b_cents", cents_to_json(s.total_b)},
                         {"delta_cents", cents_to_json(s.delta)}});
  }
  out["additions"] = std::move(adds);
  out["removals"] = std::move(rems);
  out["changes"] = std::move(changes);
  out["sector_pairs"] = std::move(pairs);
  return out;
}

std::pair<int, Json> parse_body(std::string_view text, const SectorRegistry* sectors) {
  auto outcome = dsl::parse_rules_collect(text, dsl::ParseOptions{sectors});
  Json out;
  out["ok"] = outcome.errors.empty();
  out["constraint_set_id"] = outcome.errors.empty() ? Json(outcome.set.id()) : Json(nullptr);
  out["constraints"] = constraint_list(outcome.set);
  Json errors = Json::array();
  for (const auto& e : outcome.errors) {
    errors.push_back(Json{{"line", e.line}, {"column", e.column}, {"message", e.message}});
  }
  out["errors"] = std::move(errors);
  return {outcome.errors.empty() ? 200 : 422, out};
}

Json validate_body(const ModelEntry& m, const DatasetSnapshot& ds, const dsl::ConstraintSet& cs) {
  const auto report = inference::validate(*m.model, model_firms(m, ds), cs);
  Json out;
  out["model_id"] = m->model_id;
  out["dataset_id"] = ds->dataset_id;
  out["version"] = combine_versions({ds.version, m.version});
  out["constraint_set_id"] = cs.id();
  out["satisfied"] = report.all_constraints_satisfied();
  out["residuals"] = store::residuals_to_json(report);
  return out;
}

std::string smtlib_export(const ModelEntry& m, const DatasetSnapshot& ds) {
  if (!m.rules) {
    throw ApiError(404, "rules of constraint set '" + m->constraint_set_id + "' are not stored");
  }
  const auto cs = dsl::parse_rules(*m.rules, dsl::ParseOptions{&ds->sectors});
  return inference::emit_smtlib(model_firms(m, ds), cs).text;
}

Json error_body(int status, const std::string& message, const std::string& version,
                std::optional<std::pair<std::size_t, std::size_t>> location) {
  Json err;
  err["status"] = status;
  err["message"] = message;
  if (location) {
    err["line"] = location->first;
    err["column"] = location->second;
  }
  Json out;
  out["error"] = std::move(err);
  out["version"] = version;
  return out;
}

std::pair<int, Json> error_response(const std::exception& e, const std::string& version) {
  if (const auto* a = dynamic_cast<const ApiError*>(&e)) return {a->status(), error_body(a->status(), a->what(), version)};
  if (dynamic_cast<const NotFound*>(&e)) return {404, error_body(404, e.what(), version)};
  if (const auto* p = dynamic_cast<const ParseError*>(&e)) {
    return {422, error_body(422, p->message(), version, std::pair{p->line(), p->column()})};
  }
  if (dynamic_cast<const DomainError*>(&e)) return {400, error_body(400, e.what(), version)};
  return {500, error_body(500, e.what(), version)};
}

}  // namespace econoforge::api

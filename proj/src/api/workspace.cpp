#include "econoforge/api/workspace.hpp"

#include <mutex>

#include "econoforge/api/queries.hpp"
#include "econoforge/core/errors.hpp"
#include "econoforge/core/hash.hpp"
#include "econoforge/dsl/parser.hpp"
#include "econoforge/inference/smtlib.hpp"
#include "econoforge/inference/validator.hpp"
#include "econoforge/store/dataset_dir.hpp"

namespace econoforge::api {

Workspace::Workspace(const std::filesystem::path& data_dir) {
  for (const auto& id : store::list_datasets(data_dir)) {
    auto snap = load_snapshot(data_dir / id);
    for (auto& m : store::load_models(data_dir / id)) {
      if (m.dataset_id != id) {
        throw DomainError("model '" + m.model_id + "' stored under dataset '" + id + "' names '" + m.dataset_id + "'");
      }
      auto rules = store::load_rules(data_dir / id, m.constraint_set_id);
      auto entry = make_model_entry(std::move(m), std::move(rules));
      if (!models_.emplace(entry->model_id, entry).second) {
        throw DomainError("model id '" + entry->model_id + "' appears in more than one dataset");
      }
    }
    datasets_.emplace(id, std::move(snap));
  }
}

void Workspace::add_dataset(DatasetSnapshot ds) {
  std::unique_lock lock(mutex_);
  const std::string id = ds->dataset_id;
  if (!datasets_.emplace(id, std::move(ds)).second) throw DomainError("dataset '" + id + "' already loaded");
}

std::vector<DatasetSnapshot> Workspace::datasets() const {
  std::shared_lock lock(mutex_);
  std::vector<DatasetSnapshot> out;
  for (const auto& [id, ds] : datasets_) out.push_back(ds);
  return out;
}

DatasetSnapshot Workspace::dataset(std::string_view id) const {
  std::shared_lock lock(mutex_);
  auto it = datasets_.find(id);
  if (it == datasets_.end()) throw NotFound("unknown dataset '" + std::string(id) + "'");
  return it->second;
}

std::vector<ModelEntry> Workspace::models() const {
  std::shared_lock lock(mutex_);
  std::vector<ModelEntry> out;
  for (const auto& [id, m] : models_) out.push_back(m);
  return out;
}

ModelEntry Workspace::model(std::string_view id) const {
  auto m = find_model(id);
  if (!m) throw NotFound("unknown model '" + std::string(id) + "'");
  return *m;
}

std::optional<ModelEntry> Workspace::find_model(std::string_view id) const {
  std::shared_lock lock(mutex_);
  auto it = models_.find(id);
  if (it == models_.end()) return std::nullopt;
  return it->second;
}

ModelEntry Workspace::add_model(TransactionModel m, std::optional<std::string> rules) {
  if (!store::is_safe_id(m.model_id)) throw DomainError("model id '" + m.model_id + "' is not file-safe");
  auto entry = make_model_entry(std::move(m), std::move(rules));
  std::unique_lock lock(mutex_);
  auto ds = datasets_.find(entry->dataset_id);
  if (ds == datasets_.end()) throw DomainError("unknown dataset '" + entry->dataset_id + "'");
  auto existing = models_.find(entry->model_id);
  if (existing != models_.end() && existing->second->dataset_id != entry->dataset_id) {
    throw DomainError("model id '" + entry->model_id + "' is used by dataset '" + existing->second->dataset_id + "'");
  }
  if (ds->second.dir) {
    if (entry.rules) store::store_rules(*ds->second.dir, entry->constraint_set_id, *entry.rules);
    store::store_model(*ds->second.dir, *entry.model);
  }
  models_.insert_or_assign(entry->model_id, entry);
  return entry;
}

std::string Workspace::version() const {
  std::shared_lock lock(mutex_);
  std::vector<std::string> parts;
  for (const auto& [id, ds] : datasets_) parts.push_back(id + "=" + ds.version);
  for (const auto& [id, m] : models_) parts.push_back(id + "=" + m.version);
  return combine_versions(parts);
}

ModelEntry import_model(Workspace& ws, const store::Json& body) {
  if (!body.is_object()) throw ApiError(400, "import body must be a JSON object");
  TransactionModel m;
  std::optional<std::string> rules;
  DatasetSnapshot ds;
  try {
    if (body.contains("rules") && !body.at("rules").is_null()) rules = body.at("rules").get<std::string>();
    const std::string format = body.value("format", std::string("model"));
    if (format == "model") {
      // Id and residuals are filled in below, so a client may leave them out.
      Json doc = body;
      if (!doc.contains("model_id")) doc["model_id"] = "";
      if (!doc.contains("residuals")) doc["residuals"] = store::residuals_to_json({});
      m = store::model_from_json(doc);
      ds = ws.dataset(m.dataset_id);
    } else if (format == "smt-model") {
      ds = ws.dataset(body.at("dataset_id").get<std::string>());
      inference::SmtModelMeta meta;
      meta.dataset_id = ds->dataset_id;
      meta.year = body.at("year").get<int>();
      meta.model_id = body.value("model_id", std::string());
      meta.constraint_set_id = body.value("constraint_set_id", std::string());
      auto parsed = inference::parse_smt_model(body.at("text").get<std::string>(), ds->firms_in_year(meta.year), meta);
      if (parsed.outcome != inference::SmtOutcome::Sat) {
        throw ApiError(422, std::string("solver output reports ") +
                                (parsed.outcome == inference::SmtOutcome::Unsat ? "unsat" : "unknown") +
                                ", there is no model to import");
      }
      m = std::move(*parsed.model);
    } else {
      throw ApiError(400, "unknown import format '" + format + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ApiError(400, std::string("malformed import body: ") + e.what());
  }
  if (body.contains("model_id") && body.at("model_id").is_string()) m.model_id = body.at("model_id").get<std::string>();

  const auto firms = ds->firms_in_year(m.year);
  if (firms.empty()) throw NotFound("dataset '" + ds->dataset_id + "' has no firms in " + std::to_string(m.year));

  dsl::ConstraintSet cs;
  if (rules) {
    cs = dsl::parse_rules(*rules, dsl::ParseOptions{&ds->sectors});
    rules = dsl::pretty_print(cs);
    m.constraint_set_id = cs.id();
  } else {
    for (const auto& other : ws.models()) {
      if (other.rules && !m.constraint_set_id.empty() && other->constraint_set_id == m.constraint_set_id) {
        rules = other.rules;
        cs = dsl::parse_rules(*rules, dsl::ParseOptions{&ds->sectors});
        break;
      }
    }
  }
  m.residuals = inference::validate(m, firms, cs);
  if (m.model_id.empty()) m.model_id = "import-" + sha1_hex(store::save_model(m)).substr(0, 12);
  return ws.add_model(std::move(m), std::move(rules));
}

}  // namespace econoforge::api

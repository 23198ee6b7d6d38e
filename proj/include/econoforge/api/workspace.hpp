#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "econoforge/api/snapshot.hpp"
#include "econoforge/store/model_io.hpp"

namespace econoforge::api {

/// Datasets and models visible to the service. Datasets are read once and
/// never change afterwards; models can be added while requests run.
class Workspace {
 public:
  Workspace() = default;
  /// Loads every dataset directory under `data_dir` and its stored models.
  explicit Workspace(const std::filesystem::path& data_dir);

  /// Registers an in-memory dataset; models added for it are not persisted.
  /// DomainError when the id is taken.
  void add_dataset(DatasetSnapshot ds);

  std::vector<DatasetSnapshot> datasets() const;
  /// NotFound for an unknown id.
  DatasetSnapshot dataset(std::string_view id) const;

  std::vector<ModelEntry> models() const;
  ModelEntry model(std::string_view id) const;
  std::optional<ModelEntry> find_model(std::string_view id) const;

  /// Adds or replaces a model, writing it (and its rules) to the dataset
  /// directory when there is one. DomainError when the id is already used
  /// by a model of another dataset or the dataset is unknown.
  ModelEntry add_model(TransactionModel m, std::optional<std::string> rules);

  /// Combined hash of every dataset and model version.
  std::string version() const;

 private:
  mutable std::shared_mutex mutex_;
  std::map<std::string, DatasetSnapshot, std::less<>> datasets_;
  std::map<std::string, ModelEntry, std::less<>> models_;
};

/// Registers a model sent by a client. `body` is either a model document
/// (schema 1) or {"format": "smt-model", "dataset_id", "year", "text"} with
/// raw solver output. Both forms accept optional "rules" (rule text the
/// model is checked against) and "model_id". Residuals are always
/// recomputed here; without rules only non-negativity is checked. A missing
/// model id is derived from the content.
ModelEntry import_model(Workspace& ws, const store::Json& body);

}  // namespace econoforge::api

#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "econoforge/core/dataset.hpp"
#include "econoforge/geo/aggregation.hpp"

namespace econoforge::api {

/// Immutable view of a dataset plus its version hash. Copies share the data
/// and the layer memo.
struct DatasetSnapshot {
  std::shared_ptr<const Dataset> dataset;
  std::string version;  // first 16 hex of sha256 of the manifest document
  std::shared_ptr<geo::LayerCache> cache;
  std::optional<std::filesystem::path> dir;  // set when backed by a directory

  const Dataset& operator*() const { return *dataset; }
  const Dataset* operator->() const { return dataset.get(); }
};

/// In-memory snapshot. The version is computed from the manifest exactly as
/// save_dataset would write it, so a saved and reloaded copy matches.
DatasetSnapshot make_snapshot(Dataset ds);
DatasetSnapshot load_snapshot(const std::filesystem::path& dataset_dir);

struct ModelEntry {
  std::shared_ptr<const TransactionModel> model;
  std::string version;               // first 16 hex of sha256 of the model file
  std::optional<std::string> rules;  // canonical rule text, when known

  const TransactionModel* operator->() const { return model.get(); }
};

ModelEntry make_model_entry(TransactionModel m, std::optional<std::string> rules = std::nullopt);

/// Short stable hash over several versions, for responses that span more
/// than one object.
std::string combine_versions(const std::vector<std::string>& versions);

}  // namespace econoforge::api

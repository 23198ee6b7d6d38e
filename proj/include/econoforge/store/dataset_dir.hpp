#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "econoforge/core/dataset.hpp"
#include "econoforge/store/model_io.hpp"

namespace econoforge::store {

namespace fs = std::filesystem;

inline constexpr int kManifestSchema = 1;

/// Data files covered by the manifest checksums, in write order.
inline constexpr std::string_view kDatasetFiles[] = {"sectors.csv", "regions.csv", "firms.csv", "io_tables.csv"};

/// Writes to a sibling temporary file and renames it over `path`, so readers
/// never observe a partial file.
void write_file_atomic(const fs::path& path, std::string_view bytes);
/// NotFound when the file does not exist.
std::string read_file(const fs::path& path);

Json manifest_to_json(const std::string& dataset_id, const Manifest& m);
/// Returns the dataset id stored alongside.
std::string manifest_from_json(const Json& j, Manifest& out);

/// The manifest of `ds` with the checksums its files would have.
Manifest manifest_with_checksums(const Dataset& ds);

/// Writes <data_dir>/<dataset_id>/ with the four CSV files and
/// manifest.json (checksums filled in). Data files go first and the manifest
/// last, so a directory with a manifest is always complete. Returns the
/// manifest as written.
Manifest save_dataset(const Dataset& ds, const fs::path& data_dir);

/// Reads a dataset directory. Throws DomainError when a checksum or a
/// recorded total disagrees with the files.
Dataset load_dataset(const fs::path& dataset_dir);

/// Ids of the subdirectories of `data_dir` holding a manifest.json, sorted.
std::vector<std::string> list_datasets(const fs::path& data_dir);

fs::path model_path(const fs::path& dataset_dir, std::string_view model_id);
/// models/<model_id>.json. DomainError for an id that is not file-safe.
void store_model(const fs::path& dataset_dir, const TransactionModel& m);
std::vector<TransactionModel> load_models(const fs::path& dataset_dir);

/// constraints/<set_id>.rules holds the rule text a stored model was solved
/// against.
void store_rules(const fs::path& dataset_dir, std::string_view set_id, std::string_view text);
std::optional<std::string> load_rules(const fs::path& dataset_dir, std::string_view set_id);

}  // namespace econoforge::store

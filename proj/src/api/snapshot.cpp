#include "econoforge/api/snapshot.hpp"

#include "econoforge/core/hash.hpp"
#include "econoforge/store/dataset_dir.hpp"
#include "econoforge/store/model_io.hpp"

namespace econoforge::api {

namespace {

std::string short_hash(std::string_view bytes) { return sha256_hex(bytes).substr(0, 16); }

}  // namespace

DatasetSnapshot make_snapshot(Dataset ds) {
  DatasetSnapshot s;
  if (ds.manifest.checksums.empty()) ds.manifest = store::manifest_with_checksums(ds);
  s.version = short_hash(store::manifest_to_json(ds.dataset_id, ds.manifest).dump(2) + "\n");
  s.dataset = std::make_shared<const Dataset>(std::move(ds));
  s.cache = std::make_shared<geo::LayerCache>();
  return s;
}

DatasetSnapshot load_snapshot(const std::filesystem::path& dataset_dir) {
  DatasetSnapshot s;
  Dataset ds = store::load_dataset(dataset_dir);
  s.version = short_hash(store::read_file(dataset_dir / "manifest.json"));
  s.dataset = std::make_shared<const Dataset>(std::move(ds));
  s.cache = std::make_shared<geo::LayerCache>();
  s.dir = dataset_dir;
  return s;
}

ModelEntry make_model_entry(TransactionModel m, std::optional<std::string> rules) {
  ModelEntry e;
  e.version = short_hash(store::save_model(m));
  e.model = std::make_shared<const TransactionModel>(std::move(m));
  e.rules = std::move(rules);
  return e;
}

std::string combine_versions(const std::vector<std::string>& versions) {
  std::string joined;
  for (const auto& v : versions) {
    joined += v;
    joined.push_back('\n');
  }
  return short_hash(joined);
}

}  // namespace econoforge::api

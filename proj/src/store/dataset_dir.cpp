#include "econoforge/store/dataset_dir.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <set>
#include <sstream>
#include <unistd.h>

#include "econoforge/core/errors.hpp"
#include "econoforge/core/hash.hpp"
#include "econoforge/store/ingest.hpp"

namespace econoforge::store {

void write_file_atomic(const fs::path& path, std::string_view bytes) {
  static std::atomic<unsigned> counter{0};
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw Error("write to " + tmp.string() + " failed");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error("cannot rename onto " + path.string() + ": " + ec.message());
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFound("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json manifest_to_json(const std::string& dataset_id, const Manifest& m) {
  Json out;
  out["schema"] = kManifestSchema;
  out["dataset_id"] = dataset_id;
  out["seed"] = m.seed ? Json(*m.seed) : Json(nullptr);
  std::set<int> years;
  for (const auto& [y, n] : m.firm_counts) years.insert(y);
  for (const auto& [y, n] : m.io_totals) years.insert(y);
  Json ys = Json::array();
  for (int y : years) {
    Json row;
    row["year"] = y;
    row["firm_count"] = m.firm_counts.contains(y) ? m.firm_counts.at(y) : 0;
    row["cash_flow_cents"] = cents_to_json(m.cash_flow_totals.contains(y) ? m.cash_flow_totals.at(y) : 0);
    if (m.io_totals.contains(y)) row["io_total_cents"] = cents_to_json(m.io_totals.at(y));
    ys.push_back(std::move(row));
  }
  out["years"] = std::move(ys);
  Json trends = Json::object();
  for (const auto& [code, t] : m.planted_trends) trends[code] = t;
  out["planted_trends"] = std::move(trends);
  Json sums = Json::object();
  for (const auto& [file, sum] : m.checksums) sums[file] = sum;
  out["checksums"] = std::move(sums);
  return out;
}

std::string manifest_from_json(const Json& j, Manifest& out) {
  try {
    if (j.at("schema") != kManifestSchema) {
      throw DomainError("unsupported manifest schema " + j.at("schema").dump());
    }
    out = Manifest{};
    if (!j.at("seed").is_null()) out.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& row : j.at("years")) {
      const int y = row.at("year").get<int>();
      const auto n = row.at("firm_count").get<std::int64_t>();
      if (n > 0) {
        out.firm_counts[y] = n;
        out.cash_flow_totals[y] = cents_from_json(row.at("cash_flow_cents"));
      }
      if (row.contains("io_total_cents")) out.io_totals[y] = cents_from_json(row.at("io_total_cents"));
    }
    for (const auto& [code, t] : j.at("planted_trends").items()) out.planted_trends[code] = t.get<std::string>();
    for (const auto& [file, sum] : j.at("checksums").items()) out.checksums[file] = sum.get<std::string>();
    return j.at("dataset_id").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("malformed manifest: ") + e.what());
  }
}

namespace {

std::vector<std::string> dataset_files(const Dataset& ds) {
  return {export_sectors(ds.sectors), export_regions(ds.regions), export_firms(ds.firms),
          export_io_tables(ds.io_tables)};
}

}  // namespace

Manifest manifest_with_checksums(const Dataset& ds) {
  Manifest m = ds.manifest;
  m.checksums.clear();
  const auto contents = dataset_files(ds);
  for (std::size_t i = 0; i < contents.size(); ++i) m.checksums[std::string(kDatasetFiles[i])] = sha256_hex(contents[i]);
  return m;
}

Manifest save_dataset(const Dataset& ds, const fs::path& data_dir) {
  if (!is_safe_id(ds.dataset_id)) throw DomainError("dataset id '" + ds.dataset_id + "' is not file-safe");
  const fs::path dir = data_dir / ds.dataset_id;
  const auto contents = dataset_files(ds);
  Manifest m = ds.manifest;
  m.checksums.clear();
  for (std::size_t i = 0; i < contents.size(); ++i) {
    const std::string name(kDatasetFiles[i]);
    write_file_atomic(dir / name, contents[i]);
    m.checksums[name] = sha256_hex(contents[i]);
  }
  fs::create_directories(dir / "models");
  fs::create_directories(dir / "constraints");
  write_file_atomic(dir / "manifest.json", manifest_to_json(ds.dataset_id, m).dump(2) + "\n");
  return m;
}

Dataset load_dataset(const fs::path& dataset_dir) {
  Dataset ds;
  const std::string id = manifest_from_json(parse_json(read_file(dataset_dir / "manifest.json")), ds.manifest);
  if (id != dataset_dir.filename().string()) {
    throw DomainError("manifest names dataset '" + id + "' but lives in '" + dataset_dir.filename().string() + "'");
  }
  std::map<std::string, std::string> contents;
  for (auto name : kDatasetFiles) {
    const std::string file(name);
    contents[file] = read_file(dataset_dir / file);
    auto it = ds.manifest.checksums.find(file);
    if (it == ds.manifest.checksums.end()) throw DomainError("manifest has no checksum for " + file);
    if (it->second != sha256_hex(contents[file])) throw DomainError("checksum mismatch for " + file);
  }

  IngestSources src;
  src.dataset_id = id;
  src.firms_csv = contents["firms.csv"];
  src.io_csv = contents["io_tables.csv"];
  src.sectors_csv = contents["sectors.csv"];
  src.regions_csv = contents["regions.csv"];
  auto report = ingest_dataset(src);
  if (!report.clean()) {
    const auto& e = report.firm_errors.empty() ? report.io_errors.front() : report.firm_errors.front();
    throw DomainError("stored dataset has invalid rows, first at line " + std::to_string(e.line) + ": " + e.message);
  }
  Manifest recorded = ds.manifest;
  ds = std::move(report.dataset);
  Manifest recomputed = ds.manifest;  // ingest_dataset filled in the totals
  if (recomputed.firm_counts != recorded.firm_counts || recomputed.cash_flow_totals != recorded.cash_flow_totals ||
      recomputed.io_totals != recorded.io_totals) {
    throw DomainError("manifest totals disagree with the stored data of '" + id + "'");
  }
  ds.manifest = std::move(recorded);
  return ds;
}

std::vector<std::string> list_datasets(const fs::path& data_dir) {
  std::vector<std::string> out;
  std::error_code ec;
  if (!fs::is_directory(data_dir, ec)) return out;
  for (const auto& entry : fs::directory_iterator(data_dir)) {
    if (entry.is_directory() && fs::exists(entry.path() / "manifest.json")) {
      out.push_back(entry.path().filename().string());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

fs::path model_path(const fs::path& dataset_dir, std::string_view model_id) {
  if (!is_safe_id(model_id)) throw DomainError("model id '" + std::string(model_id) + "' is not file-safe");
  return dataset_dir / "models" / (std::string(model_id) + ".json");
}

void store_model(const fs::path& dataset_dir, const TransactionModel& m) {
  write_file_atomic(model_path(dataset_dir, m.model_id), save_model(m));
}

std::vector<TransactionModel> load_models(const fs::path& dataset_dir) {
  std::vector<TransactionModel> out;
  std::error_code ec;
  const fs::path dir = dataset_dir / "models";
  if (!fs::is_directory(dir, ec)) return out;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) out.push_back(load_model(read_file(f)));
  return out;
}

void store_rules(const fs::path& dataset_dir, std::string_view set_id, std::string_view text) {
  if (!is_safe_id(set_id)) throw DomainError("constraint set id '" + std::string(set_id) + "' is not file-safe");
  write_file_atomic(dataset_dir / "constraints" / (std::string(set_id) + ".rules"), text);
}

std::optional<std::string> load_rules(const fs::path& dataset_dir, std::string_view set_id) {
  if (!is_safe_id(set_id)) return std::nullopt;
  const fs::path p = dataset_dir / "constraints" / (std::string(set_id) + ".rules");
  std::error_code ec;
  if (!fs::exists(p, ec)) return std::nullopt;
  return read_file(p);
}

}  // namespace econoforge::store

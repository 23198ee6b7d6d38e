#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "econoforge/api/snapshot.hpp"
#include "econoforge/core/errors.hpp"
#include "econoforge/dsl/constraint.hpp"
#include "econoforge/flow/flows.hpp"
#include "econoforge/geo/aggregation.hpp"
#include "econoforge/inference/solver.hpp"
#include "econoforge/store/model_io.hpp"

// Response bodies shared by the HTTP handlers and the command line tool, so
// both print the same bytes for the same question.
namespace econoforge::api {

using store::Json;

/// A request the client got wrong, with the HTTP status to report.
class ApiError : public Error {
 public:
  ApiError(int status, const std::string& message) : Error(message), status_(status) {}
  int status() const noexcept { return status_; }

 private:
  int status_;
};

using Params = std::map<std::string, std::string>;

/// Compact JSON plus a trailing newline.
std::string render(const Json& body);

int int_param(const Params& p, const std::string& key, std::optional<int> fallback = std::nullopt);
bool bool_param(const Params& p, const std::string& key, bool fallback);
std::string string_param(const Params& p, const std::string& key, std::optional<std::string> fallback = std::nullopt);

// Encoders for the domain types.
Json to_json(const geo::HexIndex& h);
Json to_json(const LatLon& p);
Json to_json(const std::map<SectorCode, double>& breakdown);
Json to_json(const flow::SelectionStats& s);
Json to_json(const inference::SolveReport& r);
Json constraint_list(const dsl::ConstraintSet& cs);

Json datasets_body(std::span<const DatasetSnapshot> datasets);
Json summary_body(const DatasetSnapshot& ds);

struct BinsQuery {
  int year = 0;
  int resolution = 0;
  geo::Metric metric = geo::Metric::CashFlow;
  bool delta = false;
  std::optional<std::string> model_id;
  bool hide_unrepresented = false;

  static BinsQuery from(const Params& p);
};

/// `model` must be given when q.model_id is set.
Json bins_body(const DatasetSnapshot& ds, const BinsQuery& q, const ModelEntry* model = nullptr);

struct RegionsQuery {
  int year = 0;
  int level = 1;
  geo::Metric metric = geo::Metric::CashFlow;
  bool normalize = false;

  static RegionsQuery from(const Params& p);
};

Json regions_body(const DatasetSnapshot& ds, const RegionsQuery& q);

/// One summary line per model, by ascending id.
Json models_body(std::span<const ModelEntry> models, const std::string& version);
Json model_summary(const ModelEntry& m);
Json model_body(const ModelEntry& m);

struct FlowsQuery {
  geo::HexIndex bin;
  bool include_internal = false;

  static FlowsQuery from(const Params& p);
};

Json flows_body(const ModelEntry& m, const DatasetSnapshot& ds, const FlowsQuery& q);
Json diff_body(const ModelEntry& a, const DatasetSnapshot& ds_a, const ModelEntry& b, const DatasetSnapshot& ds_b);

/// (status, body): 200 with the constraint list, or 422 with every error.
std::pair<int, Json> parse_body(std::string_view text, const SectorRegistry* sectors = nullptr);

/// Validation report of a model against a constraint set.
Json validate_body(const ModelEntry& m, const DatasetSnapshot& ds, const dsl::ConstraintSet& cs);

/// SMT-LIB text of the problem `m` was solved against. ApiError 404 when
/// the rule text of its constraint set is unknown.
std::string smtlib_export(const ModelEntry& m, const DatasetSnapshot& ds);

/// Body for any failure; `version` may be empty.
Json error_body(int status, const std::string& message, const std::string& version,
                std::optional<std::pair<std::size_t, std::size_t>> location = std::nullopt);

/// Maps a thrown exception to (status, body).
std::pair<int, Json> error_response(const std::exception& e, const std::string& version);

}  // namespace econoforge::api

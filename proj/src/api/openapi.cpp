#include "econoforge/api/server.hpp"

namespace econoforge::api {

namespace {

Json param(const std::string& name, const std::string& in, const std::string& type, bool required,
           const std::string& description) {
  Json p;
  p["name"] = name;
  p["in"] = in;
  p["required"] = required;
  p["schema"] = Json{{"type", type}};
  p["description"] = description;
  return p;
}

Json ref(const std::string& schema) { return Json{{"$ref", "#/components/schemas/" + schema}}; }

Json json_response(const std::string& description, const std::string& schema) {
  return Json{{"description", description}, {"content", {{"application/json", {{"schema", ref(schema)}}}}}};
}

Json op(const std::string& summary, Json parameters, Json responses, std::optional<Json> request = std::nullopt) {
  Json o;
  o["summary"] = summary;
  if (!parameters.empty()) o["parameters"] = std::move(parameters);
  if (request) o["requestBody"] = std::move(*request);
  responses["default"] = json_response("Error with status, message and, for rule errors, line/column", "Error");
  o["responses"] = std::move(responses);
  return o;
}

Json object_schema(std::initializer_list<std::pair<const char*, Json>> props) {
  Json s;
  s["type"] = "object";
  Json p = Json::object();
  for (const auto& [k, v] : props) p[k] = v;
  s["properties"] = std::move(p);
  return s;
}

Json t(const char* type) { return Json{{"type", type}}; }

// Cents are integers up to 2^53 - 1 and decimal strings beyond.
Json cents() { return Json{{"oneOf", Json::array({t("integer"), t("string")})}}; }

}  // namespace

Json openapi_document() {
  const Json dataset_id = param("id", "path", "string", true, "Dataset id");
  const Json model_id = param("id", "path", "string", true, "Model id");

  Json paths;
  paths["/datasets"]["get"] = op("List datasets", Json::array(), {{"200", json_response("Datasets", "DatasetList")}});
  paths["/datasets/{id}/summary"]["get"] =
      op("Years, sectors and exact totals of a dataset", Json::array({dataset_id}),
         {{"200", json_response("Summary", "DatasetSummary")}});
  paths["/datasets/{id}/bins"]["get"] = op(
      "Hexagon layer of one year, absolute or as change against the previous year",
      Json::array({dataset_id, param("year", "query", "integer", true, "Year"),
                   param("resolution", "query", "integer", true, "Hexagon resolution 0..12"),
                   param("metric", "query", "string", false, "firm_count | cash_flow (default)"),
                   param("mode", "query", "string", false, "absolute (default) | delta"),
                   param("model", "query", "string", false, "Model id, needed by hide_unrepresented"),
                   param("hide_unrepresented", "query", "boolean", false,
                         "Only count firms with at least one edge in the model")}),
      {{"200", json_response("Layer", "BinLayer")}});
  paths["/datasets/{id}/regions"]["get"] = op(
      "Administrative region aggregates",
      Json::array({dataset_id, param("year", "query", "integer", true, "Year"),
                   param("level", "query", "integer", false, "Region level, 1 = country (default)"),
                   param("metric", "query", "string", false, "firm_count | cash_flow (default)"),
                   param("normalize", "query", "boolean", false, "Divide by area in km2")}),
      {{"200", json_response("Regions", "RegionLayer")}});
  paths["/models"]["get"] = op("List models",
                               Json::array({param("dataset", "query", "string", false, "Only this dataset")}),
                               {{"200", json_response("Models", "ModelList")}});
  paths["/models"]["post"] =
      op("Import a model document or raw SMT solver output", Json::array(),
         {{"201", json_response("Registered model", "ModelSummary")}},
         Json{{"required", true}, {"content", {{"application/json", {{"schema", ref("ImportRequest")}}}}}});
  paths["/models/solve"]["post"] =
      op("Queue a solve job", Json::array(), {{"202", json_response("Queued job", "Job")}},
         Json{{"required", true}, {"content", {{"application/json", {{"schema", ref("SolveRequest")}}}}}});
  paths["/models/{id}"]["get"] = op("Full model with edges and residuals", Json::array({model_id}),
                                    {{"200", json_response("Model", "Model")}});
  paths["/models/{id}/flows"]["get"] = op(
      "Flows into and out of the firms in one hexagon",
      Json::array({model_id, param("bin", "query", "string", true, "Hexagon as resolution:q:r"),
                   param("resolution", "query", "integer", false, "Must agree with bin when given"),
                   param("include_internal", "query", "boolean", false, "Count edges inside the selection")}),
      {{"200", json_response("Flows", "Flows")}});
  paths["/models/{id}/diff/{other_id}"]["get"] =
      op("Edge and sector-pair differences between two models of one dataset",
         Json::array({model_id, param("other_id", "path", "string", true, "Second model")}),
         {{"200", json_response("Differences", "ModelDiff")}});
  paths["/models/{id}/export/smtlib"]["get"] =
      op("SMT-LIB 2.6 (QF_LIA) encoding of the problem the model was solved against", Json::array({model_id}),
         {{"200", Json{{"description", "SMT-LIB script as an attachment"},
                       {"content", {{"text/plain", {{"schema", t("string")}}}}}}}});
  paths["/constraints/parse"]["post"] = op(
      "Parse rule text", Json::array(),
      {{"200", json_response("Parsed rules", "ParseResult")}, {"422", json_response("Rule errors", "ParseResult")}},
      Json{{"required", true},
           {"content",
            {{"text/plain", {{"schema", t("string")}}},
             {"application/json",
              {{"schema", object_schema({{"text", t("string")}, {"dataset_id", t("string")}})}}}}}});
  paths["/jobs"]["get"] = op("List jobs", Json::array(), {{"200", json_response("Jobs", "JobList")}});
  paths["/jobs/{id}"]["get"] = op("Job state", Json::array({param("id", "path", "string", true, "Job id")}),
                                  {{"200", json_response("Job", "Job")}});
  paths["/jobs/{id}/cancel"]["post"] =
      op("Cancel a queued or running job; 409 once it has finished",
         Json::array({param("id", "path", "string", true, "Job id")}), {{"200", json_response("Job", "Job")}});
  paths["/health"]["get"] = op("Liveness", Json::array(), {{"200", json_response("OK", "Health")}});

  Json schemas;
  schemas["Error"] = object_schema(
      {{"error", object_schema({{"status", t("integer")},
                                {"message", t("string")},
                                {"line", t("integer")},
                                {"column", t("integer")}})},
       {"version", t("string")}});
  schemas["Health"] = object_schema({{"status", t("string")}, {"version", t("string")}});
  schemas["DatasetList"] = object_schema(
      {{"version", t("string")},
       {"datasets", Json{{"type", "array"},
                         {"items", object_schema({{"dataset_id", t("string")},
                                                  {"version", t("string")},
                                                  {"years", Json{{"type", "array"}, {"items", t("integer")}}},
                                                  {"sectors", t("integer")}})}}}});
  schemas["DatasetSummary"] = object_schema(
      {{"dataset_id", t("string")},
       {"version", t("string")},
       {"years", Json{{"type", "array"}, {"items", t("integer")}}},
       {"sectors", Json{{"type", "array"}, {"items", object_schema({{"code", t("string")}, {"name", t("string")}})}}},
       {"per_year", Json{{"type", "array"},
                         {"items", object_schema({{"year", t("integer")},
                                                  {"firm_count", t("integer")},
                                                  {"located_firms", t("integer")},
                                                  {"cash_flow_cents", cents()},
                                                  {"io_total_cents", cents()}})}}},
       {"region_levels", t("integer")},
       {"planted_trends", Json{{"type", "object"}, {"additionalProperties", t("string")}}}});
  const Json center = object_schema({{"lat", t("number")}, {"lon", t("number")}});
  schemas["BinLayer"] = object_schema(
      {{"dataset_id", t("string")},
       {"version", t("string")},
       {"year", t("integer")},
       {"resolution", t("integer")},
       {"metric", t("string")},
       {"mode", t("string")},
       {"model_id", t("string")},
       {"hide_unrepresented", t("boolean")},
       {"edge_length_m", t("number")},
       {"meta", object_schema({{"total_firms", t("integer")},
                               {"located_firms", t("integer")},
                               {"unlocated_firms", t("integer")},
                               {"total_cash_flow_cents", cents()},
                               {"located_cash_flow_cents", cents()}})},
       {"previous_year", t("integer")},
       {"bins", Json{{"type", "array"},
                     {"items", object_schema({{"bin", t("string")},
                                              {"q", t("integer")},
                                              {"r", t("integer")},
                                              {"center", center},
                                              {"firm_count", t("integer")},
                                              {"cash_flow_cents", cents()},
                                              {"value", cents()},
                                              {"sector_breakdown", t("object")},
                                              {"delta_vs_previous_year", cents()},
                                              {"previous", cents()},
                                              {"current", cents()},
                                              {"delta", cents()},
                                              {"magnitude", cents()}})}}}});
  schemas["RegionLayer"] = object_schema(
      {{"dataset_id", t("string")},
       {"version", t("string")},
       {"year", t("integer")},
       {"level", t("integer")},
       {"metric", t("string")},
       {"normalize", t("boolean")},
       {"regions", Json{{"type", "array"},
                        {"items", object_schema({{"region_code", t("string")},
                                                 {"name", t("string")},
                                                 {"firm_count", t("integer")},
                                                 {"cash_flow_cents", cents()},
                                                 {"value", cents()},
                                                 {"area_km2", t("number")},
                                                 {"normalized", t("number")},
                                                 {"sector_breakdown", t("object")}})}}}});
  schemas["ModelSummary"] = object_schema({{"model_id", t("string")},
                                           {"dataset_id", t("string")},
                                           {"year", t("integer")},
                                           {"constraint_set_id", t("string")},
                                           {"provenance", t("string")},
                                           {"edge_count", t("integer")},
                                           {"total_cents", cents()},
                                           {"max_relative_residual", t("number")},
                                           {"all_satisfied", t("boolean")},
                                           {"has_rules", t("boolean")},
                                           {"version", t("string")}});
  schemas["ModelList"] = object_schema(
      {{"version", t("string")}, {"models", Json{{"type", "array"}, {"items", ref("ModelSummary")}}}});
  schemas["Residuals"] = object_schema({{"max_relative_residual", t("number")},
                                        {"all_satisfied", t("boolean")},
                                        {"sector_pairs", t("array")},
                                        {"constraints", t("array")}});
  schemas["Model"] = object_schema(
      {{"schema", t("integer")},
       {"model_id", t("string")},
       {"dataset_id", t("string")},
       {"year", t("integer")},
       {"constraint_set_id", t("string")},
       {"provenance", t("string")},
       {"edge_count", t("integer")},
       {"edges", Json{{"type", "array"},
                      {"items", object_schema({{"src", t("string")}, {"dst", t("string")}, {"amount_cents", cents()}})}}},
       {"residuals", ref("Residuals")},
       {"version", t("string")}});
  schemas["Flows"] = object_schema(
      {{"model_id", t("string")},
       {"dataset_id", t("string")},
       {"version", t("string")},
       {"bin", t("string")},
       {"resolution", t("integer")},
       {"center", center},
       {"include_internal", t("boolean")},
       {"selected_firms", t("integer")},
       {"stats", object_schema({{"inflow_cents", cents()},
                                {"outflow_cents", cents()},
                                {"pct_inward", t("number")},
                                {"pct_outward", t("number")},
                                {"overall_flow_cents", cents()},
                                {"internal_cents", cents()}})},
       {"arcs", Json{{"type", "array"},
                     {"items", object_schema({{"direction", Json{{"type", "string"},
                                                                 {"enum", {"out-of-selection", "into-selection"}}}},
                                              {"from_bin", t("string")},
                                              {"from_center", center},
                                              {"to_bin", t("string")},
                                              {"to_center", center},
                                              {"amount_cents", cents()},
                                              {"relative_weight", t("number")}})}}}});
  schemas["ModelDiff"] = object_schema({{"a", t("string")},
                                        {"b", t("string")},
                                        {"version", t("string")},
                                        {"identical", t("boolean")},
                                        {"additions", t("array")},
                                        {"removals", t("array")},
                                        {"changes", t("array")},
                                        {"sector_pairs", t("array")}});
  schemas["ParseResult"] = object_schema(
      {{"ok", t("boolean")},
       {"constraint_set_id", t("string")},
       {"constraints", Json{{"type", "array"},
                            {"items", object_schema({{"id", t("string")},
                                                     {"kind", t("string")},
                                                     {"explicit_id", t("boolean")},
                                                     {"text", t("string")}})}}},
       {"errors", Json{{"type", "array"},
                       {"items", object_schema({{"line", t("integer")},
                                                {"column", t("integer")},
                                                {"message", t("string")}})}}},
       {"version", t("string")}});
  schemas["SolveRequest"] = object_schema(
      {{"dataset_id", t("string")},
       {"year", t("integer")},
       {"rules", t("string")},
       {"include_io", t("boolean")},
       {"model_id", t("string")},
       {"params", object_schema({{"max_iterations", t("integer")}, {"tolerance", t("number")}, {"seed", t("integer")}})}});
  schemas["ImportRequest"] = object_schema({{"format", Json{{"type", "string"}, {"enum", {"model", "smt-model"}}}},
                                            {"dataset_id", t("string")},
                                            {"year", t("integer")},
                                            {"text", t("string")},
                                            {"rules", t("string")},
                                            {"model_id", t("string")}});
  schemas["Job"] = object_schema(
      {{"job_id", t("string")},
       {"status", Json{{"type", "string"},
                       {"enum", {"queued", "running", "done", "failed", "infeasible", "cancelled"}}}},
       {"dataset_id", t("string")},
       {"year", t("integer")},
       {"constraint_set_id", t("string")},
       {"constraint_count", t("integer")},
       {"include_io", t("boolean")},
       {"progress", object_schema({{"iteration", t("integer")},
                                   {"max_iterations", t("integer")},
                                   {"max_relative_residual", t("number")}})},
       {"result_model_id", t("string")},
       {"report", object_schema({{"status", t("string")},
                                 {"iterations", t("integer")},
                                 {"wall_time_ms", t("integer")},
                                 {"max_relative_residual", t("number")},
                                 {"witnesses", Json{{"type", "array"}, {"items", t("string")}}},
                                 {"message", t("string")},
                                 {"residuals", ref("Residuals")}})},
       {"error", t("string")},
       {"version", t("string")}});
  schemas["JobList"] = object_schema({{"version", t("string")}, {"jobs", Json{{"type", "array"}, {"items", ref("Job")}}}});

  Json doc;
  doc["openapi"] = "3.0.3";
  doc["info"] = Json{{"title", "econoforge"},
                     {"version", "1"},
                     {"description",
                      "Every JSON body carries a `version` hash of the datasets and models it was computed from; "
                      "the same value is sent in the X-Econoforge-Version header. Money is integer cents, written "
                      "as a decimal string when its magnitude exceeds 2^53 - 1."}};
  doc["paths"] = std::move(paths);
  doc["components"]["schemas"] = std::move(schemas);
  return doc;
}

}  // namespace econoforge::api

#include "econoforge/store/model_io.hpp"

#include <charconv>

#include "econoforge/core/errors.hpp"

namespace econoforge::store {

Json cents_to_json(Cents v) {
  if (v > kMaxSafeJsonInteger || v < -kMaxSafeJsonInteger) return std::to_string(v);
  return v;
}

Cents cents_from_json(const Json& j) {
  if (j.is_number_integer()) return j.get<Cents>();
  if (j.is_string()) {
    const auto& s = j.get_ref<const std::string&>();
    Cents v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (!s.empty() && ec == std::errc{} && ptr == s.data() + s.size()) return v;
  }
  throw DomainError("expected integer cents, got " + j.dump());
}

namespace {

const Json& field(const Json& obj, const char* key) {
  if (!obj.is_object()) throw DomainError(std::string("expected an object holding '") + key + "'");
  auto it = obj.find(key);
  if (it == obj.end()) throw DomainError(std::string("missing field '") + key + "'");
  return *it;
}

std::string string_field(const Json& obj, const char* key) {
  const Json& v = field(obj, key);
  if (!v.is_string()) throw DomainError(std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

SectorCode sector_field(const Json& obj, const char* key) {
  auto s = string_field(obj, key);
  if (!SectorCode::is_valid(s)) throw DomainError("invalid sector code '" + s + "'");
  return SectorCode(s);
}

}  // namespace

Json residuals_to_json(const ResidualReport& r) {
  Json out;
  out["max_relative_residual"] = r.max_relative_residual;
  out["all_satisfied"] = r.all_constraints_satisfied();
  Json pairs = Json::array();
  for (const auto& p : r.sector_pairs) {
    pairs.push_back(Json{{"constraint_id", p.constraint_id},
                         {"from", p.pair.from.str()},
                         {"to", p.pair.to.str()},
                         {"target_cents", cents_to_json(p.target_cents)},
                         {"achieved_cents", cents_to_json(p.achieved_cents)},
                         {"residual_cents", cents_to_json(p.residual_cents)}});
  }
  out["sector_pairs"] = std::move(pairs);
  Json cons = Json::array();
  for (const auto& c : r.constraints) {
    cons.push_back(Json{{"constraint_id", c.constraint_id},
                        {"satisfied", c.satisfied},
                        {"violation", cents_to_json(c.violation)}});
  }
  out["constraints"] = std::move(cons);
  return out;
}

ResidualReport residuals_from_json(const Json& j) {
  ResidualReport r;
  const Json& mr = field(j, "max_relative_residual");
  if (!mr.is_number()) throw DomainError("max_relative_residual must be a number");
  r.max_relative_residual = mr.get<double>();
  for (const auto& p : field(j, "sector_pairs")) {
    r.sector_pairs.push_back({string_field(p, "constraint_id"),
                              SectorPair{sector_field(p, "from"), sector_field(p, "to")},
                              cents_from_json(field(p, "target_cents")),
                              cents_from_json(field(p, "achieved_cents")),
                              cents_from_json(field(p, "residual_cents"))});
  }
  for (const auto& c : field(j, "constraints")) {
    const Json& sat = field(c, "satisfied");
    if (!sat.is_boolean()) throw DomainError("satisfied must be a boolean");
    r.constraints.push_back({string_field(c, "constraint_id"), sat.get<bool>(),
                             cents_from_json(field(c, "violation"))});
  }
  return r;
}

Json model_to_json(const TransactionModel& m) {
  Json out;
  out["schema"] = kModelSchema;
  out["model_id"] = m.model_id;
  out["dataset_id"] = m.dataset_id;
  out["year"] = m.year;
  out["constraint_set_id"] = m.constraint_set_id;
  out["provenance"] = std::string(to_string(m.provenance));
  out["edge_count"] = m.edges.size();
  Json edges = Json::array();
  for (const auto& e : m.edges) {
    edges.push_back(Json{{"src", e.src}, {"dst", e.dst}, {"amount_cents", cents_to_json(e.amount_cents)}});
  }
  out["edges"] = std::move(edges);
  out["residuals"] = residuals_to_json(m.residuals);
  return out;
}

TransactionModel model_from_json(const Json& j) {
  const Json& schema = field(j, "schema");
  if (!schema.is_number_integer() || schema.get<long long>() != kModelSchema) {
    throw DomainError("unsupported model schema " + schema.dump() + " (expected " +
                      std::to_string(kModelSchema) + ")");
  }
  TransactionModel m;
  m.model_id = string_field(j, "model_id");
  m.dataset_id = string_field(j, "dataset_id");
  const Json& year = field(j, "year");
  if (!year.is_number_integer()) throw DomainError("year must be an integer");
  m.year = year.get<int>();
  m.constraint_set_id = string_field(j, "constraint_set_id");
  m.provenance = provenance_from_string(string_field(j, "provenance"));
  const Json& edges = field(j, "edges");
  if (!edges.is_array()) throw DomainError("edges must be an array");
  for (const auto& e : edges) {
    m.edges.push_back({string_field(e, "src"), string_field(e, "dst"), cents_from_json(field(e, "amount_cents"))});
  }
  if (auto it = j.find("edge_count"); it != j.end() && *it != m.edges.size()) {
    throw DomainError("edge_count does not match the number of edges");
  }
  normalize_edges(m.edges);
  m.residuals = residuals_from_json(field(j, "residuals"));
  return m;
}

std::string save_model(const TransactionModel& m) { return model_to_json(m).dump(2) + "\n"; }

Json parse_json(std::string_view text) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t stop = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError(line, col, "invalid JSON");
  }
}

TransactionModel load_model(std::string_view text) {
  try {
    return model_from_json(parse_json(text));
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("malformed model JSON: ") + e.what());
  }
}

bool is_safe_id(std::string_view id) noexcept {
  if (id.empty() || id.size() > 128 || id.front() == '.') return false;
  for (char c : id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '.' || c == '_' || c == '-';
    if (!ok) return false;
  }
  return true;
}

}  // namespace econoforge::store

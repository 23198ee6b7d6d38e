#pragma once

// Independent reference implementations used as test oracles. They are
// deliberately naive and share no code with the library beyond the data
// types they read.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "econoforge/core/types.hpp"
#include "econoforge/dsl/constraint.hpp"

namespace oracle {

using econoforge::Cents;
using econoforge::FirmRecord;

// Evaluates a predicate by turning the firm into a name -> value row.
bool naive_predicate(const econoforge::dsl::FirmPredicate& p, const FirmRecord& f);

// Amount per ordered pair; missing pairs are 0.
using EdgeMap = std::map<std::pair<std::string, std::string>, Cents>;

EdgeMap edge_map(const std::vector<econoforge::Edge>& edges);

// Constraint id -> satisfied, by re-evaluating every rule over all ordered
// firm pairs.
std::map<std::string, bool> naive_check(const EdgeMap& edges, const std::vector<FirmRecord>& firms,
                                        const econoforge::dsl::ConstraintSet& cs);

// Rewrites an edge list in solver-output syntax:
//   sat
//   (model (define-fun w_a_b () Int 10) ...)
// Every pair in `all_pairs` is written, zeros included.
std::string solver_output(const std::vector<econoforge::Edge>& edges,
                          const std::vector<std::pair<std::string, std::string>>& all_pairs);

// Tiny SMT-LIB interpreter for the QF_LIA subset used by the encoder.
class SmtScript {
 public:
  explicit SmtScript(const std::string& text);
  ~SmtScript();
  SmtScript(const SmtScript&) = delete;
  SmtScript& operator=(const SmtScript&) = delete;

  // True when every assert holds under the assignment; unassigned symbols throw.
  bool holds(const std::map<std::string, std::int64_t>& ints,
             const std::map<std::string, bool>& bools) const;
  // Declared constants as (name, sort), in order.
  std::vector<std::pair<std::string, std::string>> declarations() const;
  std::size_t assert_count() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Straight transcription of w_ij = T * out_i * in_j / (sum out * sum in)
// over the given pairs, no rounding.
std::vector<double> gravity_weights(const std::vector<FirmRecord>& src,
                                    const std::vector<FirmRecord>& dst, Cents target);

FirmRecord firm(const std::string& id, const std::string& sector, Cents revenue, Cents expenses,
                int year = 2014, std::optional<econoforge::LatLon> loc = std::nullopt,
                const std::string& region = "AT/1/101", Cents employee = 0);

}  // namespace oracle

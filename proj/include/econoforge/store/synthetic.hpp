#pragma once

#include <cstdint>
#include <string>

#include "econoforge/core/dataset.hpp"

namespace econoforge::store {

/// Knobs of the synthetic Austrian-economy generator. Sector codes follow
/// the ÖNACE top-level sections, regions are AT/<state>/<district>.
struct SyntheticSpec {
  std::string dataset_id;  // empty: "synthetic-<seed>"
  int firms = 500;         // per year; the same firms appear in every year
  int sectors = 8;
  int districts = 24;
  int first_year = 2014;
  int years = 2;
  std::uint64_t seed = 7;
  double unlocated_share = 0.0;  // fraction of firms without coordinates
};

/// Throws DomainError when a knob is out of range.
void check_spec(const SyntheticSpec& spec);

/// Pure function of its argument. Every district is planted as steadily growing
/// or declining: each of its firms scales revenue and expenses by a factor
/// above (or below) 1 from one year to the next, so cash flow moves the same
/// way for every firm in it. The trend per district is recorded in the
/// manifest. Each IO table entry s -> t is carved from a budget of at most
/// 45% of the expenses of sector s in that year, split over the target
/// sectors, so the IO rules of any year can be met by the solver.
Dataset generate_synthetic(const SyntheticSpec& spec);

/// One `sector_total` rule per IO entry of `year` (tolerance 0), in sector
/// pair order. Empty text when the year has no table.
std::string io_table_rules(const Dataset& ds, int year);

}  // namespace econoforge::store

#include "econoforge/inference/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <unordered_map>

#include "econoforge/core/errors.hpp"
#include "econoforge/inference/validator.hpp"

namespace econoforge::inference {

std::string_view to_string(SolveStatus s) noexcept {
  switch (s) {
    case SolveStatus::Satisfied:
      return "satisfied";
    case SolveStatus::Residual:
      return "residual";
    case SolveStatus::InfeasibleDetected:
      return "infeasible-detected";
  }
  return "residual";
}

std::vector<Cents> largest_remainder_round(std::span<const double> weights, Cents total) {
  std::vector<Cents> out(weights.size(), 0);
  if (weights.empty()) return out;
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw DomainError("rounding weights must be finite and >= 0");
    sum += w;
  }
  if (total < 0) throw DomainError("rounding total must be non-negative");
  if (sum <= 0.0) {
    if (total != 0) throw DomainError("cannot distribute a positive total over zero weights");
    return out;
  }
  const double scale = static_cast<double>(total) / sum;
  std::vector<double> remainder(weights.size());
  Cents floors = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    double v = weights[i] * scale;
    double f = std::floor(v);
    out[i] = static_cast<Cents>(f);
    remainder[i] = v - f;
    floors += out[i];
  }
  // Floating error can leave the floors a unit off in either direction.
  std::vector<std::size_t> order(weights.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  Cents deficit = total - floors;
  for (std::size_t k = 0; deficit > 0; k = (k + 1) % order.size()) {
    ++out[order[k]];
    --deficit;
  }
  for (std::size_t k = order.size(); deficit < 0;) {
    k = k == 0 ? order.size() - 1 : k - 1;
    if (out[order[k]] > 0) {
      --out[order[k]];
      ++deficit;
    }
  }
  return out;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint64_t pair_key(std::size_t i, std::size_t j) {
  return (static_cast<std::uint64_t>(i) << 32) | static_cast<std::uint64_t>(j);
}

struct Slot {
  std::size_t src = 0;
  std::size_t dst = 0;
  int group = -1;  // index into groups_, -1 outside every SectorTotal
  double w = 0.0;
  double lo = 0.0;
  double hi = kInf;
  bool candidate = false;  // admissible for gravity allocation
  bool fixed = false;
  bool trimmed = false;
  Cents amount = 0;  // final integer value
};

struct Group {
  SectorPair pair;
  std::vector<const dsl::Constraint*> totals;
  Cents target = 0;
  Cents lo_target = 0;
  Cents hi_target = 0;
  std::vector<std::size_t> slots;
  Cents fixed_sum = 0;
};

class Infeasible : public std::exception {
 public:
  Infeasible(std::vector<std::string> ids, std::string msg)
      : ids_(std::move(ids)), msg_(std::move(msg)) {}
  const char* what() const noexcept override { return msg_.c_str(); }
  const std::vector<std::string>& ids() const { return ids_; }

 private:
  std::vector<std::string> ids_;
  std::string msg_;
};

class HeuristicSolver {
 public:
  HeuristicSolver(std::span<const FirmRecord> firms, const dsl::ConstraintSet& cs,
                  const SolverParams& params, const SolveContext& ctx)
      : idx_(firms), cs_(cs), params_(params), ctx_(ctx) {}

  void prepare() {
    match_forbids();
    build_groups();
    gravity_allocation();
    apply_fixed_edges();
    apply_bounds_to_slots();
    check_cheap_infeasibility();
    enforce_degree_caps();
    clamp_to_bounds();
  }

  int rebalance() {
    int iter = 0;
    while (iter < params_.max_iterations) {
      check_stop();
      ++iter;
      double worst = 0.0;
      for (std::size_t g = 0; g < groups_.size(); ++g) {
        if (group_error(g) >= params_.tolerance) rescale_step(g);
        worst = std::max(worst, group_error(g));
      }
      if (ctx_.progress) ctx_.progress(iter, worst);
      if (worst < params_.tolerance) break;
    }
    return iter;
  }

  void integerize() {
    for (std::size_t g = 0; g < groups_.size(); ++g) {
      settle(g);
      round_group(g);
    }
    for (auto& s : slots_) {
      if (s.group < 0 && !s.fixed && !s.trimmed) s.amount = static_cast<Cents>(std::llround(s.w));
    }
  }

  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    for (const auto& s : slots_) {
      if (s.amount > 0) out.push_back({idx_.at(s.src).firm_id, idx_.at(s.dst).firm_id, s.amount});
    }
    std::sort(out.begin(), out.end(), [](const Edge& a, const Edge& b) {
      return std::tie(a.src, a.dst) < std::tie(b.src, b.dst);
    });
    return out;
  }

  std::size_t positive_candidates() const {
    return static_cast<std::size_t>(std::count_if(slots_.begin(), slots_.end(), [](const Slot& s) {
      return s.group >= 0 && !s.trimmed && (s.w > 0.0 || s.fixed);
    }));
  }

  std::vector<std::pair<std::size_t, std::size_t>> candidates_for(const dsl::SectorTotal& t) {
    match_forbids();
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for_each_candidate(SectorPair{t.from, t.to},
                       [&](std::size_t i, std::size_t j) { out.emplace_back(i, j); });
    return out;
  }

 private:
  void check_stop() const {
    if (ctx_.stop.stop_requested()) throw SolveCancelled();
  }

  bool forbidden(std::size_t i, std::size_t j) const {
    for (const auto& [src_ok, dst_ok] : forbid_masks_) {
      if (src_ok[i] && dst_ok[j]) return true;
    }
    return false;
  }

  std::vector<std::string> forbids_touching(std::size_t i, std::size_t j) const {
    std::vector<std::string> ids;
    for (std::size_t k = 0; k < forbid_masks_.size(); ++k) {
      if (forbid_masks_[k].first[i] && forbid_masks_[k].second[j]) ids.push_back(forbid_ids_[k]);
    }
    return ids;
  }

  std::vector<bool> mask(const dsl::FirmPredicate& p) const {
    std::vector<bool> out(idx_.size());
    for (std::size_t i = 0; i < idx_.size(); ++i) out[i] = dsl::eval_predicate(p, idx_.at(i));
    return out;
  }

  void match_forbids() {
    if (forbids_matched_) return;
    forbids_matched_ = true;
    for (const auto& [c, f] : cs_.of_kind<dsl::Forbid>()) {
      forbid_masks_.emplace_back(mask(f->pairs.src), mask(f->pairs.dst));
      forbid_ids_.push_back(c->id);
    }
    by_sector_.clear();
    for (std::size_t i = 0; i < idx_.size(); ++i) by_sector_[idx_.at(i).sector].push_back(i);
  }

  template <typename Fn>
  void for_each_candidate(const SectorPair& pair, Fn&& fn) const {
    auto from = by_sector_.find(pair.from);
    auto to = by_sector_.find(pair.to);
    if (from == by_sector_.end() || to == by_sector_.end()) return;
    for (std::size_t i : from->second) {
      for (std::size_t j : to->second) {
        if (i != j && !forbidden(i, j)) fn(i, j);
      }
    }
  }

  std::size_t slot_for(std::size_t i, std::size_t j) {
    auto [it, inserted] = slot_of_.try_emplace(pair_key(i, j), slots_.size());
    if (inserted) {
      Slot s;
      s.src = i;
      s.dst = j;
      auto g = group_of_.find(SectorPair{idx_.at(i).sector, idx_.at(j).sector});
      if (g != group_of_.end()) s.group = static_cast<int>(g->second);
      slots_.push_back(s);
      if (s.group >= 0) groups_[s.group].slots.push_back(it->second);
    }
    return it->second;
  }

  void build_groups() {
    for (const auto& [c, st] : cs_.of_kind<dsl::SectorTotal>()) {
      SectorPair pair{st->from, st->to};
      auto [it, inserted] = group_of_.try_emplace(pair, groups_.size());
      if (inserted) {
        groups_.push_back(Group{pair, {}, 0, std::numeric_limits<Cents>::min(),
                                std::numeric_limits<Cents>::max(), {}, 0});
      }
      Group& g = groups_[it->second];
      g.totals.push_back(c);
      g.lo_target = std::max(g.lo_target, st->amount_cents - st->tolerance_cents);
      g.hi_target = std::min(g.hi_target, st->amount_cents + st->tolerance_cents);
    }
    for (auto& g : groups_) {
      if (g.lo_target > g.hi_target) {
        throw Infeasible(total_ids(g), "sector totals for " + g.pair.from.str() + "->" +
                                           g.pair.to.str() + " have disjoint tolerance windows");
      }
      const auto& first = std::get<dsl::SectorTotal>(g.totals.front()->payload);
      g.target = std::clamp(first.amount_cents, std::max<Cents>(g.lo_target, 0), g.hi_target);
    }
  }

  static std::vector<std::string> total_ids(const Group& g) {
    std::vector<std::string> ids;
    for (const auto* c : g.totals) ids.push_back(c->id);
    return ids;
  }

  // Phase 1.
  void gravity_allocation() {
    for (std::size_t gi = 0; gi < groups_.size(); ++gi) {
      check_stop();
      const SectorPair pair = groups_[gi].pair;
      std::vector<std::pair<std::size_t, std::size_t>> cand;
      double mass = 0.0;
      for_each_candidate(pair, [&](std::size_t i, std::size_t j) {
        cand.emplace_back(i, j);
        mass += size_out(i) * size_in(j);
      });
      const double target = static_cast<double>(groups_[gi].target);
      for (const auto& [i, j] : cand) {
        Slot& s = slots_[slot_for(i, j)];
        s.candidate = true;
        s.w = mass > 0.0 ? target * (size_out(i) * size_in(j)) / mass : 0.0;
      }
    }
  }

  double size_out(std::size_t i) const {
    return static_cast<double>(std::max<Cents>(idx_.at(i).expenses_cents, 1));
  }
  double size_in(std::size_t j) const {
    return static_cast<double>(std::max<Cents>(idx_.at(j).revenue_cents, 1));
  }

  // Phase 2a.
  void apply_fixed_edges() {
    std::map<std::uint64_t, const dsl::Constraint*> seen;
    for (const auto& [c, fx] : cs_.of_kind<dsl::FixedEdge>()) {
      auto i = idx_.find(fx->src);
      auto j = idx_.find(fx->dst);
      if (!i || !j) {
        if (fx->amount_cents > 0) {
          throw Infeasible({c->id}, "fixed edge references a firm absent from this year");
        }
        continue;
      }
      if (fx->amount_cents > 0 && forbidden(*i, *j)) {
        auto ids = forbids_touching(*i, *j);
        ids.insert(ids.begin(), c->id);
        throw Infeasible(ids, "fixed edge " + fx->src + "->" + fx->dst + " is forbidden");
      }
      auto key = pair_key(*i, *j);
      if (auto it = seen.find(key); it != seen.end()) {
        const auto& other = std::get<dsl::FixedEdge>(it->second->payload);
        if (other.amount_cents != fx->amount_cents) {
          throw Infeasible({it->second->id, c->id},
                           "conflicting fixed amounts for " + fx->src + "->" + fx->dst);
        }
        continue;
      }
      seen.emplace(key, c);
      Slot& s = slots_[slot_for(*i, *j)];
      s.fixed = true;
      s.w = static_cast<double>(fx->amount_cents);
      s.amount = fx->amount_cents;
      fixed_ids_[key] = c->id;
      if (s.group >= 0) groups_[s.group].fixed_sum += fx->amount_cents;
    }
  }

  void apply_bounds_to_slots() {
    for (const auto& [c, b] : cs_.of_kind<dsl::EdgeBound>()) {
      auto src_ok = mask(b->pairs.src);
      auto dst_ok = mask(b->pairs.dst);
      bound_masks_.push_back({c->id, src_ok, dst_ok, b});
      // Existing slots get the interval; positive floors also create slots
      // for every matching pair outside the sector totals.
      if (b->lo_cents > 0) {
        for (std::size_t i = 0; i < idx_.size(); ++i) {
          if (!src_ok[i]) continue;
          for (std::size_t j = 0; j < idx_.size(); ++j) {
            if (i == j || !dst_ok[j]) continue;
            if (forbidden(i, j)) {
              auto ids = forbids_touching(i, j);
              ids.insert(ids.begin(), c->id);
              throw Infeasible(ids, "edge bound requires a forbidden pair to carry money");
            }
            slot_for(i, j);
          }
        }
      }
    }
    for (auto& s : slots_) {
      for (const auto& bm : bound_masks_) {
        if (bm.src_ok[s.src] && bm.dst_ok[s.dst]) {
          s.lo = std::max(s.lo, static_cast<double>(bm.bound->lo_cents));
          s.hi = std::min(s.hi, static_cast<double>(bm.bound->hi_cents));
        }
      }
      if (s.lo > s.hi) {
        throw Infeasible(bounds_touching(s), "edge bounds with empty intersection on " +
                                                 idx_.at(s.src).firm_id + "->" +
                                                 idx_.at(s.dst).firm_id);
      }
      if (s.fixed && (s.w < s.lo || s.w > s.hi)) {
        auto ids = bounds_touching(s);
        ids.insert(ids.begin(), fixed_ids_.at(pair_key(s.src, s.dst)));
        throw Infeasible(ids, "fixed edge lies outside its edge bound");
      }
    }
  }

  std::vector<std::string> bounds_touching(const Slot& s) const {
    std::vector<std::string> ids;
    for (const auto& bm : bound_masks_) {
      if (bm.src_ok[s.src] && bm.dst_ok[s.dst]) ids.push_back(bm.id);
    }
    return ids;
  }

  void check_cheap_infeasibility() {
    for (auto& g : groups_) {
      std::vector<std::string> fixed_in_group;
      double floor_sum = 0.0;
      bool any_free = false;
      for (std::size_t si : g.slots) {
        const Slot& s = slots_[si];
        if (s.fixed) {
          fixed_in_group.push_back(fixed_ids_.at(pair_key(s.src, s.dst)));
        } else if (s.candidate || s.lo > 0.0) {
          floor_sum += s.lo;
          any_free = true;
        }
      }
      auto ids = total_ids(g);
      if (g.fixed_sum > g.hi_target) {
        ids.insert(ids.end(), fixed_in_group.begin(), fixed_in_group.end());
        throw Infeasible(ids, "fixed edges for " + g.pair.from.str() + "->" + g.pair.to.str() +
                                  " exceed the sector total");
      }
      if (static_cast<double>(g.fixed_sum) + floor_sum > static_cast<double>(g.hi_target)) {
        ids.insert(ids.end(), fixed_in_group.begin(), fixed_in_group.end());
        for (std::size_t si : g.slots) {
          for (auto& b : bounds_touching(slots_[si])) {
            if (std::find(ids.begin(), ids.end(), b) == ids.end()) ids.push_back(b);
          }
        }
        throw Infeasible(ids, "edge bound floors exceed the sector total for " +
                                  g.pair.from.str() + "->" + g.pair.to.str());
      }
      g.target = std::clamp(g.target, g.fixed_sum + static_cast<Cents>(std::ceil(floor_sum)),
                            g.hi_target);
      const Cents needed = g.lo_target - g.fixed_sum;
      if (needed <= 0) continue;
      if (!any_free) {
        ids.insert(ids.end(), fixed_in_group.begin(), fixed_in_group.end());
        for (const auto& fid : forbid_ids_) ids.push_back(fid);
        throw Infeasible(ids, "no admissible firm pair can carry the sector total " +
                                  g.pair.from.str() + "->" + g.pair.to.str());
      }
      check_capacity(g, static_cast<double>(needed), ids);
    }
  }

  // Upper bound on the mass the free slots of `g` can carry when each degree
  // cap is honoured on its own and every slot stays below its ceiling.
  void check_capacity(const Group& g, double needed, std::vector<std::string> ids) {
    double plain = 0.0;
    std::vector<std::string> ceilings;
    for (std::size_t si : g.slots) {
      const Slot& s = slots_[si];
      if (s.fixed || !(s.candidate || s.lo > 0.0)) continue;
      plain += s.hi;
      if (std::isfinite(s.hi)) {
        for (auto& b : bounds_touching(s)) {
          if (std::find(ceilings.begin(), ceilings.end(), b) == ceilings.end()) ceilings.push_back(b);
        }
      }
    }
    if (plain < needed) {
      ids.insert(ids.end(), ceilings.begin(), ceilings.end());
      throw Infeasible(ids, "edge bound ceilings cannot carry the sector total " +
                                g.pair.from.str() + "->" + g.pair.to.str());
    }
    for (const auto& [c, cap] : cs_.of_kind<dsl::DegreeCap>()) {
      const auto subject = mask(cap->firms);
      const auto counterparty = mask(cap->counterparties);
      const bool out = cap->direction == dsl::Direction::Out;
      // Counterparties already consumed by positive fixed edges.
      std::vector<std::int64_t> used(idx_.size(), 0);
      for (const auto& s : slots_) {
        if (!s.fixed || s.w <= 0.0) continue;
        if (out && counterparty[s.dst]) ++used[s.src];
        if (!out && counterparty[s.src]) ++used[s.dst];
      }
      std::map<std::size_t, std::vector<double>> limited;  // subject firm -> ceilings
      double capacity = 0.0;
      for (std::size_t si : g.slots) {
        const Slot& s = slots_[si];
        if (s.fixed || !(s.candidate || s.lo > 0.0)) continue;
        std::size_t self = out ? s.src : s.dst;
        std::size_t other = out ? s.dst : s.src;
        if (subject[self] && counterparty[other]) {
          limited[self].push_back(s.hi);
        } else {
          capacity += s.hi;
        }
      }
      for (auto& [firm, his] : limited) {
        std::int64_t k = std::max<std::int64_t>(0, cap->max_count - used[firm]);
        std::sort(his.begin(), his.end(), std::greater<>());
        for (std::size_t r = 0; r < his.size() && static_cast<std::int64_t>(r) < k; ++r) {
          capacity += his[r];
        }
      }
      if (capacity < needed) {
        ids.push_back(c->id);
        ids.insert(ids.end(), ceilings.begin(), ceilings.end());
        throw Infeasible(ids, "degree cap " + c->id + " admits too few counterparties for " +
                                  g.pair.from.str() + "->" + g.pair.to.str());
      }
    }
  }

  // Phase 2b.
  void enforce_degree_caps() {
    for (const auto& [c, cap] : cs_.of_kind<dsl::DegreeCap>()) {
      check_stop();
      const auto subject = mask(cap->firms);
      const auto counterparty = mask(cap->counterparties);
      const bool out = cap->direction == dsl::Direction::Out;

      std::vector<std::vector<std::size_t>> incident(idx_.size());
      for (std::size_t si = 0; si < slots_.size(); ++si) {
        const Slot& s = slots_[si];
        if (s.trimmed || s.w <= 0.0) continue;
        std::size_t self = out ? s.src : s.dst;
        std::size_t other = out ? s.dst : s.src;
        if (subject[self] && counterparty[other]) incident[self].push_back(si);
      }

      std::vector<double> trimmed_mass(groups_.size(), 0.0);
      for (std::size_t f = 0; f < idx_.size(); ++f) {
        auto& list = incident[f];
        if (static_cast<std::int64_t>(list.size()) <= cap->max_count) continue;
        std::sort(list.begin(), list.end(), [&](std::size_t a, std::size_t b) {
          const Slot& sa = slots_[a];
          const Slot& sb = slots_[b];
          if (sa.fixed != sb.fixed) return sa.fixed;
          if (sa.w != sb.w) return sa.w > sb.w;
          std::size_t oa = out ? sa.dst : sa.src;
          std::size_t ob = out ? sb.dst : sb.src;
          return oa < ob;  // FirmIndex order is ascending firm id
        });
        // Keep survivors round-robin across groups, heaviest first within each,
        // so a small sector total is not starved by a firm's large ones.
        std::map<int, std::vector<std::size_t>> per_group;
        std::vector<std::size_t> kept;
        for (std::size_t si : list) {
          if (slots_[si].fixed) {
            kept.push_back(si);
          } else {
            per_group[slots_[si].group].push_back(si);
          }
        }
        for (std::size_t round = 0; kept.size() < list.size(); ++round) {
          for (auto& [g, members] : per_group) {
            if (round < members.size()) kept.push_back(members[round]);
          }
        }
        list = std::move(kept);
        for (std::size_t k = static_cast<std::size_t>(cap->max_count); k < list.size(); ++k) {
          Slot& s = slots_[list[k]];
          if (s.fixed) {
            std::vector<std::string> ids{c->id};
            for (std::size_t r = 0; r < list.size(); ++r) {
              const Slot& fs = slots_[list[r]];
              if (fs.fixed) ids.push_back(fixed_ids_.at(pair_key(fs.src, fs.dst)));
            }
            throw Infeasible(ids, "fixed edges exceed degree cap " + c->id);
          }
          if (s.group >= 0) trimmed_mass[s.group] += s.w;
          s.w = 0.0;
          s.trimmed = true;
        }
      }
      for (std::size_t g = 0; g < groups_.size(); ++g) {
        if (trimmed_mass[g] <= 0.0) continue;
        double surviving = 0.0;
        for (std::size_t si : groups_[g].slots) {
          const Slot& s = slots_[si];
          if (!s.fixed && !s.trimmed && s.w > 0.0) surviving += s.w;
        }
        if (surviving <= 0.0) continue;
        const double factor = (surviving + trimmed_mass[g]) / surviving;
        for (std::size_t si : groups_[g].slots) {
          Slot& s = slots_[si];
          if (!s.fixed && !s.trimmed && s.w > 0.0) s.w *= factor;
        }
      }
    }
  }

  // Phase 2c. Excess and shortfall are moved by the rebalancing loop.
  void clamp_to_bounds() {
    for (auto& s : slots_) {
      if (s.fixed || s.trimmed) continue;
      if (s.candidate || s.lo > 0.0) s.w = std::clamp(s.w, s.lo, s.hi);
    }
  }

  bool is_free(const Slot& s) const { return !s.fixed && !s.trimmed && (s.w > 0.0 || s.lo > 0.0); }

  double group_error(std::size_t g) const {
    const Group& grp = groups_[g];
    const double remaining = static_cast<double>(grp.target - grp.fixed_sum);
    double sum = 0.0;
    for (std::size_t si : grp.slots) {
      if (is_free(slots_[si])) sum += slots_[si].w;
    }
    const double scale = grp.target > 0 ? static_cast<double>(grp.target) : 1.0;
    return std::abs(sum - remaining) / scale;
  }

  // One proportional step over the slots not already pinned at the bound in
  // the direction of travel. Returns true when the pinned set did not grow.
  bool rescale_step(std::size_t g) {
    Group& grp = groups_[g];
    const double remaining = static_cast<double>(grp.target - grp.fixed_sum);
    double sum = 0.0;
    for (std::size_t si : grp.slots) {
      if (is_free(slots_[si])) sum += slots_[si].w;
    }
    if (sum == remaining) return true;
    const bool up = remaining > sum;
    double pinned = 0.0;
    double movable = 0.0;
    for (std::size_t si : grp.slots) {
      const Slot& s = slots_[si];
      if (!is_free(s)) continue;
      bool at_bound = up ? s.w >= s.hi : s.w <= s.lo;
      (at_bound ? pinned : movable) += s.w;
    }
    if (movable <= 0.0) return true;
    const double factor = std::max(0.0, (remaining - pinned) / movable);
    bool stable = true;
    for (std::size_t si : grp.slots) {
      Slot& s = slots_[si];
      if (!is_free(s)) continue;
      bool at_bound = up ? s.w >= s.hi : s.w <= s.lo;
      if (at_bound) continue;
      double scaled = s.w * factor;
      double clamped = std::clamp(scaled, s.lo, s.hi);
      if (clamped != scaled) stable = false;
      s.w = clamped;
    }
    return stable;
  }

  void settle(std::size_t g) {
    for (std::size_t k = 0; k <= groups_[g].slots.size(); ++k) {
      if (rescale_step(g)) break;
    }
  }

  // Largest remainder within [lo, hi] so the group total is met in cents.
  void round_group(std::size_t g) {
    Group& grp = groups_[g];
    std::vector<std::size_t> free;
    for (std::size_t si : grp.slots) {
      if (is_free(slots_[si])) free.push_back(si);
    }
    const Cents remaining = grp.target - grp.fixed_sum;
    double sum = 0.0;
    for (std::size_t si : free) sum += slots_[si].w;
    // An unreachable total is rounded as is and left to the validator.
    const Cents goal = std::abs(sum - static_cast<double>(remaining)) <=
                               params_.tolerance * std::max(1.0, static_cast<double>(grp.target))
                           ? remaining
                           : static_cast<Cents>(std::llround(sum));

    std::vector<double> rem(free.size());
    Cents total = 0;
    for (std::size_t k = 0; k < free.size(); ++k) {
      Slot& s = slots_[free[k]];
      double f = std::floor(s.w);
      s.amount = static_cast<Cents>(f);
      rem[k] = s.w - f;
      const Cents lo = static_cast<Cents>(s.lo);
      const Cents hi = std::isfinite(s.hi) ? static_cast<Cents>(s.hi) : std::numeric_limits<Cents>::max();
      s.amount = std::clamp(s.amount, lo, hi);
      total += s.amount;
    }
    std::vector<std::size_t> order(free.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (rem[a] != rem[b]) return rem[a] > rem[b];
      return std::tie(slots_[free[a]].src, slots_[free[a]].dst) <
             std::tie(slots_[free[b]].src, slots_[free[b]].dst);
    });
    Cents deficit = goal - total;
    while (deficit != 0) {
      bool moved = false;
      if (deficit > 0) {
        for (std::size_t k = 0; k < order.size() && deficit > 0; ++k) {
          Slot& s = slots_[free[order[k]]];
          if (static_cast<double>(s.amount) + 1.0 <= s.hi) {
            ++s.amount;
            --deficit;
            moved = true;
          }
        }
      } else {
        for (std::size_t k = order.size(); k-- > 0 && deficit < 0;) {
          Slot& s = slots_[free[order[k]]];
          if (s.amount > 0 && static_cast<double>(s.amount) - 1.0 >= s.lo) {
            --s.amount;
            ++deficit;
            moved = true;
          }
        }
      }
      if (!moved) break;
    }
  }

  struct BoundMask {
    std::string id;
    std::vector<bool> src_ok;
    std::vector<bool> dst_ok;
    const dsl::EdgeBound* bound;
  };

  FirmIndex idx_;
  const dsl::ConstraintSet& cs_;
  SolverParams params_;
  const SolveContext& ctx_;

  bool forbids_matched_ = false;
  std::vector<std::pair<std::vector<bool>, std::vector<bool>>> forbid_masks_;
  std::vector<std::string> forbid_ids_;
  std::vector<BoundMask> bound_masks_;
  std::map<SectorCode, std::vector<std::size_t>> by_sector_;

  std::vector<Group> groups_;
  std::map<SectorPair, std::size_t> group_of_;
  std::vector<Slot> slots_;
  std::unordered_map<std::uint64_t, std::size_t> slot_of_;
  std::unordered_map<std::uint64_t, std::string> fixed_ids_;
};

}  // namespace

SolveResult solve_heuristic(std::span<const FirmRecord> firms, const dsl::ConstraintSet& cs,
                            const SolverParams& params, const SolveContext& ctx) {
  const auto started = std::chrono::steady_clock::now();
  SolveResult result;
  result.model.provenance = Provenance::HeuristicSolver;
  result.model.constraint_set_id = cs.id();
  if (!firms.empty()) result.model.year = firms.front().year;

  HeuristicSolver solver(firms, cs, params, ctx);
  try {
    solver.prepare();
    result.report.iterations = solver.rebalance();
    solver.integerize();
    result.model.edges = solver.edges();
    result.report.residuals = validate(result.model.edges, firms, cs);
    const bool exact = result.report.residuals.all_constraints_satisfied() &&
                       result.report.residuals.max_relative_residual == 0.0;
    result.report.status = exact ? SolveStatus::Satisfied : SolveStatus::Residual;
  } catch (const Infeasible& e) {
    result.model.edges.clear();
    result.report.status = SolveStatus::InfeasibleDetected;
    result.report.witnesses = e.ids();
    result.report.message = e.what();
    result.report.residuals = validate(result.model.edges, firms, cs);
  }
  result.model.residuals = result.report.residuals;
  result.report.wall_time_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                   std::chrono::steady_clock::now() - started)
                                   .count();
  return result;
}

std::vector<std::pair<std::size_t, std::size_t>> candidate_pairs(const FirmIndex& firms,
                                                                 const dsl::SectorTotal& total,
                                                                 const dsl::ConstraintSet& cs) {
  std::vector<FirmRecord> copy;
  copy.reserve(firms.size());
  for (std::size_t i = 0; i < firms.size(); ++i) copy.push_back(firms.at(i));
  SolveContext ctx;
  HeuristicSolver solver(copy, cs, SolverParams{}, ctx);
  return solver.candidates_for(total);
}

std::size_t admissible_after_repair(std::span<const FirmRecord> firms,
                                    const dsl::ConstraintSet& cs) {
  SolveContext ctx;
  HeuristicSolver solver(firms, cs, SolverParams{}, ctx);
  try {
    solver.prepare();
  } catch (const Infeasible&) {
    return 0;
  }
  return solver.positive_candidates();
}

}  // namespace econoforge::inference

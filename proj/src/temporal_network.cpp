#include "coaplan/temporal_network.hpp"

#include <algorithm>
#include <deque>

namespace coaplan {

std::string to_string(ConstraintOrigin o) {
  switch (o) {
    case ConstraintOrigin::duration: return "duration";
    case ConstraintOrigin::vertical: return "vertical";
    case ConstraintOrigin::method: return "method";
    case ConstraintOrigin::user: return "user";
    case ConstraintOrigin::adversarial: return "adversarial";
    case ConstraintOrigin::commitment: return "commitment";
    case ConstraintOrigin::external: return "external";
  }
  return "external";
}

ConstraintOrigin constraint_origin_from_string(const std::string& s) {
  for (auto o : {ConstraintOrigin::duration, ConstraintOrigin::vertical, ConstraintOrigin::method,
                 ConstraintOrigin::user, ConstraintOrigin::adversarial, ConstraintOrigin::commitment,
                 ConstraintOrigin::external})
    if (to_string(o) == s) return o;
  throw Error("unknown constraint origin: " + s);
}

TemporalNetwork::TemporalNetwork() {
  labels_.push_back("origin");
  lower_.push_back(0);
  upper_.push_back(0);
  adjacency_.emplace_back();
  pred_.push_back(-1);
}

TimePointId TemporalNetwork::add_point(std::string label) {
  labels_.push_back(std::move(label));
  lower_.push_back(0);
  upper_.push_back(kUnbounded);
  adjacency_.emplace_back();
  pred_.push_back(-1);
  return static_cast<TimePointId>(labels_.size() - 1);
}

Window TemporalNetwork::window(TimePointId p) const { return Window{earliest(p), latest(p)}; }

std::vector<ConstraintId> TemporalNetwork::constraints_touching(TimePointId p) const {
  std::vector<ConstraintId> out;
  for (ConstraintId id : adjacency_.at(static_cast<std::size_t>(p)))
    if (active_[static_cast<std::size_t>(id)]) out.push_back(id);
  return out;
}

std::vector<ConstraintId> TemporalNetwork::active_constraints() const {
  std::vector<ConstraintId> out;
  for (std::size_t i = 0; i < constraints_.size(); ++i)
    if (active_[i]) out.push_back(static_cast<ConstraintId>(i));
  return out;
}

std::vector<TimePointId> TemporalNetwork::trace_cycle(TimePointId from, TimePointId stop) const {
  std::vector<TimePointId> cycle;
  std::vector<bool> seen(labels_.size(), false);
  TimePointId p = from;
  while (p >= 0 && !seen[static_cast<std::size_t>(p)]) {
    seen[static_cast<std::size_t>(p)] = true;
    cycle.push_back(p);
    if (p == stop && p != from) break;
    p = pred_[static_cast<std::size_t>(p)];
  }
  std::sort(cycle.begin(), cycle.end());
  return cycle;
}

bool TemporalNetwork::raise_lower(TimePointId start_point, Minutes candidate, TimePointId watch,
                                  std::vector<Change>& undo, std::vector<TimePointId>& witness) {
  std::deque<TimePointId> queue;
  std::vector<bool> queued(labels_.size(), false);

  auto relax = [&](TimePointId q, Minutes value, TimePointId via) -> bool {
    auto qi = static_cast<std::size_t>(q);
    if (value <= lower_[qi]) return true;
    pred_[qi] = via;
    if (q == watch || q == kOrigin) {
      witness = trace_cycle(q, watch);
      return false;
    }
    undo.push_back({q, lower_[qi], false});
    lower_[qi] = value;
    if (!queued[qi]) {
      queued[qi] = true;
      queue.push_back(q);
    }
    return true;
  };

  // The caller has already set pred_ for start_point.
  TimePointId via = pred_[static_cast<std::size_t>(start_point)];
  if (!relax(start_point, candidate, via)) return false;

  while (!queue.empty()) {
    TimePointId p = queue.front();
    queue.pop_front();
    queued[static_cast<std::size_t>(p)] = false;
    Minutes lp = lower_[static_cast<std::size_t>(p)];
    for (ConstraintId cid : adjacency_[static_cast<std::size_t>(p)]) {
      auto ci = static_cast<std::size_t>(cid);
      if (!active_[ci]) continue;
      const auto& c = constraints_[ci];
      if (c.from == p && !is_unbounded(c.min_offset))
        if (!relax(c.to, lp + c.min_offset, p)) return false;
      if (c.to == p && !is_unbounded(c.max_offset))
        if (!relax(c.from, lp - c.max_offset, p)) return false;
    }
  }
  return true;
}

void TemporalNetwork::lower_upper(TimePointId start_point, Minutes candidate, std::vector<Change>& undo) {
  std::deque<TimePointId> queue;
  std::vector<bool> queued(labels_.size(), false);

  auto relax = [&](TimePointId q, Minutes value) {
    auto qi = static_cast<std::size_t>(q);
    if (value >= upper_[qi]) return;
    undo.push_back({q, upper_[qi], true});
    upper_[qi] = value;
    if (!queued[qi]) {
      queued[qi] = true;
      queue.push_back(q);
    }
  };

  relax(start_point, candidate);
  while (!queue.empty()) {
    TimePointId p = queue.front();
    queue.pop_front();
    queued[static_cast<std::size_t>(p)] = false;
    Minutes up = upper_[static_cast<std::size_t>(p)];
    if (up >= kUnbounded) continue;
    for (ConstraintId cid : adjacency_[static_cast<std::size_t>(p)]) {
      auto ci = static_cast<std::size_t>(cid);
      if (!active_[ci]) continue;
      const auto& c = constraints_[ci];
      if (c.from == p && !is_unbounded(c.max_offset)) relax(c.to, up + c.max_offset);
      if (c.to == p && !is_unbounded(c.min_offset)) relax(c.from, up - c.min_offset);
    }
  }
}

AddResult TemporalNetwork::add_constraint(const TemporalConstraint& c) {
  auto n = static_cast<TimePointId>(labels_.size());
  if (c.from < 0 || c.from >= n || c.to < 0 || c.to >= n) throw Error("add_constraint: unknown time point");
  if (c.min_offset > c.max_offset) throw Error("add_constraint: min_offset exceeds max_offset");

  TemporalConstraint stored = c;
  if (stored.min_offset <= -kUnbounded) stored.min_offset = -kUnbounded;
  if (stored.max_offset >= kUnbounded) stored.max_offset = kUnbounded;

  if (stored.from == stored.to) {
    if (stored.min_offset > 0 || stored.max_offset < 0) return AddResult{false, -1, {stored.from}};
  }

  auto id = static_cast<ConstraintId>(constraints_.size());
  std::vector<Change> undo;
  std::vector<TimePointId> witness;

  auto rollback = [&]() {
    for (auto it = undo.rbegin(); it != undo.rend(); ++it) {
      auto pi = static_cast<std::size_t>(it->point);
      (it->upper ? upper_ : lower_)[pi] = it->old_value;
    }
    if (static_cast<std::size_t>(id) < constraints_.size()) {
      constraints_.pop_back();
      active_.pop_back();
      adjacency_[static_cast<std::size_t>(stored.from)].pop_back();
      if (stored.to != stored.from) adjacency_[static_cast<std::size_t>(stored.to)].pop_back();
    }
  };

  // Fold in the two lower-bound edges one at a time. While adding the edge
  // u->v of a consistent network, a positive cycle exists iff propagation
  // tries to raise u itself.
  constraints_.push_back(stored);
  active_.push_back(true);
  adjacency_[static_cast<std::size_t>(stored.from)].push_back(id);
  if (stored.to != stored.from) adjacency_[static_cast<std::size_t>(stored.to)].push_back(id);

  if (stored.from != stored.to) {
    // Phase 1: from -> to with weight min; the reverse direction is hidden by
    // temporarily treating max as unbounded.
    if (!is_unbounded(stored.min_offset)) {
      Minutes saved_max = constraints_.back().max_offset;
      constraints_.back().max_offset = kUnbounded;
      pred_[static_cast<std::size_t>(stored.to)] = stored.from;
      bool ok = raise_lower(stored.to, lower_[static_cast<std::size_t>(stored.from)] + stored.min_offset, stored.from,
                            undo, witness);
      constraints_.back().max_offset = saved_max;
      if (!ok) {
        rollback();
        return AddResult{false, -1, witness};
      }
    }
    // Phase 2: to -> from with weight -max.
    if (!is_unbounded(stored.max_offset)) {
      pred_[static_cast<std::size_t>(stored.from)] = stored.to;
      if (!raise_lower(stored.from, lower_[static_cast<std::size_t>(stored.to)] - stored.max_offset, stored.to, undo,
                       witness)) {
        rollback();
        return AddResult{false, -1, witness};
      }
    }
    Minutes up_from = upper_[static_cast<std::size_t>(stored.from)];
    Minutes up_to = upper_[static_cast<std::size_t>(stored.to)];
    if (up_from < kUnbounded && !is_unbounded(stored.max_offset)) lower_upper(stored.to, up_from + stored.max_offset, undo);
    if (up_to < kUnbounded && !is_unbounded(stored.min_offset)) lower_upper(stored.from, up_to - stored.min_offset, undo);
  }
  return AddResult{true, id, {}};
}

void TemporalNetwork::propagate_all() {
  std::fill(lower_.begin(), lower_.end(), Minutes{0});
  std::fill(upper_.begin(), upper_.end(), kUnbounded);
  upper_[0] = 0;

  std::deque<TimePointId> queue;
  std::vector<bool> queued(labels_.size(), true);
  std::vector<std::size_t> pops(labels_.size(), 0);
  for (std::size_t i = 0; i < labels_.size(); ++i) queue.push_back(static_cast<TimePointId>(i));
  while (!queue.empty()) {
    TimePointId p = queue.front();
    queue.pop_front();
    queued[static_cast<std::size_t>(p)] = false;
    // A consistent network settles every point within |points| passes.
    if (++pops[static_cast<std::size_t>(p)] > labels_.size() + 1) throw Error("temporal network is inconsistent");
    Minutes lp = lower_[static_cast<std::size_t>(p)];
    Minutes up = upper_[static_cast<std::size_t>(p)];
    for (ConstraintId cid : adjacency_[static_cast<std::size_t>(p)]) {
      auto ci = static_cast<std::size_t>(cid);
      if (!active_[ci]) continue;
      const auto& c = constraints_[ci];
      auto touch = [&](TimePointId q) {
        if (!queued[static_cast<std::size_t>(q)]) {
          queued[static_cast<std::size_t>(q)] = true;
          queue.push_back(q);
        }
      };
      if (c.from == p && !is_unbounded(c.min_offset) && lp + c.min_offset > lower_[static_cast<std::size_t>(c.to)]) {
        lower_[static_cast<std::size_t>(c.to)] = lp + c.min_offset;
        touch(c.to);
      }
      if (c.to == p && !is_unbounded(c.max_offset) && lp - c.max_offset > lower_[static_cast<std::size_t>(c.from)]) {
        lower_[static_cast<std::size_t>(c.from)] = lp - c.max_offset;
        touch(c.from);
      }
      if (up < kUnbounded) {
        if (c.from == p && !is_unbounded(c.max_offset) && up + c.max_offset < upper_[static_cast<std::size_t>(c.to)]) {
          upper_[static_cast<std::size_t>(c.to)] = up + c.max_offset;
          touch(c.to);
        }
        if (c.to == p && !is_unbounded(c.min_offset) && up - c.min_offset < upper_[static_cast<std::size_t>(c.from)]) {
          upper_[static_cast<std::size_t>(c.from)] = up - c.min_offset;
          touch(c.from);
        }
      }
    }
  }
}

TemporalNetwork TemporalNetwork::restore(std::vector<std::string> labels, std::vector<TemporalConstraint> constraints,
                                         std::vector<bool> active) {
  if (labels.empty() || constraints.size() != active.size()) throw Error("restore: malformed network");
  TemporalNetwork net;
  net.labels_ = std::move(labels);
  net.lower_.assign(net.labels_.size(), 0);
  net.upper_.assign(net.labels_.size(), kUnbounded);
  net.adjacency_.assign(net.labels_.size(), {});
  net.pred_.assign(net.labels_.size(), -1);
  for (std::size_t i = 0; i < constraints.size(); ++i) {
    const auto& c = constraints[i];
    auto n = static_cast<TimePointId>(net.labels_.size());
    if (c.from < 0 || c.from >= n || c.to < 0 || c.to >= n) throw Error("restore: constraint names an unknown point");
    if (c.min_offset > c.max_offset) throw Error("restore: constraint min exceeds max");
    net.adjacency_[static_cast<std::size_t>(c.from)].push_back(static_cast<ConstraintId>(i));
    if (c.to != c.from) net.adjacency_[static_cast<std::size_t>(c.to)].push_back(static_cast<ConstraintId>(i));
  }
  net.constraints_ = std::move(constraints);
  net.active_ = std::move(active);
  net.propagate_all();
  for (std::size_t i = 0; i < net.labels_.size(); ++i)
    if (net.lower_[i] > net.upper_[i]) throw Error("temporal network is inconsistent");
  return net;
}

void TemporalNetwork::remove_constraints(const std::vector<ConstraintId>& ids) {
  for (ConstraintId id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= constraints_.size()) throw Error("remove_constraints: unknown id");
    active_[static_cast<std::size_t>(id)] = false;
  }
  propagate_all();
}

bool TemporalNetwork::operator==(const TemporalNetwork& other) const {
  return labels_ == other.labels_ && lower_ == other.lower_ && upper_ == other.upper_ &&
         constraints_ == other.constraints_ && active_ == other.active_;
}

}  // namespace coaplan

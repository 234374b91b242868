#pragma once

// Post-hoc violation scanner. Recomputes calendar overlaps, range checks and
// the supply ledger from the scheduled leaves alone, then reports every
// violation the plan carries no flag for.

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "coaplan/knowledge_base.hpp"
#include "coaplan/plan.hpp"
#include "coaplan/routing.hpp"
#include "coaplan/scenario.hpp"

namespace coaplan::testing {

struct Violation {
  FlagKind kind;
  std::vector<std::string> activities;
  std::string what;
};

inline bool has_flag(const Plan& p, FlagKind kind, const std::vector<std::string>& acts) {
  for (const auto& f : p.flags) {
    if (f.kind != kind) continue;
    bool all = true;
    for (const auto& a : acts)
      if (std::find(f.activities.begin(), f.activities.end(), a) == f.activities.end()) all = false;
    if (all) return true;
  }
  return false;
}

// Replays the unit's moves: the destination of the latest move ending by t.
inline std::string replay_position(const Plan& p, const Scenario& s, const std::string& unit, Minutes t) {
  std::string at = s.unit(unit).location;
  Minutes last = -1;
  std::string last_id;
  for (const auto* a : p.leaves()) {
    if (a->executor != unit || a->destination.empty() || a->end > t) continue;
    if (std::tie(a->end, a->id) > std::tie(last, last_id)) {
      last = a->end;
      last_id = a->id;
      at = a->destination;
    }
  }
  return at;
}

inline std::vector<Violation> scan_overlaps(const Plan& p) {
  std::vector<Violation> out;
  std::map<std::string, std::vector<std::tuple<Minutes, Minutes, std::string>>> busy;
  for (const auto* a : p.leaves())
    if (!a->executor.empty() && a->exclusive) busy[a->executor].emplace_back(a->start, a->end, a->id);
  // Suppression windows recorded against targets block them too.
  for (const auto& [unit, cal] : p.calendars)
    for (const auto& e : cal)
      if (e.blocking) busy[unit].emplace_back(e.start, e.end, e.activity);
  for (auto& [unit, v] : busy) {
    std::sort(v.begin(), v.end());
    for (std::size_t i = 0; i < v.size(); ++i)
      for (std::size_t j = i + 1; j < v.size(); ++j) {
        auto [s1, e1, a1] = v[i];
        auto [s2, e2, a2] = v[j];
        if (s2 >= e1) break;
        if (a1 == a2 || !(s1 < e2 && s2 < e1)) continue;
        if (!has_flag(p, FlagKind::over_commitment, {a1, a2}))
          out.push_back({FlagKind::over_commitment, {a1, a2}, unit + " double-booked"});
      }
  }
  return out;
}

inline std::vector<Violation> scan_ranges(const Plan& p, const Scenario& s, const KnowledgeBase& kb) {
  std::vector<Violation> out;
  for (const auto* a : p.leaves()) {
    if (a->executor.empty() || a->target.empty()) continue;
    const Unit& u = s.unit(a->executor);
    const TaskTemplate& t = kb.task_template(a->task_type, u.nation);
    if (t.range_check == RangeCheck::none) continue;
    std::string from = replay_position(p, s, u.id, a->start);
    std::string to;
    if (s.find_unit(a->target)) to = replay_position(p, s, a->target, a->start);
    else if (const auto* m = s.find_measure(a->target)) to = m->node_set.front();
    else if (s.terrain.contains(a->target)) to = a->target;
    if (to.empty()) continue;
    double range = t.range_check == RangeCheck::support ? u.support_range : u.weapon_range;
    bool ok;
    if (p.config.support_range_mode == DistanceMode::path) {
      auto d = path_distance(s.terrain, from, to);
      ok = d && *d <= range;
    } else {
      const auto &x = s.terrain.node(from), &y = s.terrain.node(to);
      ok = std::hypot(x.x - y.x, x.y - y.y) <= range;
    }
    if (!ok && !has_flag(p, FlagKind::out_of_support_range, {a->id}))
      out.push_back({FlagKind::out_of_support_range, {a->id}, from + " -> " + to});
  }
  return out;
}

// Also checks the plan's recorded ledger against the recomputation.
inline std::vector<Violation> scan_supply(const Plan& p, const Scenario& s, const KnowledgeBase& kb,
                                          std::vector<std::string>* ledger_mismatch = nullptr) {
  std::vector<Violation> out;
  std::vector<const Activity*> order;
  for (const auto* a : p.leaves())
    if (!a->executor.empty()) order.push_back(a);
  std::sort(order.begin(), order.end(),
            [](const Activity* l, const Activity* r) { return std::tie(l->start, l->end, l->id) < std::tie(r->start, r->end, r->id); });
  std::map<std::string, double> level, used;
  for (const auto& u : s.units) level[u.id] = u.supply_level;
  for (const auto* a : order) {
    const Unit& u = s.unit(a->executor);
    const TaskTemplate& t = kb.task_template(a->task_type, u.nation);
    if (t.consumption.empty()) continue;
    for (const auto& [res, rate] : t.consumption) {
      double amount = static_cast<double>(a->duration) / 60.0 * rate;
      level[u.id] -= amount;
      used[u.id] += amount;
    }
    if (level[u.id] < 0) {
      if (!has_flag(p, FlagKind::supply_shortfall, {a->id}))
        out.push_back({FlagKind::supply_shortfall, {a->id}, u.id + " below zero"});
      level[u.id] = 0;
    }
  }
  if (ledger_mismatch) {
    std::map<std::string, double> recorded;
    for (const auto& e : p.consumption) recorded[e.unit] += e.amount;
    for (const auto& [unit, total] : used)
      if (std::abs(recorded[unit] - total) > 1e-9 * std::max(1.0, total)) ledger_mismatch->push_back(unit);
  }
  return out;
}

inline std::vector<Violation> scan_unflagged(const Plan& p, const Scenario& s, const KnowledgeBase& kb) {
  auto out = scan_overlaps(p);
  for (auto& v : scan_ranges(p, s, kb)) out.push_back(std::move(v));
  for (auto& v : scan_supply(p, s, kb)) out.push_back(std::move(v));
  return out;
}

}  // namespace coaplan::testing

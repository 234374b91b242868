#include "coaplan/adversarial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

namespace coaplan {

// ---- reactions -----------------------------------------------------------

namespace {

bool rule_applies(const ReactionRule& rule, const std::string& task_type, Allegiance acting_side) {
  if (rule.acting_side && *rule.acting_side != acting_side) return false;
  return std::binary_search(rule.trigger_task_types.begin(), rule.trigger_task_types.end(), task_type);
}

std::optional<double> reach(const ReactionRule& rule, const Scenario& s, const std::string& from,
                            const std::string& to) {
  if (from == to) return 0.0;
  if (rule.range_mode == RangeMode::path) return path_distance(s.terrain, from, to);
  return s.terrain.euclidean(from, to);
}

}  // namespace

bool reaction_holds(const ReactionRule& rule, const Scenario& s, const std::string& task_type,
                    Allegiance acting_side, const std::string& acting_location, const Unit& reactor,
                    const std::string& reactor_location) {
  if (!rule_applies(rule, task_type, acting_side)) return false;
  if (reactor.allegiance != opposing(acting_side) || !reactor.has_capability(rule.opposing_capability)) return false;
  auto d = reach(rule, s, reactor_location, acting_location);
  return d && *d <= reactor.weapon_range;
}

std::optional<ReactionTrigger> reaction_trigger(const ReactionRule& rule, const Scenario& s,
                                                const std::string& task_type, Allegiance acting_side,
                                                const std::string& acting_location, const PositionFn& position_of) {
  if (!rule_applies(rule, task_type, acting_side)) return std::nullopt;
  std::optional<ReactionTrigger> best;
  for (const auto& u : s.units) {
    if (u.allegiance != opposing(acting_side) || !u.has_capability(rule.opposing_capability)) continue;
    std::string loc = position_of(u);
    auto d = reach(rule, s, loc, acting_location);
    if (!d || *d > u.weapon_range) continue;
    if (!best || *d < best->distance || (*d == best->distance && u.id < best->reactor->id))
      best = ReactionTrigger{&u, loc, *d};
  }
  return best;
}

// ---- movement to contact -------------------------------------------------

std::string to_string(ContactDecisionKind k) {
  switch (k) {
    case ContactDecisionKind::bypass: return "bypass";
    case ContactDecisionKind::avoid: return "avoid";
    case ContactDecisionKind::engage: return "engage";
    case ContactDecisionKind::assist_main_body: return "assist_main_body";
  }
  return "avoid";
}

ContactDecision contact_decision(double security_power, double enemy_power, double enemy_initial_power,
                                 const std::vector<std::string>& security_roe, const ContactThresholds& t) {
  ContactDecision d;
  d.roe_consulted = security_roe;
  d.enemy_remaining = enemy_initial_power > 0 ? enemy_power / enemy_initial_power : 0;
  d.ratio = enemy_power > 0 ? security_power / enemy_power : std::numeric_limits<double>::infinity();
  std::ostringstream basis;
  basis << "ratio " << d.ratio << ", enemy remaining " << d.enemy_remaining;
  bool hold = std::find(security_roe.begin(), security_roe.end(), kRoeWeaponsHold) != security_roe.end();
  if (enemy_power <= 0 || d.enemy_remaining <= t.bypass) {
    d.decision = ContactDecisionKind::bypass;
    basis << " <= bypass " << t.bypass;
  } else if (hold) {
    d.decision = ContactDecisionKind::avoid;
    basis << ", ROE " << kRoeWeaponsHold;
  } else if (security_power <= 0 || enemy_power / security_power >= t.main_body) {
    d.decision = ContactDecisionKind::assist_main_body;
    basis << ", enemy:security >= " << t.main_body;
  } else if (d.ratio >= t.engage) {
    d.decision = ContactDecisionKind::engage;
    basis << " >= engage " << t.engage;
  } else {
    d.decision = ContactDecisionKind::avoid;
    basis << " < engage " << t.engage;
  }
  d.basis = basis.str();
  return d;
}

ContactDecision contact_decision(const Unit& security, const Unit& enemy, const ContactThresholds& t) {
  return contact_decision(security.combat_power, enemy.combat_power, enemy.combat_power, security.roe, t);
}

// ---- counter-attack ------------------------------------------------------

CounterattackPlan commit_counterattack(const Plan& plan, const Scenario& s, const std::string& ca_force,
                                       const std::string& trigger_activity, Minutes now) {
  const Activity& trig = plan.activity(trigger_activity);
  if (!trig.leaf || trig.side != Allegiance::enemy) throw Error("counter-attack trigger must be an enemy leaf");
  const Unit* force = s.find_unit(ca_force);
  if (!force) throw Error("unknown counter-attack force \"" + ca_force + "\"");
  if (!force->mobile()) throw Error("counter-attack force \"" + ca_force + "\" cannot move");

  CounterattackPlan out;
  out.engagement_node = !trig.site.empty() ? trig.site : trig.origin_node;

  // Approach path: every node the attacker passed through up to the trigger.
  std::set<std::string> approach{out.engagement_node};
  if (!trig.origin_node.empty()) approach.insert(trig.origin_node);
  for (const auto& [id, a] : plan.activities) {
    if (!a.leaf || a.executor != trig.executor || a.start > trig.start) continue;
    if (a.route) approach.insert(a.route->nodes.begin(), a.route->nodes.end());
    if (!a.origin_node.empty()) approach.insert(a.origin_node);
  }

  std::string from = position_at(plan, s, ca_force, now);
  auto flanks = s.terrain.neighbors(out.engagement_node);
  std::sort(flanks.begin(), flanks.end());
  for (const auto& f : flanks) {
    if (approach.count(f)) continue;
    try {
      out.route = shortest_path(s.terrain, *force, from, f);
      out.flank_node = f;
      break;
    } catch (const UnreachableError&) {
    }
  }
  if (out.flank_node.empty()) {
    out.frontal = true;
    out.warning = "no open flank at " + out.engagement_node + "; frontal commitment";
    out.route = shortest_path(s.terrain, *force, from, out.engagement_node);
  }
  out.commitment_time = trig.start - out.route.duration;
  if (out.commitment_time < now) {
    out.commitment_time = now;
    out.too_late = true;
  }
  out.arrival = out.commitment_time + out.route.duration;
  return out;
}

// ---- logistics -----------------------------------------------------------

bool is_trains(const Unit& u, const PlanConfig& c) {
  return u.unit_type == c.trains_unit_type || u.has_capability("resupply");
}

namespace {

Minutes round_trip(const std::vector<double>& hours, int to) {
  double h = hours[static_cast<std::size_t>(to)];
  if (std::isinf(h)) return kUnbounded;
  return 2 * hours_to_minutes(h);
}

bool in_subtree(const Scenario& s, const Unit& u, const std::string& root) {
  for (const Unit* p = &u; p; p = p->superior.empty() ? nullptr : s.find_unit(p->superior))
    if (p->id == root) return true;
  return false;
}

}  // namespace

std::vector<LogisticsFinding> logistics_check(const Plan& plan, const Scenario& s, const PlanConfig& c) {
  std::vector<LogisticsFinding> out;
  const Minutes horizon = plan.horizon();
  const auto& g = s.terrain;

  // Leaves per executor for flag attribution.
  std::map<std::string, std::vector<const Activity*>> by_unit;
  for (const auto& [id, a] : plan.activities)
    if (a.leaf && !a.executor.empty()) by_unit[a.executor].push_back(&a);

  for (const auto& trains : s.units) {
    if (!is_trains(trains, c)) continue;
    std::vector<const Unit*> supported;
    for (const auto& u : s.units) {
      if (u.allegiance != trains.allegiance || is_trains(u, c) || u.combat_power <= 0) continue;
      if (!trains.superior.empty() && !in_subtree(s, u, trains.superior)) continue;
      supported.push_back(&u);
    }
    for (const Unit* unit : supported) {
      auto acts = by_unit.find(unit->id);
      if (acts == by_unit.end()) continue;  // never tasked: nothing to restrict
      bool in_episode = false;
      for (Minutes t = 0; t <= horizon; t += c.resupply_slice) {
        std::string at_trains = position_at(plan, s, trains.id, t);
        std::string at_unit = position_at(plan, s, unit->id, t);
        int ui = g.index(at_unit);
        auto from_trains = travel_hours_from(g, c.resupply_speed, at_trains);
        Minutes rt = round_trip(from_trains, ui);
        if (rt <= c.resupply_threshold) {
          in_episode = false;
          continue;
        }
        if (in_episode) continue;
        in_episode = true;

        LogisticsFinding f;
        f.trains = trains.id;
        f.combat_unit = unit->id;
        f.slice_start = t;
        f.round_trip = rt;
        // Attribute to the unit's latest leaf started by t, else its first.
        const Activity* blame = nullptr;
        for (const Activity* a : acts->second)
          if (a->start <= t && (!blame || a->start > blame->start || (a->start == blame->start && a->id < blame->id)))
            blame = a;
        if (!blame)
          for (const Activity* a : acts->second)
            if (!blame || a->start < blame->start || (a->start == blame->start && a->id < blame->id)) blame = a;
        f.activities = {blame->id};

        // Candidate: the node restoring the threshold that the trains can reach by t.
        std::string best;
        Minutes best_rt = 0, best_travel = 0;
        if (trains.mobile()) {
          auto trains_travel = travel_hours_from(g, trains.speed, at_trains);
          for (std::size_t i = 0; i < g.size(); ++i) {
            if (std::isinf(trains_travel[i])) continue;
            Minutes travel = hours_to_minutes(trains_travel[i]);
            if (travel > t) continue;
            Minutes crt = round_trip(travel_hours_from(g, c.resupply_speed, g.node(static_cast<int>(i)).id), ui);
            if (crt > c.resupply_threshold) continue;
            const std::string& id = g.node(static_cast<int>(i)).id;
            if (best.empty() || crt < best_rt || (crt == best_rt && (travel < best_travel ||
                                                                      (travel == best_travel && id < best)))) {
              best = id;
              best_rt = crt;
              best_travel = travel;
            }
          }
        }
        std::ostringstream msg;
        msg << "resupply round trip " << (rt >= kUnbounded ? std::string("unbounded") : std::to_string(rt))
            << " min from " << trains.id << " at " << at_trains << " to " << unit->id << " at " << at_unit
            << " exceeds " << c.resupply_threshold << " min at minute " << t;
        if (!best.empty()) {
          f.kind = FlagKind::reposition_cue;
          f.candidate = best;
          f.candidate_round_trip = best_rt;
          f.depart_by = t - best_travel;
          msg << "; reposition " << trains.id << " to " << best << " (" << best_rt << " min)";
        } else {
          f.kind = FlagKind::out_of_support_range;
          msg << (trains.mobile() ? "; no reachable position restores it in time" : "; trains cannot move")
              << ", combat activity restricted";
        }
        f.message = msg.str();
        out.push_back(std::move(f));
      }
    }
  }
  return out;
}

}  // namespace coaplan

#include "coaplan/engine.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <sstream>

#include "coaplan/adversarial.hpp"
#include "coaplan/combat_models.hpp"
#include "coaplan/routing.hpp"
#include "coaplan/syncmatrix.hpp"

namespace coaplan {

namespace {

using FlagKey = std::pair<FlagKind, std::vector<std::string>>;

std::string fmt_minutes(Minutes m) { return is_unbounded(m) ? std::string("inf") : std::to_string(m); }

bool is_attack(Posture p) { return p == Posture::hasty_attack || p == Posture::deliberate_attack; }

struct Sizing {
  Minutes duration = 0;
  std::string origin;
  std::string site;
  std::string destination;
  std::optional<Route> route;
  std::vector<std::string> defenders;  // units the leaf engages or suppresses
  std::optional<AttritionResult> attrition;
  std::string problem;  // set when routing failed
};

class Planner {
 public:
  Planner(const Scenario& s, const KnowledgeBase& kb, const PlanConfig& c, const std::vector<EditCommand>& edits,
          bool wargame)
      : s_(s), kb_(kb), c_(c), wargame_(wargame) {
    for (const auto& e : edits) {
      switch (e.kind) {
        case EditKind::accept_flag: accepted_.insert({flag_kind_from_string(e.flag_kind), e.flag_activities}); break;
        case EditKind::pin_activity: pins_[e.target] = {e.start, e.end}; break;
        case EditKind::reassign_executor: reassign_[e.target] = e.executor; break;
        case EditKind::delete_activity: deleted_.insert(e.target); break;
        case EditKind::change_intent: intent_[e.target] = e.intent; break;
        case EditKind::reposition_unit: repositions_.push_back(e); break;
      }
    }
    p_.edits = edits;
  }

  Plan run();

 private:
  // ---- lookups ----
  Activity& act(const std::string& id) { return p_.activities.at(id); }
  const Unit* unit(const std::string& id) const { return id.empty() ? nullptr : s_.find_unit(id); }
  std::string nation_of(const std::string& unit_id) const {
    const Unit* u = unit(unit_id);
    return u ? u->nation : "";
  }
  const TaskTemplate& tmpl(const Activity& a) const { return kb_.task_template(a.task_type, nation_of(a.executor)); }
  std::string target_kind(const std::string& target) const {
    if (target.empty()) return "none";
    if (s_.find_unit(target)) return "unit";
    if (s_.find_measure(target)) return "measure";
    return s_.terrain.contains(target) ? "node" : "none";
  }
  std::string position(const std::string& unit_id, Minutes t) const { return position_at(p_, s_, unit_id, t); }
  std::string location_of(const std::string& target, Minutes t) const {
    if (target.empty()) return "";
    if (s_.find_unit(target)) return position(target, t);
    if (const auto* m = s_.find_measure(target)) return m->node_set.front();
    return s_.terrain.contains(target) ? target : "";
  }
  ProvenanceKind root_provenance(const std::string& id) {
    const Activity* a = &act(id);
    while (!a->parent.empty()) a = &act(a->parent);
    return a->provenance;
  }
  bool scheduled(const Activity& a) const { return a.leaf && !unscheduled_.count(a.id); }

  void event(const std::string& kind, const std::string& activity, const std::string& detail) {
    p_.events.push_back({static_cast<int>(p_.events.size()) + 1, kind, activity, detail});
  }
  void flag(FlagKind kind, std::vector<std::string> acts, const std::string& message,
            std::optional<EditCommand> remedy = std::nullopt);

  // ---- structure ----
  Activity& create(const std::string& id, const std::string& task_type, const std::string& intent,
                   const std::string& executor, const std::string& target, const std::string& parent, int depth,
                   Allegiance side, ProvenanceKind prov, const std::string& rule, const std::string& trigger);
  std::optional<std::vector<std::string>> bind(const Activity& a, const ExpansionMethod& m) const;
  std::string pick_unit(Allegiance side, const std::vector<std::string>& caps, const std::string& near) const;
  void expand(std::deque<std::string> queue);
  void install_vertical(const std::string& id);
  std::vector<std::string> descendant_leaves(const std::string& id);
  bool preceded_by_any(const Activity& m, const std::set<TimePointId>& others) const;
  AddResult constrain(TimePointId from, TimePointId to, Minutes lo, Minutes hi, ConstraintOrigin o,
                      const std::string& owner, const std::string& what);
  std::string chain(const std::string& id);

  // ---- scheduling ----
  // Unscheduled leaves whose placement bounds `a` from below. Stops at the
  // first one unless `all` is set.
  std::vector<std::string> blockers(const Activity& a, bool all) const;
  bool ready(const Activity& a) const { return blockers(a, false).empty(); }
  std::string pick_next() const;
  Sizing size(const Activity& a, const TaskTemplate& t, Minutes start);
  std::vector<std::string> defenders_of(const Activity& a, Minutes t) const;
  std::optional<Minutes> earliest_free(const std::string& unit_id, Minutes lo, Minutes hi, Minutes d) const;
  std::vector<std::string> overlapping(const std::string& unit_id, Minutes s, Minutes e, const std::string& self) const;
  Minutes last_end(const std::string& unit_id) const;
  void commit(Activity& a, Minutes s, Minutes d);
  void schedule(const std::string& id);
  void schedule_all();
  void apply_attrition(const std::string& source, const std::string& attacker, const std::vector<std::string>& defenders,
                       const AttritionResult& r);
  void infer_reactions(const Activity& a);
  void create_reaction(const Activity& trigger, const ReactionRule& rule, const Unit& reactor);
  void contact(const Activity& a);
  void reconcile_reactions();
  void withdraw(const std::string& root);

  // ---- post passes ----
  void resolve_engagements();
  void consumption_pass();
  void range_pass();
  void logistics_pass();
  void overlap_pass();
  void finalize();

  const Scenario& s_;
  const KnowledgeBase& kb_;
  const PlanConfig& c_;
  bool wargame_;

  std::set<std::string> deleted_;
  std::map<std::string, std::pair<Minutes, Minutes>> pins_;
  std::map<std::string, std::string> reassign_;
  std::map<std::string, std::string> intent_;
  std::vector<EditCommand> repositions_;
  std::set<FlagKey> accepted_;

  Plan p_;
  std::vector<std::string> owner_{""};  // time point -> activity id
  std::set<std::string> unscheduled_;
  std::set<ConstraintId> pinned_;
  std::map<std::string, double> power_;
  std::map<std::string, std::vector<std::string>> engaged_;  // leaf -> defenders it already resolved
  std::map<FlagKey, std::size_t> flag_index_;
};

// ---- flags ---------------------------------------------------------------

void Planner::flag(FlagKind kind, std::vector<std::string> acts, const std::string& message,
                   std::optional<EditCommand> remedy) {
  std::sort(acts.begin(), acts.end());
  acts.erase(std::unique(acts.begin(), acts.end()), acts.end());
  FlagKey key{kind, acts};
  if (flag_index_.count(key)) return;
  flag_index_[key] = p_.flags.size();
  Flag f;
  f.kind = kind;
  f.activities = std::move(acts);
  f.message = message;
  f.remedy = std::move(remedy);
  std::string who;
  for (const auto& a : f.activities) who += (who.empty() ? "" : ",") + a;
  event("flag", f.activities.empty() ? "" : f.activities.front(), to_string(kind) + " [" + who + "]: " + message);
  p_.flags.push_back(std::move(f));
}

// ---- structure -----------------------------------------------------------

Activity& Planner::create(const std::string& id, const std::string& task_type, const std::string& intent,
                          const std::string& executor, const std::string& target, const std::string& parent, int depth,
                          Allegiance side, ProvenanceKind prov, const std::string& rule, const std::string& trigger) {
  if (p_.activities.count(id)) throw PlanningError("duplicate activity id \"" + id + "\"");
  Activity a;
  a.id = id;
  a.task_type = task_type;
  a.intent = intent_.count(id) ? intent_.at(id) : intent;
  a.executor = reassign_.count(id) ? reassign_.at(id) : executor;
  a.target = target;
  a.parent = parent;
  a.depth = depth;
  a.side = side;
  a.provenance = prov;
  a.rule = rule;
  a.trigger = trigger;
  const TaskTemplate* t = kb_.find_template(task_type, nation_of(a.executor));
  if (!t) throw PlanningError("activity \"" + id + "\" has unknown task type \"" + task_type + "\"");
  a.functional_row = t->functional_row;
  a.exclusive = t->exclusive;
  a.start_point = p_.stn.add_point(id + ".start");
  a.end_point = p_.stn.add_point(id + ".end");
  owner_.push_back(id);
  owner_.push_back(id);
  p_.stn.add_constraint(a.start_point, a.end_point, 0, kUnbounded, ConstraintOrigin::duration);
  return p_.activities.emplace(id, std::move(a)).first->second;
}

std::string Planner::pick_unit(Allegiance side, const std::vector<std::string>& caps, const std::string& near) const {
  // Prefer the subtree under `near`, then the whole side; (echelon desc, id) within each.
  auto under = [&](const Unit& u) {
    for (const Unit* p = &u; p; p = p->superior.empty() ? nullptr : s_.find_unit(p->superior))
      if (p->id == near) return true;
    return false;
  };
  const Unit* best = nullptr;
  auto key = [&](const Unit& u) {
    return std::make_tuple(near.empty() || !under(u), -static_cast<int>(u.echelon), u.id);
  };
  for (const auto& u : s_.units) {
    if (u.allegiance != side) continue;
    if (!std::all_of(caps.begin(), caps.end(), [&](const std::string& c) { return u.has_capability(c); })) continue;
    if (!best || key(u) < key(*best)) best = &u;
  }
  return best ? best->id : "";
}

std::optional<std::vector<std::string>> Planner::bind(const Activity& a, const ExpansionMethod& m) const {
  std::vector<std::string> out;
  for (const auto& st : m.subtasks) {
    std::string who;
    switch (st.executor.kind) {
      case ExecutorBindingKind::same: who = a.executor; break;
      case ExecutorBindingKind::subordinate: {
        if (a.executor.empty()) return std::nullopt;
        auto subs = s_.subordinates(a.executor);
        if (static_cast<std::size_t>(st.executor.index) > subs.size()) return std::nullopt;
        who = subs[static_cast<std::size_t>(st.executor.index - 1)]->id;
        break;
      }
      case ExecutorBindingKind::role:
        who = pick_unit(a.side, {st.executor.role}, a.executor);
        if (who.empty()) return std::nullopt;
        break;
      case ExecutorBindingKind::unbound: {
        const TaskTemplate* t = kb_.find_template(st.task_type, nation_of(a.executor));
        if (!t || t->required_capabilities.empty()) {
          who = a.executor;
        } else {
          who = pick_unit(a.side, t->required_capabilities, a.executor);
        }
        if (who.empty()) return std::nullopt;
        break;
      }
      case ExecutorBindingKind::parent_target: {
        const Unit* u = unit(a.target);
        if (!u) return std::nullopt;
        who = u->id;
        break;
      }
    }
    out.push_back(who);
  }
  return out;
}

std::string Planner::chain(const std::string& id) {
  std::vector<std::string> types;
  for (const Activity* a = &act(id); a; a = a->parent.empty() ? nullptr : &act(a->parent)) types.push_back(a->task_type);
  std::string out;
  for (auto it = types.rbegin(); it != types.rend(); ++it) out += (out.empty() ? "" : " > ") + *it;
  return out;
}

AddResult Planner::constrain(TimePointId from, TimePointId to, Minutes lo, Minutes hi, ConstraintOrigin o,
                             const std::string& owner, const std::string& what) {
  auto r = p_.stn.add_constraint(from, to, lo, hi, o);
  if (!r) flag(FlagKind::temporal_conflict, {owner}, what + " contradicts the schedule and was dropped");
  return r;
}

void Planner::expand(std::deque<std::string> queue) {
  while (!queue.empty()) {
    std::string id = queue.front();
    queue.pop_front();
    Activity& a = act(id);
    GuardContext ctx;
    ctx.intent = parse_intent(a.intent).value_or(Intent{a.intent, std::nullopt});
    ctx.executor = unit(a.executor);
    ctx.target_kind = target_kind(a.target);
    const ExpansionMethod* chosen = nullptr;
    std::vector<std::string> executors;
    for (const ExpansionMethod* m : applicable_methods(kb_, a.task_type, ctx)) {
      if (auto b = bind(a, *m)) {
        chosen = m;
        executors = *b;
        break;
      }
    }
    if (!chosen) {
      a.leaf = true;
      unscheduled_.insert(id);
      event("primitive", id, a.task_type + (a.executor.empty() ? "" : " by " + a.executor));
      continue;
    }
    if (a.depth >= c_.max_expansion_depth)
      throw PlanningError("expansion depth " + std::to_string(c_.max_expansion_depth) + " exceeded: " + chain(id));
    event("expand", id, a.task_type + " via " + chosen->id);

    std::map<std::string, std::string> local;
    for (std::size_t i = 0; i < chosen->subtasks.size(); ++i) {
      const auto& st = chosen->subtasks[i];
      std::string cid = id + "/" + st.local_id;
      if (deleted_.count(cid)) continue;
      std::string intent = st.intent == "inherit" ? a.intent : st.intent;
      std::string target = st.target == TargetBindingKind::same            ? a.target
                           : st.target == TargetBindingKind::parent_executor ? a.executor
                                                                              : "";
      create(cid, st.task_type, intent, executors[i], target, id, a.depth + 1, a.side, ProvenanceKind::expansion,
             chosen->id, "");
      local[st.local_id] = cid;
      act(id).children.push_back(cid);
      queue.push_back(cid);
    }
    Activity& parent = act(id);
    if (parent.children.empty()) {
      parent.leaf = true;
      unscheduled_.insert(id);
      event("primitive", id, "every subtask deleted");
      continue;
    }
    for (const auto& r : chosen->relations) {
      if (!local.count(r.from.local_id) || !local.count(r.to.local_id)) continue;
      const Activity& f = act(local[r.from.local_id]);
      const Activity& t = act(local[r.to.local_id]);
      TimePointId fp = r.from.point == PointKind::start ? f.start_point : f.end_point;
      TimePointId tp = r.to.point == PointKind::start ? t.start_point : t.end_point;
      constrain(fp, tp, r.min_offset, r.max_offset, ConstraintOrigin::method, id,
                "relation " + r.from.local_id + " -> " + r.to.local_id + " of " + chosen->id);
    }
  }
}

std::vector<std::string> Planner::descendant_leaves(const std::string& id) {
  std::vector<std::string> out;
  std::vector<std::string> stack{id};
  while (!stack.empty()) {
    std::string cur = stack.back();
    stack.pop_back();
    const Activity& a = act(cur);
    if (a.leaf) {
      out.push_back(cur);
      continue;
    }
    for (auto it = a.children.rbegin(); it != a.children.rend(); ++it) stack.push_back(*it);
  }
  return out;
}

// True if a chain of non-negative precedences leads from a point in
// `others` to m's start.
bool Planner::preceded_by_any(const Activity& m, const std::set<TimePointId>& others) const {
  std::set<TimePointId> seen{m.start_point};
  std::vector<TimePointId> stack{m.start_point};
  while (!stack.empty()) {
    TimePointId p = stack.back();
    stack.pop_back();
    for (ConstraintId cid : p_.stn.constraints_touching(p)) {
      const auto& c = p_.stn.constraint(cid);
      TimePointId q = -1;
      if (c.to == p && !is_unbounded(c.min_offset) && c.min_offset >= 0) q = c.from;
      else if (c.from == p && !is_unbounded(c.max_offset) && c.max_offset <= 0) q = c.to;
      if (q <= kOrigin || seen.count(q)) continue;
      if (others.count(q)) return true;
      seen.insert(q);
      stack.push_back(q);
    }
  }
  return false;
}

void Planner::install_vertical(const std::string& id) {
  Activity& a = act(id);
  if (a.leaf) {
    a.start_anchor = a.end_anchor = id;
    return;
  }
  for (const auto& c : std::vector<std::string>(a.children)) install_vertical(c);
  const TaskTemplate& t = tmpl(act(id));
  auto leaves = descendant_leaves(id);
  auto filter = [&](const std::vector<std::string>& types) {
    std::vector<std::string> out;
    for (const auto& l : leaves)
      if (std::find(types.begin(), types.end(), act(l).task_type) != types.end()) out.push_back(l);
    return out;
  };

  std::vector<std::string> starts = t.anchors.start.empty() ? leaves : filter(t.anchors.start);
  if (starts.empty()) {
    flag(FlagKind::anchor_unresolved, {id}, "no derived activity matches the start anchor; using the first one");
    starts = leaves;
  }
  std::string chosen = starts.front();
  std::set<TimePointId> points;
  for (const auto& m : starts) {
    points.insert(act(m).start_point);
    points.insert(act(m).end_point);
  }
  for (const auto& m : starts) {
    std::set<TimePointId> others = points;
    others.erase(act(m).start_point);
    others.erase(act(m).end_point);
    if (!preceded_by_any(act(m), others)) {
      chosen = m;
      break;
    }
  }
  Activity& self = act(id);
  self.start_anchor = chosen;
  TimePointId sp = self.start_point, ep = self.end_point;
  constrain(sp, act(chosen).start_point, 0, 0, ConstraintOrigin::vertical, id, "start anchor on " + chosen);
  for (const auto& m : starts)
    if (m != chosen) constrain(sp, act(m).start_point, 0, kUnbounded, ConstraintOrigin::vertical, id, "start before " + m);

  std::vector<std::string> ends;
  if (t.anchors.end.empty()) {
    ends = act(id).children;
  } else {
    ends = filter(t.anchors.end);
    if (ends.empty()) {
      flag(FlagKind::anchor_unresolved, {id}, "no derived activity matches the end anchor; using every child");
      ends = act(id).children;
    }
  }
  for (const auto& m : ends) constrain(act(m).end_point, ep, 0, kUnbounded, ConstraintOrigin::vertical, id, "end after " + m);
  event("anchor", id, "start " + chosen);
}

// ---- scheduling ----------------------------------------------------------

// Ready when no unscheduled leaf can still push this leaf's start later.
std::vector<std::string> Planner::blockers(const Activity& a, bool all) const {
  std::vector<std::string> out;
  std::set<TimePointId> seen{a.start_point};
  std::vector<TimePointId> stack{a.start_point};
  while (!stack.empty()) {
    TimePointId p = stack.back();
    stack.pop_back();
    for (ConstraintId cid : p_.stn.constraints_touching(p)) {
      const auto& c = p_.stn.constraint(cid);
      for (int dir = 0; dir < 2; ++dir) {
        TimePointId q = -1;
        if (dir == 0 && c.to == p && !is_unbounded(c.min_offset)) q = c.from;
        if (dir == 1 && c.from == p && !is_unbounded(c.max_offset)) q = c.to;
        if (q <= kOrigin || seen.count(q)) continue;
        seen.insert(q);
        const std::string& who = owner_[static_cast<std::size_t>(q)];
        if (who == a.id) continue;
        auto it = p_.activities.find(who);
        if (it == p_.activities.end()) continue;
        if (it->second.leaf) {
          if (unscheduled_.count(who)) {
            out.push_back(who);
            if (!all) return out;
          }
          continue;
        }
        stack.push_back(q);
      }
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::string Planner::pick_next() const {
  std::vector<std::pair<Minutes, std::string>> order;
  for (const auto& id : unscheduled_) order.push_back({p_.stn.earliest(p_.activities.at(id).start_point), id});
  std::sort(order.begin(), order.end());
  for (const auto& [lb, id] : order)
    if (ready(p_.activities.at(id))) return id;

  // Every leaf waits on another, e.g. two leaves tied by an equality. Take the
  // earliest leaf whose blockers all wait on it in turn.
  std::map<std::string, std::vector<std::string>> waits;
  for (const auto& [lb, id] : order) waits[id] = blockers(p_.activities.at(id), true);
  auto reaches = [&](const std::string& from, const std::string& to) {
    std::set<std::string> seen{from};
    std::vector<std::string> stack{from};
    while (!stack.empty()) {
      std::string x = stack.back();
      stack.pop_back();
      if (x == to) return true;
      for (const auto& y : waits[x])
        if (seen.insert(y).second) stack.push_back(y);
    }
    return false;
  };
  for (const auto& [lb, id] : order) {
    bool sink = true;
    for (const auto& b : waits[id])
      if (!reaches(b, id)) {
        sink = false;
        break;
      }
    if (sink) return id;
  }
  return order.front().second;
}

std::vector<std::string> Planner::defenders_of(const Activity& a, Minutes t) const {
  std::vector<std::string> out;
  const Unit* me = unit(a.executor);
  Allegiance enemy = opposing(me ? me->allegiance : a.side);
  if (const Unit* u = unit(a.target)) {
    out.push_back(u->id);
    return out;
  }
  std::vector<std::string> nodes;
  if (const auto* m = s_.find_measure(a.target)) nodes = m->node_set;
  else if (s_.terrain.contains(a.target)) nodes = {a.target};
  if (nodes.empty()) return out;
  for (const auto& u : s_.units) {
    if (u.allegiance != enemy) continue;
    std::string at = position(u.id, t);
    if (std::find(nodes.begin(), nodes.end(), at) != nodes.end()) out.push_back(u.id);
  }
  std::sort(out.begin(), out.end());
  return out;
}

Sizing Planner::size(const Activity& a, const TaskTemplate& t, Minutes start) {
  Sizing z;
  const Unit* u = unit(a.executor);
  z.origin = u ? position(u->id, start) : location_of(a.target, start);
  std::string target_at = location_of(a.target, start);

  if (t.destination != DestinationRule::none && u) {
    std::string dest;
    switch (t.destination) {
      case DestinationRule::target: dest = target_at; break;
      case DestinationRule::home: dest = u->location; break;
      case DestinationRule::adjacent: {
        if (target_at.empty()) break;
        dest = target_at;
        double best = 0;
        for (const auto& n : s_.terrain.neighbors(target_at)) {
          double d = s_.terrain.euclidean(n, z.origin);
          if (dest == target_at || d < best || (d == best && n < dest)) {
            dest = n;
            best = d;
          }
        }
        break;
      }
      case DestinationRule::displace: {
        auto ns = s_.terrain.neighbors(z.origin);
        if (!ns.empty()) dest = *std::min_element(ns.begin(), ns.end());
        break;
      }
      case DestinationRule::none: break;
    }
    if (dest.empty()) dest = z.origin;
    z.destination = dest;
    if (t.duration.kind == DurationKind::route) {
      if (dest != z.origin && !u->mobile()) {
        z.problem = u->id + " cannot move from " + z.origin + " to " + dest;
      } else {
        try {
          z.route = shortest_path(s_.terrain, u->speed > 0 ? u->speed : 1.0, z.origin, dest);
          z.duration = z.route->duration;
        } catch (const UnreachableError& e) {
          z.problem = e.what();
        }
      }
      if (!z.problem.empty()) {
        z.route.reset();
        z.destination = z.origin;
        z.duration = t.duration.minutes;
      }
    }
  }

  switch (t.duration.kind) {
    case DurationKind::route: break;
    case DurationKind::fixed: z.duration = t.duration.minutes; break;
    case DurationKind::rate_based: z.duration = hours_to_minutes(t.duration.quantity / t.duration.rate); break;
    case DurationKind::engagement_driven: {
      z.duration = t.duration.minutes;
      z.defenders = defenders_of(a, start);
      Intent intent = parse_intent(a.intent).value_or(Intent{a.intent, std::nullopt});
      EngagementIntent ei = engagement_intent(intent);
      double def = 0;
      for (const auto& d : z.defenders) def += power_.at(d);
      double att = u ? power_.at(u->id) : 0;
      if (ei == EngagementIntent::destroy || ei == EngagementIntent::defeat || ei == EngagementIntent::attrit) {
        if (def > 0 || att > 0) {
          EngagementInput in;
          in.attacker_power = att;
          in.defender_power = def;
          in.posture = t.posture;
          std::string site = t.site == SiteRule::target && !target_at.empty() ? target_at : z.origin;
          in.terrain_factor = site.empty() ? 1.0 : c_.terrain_factor.at(to_string(s_.terrain.node(site).mobility_class));
          in.intent = ei;
          in.target_fraction = intent.fraction.value_or(0);
          if (t.duration.max_minutes > 0) in.max_minutes = static_cast<double>(t.duration.max_minutes);
          auto r = attack_duration(in, c_.coefficients);
          z.duration = r.duration;
          z.attrition = r;
        }
      }
      break;
    }
  }
  if (pins_.count(a.id)) z.duration = pins_.at(a.id).second - pins_.at(a.id).first;

  switch (t.site) {
    case SiteRule::executor: z.site = z.origin; break;
    case SiteRule::target: z.site = target_at.empty() ? z.origin : target_at; break;
    case SiteRule::destination: z.site = z.destination.empty() ? z.origin : z.destination; break;
  }
  return z;
}

std::vector<std::string> Planner::overlapping(const std::string& unit_id, Minutes s, Minutes e,
                                              const std::string& self) const {
  std::vector<std::string> out;
  auto it = p_.calendars.find(unit_id);
  if (it == p_.calendars.end() || e <= s) return out;
  for (const auto& x : it->second)
    if (x.exclusive && x.activity != self && x.start < e && s < x.end) out.push_back(x.activity);
  return out;
}

std::optional<Minutes> Planner::earliest_free(const std::string& unit_id, Minutes lo, Minutes hi, Minutes d) const {
  auto it = p_.calendars.find(unit_id);
  Minutes s = lo;
  while (s <= hi) {
    Minutes bump = s;
    if (it != p_.calendars.end() && d > 0)
      for (const auto& x : it->second)
        if (x.exclusive && x.start < s + d && s < x.end) bump = std::max(bump, x.end);
    if (bump == s) return s;
    s = bump;
  }
  return std::nullopt;
}

Minutes Planner::last_end(const std::string& unit_id) const {
  Minutes out = 0;
  auto it = p_.calendars.find(unit_id);
  if (it != p_.calendars.end())
    for (const auto& x : it->second)
      if (!x.blocking) out = std::max(out, x.end);
  return out;
}

void Planner::commit(Activity& a, Minutes s, Minutes d) {
  // Relaxation order when the placement contradicts the network.
  auto rank = [&](ConstraintId id) {
    const auto& c = p_.stn.constraint(id);
    if (pinned_.count(id)) return -1;
    switch (c.origin) {
      case ConstraintOrigin::user: return c.from == kOrigin ? 5 : 2;
      case ConstraintOrigin::adversarial: return 4;
      case ConstraintOrigin::method: return 3;
      case ConstraintOrigin::vertical: return 1;
      default: return -1;
    }
  };
  for (int attempt = 0; attempt < 200; ++attempt) {
    auto r1 = p_.stn.add_constraint(kOrigin, a.start_point, s, s, ConstraintOrigin::commitment);
    AddResult r2;
    if (r1) {
      r2 = p_.stn.add_constraint(kOrigin, a.end_point, s + d, s + d, ConstraintOrigin::commitment);
      if (r2) return;
      p_.stn.remove_constraints({r1.id});
    }
    const auto& witness = r1 ? r2.witness : r1.witness;
    std::set<TimePointId> w(witness.begin(), witness.end());
    w.insert(a.start_point);
    w.insert(a.end_point);
    ConstraintId victim = -1;
    int best = -1;
    for (int pass = 0; pass < 2 && victim < 0; ++pass)
      for (TimePointId p : w)
        for (ConstraintId cid : p_.stn.constraints_touching(p)) {
          const auto& c = p_.stn.constraint(cid);
          bool inside = (w.count(c.from) || c.from == kOrigin) && (w.count(c.to) || c.to == kOrigin);
          if (pass == 0 && !inside) continue;
          int k = rank(cid);
          if (k > best || (k == best && k >= 0 && cid < victim)) {
            best = k;
            victim = k >= 0 ? cid : victim;
          }
        }
    if (victim < 0) {
      // Nothing left to relax nearby: widen the search to every relaxable constraint.
      for (ConstraintId cid : p_.stn.active_constraints()) {
        int k = rank(cid);
        if (k > best || (k == best && k >= 0 && cid < victim)) {
          best = k;
          victim = k >= 0 ? cid : victim;
        }
      }
    }
    if (victim < 0) throw PlanningError("cannot place \"" + a.id + "\" at " + std::to_string(s));
    const auto c = p_.stn.constraint(victim);
    p_.stn.remove_constraints({victim});
    std::vector<std::string> involved{a.id};
    for (TimePointId p : {c.from, c.to})
      if (p != kOrigin) involved.push_back(owner_[static_cast<std::size_t>(p)]);
    std::string what = to_string(c.origin) + " constraint " + p_.stn.label(c.from) + " -> " + p_.stn.label(c.to) +
                       " [" + fmt_minutes(c.min_offset) + ", " + fmt_minutes(c.max_offset) + "]";
    event("relax", a.id, what);
    flag(FlagKind::temporal_conflict, involved, what + " dropped to place " + a.id + " at " + std::to_string(s));
  }
  throw PlanningError("cannot place \"" + a.id + "\"");
}

void Planner::schedule(const std::string& id) {
  Activity& a = act(id);
  const TaskTemplate& t = tmpl(a);
  const Unit* u = unit(a.executor);
  bool moves = t.destination != DestinationRule::none && u;

  Minutes probe = p_.stn.earliest(a.start_point);
  Sizing z;
  Minutes s = 0, lo = 0;
  bool placed = false;
  for (int iter = 0; iter < 6; ++iter) {
    z = size(a, t, probe);
    Minutes d = z.duration;
    lo = std::max(p_.stn.earliest(a.start_point), p_.stn.earliest(a.end_point) - d);
    Minutes hi = std::min(p_.stn.latest(a.start_point), p_.stn.latest(a.end_point) - d);
    std::optional<Minutes> found;
    if (!u || !a.exclusive) {
      if (lo <= hi) found = lo;
    } else {
      // A move goes after the unit's last task so earlier positions stay valid.
      if (moves) found = earliest_free(u->id, std::max(lo, last_end(u->id)), hi, d);
      if (!found) found = earliest_free(u->id, lo, hi, d);
    }
    if (!found) break;
    s = *found;
    placed = true;
    if (!u || position(u->id, s) == z.origin || iter == 5) break;
    probe = s;
    placed = false;
  }
  if (!placed) {
    z = size(a, t, lo);
    lo = std::max(p_.stn.earliest(a.start_point), p_.stn.earliest(a.end_point) - z.duration);
    s = lo;
  }
  Minutes d = z.duration;
  std::vector<std::string> clash = u && a.exclusive ? overlapping(u->id, s, s + d, id) : std::vector<std::string>{};

  commit(a, s, d);
  unscheduled_.erase(id);
  a.start = s;
  a.end = s + d;
  a.duration = d;
  a.origin_node = z.origin;
  a.site = z.site;
  a.destination = moves ? z.destination : "";
  a.route = z.route;
  if (u) {
    auto& cal = p_.calendars[u->id];
    cal.push_back({id, s, s + d, a.exclusive, false});
  }
  event("schedule", id, std::to_string(s) + "-" + std::to_string(s + d) + (u ? " " + u->id : "") +
                            (z.site.empty() ? "" : " at " + z.site));
  if (!z.problem.empty()) flag(FlagKind::unreachable, {id}, z.problem);
  if (!clash.empty()) {
    std::vector<std::string> acts = clash;
    acts.push_back(id);
    flag(FlagKind::over_commitment, acts, u->id + " is already committed during " + std::to_string(s) + "-" +
                                              std::to_string(s + d));
  }

  if (t.coverage && u) {
    try {
      auto cov = coverage_feasible(static_cast<int>(u->systems), t.coverage->transit, t.coverage->endurance,
                                   t.coverage->recovery);
      if (!cov.feasible && d > cov.on_station)
        flag(FlagKind::over_commitment, {id},
             "continuous coverage needs " + std::to_string(cov.min_uavs) + " air vehicles, " + u->id + " has " +
                 std::to_string(static_cast<int>(u->systems)));
    } catch (const Error& e) {
      flag(FlagKind::over_commitment, {id}, std::string("coverage impossible: ") + e.what());
    }
  }

  if (z.attrition && u) {
    engaged_[id] = z.defenders;
    apply_attrition(id, u->id, z.defenders, *z.attrition);
  } else if (t.duration.kind == DurationKind::engagement_driven) {
    engaged_[id] = z.defenders;
    auto ei = engagement_intent(parse_intent(a.intent).value_or(Intent{a.intent, std::nullopt}));
    if ((ei == EngagementIntent::suppress || ei == EngagementIntent::mask) && d > 0)
      for (const auto& victim : z.defenders) {
        p_.calendars[victim].push_back({id, s, s + d, true, true});
        event("suppress", id, victim + " blocked " + std::to_string(s) + "-" + std::to_string(s + d));
      }
  }

  ProvenanceKind root = root_provenance(id);
  if (root != ProvenanceKind::reaction && root != ProvenanceKind::counteraction) {
    infer_reactions(act(id));
    if (t.on_contact) contact(act(id));
  }
}

void Planner::apply_attrition(const std::string& source, const std::string& attacker,
                              const std::vector<std::string>& defenders, const AttritionResult& r) {
  auto hit = [&](const std::string& u, double frac) {
    double before = power_.at(u);
    double after = std::max(0.0, before * (1 - frac));
    power_[u] = after;
    p_.attrition.push_back({source, u, before, after, frac, r.clamped});
  };
  hit(attacker, r.attacker_casualty_fraction);
  for (const auto& d : defenders) hit(d, r.defender_casualty_fraction);
  event("attrition", source, to_string(r.outcome) + " after " + std::to_string(r.duration) + " min");
}

void Planner::infer_reactions(const Activity& a) {
  if (a.executor.empty()) return;
  for (const ReactionRule* rule : kb_.reaction_rules(nation_of(a.executor))) {
    std::string rid = a.id + "!" + rule->id;
    if (deleted_.count(rid) || p_.activities.count(rid)) continue;
    Minutes at = a.start;
    auto trig = reaction_trigger(*rule, s_, a.task_type, a.side, position(a.executor, at),
                                 [&](const Unit& u) { return position(u.id, at); });
    if (trig) create_reaction(a, *rule, *trig->reactor);
  }
}

void Planner::create_reaction(const Activity& trigger, const ReactionRule& rule, const Unit& reactor) {
  std::string rid = trigger.id + "!" + rule.id;
  std::string trig_id = trigger.id, trig_exec = trigger.executor;
  TimePointId trig_end = trigger.end_point;
  Allegiance side = trigger.side;
  Activity& r = create(rid, rule.reaction.task_type, rule.reaction.intent, reactor.id, trig_exec, "", 0, reactor.allegiance,
                       ProvenanceKind::reaction, rule.id, trig_id);
  p_.roots.push_back(rid);
  constrain(trig_end, r.start_point, rule.reaction.delay_min, rule.reaction.delay_max, ConstraintOrigin::adversarial,
            rid, "reaction delay after " + trig_id);
  event("reaction", rid, rule.id + " by " + reactor.id + " against " + trig_id);
  expand({rid});
  install_vertical(rid);

  if (!rule.counteraction) return;
  std::string cid = rid + "+counter";
  if (deleted_.count(cid)) return;
  const auto& spec = *rule.counteraction;
  Activity& c = create(cid, spec.task_type, spec.intent, trig_exec, reactor.id, "", 0, side,
                       ProvenanceKind::counteraction, rule.id, rid);
  p_.roots.push_back(cid);
  constrain(trig_end, c.start_point, spec.delay_min, spec.delay_max, ConstraintOrigin::adversarial, cid,
            "counteraction delay after " + trig_id);
  event("counteraction", cid, rule.id + " by " + trig_exec + " against " + rid);
  expand({cid});
  install_vertical(cid);
}

void Planner::contact(const Activity& a) {
  const Unit* sec = unit(a.executor);
  if (!sec) return;
  std::vector<std::string> path = a.route ? a.route->nodes : std::vector<std::string>{a.origin_node, a.destination};
  const Unit* enemy = nullptr;
  for (const auto& node : path) {
    for (const auto& u : s_.units)
      if (u.allegiance == opposing(sec->allegiance) && position(u.id, a.end) == node && power_.at(u.id) >= 0 &&
          (!enemy || u.id < enemy->id))
        enemy = &u;
    if (enemy) break;
  }
  if (!enemy) return;
  ContactThresholds th{c_.bypass_threshold, c_.engage_threshold, c_.main_body_ratio};
  auto dec = contact_decision(power_.at(sec->id), power_.at(enemy->id), enemy->combat_power, sec->roe, th);
  std::string decision = to_string(dec.decision);
  event("contact", a.id, decision + " " + enemy->id + " (" + dec.basis + ")");
  const auto* actions = kb_.contact_actions(decision);
  if (!actions) return;

  std::string main_body = sec->superior.empty() ? sec->id : sec->superior;
  std::string follow_on = sec->id;
  if (!sec->superior.empty()) {
    auto sibs = s_.subordinates(sec->superior);
    for (std::size_t i = 0; i < sibs.size(); ++i)
      if (sibs[i]->id == sec->id) {
        for (std::size_t k = 1; k < sibs.size(); ++k)
          if (sibs[(i + k) % sibs.size()]->mobile()) {
            follow_on = sibs[(i + k) % sibs.size()]->id;
            break;
          }
        break;
      }
  }
  std::string aid = a.id, parent = a.parent;
  int depth = a.depth;
  Allegiance side = a.side;
  TimePointId trigger_end = a.end_point;
  for (const auto& ca : *actions) {
    std::string xid = aid + "~" + ca.local_id;
    if (deleted_.count(xid) || p_.activities.count(xid)) continue;
    std::string who = ca.executor == ContactRole::security ? sec->id
                      : ca.executor == ContactRole::main_body ? main_body
                                                                : follow_on;
    Activity& x = create(xid, ca.task_type, ca.intent.empty() ? act(aid).intent : ca.intent, who,
                         ca.target_enemy ? enemy->id : "", parent, depth, side, ProvenanceKind::expansion,
                         "contact:" + decision, "");
    TimePointId xs = x.start_point, xe = x.end_point;
    if (parent.empty()) {
      p_.roots.push_back(xid);
    } else {
      act(parent).children.push_back(xid);
      constrain(xe, act(parent).end_point, 0, kUnbounded, ConstraintOrigin::vertical, parent, "end after " + xid);
    }
    constrain(trigger_end, xs, 0, kUnbounded, ConstraintOrigin::method, xid, "contact action after " + aid);
    expand({xid});
    install_vertical(xid);
  }
}

void Planner::withdraw(const std::string& root) {
  std::vector<std::string> ids;
  std::vector<std::string> stack{root};
  while (!stack.empty()) {
    std::string cur = stack.back();
    stack.pop_back();
    if (!p_.activities.count(cur)) continue;
    ids.push_back(cur);
    for (const auto& c : act(cur).children) stack.push_back(c);
  }
  std::set<std::string> gone(ids.begin(), ids.end());
  std::vector<ConstraintId> drop;
  for (const auto& id : ids)
    for (TimePointId p : {act(id).start_point, act(id).end_point})
      for (ConstraintId cid : p_.stn.constraints_touching(p)) drop.push_back(cid);
  std::sort(drop.begin(), drop.end());
  drop.erase(std::unique(drop.begin(), drop.end()), drop.end());
  if (!drop.empty()) p_.stn.remove_constraints(drop);
  for (auto& [u, cal] : p_.calendars)
    cal.erase(std::remove_if(cal.begin(), cal.end(), [&](const CalendarEntry& e) { return gone.count(e.activity); }),
              cal.end());
  p_.attrition.erase(std::remove_if(p_.attrition.begin(), p_.attrition.end(),
                                    [&](const AttritionEntry& e) { return gone.count(e.source); }),
                     p_.attrition.end());
  for (auto& f : p_.flags)
    f.activities.erase(std::remove_if(f.activities.begin(), f.activities.end(),
                                      [&](const std::string& x) { return gone.count(x); }),
                       f.activities.end());
  p_.flags.erase(std::remove_if(p_.flags.begin(), p_.flags.end(), [](const Flag& f) { return f.activities.empty(); }),
                 p_.flags.end());
  flag_index_.clear();
  for (std::size_t i = 0; i < p_.flags.size(); ++i) flag_index_[{p_.flags[i].kind, p_.flags[i].activities}] = i;
  for (const auto& id : ids) {
    unscheduled_.erase(id);
    engaged_.erase(id);
    p_.activities.erase(id);
  }
  p_.roots.erase(std::remove(p_.roots.begin(), p_.roots.end(), root), p_.roots.end());
  event("withdraw", root, "trigger no longer holds");
}

void Planner::reconcile_reactions() {
  for (int round = 0; round < 4; ++round) {
    bool changed = false;
    std::vector<std::string> leaves;
    for (const auto& [id, a] : p_.activities)
      if (a.leaf && !a.executor.empty()) leaves.push_back(id);
    for (const auto& id : leaves) {
      if (!p_.activities.count(id)) continue;
      ProvenanceKind root = root_provenance(id);
      if (root == ProvenanceKind::reaction || root == ProvenanceKind::counteraction) continue;
      const Activity& a = act(id);
      for (const ReactionRule* rule : kb_.reaction_rules(nation_of(a.executor))) {
        std::string rid = id + "!" + rule->id;
        std::string here = position(a.executor, a.start);
        if (p_.activities.count(rid)) {
          const Unit& reactor = s_.unit(act(rid).executor);
          if (!reaction_holds(*rule, s_, a.task_type, a.side, here, reactor, position(reactor.id, a.start))) {
            withdraw(rid + "+counter");
            withdraw(rid);
            changed = true;
          }
        } else if (!deleted_.count(rid)) {
          Minutes at = a.start;
          auto trig = reaction_trigger(*rule, s_, a.task_type, a.side, here,
                                       [&](const Unit& u) { return position(u.id, at); });
          if (trig) {
            create_reaction(act(id), *rule, *trig->reactor);
            changed = true;
          }
        }
      }
    }
    if (!changed) return;
    schedule_all();
  }
}

void Planner::schedule_all() {
  while (!unscheduled_.empty()) schedule(pick_next());
}

// ---- post passes ---------------------------------------------------------

void Planner::resolve_engagements() {
  struct Party {
    const Activity* a;
    const TaskTemplate* t;
  };
  std::vector<Party> contest;
  for (const auto& [id, a] : p_.activities) {
    if (!a.leaf || a.executor.empty() || a.site.empty()) continue;
    const TaskTemplate& t = tmpl(a);
    if (t.contests) contest.push_back({&a, &t});
  }
  struct Pair {
    Minutes start;
    std::string node, attacker, defender;
    const Party *x, *y;
  };
  std::vector<Pair> pairs;
  for (const auto& x : contest)
    for (const auto& y : contest) {
      if (x.a->side != Allegiance::friendly || y.a->side != Allegiance::enemy) continue;
      if (x.a->site != y.a->site || !(x.a->start < y.a->end && y.a->start < x.a->end)) continue;
      bool xa = is_attack(x.t->posture), ya = is_attack(y.t->posture);
      if (!xa && !ya) continue;
      const Party* att = &x;
      const Party* def = &y;
      if (!xa || (ya && (y.a->start < x.a->start || (y.a->start == x.a->start && y.a->id < x.a->id)))) std::swap(att, def);
      pairs.push_back({std::max(x.a->start, y.a->start), x.a->site, att->a->id, def->a->id, att, def});
    }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& l, const Pair& r) {
    return std::tie(l.start, l.node, l.attacker, l.defender) < std::tie(r.start, r.node, r.attacker, r.defender);
  });
  int n = 0;
  for (const auto& pr : pairs) {
    const Activity& att = *pr.x->a;
    const Activity& def = *pr.y->a;
    Engagement e;
    char buf[16];
    std::snprintf(buf, sizeof buf, "E%03d", ++n);
    e.id = buf;
    e.node = pr.node;
    e.attacker_activity = att.id;
    e.defender_activity = def.id;
    e.attacker = att.executor;
    e.defender = def.executor;
    e.start = std::max(att.start, def.start);
    e.end = std::min(att.end, def.end);
    auto done = engaged_.find(att.id);
    if (done != engaged_.end() &&
        std::find(done->second.begin(), done->second.end(), def.executor) != done->second.end()) {
      e.resolved_by_activity = true;
      e.outcome = "resolved_by_activity";
    } else if (power_.at(e.attacker) <= 0 && power_.at(e.defender) <= 0) {
      e.outcome = "no_forces";
    } else {
      EngagementInput in;
      in.attacker_power = power_.at(e.attacker);
      in.defender_power = power_.at(e.defender);
      in.posture = pr.x->t->posture;
      in.terrain_factor = c_.terrain_factor.at(to_string(s_.terrain.node(e.node).mobility_class));
      Intent intent = parse_intent(att.intent).value_or(Intent{att.intent, std::nullopt});
      in.intent = engagement_intent(intent);
      in.target_fraction = intent.fraction.value_or(0);
      in.max_minutes = static_cast<double>(e.end - e.start);
      auto r = resolve_engagement(in, c_.coefficients);
      e.outcome = to_string(r.outcome);
      e.attacker_casualty_fraction = r.attacker_casualty_fraction;
      e.defender_casualty_fraction = r.defender_casualty_fraction;
      apply_attrition(e.id, e.attacker, {e.defender}, r);
    }
    event("engagement", att.id, e.id + " at " + e.node + " vs " + def.id + ": " + e.outcome);
    p_.engagements.push_back(std::move(e));
  }
}

void Planner::consumption_pass() {
  std::map<std::string, double> level;
  for (const auto& u : s_.units) level[u.id] = u.supply_level;
  std::vector<const Activity*> order;
  for (const auto& [id, a] : p_.activities)
    if (a.leaf && !a.executor.empty()) order.push_back(&a);
  std::sort(order.begin(), order.end(), [](const Activity* l, const Activity* r) {
    return std::tie(l->start, l->end, l->id) < std::tie(r->start, r->end, r->id);
  });
  for (const Activity* a : order) {
    const TaskTemplate& t = tmpl(*a);
    if (t.consumption.empty()) continue;
    auto delta = consume(a->duration, t.consumption);
    double& lv = level[a->executor];
    for (const auto& [res, amount] : delta.by_resource) {
      lv -= amount;
      p_.consumption.push_back({a->id, a->executor, res, amount, lv});
    }
    if (lv < 0) {
      std::ostringstream msg;
      msg << a->executor << " supply falls to " << lv << " during " << a->id;
      flag(FlagKind::supply_shortfall, {a->id}, msg.str());
      lv = 0;
    }
  }
  p_.final_supply = level;
}

void Planner::range_pass() {
  for (const auto& [id, a] : p_.activities) {
    if (!a.leaf || a.executor.empty() || a.target.empty()) continue;
    const TaskTemplate& t = tmpl(a);
    if (t.range_check == RangeCheck::none) continue;
    const Unit& u = s_.unit(a.executor);
    std::string from = position(u.id, a.start);
    std::string to = location_of(a.target, a.start);
    if (to.empty()) continue;
    double range = t.range_check == RangeCheck::support ? u.support_range : u.weapon_range;
    auto r = in_range(s_.terrain, from, to, range, c_.support_range_mode);
    if (!r.in_range) {
      std::ostringstream msg;
      msg << u.id << " at " << from << " is " << (r.reason.empty() ? "" : r.reason + "; ") << r.distance
          << " km from " << to << ", range " << range << " km";
      flag(FlagKind::out_of_support_range, {id}, msg.str());
    }
  }
}

void Planner::logistics_pass() {
  for (const auto& f : logistics_check(p_, s_, c_)) {
    std::optional<EditCommand> remedy;
    if (f.kind == FlagKind::reposition_cue) {
      EditCommand e;
      e.kind = EditKind::reposition_unit;
      e.target = f.trains;
      e.node = f.candidate;
      e.not_before = std::max<Minutes>(0, f.depart_by);
      remedy = e;
    }
    flag(f.kind, f.activities, f.message, remedy);
  }
}

void Planner::overlap_pass() {
  for (const auto& [unit_id, cal] : p_.calendars)
    for (std::size_t i = 0; i < cal.size(); ++i)
      for (std::size_t j = i + 1; j < cal.size(); ++j) {
        const auto &x = cal[i], &y = cal[j];
        if (!x.exclusive || !y.exclusive || x.activity == y.activity) continue;
        if (!(x.start < y.end && y.start < x.end)) continue;
        bool covered = false;
        for (const auto& f : p_.flags)
          if (f.kind == FlagKind::over_commitment &&
              std::binary_search(f.activities.begin(), f.activities.end(), x.activity) &&
              std::binary_search(f.activities.begin(), f.activities.end(), y.activity))
            covered = true;
        if (!covered)
          flag(FlagKind::over_commitment, {x.activity, y.activity},
               unit_id + " is committed to both during " + std::to_string(std::max(x.start, y.start)) + "-" +
                   std::to_string(std::min(x.end, y.end)));
      }
}

void Planner::finalize() {
  for (auto& [id, a] : p_.activities) {
    if (a.leaf) continue;
    a.start = p_.stn.earliest(a.start_point);
    a.end = p_.stn.earliest(a.end_point);
    a.duration = a.end - a.start;
    const TaskTemplate& t = tmpl(a);
    std::string best;
    for (const auto& l : descendant_leaves(id)) {
      const Activity& la = act(l);
      if (!t.anchors.end.empty() &&
          std::find(t.anchors.end.begin(), t.anchors.end.end(), la.task_type) == t.anchors.end.end())
        continue;
      if (best.empty() || la.end > act(best).end || (la.end == act(best).end && l < best)) best = l;
    }
    if (best.empty())
      for (const auto& l : descendant_leaves(id))
        if (best.empty() || act(l).end > act(best).end || (act(l).end == act(best).end && l < best)) best = l;
    act(id).end_anchor = best;
  }
  for (auto& [u, cal] : p_.calendars)
    std::sort(cal.begin(), cal.end(), [](const CalendarEntry& l, const CalendarEntry& r) {
      return std::tie(l.start, l.end, l.activity, l.blocking) < std::tie(r.start, r.end, r.activity, r.blocking);
    });
  for (auto it = p_.calendars.begin(); it != p_.calendars.end();)
    it = it->second.empty() ? p_.calendars.erase(it) : std::next(it);

  std::sort(p_.flags.begin(), p_.flags.end(), [](const Flag& l, const Flag& r) {
    return std::make_tuple(to_string(l.kind), l.activities, l.message) <
           std::make_tuple(to_string(r.kind), r.activities, r.message);
  });
  for (std::size_t i = 0; i < p_.flags.size(); ++i) {
    Flag& f = p_.flags[i];
    char buf[16];
    std::snprintf(buf, sizeof buf, "F%03zu", i + 1);
    f.id = buf;
    f.accepted = accepted_.count({f.kind, f.activities}) > 0;
    for (const auto& a : f.activities) act(a).flags.push_back(f.id);
  }
  p_.final_power = power_;
  p_.digest = compute_plan_digest(p_);
}

Plan Planner::run() {
  auto lint = lint_kb(kb_);
  if (has_errors(lint)) throw PlanningError("knowledge base has lint errors:\n" + format_diagnostics(lint));
  auto diags = validate_scenario(s_, &kb_);
  if (has_errors(diags)) throw ValidationError(diags);

  p_.scenario_digest = scenario_digest(s_);
  p_.kb_digest = kb_digest(kb_);
  p_.config = c_;
  p_.row_order = kb_.functional_rows();
  for (const auto& u : s_.units) power_[u.id] = u.combat_power;

  // Goals, in declaration order.
  std::deque<std::string> frontier;
  std::vector<std::string> goal_ids;
  for (const auto& g : s_.goals) {
    Allegiance side = s_.goal_side(g);
    if (side == Allegiance::enemy && !wargame_) continue;
    if (side == Allegiance::enemy) p_.wargame = true;
    if (deleted_.count(g.id)) continue;
    std::string exec = g.executor;
    if (exec.empty() && !reassign_.count(g.id)) {
      const TaskTemplate* t = kb_.find_template(g.task_type, "");
      exec = pick_unit(side, t ? t->required_capabilities : std::vector<std::string>{}, "");
      event("assign", g.id, exec.empty() ? "no unit available" : exec);
    }
    create(g.id, g.task_type, g.intent, exec, g.target, "", 0, side, ProvenanceKind::user_goal, "", "");
    p_.roots.push_back(g.id);
    goal_ids.push_back(g.id);
    frontier.push_back(g.id);
  }
  for (std::size_t i = 0; i < repositions_.size(); ++i) {
    const auto& e = repositions_[i];
    std::string id = "reposition-" + e.target + "-" + e.node;
    if (p_.activities.count(id) || deleted_.count(id) || !s_.find_unit(e.target)) continue;
    const Unit& u = s_.unit(e.target);
    create(id, c_.reposition_task, "", u.id, e.node, "", 0, u.allegiance, ProvenanceKind::user_goal, "", "");
    p_.roots.push_back(id);
    frontier.push_back(id);
    if (e.not_before) {
      auto r = p_.stn.add_constraint(kOrigin, act(id).start_point, *e.not_before, kUnbounded, ConstraintOrigin::user);
      if (!r) throw EditError("reposition of " + e.target + " cannot start at " + std::to_string(*e.not_before));
    }
  }
  expand(frontier);
  for (const auto& r : std::vector<std::string>(p_.roots)) install_vertical(r);

  // User relations are hard: a contradiction aborts planning.
  for (const auto& g : s_.goals) {
    if (!p_.activities.count(g.id)) continue;
    const Activity& a = act(g.id);
    auto user = [&](TimePointId from, TimePointId to, Minutes lo, Minutes hi, const std::string& what) {
      auto r = p_.stn.add_constraint(from, to, lo, hi, ConstraintOrigin::user);
      if (!r) throw PlanningError("goal relations contradict each other: " + what);
    };
    if (g.not_before) user(kOrigin, a.start_point, *g.not_before, kUnbounded, g.id + " not before " + std::to_string(*g.not_before));
    if (g.deadline) user(kOrigin, a.end_point, 0, *g.deadline, g.id + " deadline " + std::to_string(*g.deadline));
    for (const auto& rel : g.relations) {
      if (!p_.activities.count(rel.other)) continue;
      const Activity& b = act(rel.other);
      std::string what = g.id + " " + to_string(rel.relation) + " " + rel.other;
      switch (rel.relation) {
        case GoalRelationKind::starts_with:
          user(b.start_point, a.start_point, rel.offset, rel.offset, what);
          break;
        case GoalRelationKind::starts_after_end_of:
          user(b.end_point, a.start_point, rel.offset, kUnbounded, what);
          break;
        case GoalRelationKind::ends_before_start_of:
          user(a.end_point, b.start_point, rel.offset, kUnbounded, what);
          break;
      }
    }
    event("relations", g.id, std::to_string(g.relations.size()) + " installed");
  }

  // Pins are hard too; only method relations may give way to them.
  for (const auto& [id, pin] : pins_) {
    if (!p_.activities.count(id)) continue;
    const Activity& a = act(id);
    for (auto [point, at] : {std::pair{a.start_point, pin.first}, std::pair{a.end_point, pin.second}}) {
      for (int attempt = 0;; ++attempt) {
        auto r = p_.stn.add_constraint(kOrigin, point, at, at, ConstraintOrigin::user);
        if (r) {
          pinned_.insert(r.id);
          break;
        }
        std::set<TimePointId> w(r.witness.begin(), r.witness.end());
        ConstraintId victim = -1;
        for (TimePointId p : w)
          for (ConstraintId cid : p_.stn.constraints_touching(p)) {
            const auto& c = p_.stn.constraint(cid);
            if (c.origin == ConstraintOrigin::method && w.count(c.from) && w.count(c.to) && (victim < 0 || cid < victim))
              victim = cid;
          }
        if (victim < 0 || attempt > 100)
          throw EditError("pin of \"" + id + "\" to [" + std::to_string(pin.first) + ", " + std::to_string(pin.second) +
                          "] contradicts the user's goal relations");
        const auto c = p_.stn.constraint(victim);
        p_.stn.remove_constraints({victim});
        flag(FlagKind::temporal_conflict, {id, owner_[static_cast<std::size_t>(c.from)], owner_[static_cast<std::size_t>(c.to)]},
             "method relation " + p_.stn.label(c.from) + " -> " + p_.stn.label(c.to) + " dropped for the pin on " + id);
      }
    }
    event("pin", id, std::to_string(pin.first) + "-" + std::to_string(pin.second));
  }

  schedule_all();
  reconcile_reactions();
  resolve_engagements();
  consumption_pass();
  range_pass();
  logistics_pass();
  overlap_pass();
  finalize();
  return std::move(p_);
}

}  // namespace

Plan plan(const Scenario& s, const KnowledgeBase& kb, const PlanConfig& config, const std::vector<EditCommand>& edits) {
  return Planner(s, kb, config, edits, false).run();
}

Plan wargame(const Scenario& s, const KnowledgeBase& kb, const PlanConfig& config,
             const std::vector<EditCommand>& edits) {
  return Planner(s, kb, config, edits, true).run();
}

std::vector<EditCommand> validate_edits(const Plan& base, const Scenario& s, const KnowledgeBase& kb,
                                        const std::vector<EditCommand>& edits) {
  std::vector<EditCommand> all;
  for (EditCommand e : edits) {
    switch (e.kind) {
      case EditKind::accept_flag: {
        if (!e.target.empty()) {
          const Flag* f = base.find_flag(e.target);
          if (!f) throw EditError("unknown flag \"" + e.target + "\"");
          e.flag_kind = to_string(f->kind);
          e.flag_activities = f->activities;
        }
        if (e.flag_kind.empty()) throw EditError("accept_flag needs a flag");
        flag_kind_from_string(e.flag_kind);
        break;
      }
      case EditKind::pin_activity:
        if (!base.find(e.target)) throw EditError("unknown activity \"" + e.target + "\"");
        if (e.start < 0 || e.end < e.start) throw EditError("pin needs 0 <= start <= end");
        break;
      case EditKind::reassign_executor: {
        if (!base.find(e.target)) throw EditError("unknown activity \"" + e.target + "\"");
        const Unit* u = s.find_unit(e.executor);
        if (!u) throw EditError("unknown unit \"" + e.executor + "\"");
        if (u->allegiance != base.activity(e.target).side) throw EditError("unit \"" + e.executor + "\" is on the other side");
        break;
      }
      case EditKind::delete_activity:
        if (!base.find(e.target)) throw EditError("unknown activity \"" + e.target + "\"");
        break;
      case EditKind::change_intent: {
        if (!base.find(e.target)) throw EditError("unknown activity \"" + e.target + "\"");
        auto i = parse_intent(e.intent);
        if (!i || !kb.known_intent(i->tag)) throw EditError("unknown intent \"" + e.intent + "\"");
        break;
      }
      case EditKind::reposition_unit:
        if (!s.find_unit(e.target)) throw EditError("unknown unit \"" + e.target + "\"");
        if (!s.terrain.contains(e.node)) throw EditError("unknown terrain node \"" + e.node + "\"");
        break;
    }
    all.push_back(e);
  }
  return all;
}

Plan replan(const Plan& base, const Scenario& s, const KnowledgeBase& kb, const std::vector<EditCommand>& edits) {
  if (scenario_digest(s) != base.scenario_digest) throw Error("scenario does not match the plan's scenario digest");
  if (kb_digest(kb) != base.kb_digest) throw Error("knowledge base does not match the plan's kb digest");
  std::vector<EditCommand> all = base.edits;
  for (auto& e : validate_edits(base, s, kb, edits)) all.push_back(std::move(e));
  return base.wargame ? wargame(s, kb, base.config, all) : plan(s, kb, base.config, all);
}

std::string resolve_anchor(const Plan& plan, const std::string& activity, PointKind which) {
  const Activity& a = plan.activity(activity);
  if (a.leaf) return a.id;
  return which == PointKind::start ? a.start_anchor : a.end_anchor;
}

std::vector<Utilization> utilization_report(const Plan& plan, const Scenario& s) {
  std::vector<Utilization> out;
  Minutes h = plan.horizon();
  std::vector<std::string> ids;
  for (const auto& u : s.units) ids.push_back(u.id);
  std::sort(ids.begin(), ids.end());
  for (const auto& id : ids) {
    Utilization r;
    r.unit = id;
    r.horizon = h;
    std::vector<std::pair<Minutes, Minutes>> iv;
    auto it = plan.calendars.find(id);
    if (it != plan.calendars.end())
      for (const auto& e : it->second)
        if (!e.blocking && e.end > e.start) iv.push_back({std::max<Minutes>(0, e.start), std::min(h, e.end)});
    std::sort(iv.begin(), iv.end());
    Minutes cur_s = 0, cur_e = -1;
    for (auto [a, b] : iv) {
      if (b <= a) continue;
      if (cur_e < 0 || a > cur_e) {
        if (cur_e > cur_s) r.committed += cur_e - cur_s;
        cur_s = a;
        cur_e = b;
      } else {
        cur_e = std::max(cur_e, b);
      }
    }
    if (cur_e > cur_s) r.committed += cur_e - cur_s;
    r.idle = h - r.committed;
    r.fraction = h > 0 ? static_cast<double>(r.committed) / static_cast<double>(h) : 0.0;
    out.push_back(r);
  }
  return out;
}

}  // namespace coaplan

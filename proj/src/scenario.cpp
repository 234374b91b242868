#include "coaplan/scenario.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>

#include "coaplan/digest.hpp"
#include "coaplan/knowledge_base.hpp"
#include "coaplan/temporal_network.hpp"

namespace coaplan {

namespace {

template <typename E, std::size_t N>
E enum_from(const Node& n, const std::array<E, N>& values) {
  std::string s = n.str();
  for (E v : values)
    if (to_string(v) == s) return v;
  std::string allowed;
  for (E v : values) allowed += (allowed.empty() ? "" : ", ") + to_string(v);
  n.fail("unknown value \"" + s + "\" (expected one of: " + allowed + ")");
}

constexpr std::array kMobility{MobilityClass::open, MobilityClass::restricted, MobilityClass::severely_restricted};
constexpr std::array kAllegiance{Allegiance::friendly, Allegiance::enemy};
constexpr std::array kEchelon{Echelon::team, Echelon::platoon, Echelon::company, Echelon::battalion, Echelon::brigade};
constexpr std::array kMeasure{MeasureKind::objective_area, MeasureKind::axis, MeasureKind::phase_line,
                              MeasureKind::position};
constexpr std::array kRelation{GoalRelationKind::starts_with, GoalRelationKind::starts_after_end_of,
                               GoalRelationKind::ends_before_start_of};

std::vector<std::string> sorted_unique(std::vector<std::string> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

void add(std::vector<Diagnostic>& out, Severity sev, std::string path, std::string code, std::string message) {
  out.push_back(Diagnostic{sev, std::move(path), std::move(code), std::move(message)});
}

}  // namespace

std::string to_string(MobilityClass v) {
  switch (v) {
    case MobilityClass::open: return "open";
    case MobilityClass::restricted: return "restricted";
    case MobilityClass::severely_restricted: return "severely_restricted";
  }
  return "open";
}

std::string to_string(Allegiance v) { return v == Allegiance::friendly ? "friendly" : "enemy"; }

std::string to_string(Echelon v) {
  switch (v) {
    case Echelon::team: return "team";
    case Echelon::platoon: return "platoon";
    case Echelon::company: return "company";
    case Echelon::battalion: return "battalion";
    case Echelon::brigade: return "brigade";
  }
  return "company";
}

std::string to_string(MeasureKind v) {
  switch (v) {
    case MeasureKind::objective_area: return "objective_area";
    case MeasureKind::axis: return "axis";
    case MeasureKind::phase_line: return "phase_line";
    case MeasureKind::position: return "position";
  }
  return "position";
}

std::string to_string(GoalRelationKind v) {
  switch (v) {
    case GoalRelationKind::starts_with: return "starts_with";
    case GoalRelationKind::starts_after_end_of: return "starts_after_end_of";
    case GoalRelationKind::ends_before_start_of: return "ends_before_start_of";
  }
  return "starts_with";
}

Allegiance opposing(Allegiance a) { return a == Allegiance::friendly ? Allegiance::enemy : Allegiance::friendly; }

TerrainGraph::TerrainGraph(std::vector<TerrainNode> nodes, std::vector<TerrainEdge> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)) {
  for (std::size_t i = 0; i < nodes_.size(); ++i) index_.emplace(nodes_[i].id, static_cast<int>(i));
  arcs_.assign(nodes_.size(), {});
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    int a = index(edges_[e].from), b = index(edges_[e].to);
    if (a < 0 || b < 0) continue;  // reported by validation
    arcs_[static_cast<std::size_t>(a)].push_back({b, static_cast<int>(e)});
    if (!edges_[e].directed && a != b) arcs_[static_cast<std::size_t>(b)].push_back({a, static_cast<int>(e)});
  }
  for (auto& list : arcs_)
    std::stable_sort(list.begin(), list.end(), [&](const Arc& x, const Arc& y) {
      const auto& ix = nodes_[static_cast<std::size_t>(x.to)].id;
      const auto& iy = nodes_[static_cast<std::size_t>(y.to)].id;
      return ix != iy ? ix < iy : x.edge < y.edge;
    });
}

int TerrainGraph::index(const std::string& id) const {
  auto it = index_.find(id);
  return it == index_.end() ? -1 : it->second;
}

const TerrainNode& TerrainGraph::node(const std::string& id) const {
  int i = index(id);
  if (i < 0) throw Error("unknown terrain node: " + id);
  return nodes_[static_cast<std::size_t>(i)];
}

std::vector<std::string> TerrainGraph::neighbors(const std::string& id) const {
  std::vector<std::string> out;
  int i = index(id);
  if (i < 0) return out;
  for (const auto& a : arcs(i)) out.push_back(nodes_[static_cast<std::size_t>(a.to)].id);
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double TerrainGraph::euclidean(const std::string& a, const std::string& b) const {
  const auto& na = node(a);
  const auto& nb = node(b);
  return std::hypot(na.x - nb.x, na.y - nb.y);
}

bool Unit::has_capability(const std::string& tag) const {
  return std::binary_search(capabilities.begin(), capabilities.end(), tag);
}

bool Unit::has_roe(const std::string& tag) const { return std::binary_search(roe.begin(), roe.end(), tag); }

const Unit* Scenario::find_unit(const std::string& id) const {
  for (const auto& u : units)
    if (u.id == id) return &u;
  return nullptr;
}

const Unit& Scenario::unit(const std::string& id) const {
  const Unit* u = find_unit(id);
  if (!u) throw Error("unknown unit: " + id);
  return *u;
}

const ControlMeasure* Scenario::find_measure(const std::string& id) const {
  for (const auto& m : measures)
    if (m.id == id) return &m;
  return nullptr;
}

const GoalTask* Scenario::find_goal(const std::string& id) const {
  for (const auto& g : goals)
    if (g.id == id) return &g;
  return nullptr;
}

std::vector<const Unit*> Scenario::subordinates(const std::string& id) const {
  std::vector<const Unit*> out;
  for (const auto& u : units)
    if (u.superior == id) out.push_back(&u);
  std::sort(out.begin(), out.end(), [](const Unit* a, const Unit* b) {
    if (a->echelon != b->echelon) return a->echelon > b->echelon;
    return a->id < b->id;
  });
  return out;
}

Allegiance Scenario::goal_side(const GoalTask& g) const {
  if (const Unit* u = find_unit(g.executor)) return u->allegiance;
  return g.side.value_or(Allegiance::friendly);
}

bool Scenario::operator==(const Scenario& o) const {
  return schema_version == o.schema_version && name == o.name && clock_origin == o.clock_origin &&
         terrain == o.terrain && units == o.units && measures == o.measures && goals == o.goals;
}

namespace {

std::vector<Diagnostic> structural_diagnostics(const Scenario& s) {
  std::vector<Diagnostic> out;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < s.terrain.nodes().size(); ++i) {
    const auto& n = s.terrain.nodes()[i];
    std::string path = "/terrain/nodes/" + std::to_string(i);
    if (!seen.insert(n.id).second) add(out, Severity::error, path + "/id", "duplicate-id", "duplicate node id \"" + n.id + "\"");
  }
  for (std::size_t i = 0; i < s.terrain.edges().size(); ++i) {
    const auto& e = s.terrain.edges()[i];
    std::string path = "/terrain/edges/" + std::to_string(i);
    if (!s.terrain.contains(e.from))
      add(out, Severity::error, path + "/from", "dangling-reference", "unknown node \"" + e.from + "\"");
    if (!s.terrain.contains(e.to))
      add(out, Severity::error, path + "/to", "dangling-reference", "unknown node \"" + e.to + "\"");
    if (!(e.length > 0)) add(out, Severity::error, path + "/length", "invalid-field", "length must be > 0");
    if (!(e.mobility_factor > 0 && e.mobility_factor <= 1))
      add(out, Severity::error, path + "/mobility_factor", "invalid-field", "mobility_factor must be in (0, 1]");
  }

  std::set<std::string> unit_ids, measure_ids;
  bool any_friendly = false;
  for (std::size_t i = 0; i < s.units.size(); ++i) {
    const auto& u = s.units[i];
    std::string path = "/units/" + std::to_string(i);
    if (!unit_ids.insert(u.id).second) add(out, Severity::error, path + "/id", "duplicate-id", "duplicate unit id \"" + u.id + "\"");
    if (u.allegiance == Allegiance::friendly) any_friendly = true;
    for (auto [field, value] : {std::pair{"personnel", u.personnel}, {"systems", u.systems},
                                {"combat_power", u.combat_power}, {"supply_level", u.supply_level},
                                {"speed", u.speed}, {"weapon_range", u.weapon_range},
                                {"support_range", u.support_range}})
      if (!(value >= 0)) add(out, Severity::error, path + "/" + field, "invalid-field", std::string(field) + " must be >= 0");
    if (!s.terrain.contains(u.location))
      add(out, Severity::error, path + "/location", "dangling-reference", "unknown node \"" + u.location + "\"");
  }
  for (std::size_t i = 0; i < s.units.size(); ++i) {
    const auto& u = s.units[i];
    if (!u.superior.empty() && !unit_ids.count(u.superior))
      add(out, Severity::error, "/units/" + std::to_string(i) + "/superior", "dangling-reference",
          "unknown unit \"" + u.superior + "\"");
  }
  // superior chains must be acyclic
  for (std::size_t i = 0; i < s.units.size(); ++i) {
    std::set<std::string> chain;
    const Unit* u = &s.units[i];
    while (u && !u->superior.empty()) {
      if (!chain.insert(u->id).second) {
        add(out, Severity::error, "/units/" + std::to_string(i) + "/superior", "cycle",
            "superior chain of \"" + s.units[i].id + "\" is cyclic");
        break;
      }
      u = s.find_unit(u->superior);
    }
  }
  if (!any_friendly) add(out, Severity::error, "/units", "missing-friendly", "scenario has no friendly unit");

  for (std::size_t i = 0; i < s.measures.size(); ++i) {
    const auto& m = s.measures[i];
    std::string path = "/measures/" + std::to_string(i);
    if (!measure_ids.insert(m.id).second || unit_ids.count(m.id))
      add(out, Severity::error, path + "/id", "duplicate-id", "duplicate id \"" + m.id + "\"");
    if (m.node_set.empty()) add(out, Severity::error, path + "/nodes", "invalid-field", "node set is empty");
    for (std::size_t k = 0; k < m.node_set.size(); ++k)
      if (!s.terrain.contains(m.node_set[k]))
        add(out, Severity::error, path + "/nodes/" + std::to_string(k), "dangling-reference",
            "unknown node \"" + m.node_set[k] + "\"");
  }

  if (s.goals.empty()) add(out, Severity::error, "/goals", "missing-goal", "scenario has no goal task");
  std::set<std::string> goal_ids;
  for (std::size_t i = 0; i < s.goals.size(); ++i) {
    const auto& g = s.goals[i];
    std::string path = "/goals/" + std::to_string(i);
    if (!goal_ids.insert(g.id).second) add(out, Severity::error, path + "/id", "duplicate-id", "duplicate goal id \"" + g.id + "\"");
    if (g.id.find_first_of("/!+~") != std::string::npos)
      add(out, Severity::error, path + "/id", "invalid-field", "goal id may not contain '/', '!', '+' or '~'");
    if (!g.executor.empty() && !unit_ids.count(g.executor))
      add(out, Severity::error, path + "/executor", "dangling-reference", "unknown unit \"" + g.executor + "\"");
    if (!g.target.empty() && !unit_ids.count(g.target) && !measure_ids.count(g.target) && !s.terrain.contains(g.target))
      add(out, Severity::error, path + "/target", "dangling-reference", "unknown target \"" + g.target + "\"");
    if (g.not_before && g.deadline && *g.deadline < *g.not_before)
      add(out, Severity::error, path + "/deadline", "invalid-field", "deadline precedes not_before");
  }
  for (std::size_t i = 0; i < s.goals.size(); ++i)
    for (std::size_t k = 0; k < s.goals[i].relations.size(); ++k) {
      const auto& r = s.goals[i].relations[k];
      std::string path = "/goals/" + std::to_string(i) + "/relations/" + std::to_string(k);
      if (!goal_ids.count(r.other))
        add(out, Severity::error, path + "/goal", "dangling-reference", "unknown goal \"" + r.other + "\"");
      else if (r.other == s.goals[i].id)
        add(out, Severity::error, path + "/goal", "invalid-field", "goal related to itself");
    }
  return out;
}

// Goal-level temporal check. Each goal gets a start and end point with
// end >= start; relations, not_before and deadline are installed in
// declaration order and the first rejected one is reported.
void temporal_diagnostics(const Scenario& s, std::vector<Diagnostic>& out) {
  TemporalNetwork net;
  std::map<std::string, std::pair<TimePointId, TimePointId>> points;
  for (const auto& g : s.goals) {
    auto a = net.add_point(g.id + ".start");
    auto b = net.add_point(g.id + ".end");
    net.add_constraint(a, b, 0, kUnbounded, ConstraintOrigin::duration);
    points[g.id] = {a, b};
  }
  for (std::size_t i = 0; i < s.goals.size(); ++i) {
    const auto& g = s.goals[i];
    auto [gs, ge] = points[g.id];
    std::string base = "/goals/" + std::to_string(i);
    if (g.not_before && !net.add_constraint(kOrigin, gs, *g.not_before, kUnbounded, ConstraintOrigin::user))
      add(out, Severity::error, base + "/not_before", "temporal-contradiction", "temporal contradiction at not_before");
    if (g.deadline && !net.add_constraint(kOrigin, ge, -kUnbounded, *g.deadline, ConstraintOrigin::user))
      add(out, Severity::error, base + "/deadline", "temporal-contradiction", "temporal contradiction at deadline");
    for (std::size_t k = 0; k < g.relations.size(); ++k) {
      const auto& r = g.relations[k];
      auto it = points.find(r.other);
      if (it == points.end() || r.other == g.id) continue;
      auto [hs, he] = it->second;
      AddResult res;
      switch (r.relation) {
        case GoalRelationKind::starts_with: res = net.add_constraint(hs, gs, r.offset, r.offset, ConstraintOrigin::user); break;
        case GoalRelationKind::starts_after_end_of:
          res = net.add_constraint(he, gs, r.offset, kUnbounded, ConstraintOrigin::user);
          break;
        case GoalRelationKind::ends_before_start_of:
          res = net.add_constraint(ge, hs, r.offset, kUnbounded, ConstraintOrigin::user);
          break;
      }
      if (!res) {
        std::string names;
        for (auto p : res.witness)
          if (p != kOrigin) names += (names.empty() ? "" : ", ") + net.label(p);
        add(out, Severity::error, base + "/relations/" + std::to_string(k), "temporal-contradiction",
            "temporal contradiction (cycle through " + names + ")");
      }
    }
  }
}

Unit unit_from(const Node& n) {
  Unit u;
  u.id = n.str("id");
  u.allegiance = enum_from(n.at("allegiance"), kAllegiance);
  u.nation = n.str_or("nation", "");
  u.echelon = enum_from(n.at("echelon"), kEchelon);
  u.unit_type = n.str("unit_type");
  u.superior = n.str_or("superior", "");
  u.personnel = n.number_or("personnel", 0);
  u.systems = n.number_or("systems", 0);
  u.combat_power = n.number_or("combat_power", 0);
  u.speed = n.number_or("speed", 0);
  u.weapon_range = n.number_or("weapon_range", 0);
  u.support_range = n.number_or("support_range", 0);
  u.supply_level = n.number_or("supply_level", 0);
  u.location = n.str("location");
  u.capabilities = sorted_unique(n.strings_or_empty("capabilities"));
  u.roe = sorted_unique(n.strings_or_empty("roe"));
  return u;
}

GoalTask goal_from(const Node& n) {
  GoalTask g;
  g.id = n.str("id");
  g.task_type = n.str("task_type");
  g.intent = n.str_or("intent", "");
  g.executor = n.str_or("executor", "");
  g.target = n.str_or("target", "");
  if (auto side = n.find("side")) g.side = enum_from(*side, kAllegiance);
  if (auto v = n.find("not_before")) g.not_before = v->minutes();
  if (auto v = n.find("deadline")) g.deadline = v->minutes();
  if (n.has("relations"))
  for (const auto& r : n.at("relations").items()) {
    GoalRelation rel;
    rel.other = r.str("goal");
    rel.relation = enum_from(r.at("relation"), kRelation);
    rel.offset = r.integer_or("offset", 0);
    g.relations.push_back(rel);
  }
  return g;
}

}  // namespace

Scenario scenario_from_json(const Json& doc) {
  Node root(doc, "");
  if (!doc.is_object()) root.fail("scenario document must be a mapping");
  Scenario s;
  s.schema_version = static_cast<int>(root.integer("schema_version"));
  if (s.schema_version != kScenarioSchemaVersion)
    root.at("schema_version").fail("unsupported schema_version " + std::to_string(s.schema_version));
  s.name = root.str_or("name", "");
  s.clock_origin = root.str_or("clock_origin", "");

  Node terrain = root.at("terrain");
  std::vector<TerrainNode> nodes;
  for (const auto& n : terrain.at("nodes").items()) {
    TerrainNode t;
    t.id = n.str("id");
    t.x = n.number_or("x", 0);
    t.y = n.number_or("y", 0);
    t.mobility_class = n.has("mobility_class") ? enum_from(n.at("mobility_class"), kMobility) : MobilityClass::open;
    nodes.push_back(t);
  }
  std::vector<TerrainEdge> edges;
  if (terrain.has("edges"))
    for (const auto& n : terrain.at("edges").items()) {
      TerrainEdge e;
      e.from = n.str("from");
      e.to = n.str("to");
      e.length = n.number("length");
      e.mobility_factor = n.number_or("mobility_factor", 1.0);
      e.directed = n.boolean_or("directed", false);
      edges.push_back(e);
    }
  s.terrain = TerrainGraph(std::move(nodes), std::move(edges));

  for (const auto& n : root.at("units").items()) s.units.push_back(unit_from(n));
  if (root.has("measures"))
    for (const auto& n : root.at("measures").items()) {
      ControlMeasure m;
      m.id = n.str("id");
      m.kind = enum_from(n.at("kind"), kMeasure);
      m.node_set = n.at("nodes").strings();
      s.measures.push_back(m);
    }
  for (const auto& n : root.at("goals").items()) s.goals.push_back(goal_from(n));

  auto diags = structural_diagnostics(s);
  if (has_errors(diags)) throw ValidationError(diags);
  return s;
}

Scenario parse_scenario(std::string_view text, const std::string& source) {
  return scenario_from_json(parse_document(text, source));
}

Scenario load_scenario(const std::filesystem::path& path) { return scenario_from_json(load_document(path)); }

Json scenario_to_json(const Scenario& s) {
  Json doc;
  doc["schema_version"] = s.schema_version;
  if (!s.name.empty()) doc["name"] = s.name;
  if (!s.clock_origin.empty()) doc["clock_origin"] = s.clock_origin;
  Json nodes = Json::array(), edges = Json::array();
  for (const auto& n : s.terrain.nodes())
    nodes.push_back({{"id", n.id}, {"x", n.x}, {"y", n.y}, {"mobility_class", to_string(n.mobility_class)}});
  for (const auto& e : s.terrain.edges()) {
    Json j{{"from", e.from}, {"to", e.to}, {"length", e.length}, {"mobility_factor", e.mobility_factor}};
    if (e.directed) j["directed"] = true;
    edges.push_back(j);
  }
  doc["terrain"] = {{"nodes", nodes}, {"edges", edges}};
  Json units = Json::array();
  for (const auto& u : s.units) {
    Json j{{"id", u.id},
           {"allegiance", to_string(u.allegiance)},
           {"nation", u.nation},
           {"echelon", to_string(u.echelon)},
           {"unit_type", u.unit_type},
           {"personnel", u.personnel},
           {"systems", u.systems},
           {"combat_power", u.combat_power},
           {"speed", u.speed},
           {"weapon_range", u.weapon_range},
           {"support_range", u.support_range},
           {"supply_level", u.supply_level},
           {"location", u.location},
           {"capabilities", u.capabilities},
           {"roe", u.roe}};
    if (!u.superior.empty()) j["superior"] = u.superior;
    units.push_back(j);
  }
  doc["units"] = units;
  Json measures = Json::array();
  for (const auto& m : s.measures) measures.push_back({{"id", m.id}, {"kind", to_string(m.kind)}, {"nodes", m.node_set}});
  doc["measures"] = measures;
  Json goals = Json::array();
  for (const auto& g : s.goals) {
    Json j{{"id", g.id}, {"task_type", g.task_type}};
    if (!g.intent.empty()) j["intent"] = g.intent;
    if (!g.executor.empty()) j["executor"] = g.executor;
    if (!g.target.empty()) j["target"] = g.target;
    if (g.side) j["side"] = to_string(*g.side);
    if (g.not_before) j["not_before"] = *g.not_before;
    if (g.deadline) j["deadline"] = *g.deadline;
    Json rels = Json::array();
    for (const auto& r : g.relations)
      rels.push_back({{"goal", r.other}, {"relation", to_string(r.relation)}, {"offset", r.offset}});
    j["relations"] = rels;
    goals.push_back(j);
  }
  doc["goals"] = goals;
  return doc;
}

std::vector<Diagnostic> validate_scenario(const Scenario& s, const KnowledgeBase* kb) {
  auto out = structural_diagnostics(s);
  if (has_errors(out)) return out;
  temporal_diagnostics(s, out);

  for (std::size_t i = 0; i < s.goals.size(); ++i) {
    const auto& g = s.goals[i];
    std::string path = "/goals/" + std::to_string(i);
    const Unit* exec = s.find_unit(g.executor);
    if (!kb) continue;
    const TaskTemplate* t = kb->find_template(g.task_type, exec ? exec->nation : "");
    if (!t) {
      add(out, Severity::error, path + "/task_type", "unknown-task-type", "task type \"" + g.task_type + "\" is not in the knowledge base");
      continue;
    }
    if (!g.intent.empty()) {
      auto intent = parse_intent(g.intent);
      if (!intent || !kb->known_intent(intent->tag))
        add(out, Severity::error, path + "/intent", "unknown-intent", "intent \"" + g.intent + "\" is not in the vocabulary");
      else if (!t->intents.empty() && !std::count(t->intents.begin(), t->intents.end(), intent->tag))
        add(out, Severity::warning, path + "/intent", "intent-not-allowed",
            "intent \"" + intent->tag + "\" is not listed for task type \"" + g.task_type + "\"");
    }
    if (exec && !exec->mobile() && kb->involves_movement(g.task_type, exec->nation))
      add(out, Severity::warning, path + "/executor", "immobile-executor",
          "immobile executor \"" + exec->id + "\" assigned to a movement task");
  }
  return out;
}

std::string scenario_digest(const Scenario& s) {
  Json doc = scenario_to_json(s);
  auto by_id = [](Json& arr) {
    std::sort(arr.begin(), arr.end(), [](const Json& a, const Json& b) { return a.at("id") < b.at("id"); });
  };
  by_id(doc["terrain"]["nodes"]);
  by_id(doc["units"]);
  by_id(doc["measures"]);
  auto& edges = doc["terrain"]["edges"];
  for (auto& e : edges)
    if (!e.contains("directed") && e.at("to") < e.at("from")) std::swap(e["from"], e["to"]);
  std::sort(edges.begin(), edges.end());
  return json_digest(doc);
}

}  // namespace coaplan

#pragma once

// Scenario: terrain graph, units of both sides, control measures and the
// user's goal tasks. Immutable once loaded.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "coaplan/document.hpp"

namespace coaplan {

class KnowledgeBase;

inline constexpr int kScenarioSchemaVersion = 1;

enum class MobilityClass { open, restricted, severely_restricted };
enum class Allegiance { friendly, enemy };
enum class Echelon { team, platoon, company, battalion, brigade };
enum class MeasureKind { objective_area, axis, phase_line, position };
enum class GoalRelationKind { starts_with, starts_after_end_of, ends_before_start_of };

std::string to_string(MobilityClass v);
std::string to_string(Allegiance v);
std::string to_string(Echelon v);
std::string to_string(MeasureKind v);
std::string to_string(GoalRelationKind v);

Allegiance opposing(Allegiance a);

struct TerrainNode {
  std::string id;
  double x = 0;  // km
  double y = 0;  // km
  MobilityClass mobility_class = MobilityClass::open;

  bool operator==(const TerrainNode&) const = default;
};

struct TerrainEdge {
  std::string from;
  std::string to;
  double length = 0;            // km
  double mobility_factor = 1;   // (0, 1]
  bool directed = false;

  bool operator==(const TerrainEdge&) const = default;
};

class TerrainGraph {
 public:
  struct Arc {
    int to;
    int edge;
  };

  TerrainGraph() = default;
  TerrainGraph(std::vector<TerrainNode> nodes, std::vector<TerrainEdge> edges);

  const std::vector<TerrainNode>& nodes() const { return nodes_; }
  const std::vector<TerrainEdge>& edges() const { return edges_; }
  std::size_t size() const { return nodes_.size(); }

  // -1 when unknown.
  int index(const std::string& id) const;
  bool contains(const std::string& id) const { return index(id) >= 0; }
  const TerrainNode& node(int i) const { return nodes_.at(static_cast<std::size_t>(i)); }
  const TerrainNode& node(const std::string& id) const;
  // Outgoing arcs in (neighbor id, edge index) order.
  const std::vector<Arc>& arcs(int i) const { return arcs_.at(static_cast<std::size_t>(i)); }
  std::vector<std::string> neighbors(const std::string& id) const;
  double euclidean(const std::string& a, const std::string& b) const;

  bool operator==(const TerrainGraph& o) const { return nodes_ == o.nodes_ && edges_ == o.edges_; }

 private:
  std::vector<TerrainNode> nodes_;
  std::vector<TerrainEdge> edges_;
  std::map<std::string, int> index_;
  std::vector<std::vector<Arc>> arcs_;
};

struct Unit {
  std::string id;
  Allegiance allegiance = Allegiance::friendly;
  std::string nation;
  Echelon echelon = Echelon::company;
  std::string unit_type;
  std::string superior;  // parent unit id, empty at the top
  double personnel = 0;
  double systems = 0;
  double combat_power = 0;
  double speed = 0;           // km/h
  double weapon_range = 0;    // km
  double support_range = 0;   // km
  double supply_level = 0;
  std::string location;
  std::vector<std::string> capabilities;  // sorted, unique
  std::vector<std::string> roe;           // sorted, unique

  bool has_capability(const std::string& tag) const;
  bool has_roe(const std::string& tag) const;
  bool mobile() const { return speed > 0; }

  bool operator==(const Unit&) const = default;
};

struct ControlMeasure {
  std::string id;
  MeasureKind kind = MeasureKind::position;
  std::vector<std::string> node_set;  // declaration order; first node is the reference point

  bool operator==(const ControlMeasure&) const = default;
};

struct GoalRelation {
  std::string other;
  GoalRelationKind relation = GoalRelationKind::starts_with;
  Minutes offset = 0;

  bool operator==(const GoalRelation&) const = default;
};

struct GoalTask {
  std::string id;
  std::string task_type;
  std::string intent;
  std::string executor;  // empty = unassigned
  std::string target;    // unit id, measure id, or empty
  std::optional<Allegiance> side;  // needed when the executor is unassigned
  std::optional<Minutes> not_before;
  std::optional<Minutes> deadline;  // latest end
  std::vector<GoalRelation> relations;

  bool operator==(const GoalTask&) const = default;
};

struct Scenario {
  int schema_version = kScenarioSchemaVersion;
  std::string name;
  std::string clock_origin;  // H-hour timestamp, informational
  TerrainGraph terrain;
  std::vector<Unit> units;
  std::vector<ControlMeasure> measures;
  std::vector<GoalTask> goals;

  const Unit* find_unit(const std::string& id) const;
  const Unit& unit(const std::string& id) const;
  const ControlMeasure* find_measure(const std::string& id) const;
  const GoalTask* find_goal(const std::string& id) const;
  // Units whose `superior` is `id`, ordered by (echelon descending, id).
  std::vector<const Unit*> subordinates(const std::string& id) const;
  // Side a goal executes for: its executor's allegiance, else `side`, else friendly.
  Allegiance goal_side(const GoalTask& g) const;

  bool operator==(const Scenario& o) const;
};

// Structural parse. Throws ParseError/SchemaError for malformed input and
// ValidationError if any error-severity diagnostic is found.
Scenario scenario_from_json(const Json& doc);
Scenario parse_scenario(std::string_view text, const std::string& source = "<memory>");
Scenario load_scenario(const std::filesystem::path& path);

// Declaration-ordered serialization; round-trips through scenario_from_json.
Json scenario_to_json(const Scenario& s);

// With a KB, also checks task types, intents and movement goals.
std::vector<Diagnostic> validate_scenario(const Scenario& s, const KnowledgeBase* kb = nullptr);

// Independent of unit, node, edge and measure declaration order.
std::string scenario_digest(const Scenario& s);

}  // namespace coaplan

#pragma once

// Plan: the engine's product. An activity forest over a temporal network,
// per-unit resource calendars, flags, ledgers and an ordered event log.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "coaplan/combat_models.hpp"
#include "coaplan/document.hpp"
#include "coaplan/routing.hpp"
#include "coaplan/scenario.hpp"
#include "coaplan/temporal_network.hpp"

namespace coaplan {

inline constexpr int kPlanSchemaVersion = 1;

// Planning cannot continue: expansion depth exceeded, or the user's goal
// relations contradict each other.
class PlanningError : public Error {
 public:
  using Error::Error;
};

struct PlanConfig {
  int max_expansion_depth = 12;
  Minutes period_length = 60;
  CrmCoefficients coefficients = default_coefficients();
  double bypass_threshold = 0.3;     // enemy remaining fraction at or below which contact is bypassed
  double engage_threshold = 1.5;     // security : enemy power ratio
  double main_body_ratio = 3.0;      // enemy : security power ratio that calls for the main body
  Minutes resupply_threshold = 120;  // round trip, minutes
  double resupply_speed = 30;        // km/h of the resupply shuttle
  Minutes resupply_slice = 60;
  DistanceMode support_range_mode = DistanceMode::euclidean;
  std::string trains_unit_type = "field-trains";
  std::string reposition_task = "reposition-trains";
  std::map<std::string, double> terrain_factor{{"open", 1.0}, {"restricted", 0.8}, {"severely_restricted", 0.6}};

  bool operator==(const PlanConfig&) const = default;
};

// Throws SchemaError. Relative coefficient-table paths resolve against `base_dir`.
PlanConfig config_from_json(const Json& doc, const std::filesystem::path& base_dir = {});
PlanConfig load_config(const std::filesystem::path& path);
Json config_to_json(const PlanConfig& c);

enum class EditKind { accept_flag, pin_activity, reassign_executor, delete_activity, change_intent, reposition_unit };
std::string to_string(EditKind k);

struct EditCommand {
  EditKind kind = EditKind::accept_flag;
  std::string target;  // activity id, flag id (accept_flag) or unit id (reposition_unit)
  Minutes start = 0;   // pin_activity
  Minutes end = 0;
  std::string executor;  // reassign_executor
  std::string intent;    // change_intent
  std::string node;      // reposition_unit destination
  std::optional<Minutes> not_before;  // reposition_unit departure
  // accept_flag, normalized to the flag's persistent key
  std::string flag_kind;
  std::vector<std::string> flag_activities;

  bool operator==(const EditCommand&) const = default;
};

EditCommand edit_from_json(const Json& j);
Json edit_to_json(const EditCommand& e);

enum class FlagKind {
  over_commitment,
  out_of_support_range,
  supply_shortfall,
  reposition_cue,
  temporal_conflict,
  anchor_unresolved,
  unreachable,
};
std::string to_string(FlagKind k);
FlagKind flag_kind_from_string(const std::string& s);

struct Flag {
  std::string id;
  FlagKind kind = FlagKind::over_commitment;
  std::vector<std::string> activities;  // sorted
  std::string message;
  std::optional<EditCommand> remedy;
  bool accepted = false;

  bool operator==(const Flag&) const = default;
};

enum class ProvenanceKind { user_goal, expansion, reaction, counteraction };
std::string to_string(ProvenanceKind k);

struct Activity {
  std::string id;
  std::string task_type;
  std::string intent;
  std::string executor;
  std::string target;
  std::string parent;
  std::vector<std::string> children;
  int depth = 0;
  Allegiance side = Allegiance::friendly;
  ProvenanceKind provenance = ProvenanceKind::user_goal;
  std::string rule;     // method or reaction rule id
  std::string trigger;  // reaction: action leaf; counteraction: reaction root
  std::string functional_row;
  TimePointId start_point = -1;
  TimePointId end_point = -1;
  bool leaf = false;
  bool exclusive = true;
  Minutes start = 0;
  Minutes end = 0;
  Minutes duration = 0;
  std::string origin_node;   // executor position at start
  std::string site;          // where the activity takes place
  std::string destination;   // where the executor ends up, moves only
  std::optional<Route> route;
  std::string start_anchor;  // leaf whose start defines this activity's start
  std::string end_anchor;    // latest-ending leaf among those defining the end
  std::vector<std::string> flags;

  bool questionable() const { return !flags.empty(); }
  bool operator==(const Activity&) const = default;
};

struct CalendarEntry {
  std::string activity;
  Minutes start = 0;
  Minutes end = 0;
  bool exclusive = true;
  bool blocking = false;  // suppression placed on a target, not the unit's own task

  bool operator==(const CalendarEntry&) const = default;
};

struct AttritionEntry {
  std::string source;  // activity or engagement id
  std::string unit;
  double power_before = 0;
  double power_after = 0;
  double casualty_fraction = 0;
  bool clamped = false;

  bool operator==(const AttritionEntry&) const = default;
};

struct ConsumptionEntry {
  std::string activity;
  std::string unit;
  std::string resource;
  double amount = 0;
  double level_after = 0;

  bool operator==(const ConsumptionEntry&) const = default;
};

struct Engagement {
  std::string id;
  std::string node;
  std::string attacker_activity;
  std::string defender_activity;
  std::string attacker;
  std::string defender;
  Minutes start = 0;
  Minutes end = 0;
  bool resolved_by_activity = false;
  std::string outcome;
  double attacker_casualty_fraction = 0;
  double defender_casualty_fraction = 0;

  bool operator==(const Engagement&) const = default;
};

struct Event {
  int seq = 0;
  std::string kind;
  std::string activity;
  std::string detail;

  bool operator==(const Event&) const = default;
};

struct Plan {
  std::string scenario_digest;
  std::string kb_digest;
  PlanConfig config;
  bool wargame = false;  // enemy goals were expanded
  std::map<std::string, Activity> activities;
  std::vector<std::string> roots;  // creation order
  std::vector<std::string> row_order;
  TemporalNetwork stn;
  std::map<std::string, std::vector<CalendarEntry>> calendars;  // sorted by (start, end, activity)
  std::vector<Flag> flags;
  std::vector<AttritionEntry> attrition;
  std::vector<ConsumptionEntry> consumption;
  std::vector<Engagement> engagements;
  std::vector<Event> events;
  std::vector<EditCommand> edits;
  std::map<std::string, double> final_power;
  std::map<std::string, double> final_supply;
  std::string digest;

  const Activity& activity(const std::string& id) const;
  const Activity* find(const std::string& id) const;
  const Flag* find_flag(const std::string& id) const;
  std::vector<const Activity*> leaves() const;  // sorted by id
  Minutes horizon() const;                      // latest leaf end, 0 when empty
};

// Where a unit stands at time t: the destination of its latest move ending at
// or before t, else its scenario location.
std::string position_at(const Plan& plan, const Scenario& s, const std::string& unit, Minutes t);

}  // namespace coaplan

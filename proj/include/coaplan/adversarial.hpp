#pragma once

// Opposing-force behavior: reaction triggers, movement-to-contact decisions,
// counter-attack commitment and the resupply check that cues field trains.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "coaplan/knowledge_base.hpp"
#include "coaplan/plan.hpp"
#include "coaplan/routing.hpp"
#include "coaplan/scenario.hpp"

namespace coaplan {

// ROE tag under which a unit may not initiate direct-fire contact.
inline constexpr const char* kRoeWeaponsHold = "weapons-hold";

// ---- reactions -----------------------------------------------------------

struct ReactionTrigger {
  const Unit* reactor = nullptr;
  std::string reactor_location;
  double distance = 0;
};

using PositionFn = std::function<std::string(const Unit&)>;

// First opposing unit, by (distance, id), that carries the rule's capability
// and has the acting position within its weapon range. nullopt when the rule
// does not fire.
std::optional<ReactionTrigger> reaction_trigger(const ReactionRule& rule, const Scenario& s,
                                                const std::string& task_type, Allegiance acting_side,
                                                const std::string& acting_location, const PositionFn& position_of);

// Same test for one named reactor.
bool reaction_holds(const ReactionRule& rule, const Scenario& s, const std::string& task_type,
                    Allegiance acting_side, const std::string& acting_location, const Unit& reactor,
                    const std::string& reactor_location);

// ---- movement to contact -------------------------------------------------

enum class ContactDecisionKind { bypass, avoid, engage, assist_main_body };
std::string to_string(ContactDecisionKind k);

struct ContactThresholds {
  double bypass = 0.3;     // enemy remaining fraction of initial strength
  double engage = 1.5;     // security : enemy
  double main_body = 3.0;  // enemy : security
};

struct ContactDecision {
  ContactDecisionKind decision = ContactDecisionKind::avoid;
  double ratio = 0;             // security : enemy power
  double enemy_remaining = 1;   // fraction of initial
  std::vector<std::string> roe_consulted;
  std::string basis;
};

// Rule order: bypass a spent enemy; avoid when ROE holds fire; call the main
// body against a much stronger enemy; engage at or above the engage ratio;
// otherwise avoid. Thresholds are closed.
ContactDecision contact_decision(double security_power, double enemy_power, double enemy_initial_power,
                                 const std::vector<std::string>& security_roe, const ContactThresholds& t);
ContactDecision contact_decision(const Unit& security, const Unit& enemy, const ContactThresholds& t);

// ---- counter-attack ------------------------------------------------------

struct CounterattackPlan {
  std::string engagement_node;
  std::string flank_node;  // empty for a frontal commitment
  Route route;
  Minutes commitment_time = 0;
  Minutes arrival = 0;
  bool too_late = false;
  bool frontal = false;
  std::string warning;
};

// Route the counter-attack force to the first (by id) neighbor of the
// trigger's site that is not on the attacker's approach path, leaving in
// time to arrive as the trigger starts. Throws Error if the trigger is not a
// scheduled enemy leaf or the force is unknown or immobile.
CounterattackPlan commit_counterattack(const Plan& plan, const Scenario& s, const std::string& ca_force,
                                       const std::string& trigger_activity, Minutes now = 0);

// ---- logistics -----------------------------------------------------------

struct LogisticsFinding {
  FlagKind kind = FlagKind::reposition_cue;  // or out_of_support_range for a restriction
  std::string trains;
  std::string combat_unit;
  Minutes slice_start = 0;
  Minutes round_trip = 0;
  std::string candidate;  // reposition target, cues only
  Minutes candidate_round_trip = 0;
  Minutes depart_by = 0;
  std::vector<std::string> activities;
  std::string message;
};

bool is_trains(const Unit& u, const PlanConfig& c);

// Time-sliced resupply check over the scheduled plan. One finding per
// violation episode, at its first violating slice.
std::vector<LogisticsFinding> logistics_check(const Plan& plan, const Scenario& s, const PlanConfig& c);

}  // namespace coaplan

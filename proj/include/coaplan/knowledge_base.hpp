#pragma once

// Rule base: task templates, expansion methods, reaction rules and contact
// rules. A KB is a base segment plus ordered overlay segments; an overlay
// shadows earlier definitions with the same id. Overlays with a nation tag
// apply only to executors of that nation.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "coaplan/document.hpp"
#include "coaplan/scenario.hpp"

namespace coaplan {

// Parsed intent tag, e.g. "attrit(0.2)" -> {attrit, 0.2}.
struct Intent {
  std::string tag;
  std::optional<double> fraction;

  std::string str() const;
  bool operator==(const Intent&) const = default;
};

std::optional<Intent> parse_intent(const std::string& text);

enum class DurationKind { fixed, rate_based, engagement_driven, route };
enum class Posture { none, hasty_attack, deliberate_attack, defend, delay };
enum class SiteRule { executor, target, destination };
// adjacent: neighbor of the target nearest the executor; displace: first
// neighbor of the executor's own position.
enum class DestinationRule { none, target, adjacent, home, displace };
enum class RangeCheck { none, support, weapon };

std::string to_string(DurationKind v);
std::string to_string(Posture v);
std::string to_string(SiteRule v);
std::string to_string(DestinationRule v);
std::string to_string(RangeCheck v);

struct DurationModel {
  DurationKind kind = DurationKind::fixed;
  Minutes minutes = 0;       // fixed; also the fallback for engagement_driven with no defender
  double quantity = 0;       // rate_based: hours = quantity / rate
  double rate = 1;
  Minutes max_minutes = 0;   // engagement_driven cap, 0 = open

  bool operator==(const DurationModel&) const = default;
};

// Names the derived leaf types that define a composite's start and end.
// Empty start list = earliest child; end "all" (empty list) = every child.
struct AnchorSpec {
  std::vector<std::string> start;
  std::vector<std::string> end;

  bool operator==(const AnchorSpec&) const = default;
};

struct CoverageSpec {
  Minutes transit = 0;
  Minutes endurance = 0;
  Minutes recovery = 0;

  bool operator==(const CoverageSpec&) const = default;
};

struct TaskTemplate {
  std::string task_type;
  std::string nation;  // segment nation, "" for universal
  std::string segment;
  std::vector<std::string> intents;
  std::string functional_row;
  AnchorSpec anchors;
  DurationModel duration;
  std::map<std::string, double> consumption;  // resource class -> units/hour
  std::vector<std::string> required_capabilities;
  Posture posture = Posture::none;
  bool contests = false;   // takes part in engagement detection
  bool exclusive = true;   // occupies the executor's calendar exclusively
  SiteRule site = SiteRule::executor;
  DestinationRule destination = DestinationRule::none;
  RangeCheck range_check = RangeCheck::none;
  bool on_contact = false;  // movement that can meet the enemy (security elements)
  std::optional<CoverageSpec> coverage;

  bool operator==(const TaskTemplate&) const = default;
};

struct Guard {
  std::vector<std::string> intents;        // any-of; empty = any
  std::vector<std::string> capabilities;   // all-of
  std::vector<std::string> nations;        // any-of; empty = any
  std::vector<std::string> roe_require;    // all-of
  std::vector<std::string> roe_forbid;     // none-of
  std::vector<std::string> target_kinds;   // any-of {unit, measure, node, none}; empty = any

  bool operator==(const Guard&) const = default;
};

enum class ExecutorBindingKind { same, subordinate, role, unbound, parent_target };
enum class TargetBindingKind { same, none, parent_executor };

struct ExecutorBinding {
  ExecutorBindingKind kind = ExecutorBindingKind::same;
  int index = 1;       // subordinate: 1-based
  std::string role;    // role: capability tag

  bool operator==(const ExecutorBinding&) const = default;
};

struct SubtaskSpec {
  std::string local_id;
  std::string task_type;
  std::string intent = "inherit";
  ExecutorBinding executor;
  TargetBindingKind target = TargetBindingKind::same;

  bool operator==(const SubtaskSpec&) const = default;
};

enum class PointKind { start, end };

struct PointRef {
  std::string local_id;
  PointKind point = PointKind::start;

  bool operator==(const PointRef&) const = default;
};

struct MethodRelation {
  PointRef from;
  PointRef to;
  Minutes min_offset = 0;
  Minutes max_offset = kUnbounded;

  bool operator==(const MethodRelation&) const = default;
};

struct ExpansionMethod {
  std::string id;
  std::string task_type;
  std::string nation;
  std::string segment;
  Guard guard;
  int priority = 0;
  std::vector<SubtaskSpec> subtasks;
  std::vector<MethodRelation> relations;

  bool operator==(const ExpansionMethod&) const = default;
};

enum class RangeMode { euclidean, path };
std::string to_string(RangeMode v);

struct ReactionSpec {
  std::string task_type;
  std::string intent;
  Minutes delay_min = 0;          // reaction start - trigger end
  Minutes delay_max = kUnbounded;

  bool operator==(const ReactionSpec&) const = default;
};

struct ReactionRule {
  std::string id;
  std::string nation;
  std::string segment;
  std::vector<std::string> trigger_task_types;
  std::optional<Allegiance> acting_side;  // empty = either
  std::string opposing_capability;
  RangeMode range_mode = RangeMode::euclidean;
  ReactionSpec reaction;
  std::optional<ReactionSpec> counteraction;  // delays are relative to the trigger's end
  int priority = 0;

  bool operator==(const ReactionRule&) const = default;
};

// Derived actions produced by a movement-to-contact decision.
enum class ContactRole { security, main_body, follow_on };

struct ContactAction {
  std::string local_id;
  std::string task_type;
  std::string intent;
  ContactRole executor = ContactRole::security;
  bool target_enemy = true;

  bool operator==(const ContactAction&) const = default;
};

struct KbSegment {
  std::string segment_id;
  std::string nation;
  std::string shadows;
  Json source;  // the document as loaded, for digests
};

class KnowledgeBase {
 public:
  // Throws ParseError, SchemaError or ValidationError.
  static KnowledgeBase from_documents(const std::vector<Json>& docs, const std::vector<std::string>& sources = {});
  static KnowledgeBase load(const std::vector<std::filesystem::path>& paths);

  const std::vector<KbSegment>& segments() const { return segments_; }

  // Resolution prefers a definition from the executor's nation, then the universal one.
  const TaskTemplate* find_template(const std::string& task_type, const std::string& nation) const;
  const TaskTemplate& task_template(const std::string& task_type, const std::string& nation) const;
  bool has_task_type(const std::string& task_type) const;
  std::vector<std::string> task_types() const;

  // Every method visible to `nation` for `task_type`, before guard evaluation,
  // ordered by (priority desc, id asc).
  std::vector<const ExpansionMethod*> methods_for(const std::string& task_type, const std::string& nation) const;
  std::vector<const ReactionRule*> reaction_rules(const std::string& nation) const;
  const std::vector<ContactAction>* contact_actions(const std::string& decision) const;

  const std::vector<std::string>& intent_vocabulary() const { return intents_; }
  const std::vector<std::string>& capability_vocabulary() const { return capabilities_; }
  const std::vector<std::string>& functional_rows() const { return rows_; }
  bool known_intent(const std::string& tag) const;
  // True if the type or any method-reachable descendant routes its executor.
  bool involves_movement(const std::string& task_type, const std::string& nation) const;

  // Merged view as a canonical document (ids sorted).
  Json to_json() const;

 private:
  friend class KbBuilder;

  template <typename T>
  using Overlay = std::map<std::string, std::map<std::string, T>>;  // id -> nation -> def

  std::vector<KbSegment> segments_;
  Overlay<TaskTemplate> templates_;
  Overlay<ExpansionMethod> methods_;
  Overlay<ReactionRule> reactions_;
  std::map<std::string, std::vector<ContactAction>> contact_;
  std::vector<std::string> intents_;
  std::vector<std::string> capabilities_;
  std::vector<std::string> rows_;
};

// Facts a guard is evaluated against.
struct GuardContext {
  Intent intent;
  const Unit* executor = nullptr;  // null when unassigned
  std::string target_kind;         // unit | measure | node | none
};

bool guard_passes(const Guard& g, const GuardContext& ctx);

std::vector<const ExpansionMethod*> applicable_methods(const KnowledgeBase& kb, const std::string& task_type,
                                                       const GuardContext& ctx);

std::vector<Diagnostic> lint_kb(const KnowledgeBase& kb);

std::string kb_digest(const KnowledgeBase& kb);

}  // namespace coaplan

#pragma once

// The planning loop: expand goals breadth-first, install temporal
// relations, then repeatedly pick the next ready leaf, route it, size it,
// place it on its executor's calendar and commit it to the temporal network.
// Attrition, reactions and contact decisions happen as each leaf commits;
// consumption, range, logistics and overlap checks run over the finished
// schedule.

#include <string>
#include <vector>

#include "coaplan/knowledge_base.hpp"
#include "coaplan/plan.hpp"
#include "coaplan/scenario.hpp"

namespace coaplan {

// An edit names an id the plan does not contain, or is malformed.
class EditError : public Error {
 public:
  using Error::Error;
};

// Friendly goals only. Throws PlanningError, ValidationError (scenario
// checks against the KB) or EditError (a pin contradicts user relations).
Plan plan(const Scenario& s, const KnowledgeBase& kb, const PlanConfig& config = {},
          const std::vector<EditCommand>& edits = {});

// Goals of both sides; engagements resolved across sides.
Plan wargame(const Scenario& s, const KnowledgeBase& kb, const PlanConfig& config = {},
             const std::vector<EditCommand>& edits = {});

// Re-runs planning with the base plan's edits followed by `edits`. Edits are
// checked against `base`; accept_flag is stored by flag key so it survives
// re-expansion. Throws EditError, or Error when the inputs' digests differ
// from the ones recorded in `base`.
// Checks every edit against the base plan and normalizes accept_flag to the
// flag's persistent key. Throws EditError.
std::vector<EditCommand> validate_edits(const Plan& base, const Scenario& s, const KnowledgeBase& kb,
                                        const std::vector<EditCommand>& edits);

Plan replan(const Plan& base, const Scenario& s, const KnowledgeBase& kb, const std::vector<EditCommand>& edits);

// Leaf id whose start (or end) point defines `activity`'s; a leaf is its own.
std::string resolve_anchor(const Plan& plan, const std::string& activity, PointKind which);

struct Utilization {
  std::string unit;
  Minutes committed = 0;
  Minutes idle = 0;
  Minutes horizon = 0;
  double fraction = 0;

  bool operator==(const Utilization&) const = default;
};

// Every scenario unit, sorted by id, over [0, plan horizon). Overlapping
// commitments count once.
std::vector<Utilization> utilization_report(const Plan& plan, const Scenario& s);

}  // namespace coaplan

#pragma once

// Simple temporal network over integer-minute time points.
//
// Point 0 is the origin (H-hour) and is fixed at time 0; every other point is
// implicitly constrained to be >= 0. A constraint (from, to, min, max) states
// min <= t(to) - t(from) <= max. Windows are kept exact after every
// successful add: earliest(p) is the longest path from the origin in the
// lower-bound graph, latest(p) the shortest path in the upper-bound graph.
// Adds are transactional: a constraint that would create a negative cycle is
// rejected and the network is left exactly as it was.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "coaplan/core.hpp"

namespace coaplan {

using TimePointId = std::int32_t;
using ConstraintId = std::int32_t;

inline constexpr TimePointId kOrigin = 0;

struct Window {
  Minutes earliest = 0;
  Minutes latest = kUnbounded;

  bool bounded() const { return latest < kUnbounded; }
  bool contains(Minutes t) const { return earliest <= t && t <= latest; }
  bool operator==(const Window&) const = default;
};

// Why a constraint exists. The engine uses this to decide what it may relax
// when a commitment conflicts.
enum class ConstraintOrigin : std::uint8_t {
  duration,     // activity start -> end
  vertical,     // parent/child anchoring
  method,       // relation declared inside an expansion method
  user,         // goal relation, deadline, not-before or pin
  adversarial,  // reaction / counteraction timing
  commitment,   // a scheduled leaf fixed in time
  external,     // anything added directly through the API
};

std::string to_string(ConstraintOrigin o);
ConstraintOrigin constraint_origin_from_string(const std::string& s);

struct TemporalConstraint {
  TimePointId from = kOrigin;
  TimePointId to = kOrigin;
  Minutes min_offset = -kUnbounded;
  Minutes max_offset = kUnbounded;
  ConstraintOrigin origin = ConstraintOrigin::external;

  bool operator==(const TemporalConstraint&) const = default;
};

struct AddResult {
  bool consistent = true;
  ConstraintId id = -1;                 // valid when consistent
  std::vector<TimePointId> witness;     // points on a negative cycle when rejected

  explicit operator bool() const { return consistent; }
};

class TemporalNetwork {
 public:
  TemporalNetwork();

  // Rebuilds a network from exported state. Throws Error when the active
  // constraints are inconsistent.
  static TemporalNetwork restore(std::vector<std::string> labels, std::vector<TemporalConstraint> constraints,
                                 std::vector<bool> active);

  TimePointId add_point(std::string label);
  std::size_t point_count() const { return labels_.size(); }
  const std::string& label(TimePointId p) const { return labels_.at(static_cast<std::size_t>(p)); }

  // Throws Error if either point is unknown or min > max.
  AddResult add_constraint(const TemporalConstraint& c);
  AddResult add_constraint(TimePointId from, TimePointId to, Minutes min_offset, Minutes max_offset,
                           ConstraintOrigin origin = ConstraintOrigin::external) {
    return add_constraint(TemporalConstraint{from, to, min_offset, max_offset, origin});
  }

  // Drops constraints and recomputes every window from scratch. Windows may
  // widen; the remaining set is consistent because it was before.
  void remove_constraints(const std::vector<ConstraintId>& ids);

  Window window(TimePointId p) const;
  Minutes earliest(TimePointId p) const { return lower_.at(static_cast<std::size_t>(p)); }
  Minutes latest(TimePointId p) const { return upper_.at(static_cast<std::size_t>(p)); }

  bool active(ConstraintId id) const { return active_.at(static_cast<std::size_t>(id)); }
  const TemporalConstraint& constraint(ConstraintId id) const { return constraints_.at(static_cast<std::size_t>(id)); }
  std::size_t constraint_count() const { return constraints_.size(); }
  std::vector<ConstraintId> constraints_touching(TimePointId p) const;
  std::vector<ConstraintId> active_constraints() const;

  // Exact state comparison (points, constraints, windows).
  bool operator==(const TemporalNetwork& other) const;

 private:
  struct Change {
    TimePointId point;
    Minutes old_value;
    bool upper;
  };

  bool raise_lower(TimePointId start_point, Minutes candidate, TimePointId watch, std::vector<Change>& undo,
                   std::vector<TimePointId>& witness);
  void lower_upper(TimePointId start_point, Minutes candidate, std::vector<Change>& undo);
  void propagate_all();
  std::vector<TimePointId> trace_cycle(TimePointId from, TimePointId stop) const;

  std::vector<std::string> labels_;
  std::vector<Minutes> lower_;
  std::vector<Minutes> upper_;
  std::vector<TemporalConstraint> constraints_;
  std::vector<bool> active_;
  std::vector<std::vector<ConstraintId>> adjacency_;
  std::vector<TimePointId> pred_;  // scratch for cycle witnesses
};

}  // namespace coaplan

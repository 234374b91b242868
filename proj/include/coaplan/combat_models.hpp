#pragma once

// Conflict resolution (attrition), intent-driven attack duration, bypass
// criterion, consumption and UAV continuous-coverage feasibility.
//
// The attrition model is a fixed-step ratio-response simulation. With
// r = attacker strength / defender strength, each step of h hours removes
//   defender: h * defender_rate * f(r)   * posture.defender * terrain
//   attacker: h * attacker_rate * f(1/r) * posture.attacker
// as fractions of initial strength. f is a monotone piecewise-linear curve
// through configurable knots. The step that crosses a stopping threshold is
// shortened so the threshold is met exactly.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "coaplan/document.hpp"
#include "coaplan/knowledge_base.hpp"

namespace coaplan {

struct PostureFactors {
  double attacker = 1;
  double defender = 1;

  bool operator==(const PostureFactors&) const = default;
};

struct CrmCoefficients {
  std::string model_id;
  Minutes step = 6;
  double attacker_rate = 0;  // fraction of initial strength per hour at f = 1
  double defender_rate = 0;
  std::map<std::string, PostureFactors> posture;  // keyed by posture name
  std::vector<std::pair<double, double>> curve;   // (ratio, f) knots, ratio ascending
  double destroy_remaining = 0.3;                  // defender remaining fraction that satisfies destroy
  double defeat_remaining = 0.6;
  double culmination = 0.4;                        // attacker casualty fraction that halts the attack

  double f(double ratio) const;
  PostureFactors factors(Posture p) const;
  bool operator==(const CrmCoefficients&) const = default;
};

// Throws SchemaError on incomplete or non-monotone tables.
CrmCoefficients coefficients_from_json(const Json& doc);
Json coefficients_to_json(const CrmCoefficients& c);
CrmCoefficients load_coefficients(const std::filesystem::path& path);
// The table shipped as data/coefficients/ratio-response-v1.yaml.
CrmCoefficients default_coefficients();

enum class EngagementIntent { none, destroy, defeat, attrit, suppress, mask };

struct EngagementInput {
  double attacker_power = 0;
  double defender_power = 0;
  Posture posture = Posture::hasty_attack;
  double terrain_factor = 1;  // (0, 1], scales defender losses
  EngagementIntent intent = EngagementIntent::none;
  double target_fraction = 0;  // attrit: defender casualty fraction sought
  std::optional<double> max_minutes;  // open when empty
};

EngagementIntent engagement_intent(const Intent& i);

enum class EngagementOutcome { defender_below_threshold, duration_elapsed, attacker_culminated };
std::string to_string(EngagementOutcome o);

struct TraceStep {
  double minutes;
  double attacker_remaining;  // fraction of initial
  double defender_remaining;
};

struct AttritionResult {
  double attacker_casualty_fraction = 0;
  double defender_casualty_fraction = 0;
  double elapsed_minutes = 0;
  Minutes duration = 0;  // ceil(elapsed)
  EngagementOutcome outcome = EngagementOutcome::duration_elapsed;
  bool clamped = false;  // a fraction was clipped to [0, 1]
  std::vector<TraceStep> trace;
};

// Defender remaining fraction that satisfies the intent, or nullopt when the
// intent never stops the engagement on its own.
std::optional<double> intent_threshold(EngagementIntent intent, double target_fraction, const CrmCoefficients& c);

// Throws Error when both powers are zero or step <= 0.
AttritionResult resolve_engagement(const EngagementInput& in, const CrmCoefficients& c);
AttritionResult resolve_engagement(const EngagementInput& in, const CrmCoefficients& c, double step_minutes);

// Minutes until the intent is satisfied; when the attacker culminates first
// the culmination time is returned and `outcome` says so.
AttritionResult attack_duration(const EngagementInput& in, const CrmCoefficients& c);

// First trace time at which the defender's remaining fraction is <= threshold.
std::optional<double> bypass_point(const std::vector<TraceStep>& trace, double threshold);

struct ConsumptionDelta {
  std::map<std::string, double> by_resource;
  double total = 0;
};

ConsumptionDelta consume(Minutes duration, const std::map<std::string, double>& rates_per_hour);

struct CoverageResult {
  bool feasible = false;
  int min_uavs = 0;
  Minutes on_station = 0;
  Minutes cycle = 0;
};

// Throws Error when endurance <= 2 * transit_out or any argument is negative.
CoverageResult coverage_feasible(int n_uavs, Minutes transit_out, Minutes endurance, Minutes recovery);

}  // namespace coaplan

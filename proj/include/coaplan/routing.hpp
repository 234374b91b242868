#pragma once

// Terrain-graph routing. Movement cost is time: an edge takes
// length / (speed * mobility_factor) hours, see edge_hours.

#include <optional>
#include <string>
#include <vector>

#include "coaplan/scenario.hpp"

namespace coaplan {

struct Route {
  std::vector<std::string> nodes;  // includes both endpoints; empty when from == to
  double total_length = 0;         // km
  double hours = 0;                // exact summed edge time
  Minutes duration = 0;            // ceil(hours * 60)
  double effective_speed = 0;      // km/h, 0 for an empty route

  bool operator==(const Route&) const = default;
};

// No path between two nodes. Carries the node set reachable from each end.
class UnreachableError : public Error {
 public:
  UnreachableError(std::string from, std::string to, std::vector<std::string> from_component,
                   std::vector<std::string> to_component);
  const std::string& from() const { return from_; }
  const std::string& to() const { return to_; }
  const std::vector<std::string>& from_component() const { return from_component_; }
  const std::vector<std::string>& to_component() const { return to_component_; }

 private:
  std::string from_, to_;
  std::vector<std::string> from_component_, to_component_;
};

Minutes hours_to_minutes(double hours);

// Edge traversal time, rounded to a whole multiple of 2^-32 hours (at least
// one). Route sums of such values are exact, so equal-time ties between
// different paths are real ties whatever the summation order.
double edge_hours(const TerrainEdge& e, double speed);

// Minimal-time route; ties go to the lexicographically smaller node sequence.
// Throws Error for unknown nodes or speed <= 0, UnreachableError when disconnected.
Route shortest_path(const TerrainGraph& g, double speed, const std::string& from, const std::string& to);
inline Route shortest_path(const TerrainGraph& g, const Unit& u, const std::string& from, const std::string& to) {
  return shortest_path(g, u.speed, from, to);
}

// Shortest distance in km over edge lengths (mobility ignored); nullopt if unreachable.
std::optional<double> path_distance(const TerrainGraph& g, const std::string& from, const std::string& to);

// Minimal travel hours from `from` to every node (index order); infinity
// where unreachable.
std::vector<double> travel_hours_from(const TerrainGraph& g, double speed, const std::string& from);

// Nodes reachable from `from`, sorted.
std::vector<std::string> component_of(const TerrainGraph& g, const std::string& from);

struct RangeCheckResult {
  bool in_range = false;
  double distance = 0;
  std::string reason;  // set when the distance could not be measured
};

enum class DistanceMode { euclidean, path };

RangeCheckResult in_range(const TerrainGraph& g, const std::string& from, const std::string& to, double range,
                          DistanceMode mode);
// Supporter located at `supporter_location` against its support_range.
RangeCheckResult in_support_range(const Unit& supporter, const std::string& supporter_location,
                                  const std::string& supported_location, const TerrainGraph& g, DistanceMode mode);

}  // namespace coaplan

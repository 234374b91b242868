#include "coaplan/routing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <deque>
#include <queue>
#include <set>

namespace coaplan {

UnreachableError::UnreachableError(std::string from, std::string to, std::vector<std::string> from_component,
                                   std::vector<std::string> to_component)
    : Error("no route from " + from + " to " + to), from_(std::move(from)), to_(std::move(to)),
      from_component_(std::move(from_component)), to_component_(std::move(to_component)) {}

Minutes hours_to_minutes(double hours) {
  // Guard against representation and edge_hours rounding error just above an
  // integer minute.
  double m = hours * 60.0;
  double r = std::round(m);
  if (std::fabs(m - r) < 1e-6) return static_cast<Minutes>(r);
  return static_cast<Minutes>(std::ceil(m));
}

double edge_hours(const TerrainEdge& e, double speed) {
  constexpr double kQuantum = 0x1p32;
  return std::max(1.0, std::round(e.length / (speed * e.mobility_factor) * kQuantum)) / kQuantum;
}

std::vector<std::string> component_of(const TerrainGraph& g, const std::string& from) {
  std::vector<std::string> out;
  int s = g.index(from);
  if (s < 0) return out;
  std::vector<bool> seen(g.size(), false);
  std::deque<int> queue{s};
  seen[static_cast<std::size_t>(s)] = true;
  while (!queue.empty()) {
    int v = queue.front();
    queue.pop_front();
    out.push_back(g.node(v).id);
    for (const auto& a : g.arcs(v))
      if (!seen[static_cast<std::size_t>(a.to)]) {
        seen[static_cast<std::size_t>(a.to)] = true;
        queue.push_back(a.to);
      }
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

// Label-setting search ordered by (cost, node-id sequence). Each settled
// label carries its full path so ties resolve lexicographically.
struct Label {
  double cost;
  std::vector<int> path;  // node indices
};

bool path_less(const TerrainGraph& g, const std::vector<int>& a, const std::vector<int>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(),
                                      [&](int x, int y) { return g.node(x).id < g.node(y).id; });
}

template <typename EdgeCost>
std::optional<Label> best_path(const TerrainGraph& g, int s, int t, EdgeCost cost) {
  std::vector<std::optional<Label>> best(g.size());
  std::vector<bool> done(g.size(), false);
  auto better = [&](const Label& a, const Label& b) {
    if (a.cost != b.cost) return a.cost < b.cost;
    return path_less(g, a.path, b.path);
  };
  best[static_cast<std::size_t>(s)] = Label{0.0, {s}};
  for (;;) {
    int u = -1;
    for (std::size_t i = 0; i < g.size(); ++i)
      if (!done[i] && best[i] && (u < 0 || better(*best[i], *best[static_cast<std::size_t>(u)])))
        u = static_cast<int>(i);
    if (u < 0) break;
    done[static_cast<std::size_t>(u)] = true;
    if (u == t) break;
    const Label& lu = *best[static_cast<std::size_t>(u)];
    for (const auto& a : g.arcs(u)) {
      auto vi = static_cast<std::size_t>(a.to);
      if (done[vi]) continue;
      Label cand{lu.cost + cost(g.edges()[static_cast<std::size_t>(a.edge)]), lu.path};
      cand.path.push_back(a.to);
      if (!best[vi] || better(cand, *best[vi])) best[vi] = std::move(cand);
    }
  }
  return best[static_cast<std::size_t>(t)];
}

}  // namespace

Route shortest_path(const TerrainGraph& g, double speed, const std::string& from, const std::string& to) {
  int s = g.index(from), t = g.index(to);
  if (s < 0) throw Error("unknown terrain node: " + from);
  if (t < 0) throw Error("unknown terrain node: " + to);
  if (s == t) return Route{};
  if (!(speed > 0)) throw Error("shortest_path: speed must be > 0");
  auto label = best_path(g, s, t, [&](const TerrainEdge& e) { return edge_hours(e, speed); });
  if (!label) throw UnreachableError(from, to, component_of(g, from), component_of(g, to));
  Route r;
  for (std::size_t i = 0; i < label->path.size(); ++i) {
    r.nodes.push_back(g.node(label->path[i]).id);
    if (i == 0) continue;
    // pick the arc actually used (cheapest parallel edge, first by index)
    double best_len = 0, best_cost = 0;
    bool found = false;
    for (const auto& a : g.arcs(label->path[i - 1]))
      if (a.to == label->path[i]) {
        const auto& e = g.edges()[static_cast<std::size_t>(a.edge)];
        double c = edge_hours(e, speed);
        if (!found || c < best_cost) {
          best_cost = c;
          best_len = e.length;
          found = true;
        }
      }
    r.total_length += best_len;
  }
  r.hours = label->cost;
  r.duration = hours_to_minutes(r.hours);
  r.effective_speed = r.hours > 0 ? r.total_length / r.hours : 0;
  return r;
}

std::optional<double> path_distance(const TerrainGraph& g, const std::string& from, const std::string& to) {
  int s = g.index(from), t = g.index(to);
  if (s < 0 || t < 0) return std::nullopt;
  if (s == t) return 0.0;
  // plain Dijkstra; only the distance matters
  std::vector<double> dist(g.size(), std::numeric_limits<double>::infinity());
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[static_cast<std::size_t>(s)] = 0;
  pq.push({0, s});
  while (!pq.empty()) {
    auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[static_cast<std::size_t>(u)]) continue;
    if (u == t) return d;
    for (const auto& a : g.arcs(u)) {
      double nd = d + g.edges()[static_cast<std::size_t>(a.edge)].length;
      if (nd < dist[static_cast<std::size_t>(a.to)]) {
        dist[static_cast<std::size_t>(a.to)] = nd;
        pq.push({nd, a.to});
      }
    }
  }
  return std::nullopt;
}

std::vector<double> travel_hours_from(const TerrainGraph& g, double speed, const std::string& from) {
  int s = g.index(from);
  if (s < 0) throw Error("unknown terrain node: " + from);
  if (!(speed > 0)) throw Error("travel_hours_from: speed must be > 0");
  std::vector<double> dist(g.size(), std::numeric_limits<double>::infinity());
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[static_cast<std::size_t>(s)] = 0;
  pq.push({0, s});
  while (!pq.empty()) {
    auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[static_cast<std::size_t>(u)]) continue;
    for (const auto& a : g.arcs(u)) {
      const auto& e = g.edges()[static_cast<std::size_t>(a.edge)];
      double nd = d + edge_hours(e, speed);
      if (nd < dist[static_cast<std::size_t>(a.to)]) {
        dist[static_cast<std::size_t>(a.to)] = nd;
        pq.push({nd, a.to});
      }
    }
  }
  return dist;
}

RangeCheckResult in_range(const TerrainGraph& g, const std::string& from, const std::string& to, double range,
                          DistanceMode mode) {
  RangeCheckResult r;
  if (from == to) {
    r.in_range = true;
    return r;
  }
  if (mode == DistanceMode::euclidean) {
    r.distance = g.euclidean(from, to);
  } else {
    auto d = path_distance(g, from, to);
    if (!d) {
      r.reason = "no path from " + from + " to " + to;
      r.distance = std::numeric_limits<double>::infinity();
      return r;
    }
    r.distance = *d;
  }
  r.in_range = r.distance <= range;
  return r;
}

RangeCheckResult in_support_range(const Unit& supporter, const std::string& supporter_location,
                                  const std::string& supported_location, const TerrainGraph& g, DistanceMode mode) {
  return in_range(g, supporter_location, supported_location, supporter.support_range, mode);
}

}  // namespace coaplan

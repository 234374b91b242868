#include <cmath>
#include <random>

#include <doctest.h>

#include "coaplan/routing.hpp"
#include "support/routing_oracle.hpp"

using namespace coaplan;

namespace {

TerrainGraph line(std::vector<double> lengths, double factor = 1.0) {
  std::vector<TerrainNode> nodes;
  std::vector<TerrainEdge> edges;
  double x = 0;
  nodes.push_back({"n0", 0, 0, MobilityClass::open});
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    x += lengths[i];
    nodes.push_back({"n" + std::to_string(i + 1), x, 0, MobilityClass::open});
    edges.push_back({"n" + std::to_string(i), "n" + std::to_string(i + 1), lengths[i], factor, false});
  }
  return TerrainGraph(nodes, edges);
}

}  // namespace

TEST_CASE("10 km at 20 km/h takes 30 minutes") {
  auto g = line({10});
  auto r = shortest_path(g, 20, "n0", "n1");
  CHECK(r.nodes == std::vector<std::string>{"n0", "n1"});
  CHECK(r.total_length == 10);
  CHECK(r.hours == 0.5);
  CHECK(r.duration == 30);
  CHECK(r.effective_speed == 20);
}

TEST_CASE("same start and end gives an empty route") {
  auto g = line({4, 4});
  auto r = shortest_path(g, 10, "n1", "n1");
  CHECK(r.nodes.empty());
  CHECK(r.duration == 0);
  CHECK(r.effective_speed == 0);
}

TEST_CASE("mobility factor slows an edge") {
  auto g = line({6}, 0.5);
  CHECK(shortest_path(g, 12, "n0", "n1").duration == 60);
}

TEST_CASE("partial minutes round up") {
  auto g = line({1});
  CHECK(shortest_path(g, 7, "n0", "n1").duration == 9);  // 8.57 min
}

TEST_CASE("whole-minute edges sum to whole minutes") {
  // A third of an hour is not a dyadic fraction; 40 edges stay exact to the minute.
  auto g = line(std::vector<double>(40, 7.0));
  CHECK(shortest_path(g, 21, "n0", "n40").duration == 40 * 20);
  CHECK(shortest_path(g, 21, "n0", "n3").duration == 60);
}

TEST_CASE("edge times are positive multiples of the quantum") {
  TerrainEdge e{"a", "b", 1e-12, 1.0};
  CHECK(edge_hours(e, 100) == 0x1p-32);
  TerrainEdge f{"a", "b", 3, 0.7};
  CHECK(std::abs(edge_hours(f, 13) - 3 / (13 * 0.7)) <= 0x1p-33);
  CHECK(std::ldexp(edge_hours(f, 13), 32) == std::round(std::ldexp(edge_hours(f, 13), 32)));
}

TEST_CASE("faster detour beats a shorter slow edge") {
  std::vector<TerrainNode> nodes{{"a", 0, 0}, {"b", 10, 0}, {"c", 5, 5}};
  std::vector<TerrainEdge> edges{{"a", "b", 10, 0.2}, {"a", "c", 7, 1.0}, {"c", "b", 7, 1.0}};
  TerrainGraph g(nodes, edges);
  auto r = shortest_path(g, 10, "a", "b");
  CHECK(r.nodes == std::vector<std::string>{"a", "c", "b"});
  CHECK(r.total_length == 14);
}

TEST_CASE("equal-time paths tie-break on the node sequence") {
  std::vector<TerrainNode> nodes{{"s", 0, 0}, {"m2", 1, 1}, {"m1", 1, -1}, {"t", 2, 0}};
  std::vector<TerrainEdge> edges{{"s", "m2", 5, 1}, {"m2", "t", 5, 1}, {"s", "m1", 5, 1}, {"m1", "t", 5, 1}};
  TerrainGraph g(nodes, edges);
  CHECK(shortest_path(g, 10, "s", "t").nodes == std::vector<std::string>{"s", "m1", "t"});
}

TEST_CASE("directed edges are one-way") {
  std::vector<TerrainNode> nodes{{"a", 0, 0}, {"b", 1, 0}};
  TerrainGraph g(nodes, {{"a", "b", 1, 1, true}});
  CHECK(shortest_path(g, 10, "a", "b").nodes.size() == 2);
  CHECK_THROWS_AS(shortest_path(g, 10, "b", "a"), UnreachableError);
}

TEST_CASE("disconnected nodes report both components") {
  std::vector<TerrainNode> nodes{{"a", 0, 0}, {"b", 1, 0}, {"c", 5, 0}};
  TerrainGraph g(nodes, {{"a", "b", 1, 1}});
  try {
    shortest_path(g, 10, "a", "c");
    FAIL("expected UnreachableError");
  } catch (const UnreachableError& e) {
    CHECK(e.from_component() == std::vector<std::string>{"a", "b"});
    CHECK(e.to_component() == std::vector<std::string>{"c"});
  }
}

TEST_CASE("bad arguments throw") {
  auto g = line({1});
  CHECK_THROWS_AS(shortest_path(g, 0, "n0", "n1"), Error);
  CHECK_THROWS_AS(shortest_path(g, 10, "n0", "zz"), Error);
}

TEST_CASE("path distance ignores mobility and range modes differ") {
  std::vector<TerrainNode> nodes{{"a", 0, 0}, {"b", 3, 0}, {"c", 3, 4}};
  TerrainGraph g(nodes, {{"a", "b", 3, 0.1}, {"b", "c", 4, 0.1}});
  CHECK(*path_distance(g, "a", "c") == 7);
  CHECK(in_range(g, "a", "c", 5, DistanceMode::euclidean).in_range);
  CHECK_FALSE(in_range(g, "a", "c", 5, DistanceMode::path).in_range);
  CHECK(in_range(g, "a", "c", 7, DistanceMode::path).in_range);
}

TEST_CASE("shortest paths equal exhaustive enumeration on small random graphs") {
  std::mt19937_64 rng(7);
  int compared = 0;
  for (int trial = 0; trial < 200; ++trial) {
    auto g = testing::random_graph(rng, 9, 0.3);
    double speed = std::uniform_int_distribution<int>(5, 40)(rng);
    for (const auto& a : g.nodes())
      for (const auto& b : g.nodes()) {
        auto want = testing::brute_force_route(g, speed, a.id, b.id);
        if (!want) {
          CHECK_THROWS_AS(shortest_path(g, speed, a.id, b.id), UnreachableError);
          continue;
        }
        auto got = shortest_path(g, speed, a.id, b.id);
        CHECK(got.hours == want->hours);
        CHECK(got.nodes == want->nodes);
        CHECK(got.duration == hours_to_minutes(want->hours));
        ++compared;
      }
  }
  CHECK(compared > 1000);
}

TEST_CASE("oracle pruning does not change its answer") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    auto g = testing::random_graph(rng, 9, 0.4);
    for (const auto& a : g.nodes())
      for (const auto& b : g.nodes()) {
        auto full = testing::brute_force_route(g, 17, a.id, b.id, false);
        auto pruned = testing::brute_force_route(g, 17, a.id, b.id, true);
        REQUIRE(full.has_value() == pruned.has_value());
        if (full) {
          CHECK(full->hours == pruned->hours);
          CHECK(full->nodes == pruned->nodes);
        }
      }
  }
}

TEST_CASE("travel_hours_from agrees with shortest_path") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    auto g = testing::random_graph(rng, 20);
    const auto& src = g.node(0).id;
    auto hours = travel_hours_from(g, 25, src);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const auto& dst = g.node(static_cast<int>(i)).id;
      if (std::isinf(hours[i])) {
        CHECK_THROWS_AS(shortest_path(g, 25, src, dst), UnreachableError);
      } else {
        CHECK(shortest_path(g, 25, src, dst).hours == hours[i]);
      }
    }
  }
}

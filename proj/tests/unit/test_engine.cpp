#include <algorithm>
#include <set>

#include <doctest.h>

#include "coaplan/engine.hpp"
#include "coaplan/routing.hpp"
#include "coaplan/syncmatrix.hpp"
#include "support/fixtures.hpp"
#include "support/random_scenario.hpp"

using namespace coaplan;
using testing::shipped_kb;
using testing::shipped_scenario;

namespace {

EditCommand edit(const Json& j) { return edit_from_json(j); }

}  // namespace

TEST_CASE("single move goal becomes one routed leaf") {
  Scenario s = shipped_scenario("minimal");
  Plan p = plan(s, shipped_kb());
  REQUIRE(p.activities.size() == 1);
  const Activity& a = p.activity("g1");
  CHECK(a.leaf);
  CHECK(a.start == 0);
  REQUIRE(a.route);
  // Tactical moves stop on the neighbor of the target nearest the mover.
  auto r = shortest_path(s.terrain, s.unit("a-co"), "n00", "n10");
  CHECK(a.route->nodes == r.nodes);
  CHECK(a.duration == r.duration);
  CHECK(a.destination == "n10");
  CHECK(p.flags.empty());
}

TEST_CASE("seize starts with the in-area move and ends after every derived activity") {
  Scenario s = shipped_scenario("seize");
  Plan p = plan(s, shipped_kb());
  const Activity& root = p.activity("g1-seize");
  auto leaves = testing::subtree_leaves(p, root.id);
  const Activity* first_move = nullptr;
  Minutes last_end = 0;
  for (const auto* l : leaves) {
    if (l->task_type == "move-in-area" && (!first_move || l->start < first_move->start)) first_move = l;
    last_end = std::max(last_end, l->end);
  }
  REQUIRE(first_move);
  CHECK(root.start == first_move->start);
  CHECK(root.end == last_end);
  CHECK(resolve_anchor(p, root.id, PointKind::start) == first_move->id);
}

TEST_CASE("close with and engage starts with the first attack") {
  Scenario s = shipped_scenario("close-with-and-engage");
  Plan p = plan(s, shipped_kb());
  const Activity& root = p.activity("g1-engage");
  Minutes first_attack = kUnbounded;
  for (const auto* l : testing::subtree_leaves(p, root.id))
    if (l->task_type == "hasty-attack" || l->task_type == "deliberate-attack") first_attack = std::min(first_attack, l->start);
  CHECK(root.start == first_attack);
  // Preparation comes before the anchored start.
  CHECK(p.activity("g1-engage/orders").start < root.start);
}

TEST_CASE("planning is deterministic") {
  Scenario s = shipped_scenario("brigade");
  std::string a = export_plan(plan(s, shipped_kb()));
  std::string b = export_plan(plan(s, shipped_kb()));
  CHECK(a == b);
}

TEST_CASE("every leaf satisfies its own temporal constraints") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Scenario s = testing::random_scenario(seed);
    Plan p = plan(s, shipped_kb());
    for (const auto* l : p.leaves()) {
      CHECK(l->start >= 0);
      CHECK(l->end == l->start + l->duration);
      CHECK(p.stn.earliest(l->start_point) == l->start);
    }
    for (const auto& [id, a] : p.activities)
      if (!a.leaf) {
        for (const auto& c : a.children) CHECK(p.activity(c).end <= a.end);
      }
  }
}

TEST_CASE("flags are numbered in sorted order") {
  Plan p = plan(shipped_scenario("brigade"), shipped_kb());
  REQUIRE_FALSE(p.flags.empty());
  for (std::size_t i = 0; i < p.flags.size(); ++i) {
    char want[8];
    std::snprintf(want, sizeof want, "F%03zu", i + 1);
    CHECK(p.flags[i].id == want);
    CHECK(std::is_sorted(p.flags[i].activities.begin(), p.flags[i].activities.end()));
    for (const auto& a : p.flags[i].activities) {
      const auto& f = p.activity(a).flags;
      CHECK(std::find(f.begin(), f.end(), p.flags[i].id) != f.end());
    }
  }
}

TEST_CASE("pins are hard and contradictions are rejected") {
  Scenario s = shipped_scenario("seize");
  Plan base = plan(s, shipped_kb());
  const Activity& consolidate = base.activity("g1-seize/consolidate");
  Minutes at = consolidate.start + 45;
  Plan pinned = replan(base, s, shipped_kb(),
                       {edit({{"kind", "pin_activity"}, {"target", consolidate.id}, {"start", at},
                              {"end", at + consolidate.duration}})});
  CHECK(pinned.activity(consolidate.id).start == at);
  CHECK(pinned.activity("g1-seize/report").start >= at + consolidate.duration);
  CHECK(pinned.edits.size() == 1);

  CHECK_THROWS_AS(replan(base, s, shipped_kb(), {edit({{"kind", "pin_activity"}, {"target", "nope"}, {"start", 0}, {"end", 0}})}),
                  EditError);
}

TEST_CASE("empty edit list is identity") {
  Scenario s = shipped_scenario("wargame");
  Plan base = wargame(s, shipped_kb());
  CHECK(export_plan(replan(base, s, shipped_kb(), {})) == export_plan(base));
}

TEST_CASE("accepting a flag keeps the schedule and marks the flag") {
  Scenario s = shipped_scenario("brigade");
  Plan base = plan(s, shipped_kb());
  const Flag& f = base.flags.front();
  Plan after = replan(base, s, shipped_kb(), {edit({{"kind", "accept_flag"}, {"target", f.id}})});
  for (const auto& [id, a] : base.activities) {
    CHECK(after.activity(id).start == a.start);
    CHECK(after.activity(id).end == a.end);
  }
  REQUIRE(after.flags.size() == base.flags.size());
  int accepted = 0;
  for (const auto& g : after.flags)
    if (g.accepted) {
      ++accepted;
      CHECK(g.kind == f.kind);
      CHECK(g.activities == f.activities);
    }
  CHECK(accepted == 1);
}

TEST_CASE("deleting an action removes its reactions") {
  Scenario s = shipped_scenario("wargame");
  Plan base = wargame(s, shipped_kb());
  const std::string trigger = "f2-fires/fire1";
  REQUIRE(base.find(trigger + "!counter-battery"));
  Plan after = replan(base, s, shipped_kb(), {edit({{"kind", "delete_activity"}, {"target", trigger}})});
  CHECK_FALSE(after.find(trigger));
  for (const auto& [id, a] : after.activities) {
    CHECK(id.rfind(trigger + "!", 0) != 0);
    CHECK(a.trigger != trigger);
  }
  CHECK(after.find("f2-fires/fire2!counter-battery"));
}

TEST_CASE("reassigning and re-intending edit the plan") {
  Scenario s = shipped_scenario("close-with-and-engage");
  Plan base = plan(s, shipped_kb());
  Plan after = replan(base, s, shipped_kb(),
                      {edit({{"kind", "change_intent"}, {"target", "g1-engage/attack"}, {"intent", "attrit(0.2)"}})});
  CHECK(after.activity("g1-engage/attack").intent == "attrit(0.2)");
  CHECK(after.activity("g1-engage/attack").duration < base.activity("g1-engage/attack").duration);

  CHECK_THROWS_AS(replan(base, s, shipped_kb(),
                         {edit({{"kind", "reassign_executor"}, {"target", "g1-engage/attack"}, {"executor", "ghost"}})}),
                  EditError);
}

TEST_CASE("repositioning a unit adds a move root") {
  Scenario s = shipped_scenario("brigade");
  Plan base = plan(s, shipped_kb());
  const Flag* cue = nullptr;
  for (const auto& f : base.flags)
    if (f.kind == FlagKind::reposition_cue && f.remedy) cue = &f;
  REQUIRE(cue);
  Plan after = replan(base, s, shipped_kb(), {*cue->remedy});
  std::string root = "reposition-" + cue->remedy->target + "-" + cue->remedy->node;
  REQUIRE(after.find(root));
  CHECK(position_at(after, s, cue->remedy->target, after.horizon()) == cue->remedy->node);
}

TEST_CASE("replan refuses a different scenario") {
  Scenario s = shipped_scenario("seize");
  Plan base = plan(s, shipped_kb());
  CHECK_THROWS_AS(replan(base, shipped_scenario("minimal"), shipped_kb(), {}), Error);
}

TEST_CASE("utilization equals a minute-by-minute sweep") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Scenario s = testing::random_scenario(seed);
    Plan p = plan(s, shipped_kb());
    Minutes h = p.horizon();
    for (const auto& u : utilization_report(p, s)) {
      Minutes busy = 0;
      for (Minutes t = 0; t < h; ++t) {
        bool on = false;
        auto it = p.calendars.find(u.unit);
        if (it != p.calendars.end())
          for (const auto& e : it->second)
            if (!e.blocking && e.start <= t && t < e.end) on = true;
        busy += on;
      }
      CAPTURE(u.unit);
      CHECK(u.committed == busy);
      CHECK(u.idle == h - busy);
      CHECK(u.horizon == h);
    }
  }
}

TEST_CASE("unknown task type fails validation") {
  Json doc = scenario_to_json(shipped_scenario("minimal"));
  doc["goals"][0]["task_type"] = "teleport";
  CHECK_THROWS_AS(plan(scenario_from_json(doc), shipped_kb()), ValidationError);
}

TEST_CASE("plan only expands friendly goals, wargame both") {
  Scenario s = shipped_scenario("wargame");
  Plan p = plan(s, shipped_kb());
  Plan w = wargame(s, shipped_kb());
  CHECK_FALSE(p.find("e1-defend"));
  CHECK(w.find("e1-defend"));
  CHECK(w.wargame);
  CHECK_FALSE(p.wargame);
}

#include <cmath>

#include <doctest.h>

#include "coaplan/adversarial.hpp"
#include "coaplan/engine.hpp"
#include "support/fixtures.hpp"
#include "support/random_scenario.hpp"

using namespace coaplan;
using testing::shipped_kb;
using testing::shipped_scenario;

namespace {

ContactThresholds kThresholds{0.3, 1.5, 3.0};

Json unit_json(const std::string& id, const std::string& side, const std::string& type, const std::string& at,
               double power, double speed = 20) {
  return {{"id", id},         {"allegiance", side},  {"nation", side == "friendly" ? "A" : "B"},
          {"echelon", "company"}, {"unit_type", type}, {"location", at},
          {"combat_power", power}, {"speed", speed}};
}

Json node(const std::string& id, double x, double y) { return {{"id", id}, {"x", x}, {"y", y}}; }
Json edge(const std::string& a, const std::string& b, double len) { return {{"from", a}, {"to", b}, {"length", len}}; }

Json base_doc() {
  return {{"schema_version", 1},
          {"name", "unit"},
          {"terrain", {{"nodes", Json::array()}, {"edges", Json::array()}}},
          {"units", Json::array()},
          {"measures", Json::array()},
          {"goals", Json::array()}};
}

// Scenarios need a goal; the pure-function cases add a placeholder move.
Scenario load(Json doc) {
  if (doc["goals"].empty()) {
    std::string exec;
    for (const auto& u : doc["units"])
      if (u["allegiance"] == "friendly") {
        exec = u["id"];
        break;
      }
    doc["goals"].push_back({{"id", "g0"}, {"task_type", "tactical-move"}, {"intent", "move"}, {"executor", exec},
                            {"target", doc["terrain"]["nodes"][0]["id"]}});
  }
  return scenario_from_json(doc);
}

Activity leaf(const std::string& id, const std::string& executor, Allegiance side, Minutes start, Minutes end) {
  Activity a;
  a.id = id;
  a.task_type = "task";
  a.executor = executor;
  a.side = side;
  a.leaf = true;
  a.start = start;
  a.end = end;
  a.duration = end - start;
  return a;
}

// Straight line n0..n6 at 10 km spacing; trains at n0.
Scenario logistics_line(double trains_speed) {
  Json doc = base_doc();
  for (int i = 0; i <= 6; ++i) {
    doc["terrain"]["nodes"].push_back(node("n" + std::to_string(i), 10.0 * i, 0));
    if (i > 0) doc["terrain"]["edges"].push_back(edge("n" + std::to_string(i - 1), "n" + std::to_string(i), 10));
  }
  doc["units"].push_back(unit_json("co", "friendly", "armor-company", "n1", 20));
  doc["units"].push_back(unit_json("tr", "friendly", "field-trains", "n0", 0, trains_speed));
  doc["units"].push_back(unit_json("en", "enemy", "armor-company", "n6", 10));
  return load(doc);
}

}  // namespace

TEST_CASE("contact decision rule table") {
  CHECK(contact_decision(10, 0, 20, {}, kThresholds).decision == ContactDecisionKind::bypass);
  CHECK(contact_decision(10, 6, 20, {}, kThresholds).decision == ContactDecisionKind::bypass);
  CHECK(contact_decision(10, 7, 20, {}, kThresholds).decision == ContactDecisionKind::avoid);
  // Closed thresholds.
  CHECK(contact_decision(15, 10, 10, {}, kThresholds).decision == ContactDecisionKind::engage);
  CHECK(contact_decision(14.9, 10, 10, {}, kThresholds).decision == ContactDecisionKind::avoid);
  CHECK(contact_decision(10, 30, 30, {}, kThresholds).decision == ContactDecisionKind::assist_main_body);
  CHECK(contact_decision(10, 29.9, 30, {}, kThresholds).decision == ContactDecisionKind::avoid);
  // Weapons hold overrides engage and main body, not bypass.
  auto held = contact_decision(30, 10, 10, {kRoeWeaponsHold}, kThresholds);
  CHECK(held.decision == ContactDecisionKind::avoid);
  CHECK(held.roe_consulted == std::vector<std::string>{kRoeWeaponsHold});
  CHECK(contact_decision(10, 50, 50, {kRoeWeaponsHold}, kThresholds).decision == ContactDecisionKind::avoid);
  CHECK(contact_decision(10, 0, 50, {kRoeWeaponsHold}, kThresholds).decision == ContactDecisionKind::bypass);
  CHECK_FALSE(contact_decision(15, 10, 10, {}, kThresholds).basis.empty());
}

TEST_CASE("a strong enemy on the route calls the main body with four derived actions") {
  Json doc = base_doc();
  for (const auto& [id, x] : std::vector<std::pair<std::string, double>>{{"a", 0}, {"b", 5}, {"c", 10}})
    doc["terrain"]["nodes"].push_back(node(id, x, 0));
  doc["terrain"]["edges"] = Json::array({edge("a", "b", 5), edge("b", "c", 5)});
  Json bn = unit_json("bn", "friendly", "armor-battalion", "a", 40);
  bn["echelon"] = "battalion";
  Json scout = unit_json("scout", "friendly", "cavalry-troop", "a", 5);
  scout["superior"] = "bn";
  scout["capabilities"] = {"reconnaissance"};
  Json co2 = unit_json("co2", "friendly", "armor-company", "a", 30);
  co2["superior"] = "bn";
  doc["units"] = Json::array({bn, scout, co2, unit_json("en", "enemy", "armor-company", "b", 40)});
  doc["goals"].push_back(
      {{"id", "g1"}, {"task_type", "route-reconnaissance"}, {"intent", "reconnoiter"}, {"executor", "scout"}, {"target", "c"}});
  Scenario s = scenario_from_json(doc);
  Plan p = plan(s, shipped_kb());

  REQUIRE(p.find("g1~direct-fire"));
  CHECK(p.activity("g1~direct-fire").executor == "scout");
  CHECK(p.activity("g1~direct-fire").target == "en");
  CHECK(p.activity("g1~follow-on-point").executor == "scout");
  CHECK(p.activity("g1~main-body-routes").executor == "bn");
  CHECK(p.activity("g1~far-flank").executor == "scout");
  for (const char* x : {"g1~report", "g1~direct-fire", "g1~follow-on-point", "g1~main-body-routes", "g1~far-flank"})
    CHECK(p.activity(x).start >= p.activity("g1").end);
  CHECK_FALSE(p.find("g1~engage"));
}

TEST_CASE("counter-battery trigger by range") {
  const ReactionRule& rule = *shipped_kb().reaction_rules("A").front();
  REQUIRE(rule.id == "counter-battery");
  Json doc = base_doc();
  doc["terrain"]["nodes"] = Json::array({node("p", 0, 0), node("q", 9, 0), node("r", 4.5, 5), node("far", 12, 0)});
  doc["terrain"]["edges"] = Json::array({edge("p", "r", 7), edge("r", "q", 7), edge("q", "far", 3)});
  Json fa = unit_json("fa", "friendly", "artillery-battalion", "p", 10);
  fa["capabilities"] = {"indirect-fire"};
  doc["units"].push_back(fa);
  Scenario none = load(doc);
  PositionFn at_home = [](const Unit& u) { return u.location; };
  CHECK_FALSE(reaction_trigger(rule, none, "artillery-fire", Allegiance::friendly, "p", at_home));

  Json ea = unit_json("ea", "enemy", "artillery-battalion", "q", 10);
  ea["capabilities"] = {"counter-battery"};
  ea["weapon_range"] = 10;
  doc["units"].push_back(ea);
  Scenario s = load(doc);
  auto t = reaction_trigger(rule, s, "artillery-fire", Allegiance::friendly, "p", at_home);
  REQUIRE(t);
  CHECK(t->reactor->id == "ea");
  CHECK(t->distance == doctest::Approx(9));
  CHECK_FALSE(reaction_trigger(rule, s, "hasty-attack", Allegiance::friendly, "p", at_home));
  // Twelve km straight line against a ten km range.
  CHECK_FALSE(reaction_trigger(rule, s, "artillery-fire", Allegiance::friendly, "p",
                               [](const Unit& u) { return u.id == "ea" ? std::string("far") : u.location; }));
  // Colocated.
  CHECK(reaction_trigger(rule, s, "artillery-fire", Allegiance::friendly, "q", at_home)->distance == 0);

  ReactionRule by_path = rule;
  by_path.range_mode = RangeMode::path;
  CHECK_FALSE(reaction_trigger(by_path, s, "artillery-fire", Allegiance::friendly, "p", at_home));
  CHECK(reaction_holds(rule, s, "artillery-fire", Allegiance::friendly, "p", s.unit("ea"), "q"));
  CHECK_FALSE(reaction_holds(by_path, s, "artillery-fire", Allegiance::friendly, "p", s.unit("ea"), "q"));
}

TEST_CASE("reactions re-evaluate true and chains stop at depth three") {
  std::vector<std::pair<Scenario, bool>> cases{{shipped_scenario("brigade"), false}, {shipped_scenario("wargame"), true}};
  for (std::uint64_t seed = 1; seed <= 10; ++seed) cases.emplace_back(testing::random_scenario(seed), true);
  int reactions = 0;
  for (const auto& [s, two_sided] : cases) {
    Plan p = two_sided ? wargame(s, shipped_kb()) : plan(s, shipped_kb());
    for (const auto& [id, a] : p.activities) {
      if (a.provenance == ProvenanceKind::reaction && a.parent.empty()) {
        ++reactions;
        const Activity& trig = p.activity(a.trigger);
        CHECK(trig.provenance != ProvenanceKind::reaction);
        CHECK(trig.provenance != ProvenanceKind::counteraction);
        const ReactionRule* rule = nullptr;
        for (const auto* r : shipped_kb().reaction_rules(s.unit(trig.executor).nation))
          if (r->id == a.rule) rule = r;
        REQUIRE(rule);
        CHECK(reaction_holds(*rule, s, trig.task_type, trig.side, position_at(p, s, trig.executor, trig.start),
                             s.unit(a.executor), position_at(p, s, a.executor, trig.start)));
      }
      if (a.provenance == ProvenanceKind::counteraction && a.parent.empty()) {
        const Activity& r = p.activity(a.trigger);
        CHECK(r.provenance == ProvenanceKind::reaction);
        CHECK(p.activity(r.trigger).provenance != ProvenanceKind::counteraction);
        CHECK(a.executor == p.activity(r.trigger).executor);
        CHECK(a.start >= p.activity(r.trigger).end);
        CHECK_FALSE(p.find(id + "!counter-battery"));
      }
    }
  }
  CHECK(reactions > 0);
}

TEST_CASE("counter-attack goes to the first open flank") {
  Json doc = base_doc();
  doc["terrain"]["nodes"] = Json::array(
      {node("A", 0, 0), node("B", 10, 0), node("C", 20, 0), node("D", 20, 10), node("E", 20, -10), node("F", 30, 10)});
  doc["terrain"]["edges"] = Json::array({edge("A", "B", 10), edge("B", "C", 10), edge("C", "D", 10), edge("C", "E", 10),
                                         edge("F", "D", 10), edge("F", "E", 10)});
  doc["units"] = Json::array({unit_json("ca", "friendly", "armor-company", "F", 30), unit_json("en", "enemy", "armor-company", "A", 30)});
  Scenario s = load(doc);

  auto make = [&](Minutes trigger_start, std::vector<std::string> approach) {
    Plan p;
    Activity mv = leaf("mv", "en", Allegiance::enemy, 0, trigger_start);
    mv.route = Route{approach, 0, 0, trigger_start, 0};
    mv.destination = "C";
    Activity hit = leaf("hit", "en", Allegiance::enemy, trigger_start, trigger_start + 30);
    hit.site = "C";
    hit.origin_node = "C";
    p.activities = {{"mv", mv}, {"hit", hit}};
    return p;
  };

  auto on_time = commit_counterattack(make(60, {"A", "B", "C"}), s, "ca", "hit");
  CHECK(on_time.flank_node == "D");
  CHECK(on_time.route.nodes == std::vector<std::string>{"F", "D"});
  CHECK(on_time.route.duration == 30);
  CHECK(on_time.commitment_time == 30);
  CHECK(on_time.arrival == 60);
  CHECK_FALSE(on_time.too_late);
  CHECK_FALSE(on_time.frontal);

  auto late = commit_counterattack(make(20, {"A", "B", "C"}), s, "ca", "hit");
  CHECK(late.commitment_time == 0);
  CHECK(late.too_late);
  CHECK(late.arrival == 30);

  auto frontal = commit_counterattack(make(120, {"B", "D", "C"}), s, "ca", "hit", 0);
  CHECK(frontal.flank_node == "E");
  auto no_flank = commit_counterattack(make(120, {"B", "D", "E", "C"}), s, "ca", "hit");
  CHECK(no_flank.frontal);
  CHECK(no_flank.route.nodes.back() == "C");
  CHECK_FALSE(no_flank.warning.empty());

  CHECK_THROWS_AS(commit_counterattack(make(60, {"A", "B", "C"}), s, "ghost", "hit"), Error);
  CHECK_THROWS_AS(commit_counterattack(make(60, {"A", "B", "C"}), s, "ca", "mv2"), Error);
}

TEST_CASE("counter-attack arrival never exceeds the trigger start unless flagged late") {
  Scenario s = shipped_scenario("wargame");
  Plan p = wargame(s, shipped_kb());
  int checked = 0;
  for (const auto* l : p.leaves()) {
    if (l->side != Allegiance::enemy || (l->task_type != "hasty-attack" && l->task_type != "deliberate-attack")) continue;
    auto c = commit_counterattack(p, s, "b-1-tf", l->id);
    if (!c.too_late) CHECK(c.arrival <= l->start);
    CHECK(c.arrival == c.commitment_time + c.route.duration);
    ++checked;
  }
  CHECK(checked > 0);
}

TEST_CASE("logistics: trains near a static unit give no findings") {
  Scenario s = logistics_line(30);
  Plan p;
  p.activities["hold"] = leaf("hold", "co", Allegiance::friendly, 0, 240);
  CHECK(logistics_check(p, s, PlanConfig{}).empty());
}

TEST_CASE("logistics: an advance beyond the threshold cues a reposition at the first violating slice") {
  Scenario s = logistics_line(30);
  PlanConfig c;
  Plan p;
  Activity mv = leaf("adv", "co", Allegiance::friendly, 180, 240);
  mv.destination = "n6";
  p.activities["adv"] = mv;
  p.activities["hold"] = leaf("hold", "co", Allegiance::friendly, 240, 300);

  // Sweep oracle: the unit is at n1 before 240 and n6 from 240; round trip at 30 km/h is 4 min per km.
  Minutes first = -1;
  for (Minutes t = 0; t <= p.horizon(); t += c.resupply_slice) {
    double km = t >= 240 ? 60 : 10;
    if (2 * km * 60 / c.resupply_speed > c.resupply_threshold) {
      first = t;
      break;
    }
  }
  REQUIRE(first == 240);
  auto f = logistics_check(p, s, c);
  REQUIRE(f.size() == 1);
  CHECK(f[0].kind == FlagKind::reposition_cue);
  CHECK(f[0].slice_start == first);
  CHECK(f[0].round_trip == 240);
  CHECK(f[0].candidate_round_trip < f[0].round_trip);
  CHECK(f[0].candidate_round_trip <= c.resupply_threshold);
  CHECK(f[0].depart_by >= 0);
  CHECK(f[0].activities == std::vector<std::string>{"hold"});
}

TEST_CASE("logistics: immobile trains restrict instead of cueing") {
  Scenario s = logistics_line(0);
  Plan p;
  Activity mv = leaf("adv", "co", Allegiance::friendly, 0, 60);
  mv.destination = "n6";
  p.activities["adv"] = mv;
  auto f = logistics_check(p, s, PlanConfig{});
  REQUIRE(f.size() == 1);
  CHECK(f[0].kind == FlagKind::out_of_support_range);
  CHECK(f[0].candidate.empty());
}

TEST_CASE("every shipped reposition cue strictly shortens the round trip") {
  Scenario s = shipped_scenario("brigade");
  Plan p = plan(s, shipped_kb());
  for (const auto& f : logistics_check(p, s, p.config))
    if (f.kind == FlagKind::reposition_cue) CHECK(f.candidate_round_trip < f.round_trip);
}

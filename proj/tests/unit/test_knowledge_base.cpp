#include <algorithm>

#include <doctest.h>

#include "coaplan/knowledge_base.hpp"

using namespace coaplan;

namespace {

const char* kSegment = R"(
segment: {segment_id: test, nation: ""}
vocabulary:
  functional_rows: [maneuver, fires]
  intents: [destroy, move, suppress]
  capabilities: [armor]
templates:
  - {task_type: attack, intents: [destroy], functional_row: maneuver, duration: {model: fixed, minutes: 60}}
  - {task_type: assault, intents: [destroy], functional_row: maneuver, duration: {model: fixed, minutes: 30}}
  - {task_type: approach, intents: [move], functional_row: maneuver, duration: {model: route}, destination: target}
methods:
  - id: attack-basic
    task_type: attack
    subtasks:
      - {id: move, task_type: approach, intent: move}
      - {id: hit, task_type: assault}
    relations:
      - {from: move.end, to: hit.start}
)";

Json segment() { return parse_document(kSegment); }

std::vector<std::string> lint_codes(const std::vector<Json>& docs) {
  std::vector<std::string> out;
  for (const auto& d : lint_kb(KnowledgeBase::from_documents(docs))) out.push_back(d.code);
  return out;
}

bool contains(const std::vector<std::string>& v, const std::string& x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

}  // namespace

TEST_CASE("shipped KB lints clean") {
  auto kb = KnowledgeBase::load({COAPLAN_DATA_DIR "/kb/base.yaml", COAPLAN_DATA_DIR "/kb/nation-b.yaml"});
  CHECK_FALSE(has_errors(lint_kb(kb)));
  CHECK(kb.functional_rows().size() == 6);
  CHECK(kb.task_types().size() >= 25);
  CHECK(kb.reaction_rules("A").size() == 1);
}

TEST_CASE("nation overlay shadows the universal definition") {
  auto kb = KnowledgeBase::load({COAPLAN_DATA_DIR "/kb/base.yaml", COAPLAN_DATA_DIR "/kb/nation-b.yaml"});
  const auto& universal = kb.task_template("deliberate-attack", "A");
  const auto& nation_b = kb.task_template("deliberate-attack", "B");
  CHECK(universal.nation == "");
  CHECK(nation_b.nation == "B");
  CHECK(nation_b.duration.minutes != universal.duration.minutes);

  auto methods_a = kb.methods_for("defend-area", "A");
  auto methods_b = kb.methods_for("defend-area", "B");
  REQUIRE_FALSE(methods_a.empty());
  REQUIRE_FALSE(methods_b.empty());
  CHECK(methods_a.front()->subtasks.size() != methods_b.front()->subtasks.size());
}

TEST_CASE("minimal segment loads and lints clean") {
  auto kb = KnowledgeBase::from_documents({segment()});
  CHECK_FALSE(has_errors(lint_kb(kb)));
  CHECK(kb.involves_movement("attack", ""));
  CHECK_FALSE(kb.involves_movement("assault", ""));
}

TEST_CASE("lint finds unbounded recursion") {
  Json doc = segment();
  doc["methods"].push_back(parse_document(R"(
id: attack-again
task_type: attack
subtasks:
  - {id: again, task_type: attack}
)"));
  CHECK(contains(lint_codes({doc}), "potential-infinite-expansion"));
}

TEST_CASE("lint finds an unknown functional row") {
  Json doc = segment();
  doc["templates"][1]["functional_row"] = "space";
  CHECK(contains(lint_codes({doc}), "dangling-functional-row"));
}

TEST_CASE("a method subtask with no template is rejected at load") {
  Json doc = segment();
  doc["methods"][0]["subtasks"][1]["task_type"] = "teleport";
  CHECK_THROWS_WITH_AS(KnowledgeBase::from_documents({doc}), doctest::Contains("teleport"), Error);
}

TEST_CASE("guards filter methods") {
  Json doc = segment();
  Json guarded = doc["methods"][0];
  guarded["id"] = "attack-armor";
  guarded["priority"] = 5;
  guarded["guard"] = {{"capabilities", {"armor"}}};
  doc["methods"].push_back(guarded);
  auto kb = KnowledgeBase::from_documents({doc});
  Unit tank;
  tank.capabilities = {"armor"};
  Unit grunt;
  GuardContext with{Intent{"destroy", std::nullopt}, &tank, "unit"};
  GuardContext without{Intent{"destroy", std::nullopt}, &grunt, "unit"};
  CHECK(applicable_methods(kb, "attack", with).front()->id == "attack-armor");
  CHECK(applicable_methods(kb, "attack", without).front()->id == "attack-basic");
}

TEST_CASE("digest is stable and content-sensitive") {
  auto a = KnowledgeBase::from_documents({segment()});
  auto b = KnowledgeBase::from_documents({segment()});
  CHECK(kb_digest(a) == kb_digest(b));
  Json doc = segment();
  doc["templates"][1]["duration"]["minutes"] = 31;
  CHECK(kb_digest(a) != kb_digest(KnowledgeBase::from_documents({doc})));
}

TEST_CASE("intent parsing") {
  CHECK(parse_intent("destroy")->tag == "destroy");
  auto attrit = parse_intent("attrit(0.3)");
  REQUIRE(attrit);
  CHECK(attrit->tag == "attrit");
  CHECK(*attrit->fraction == doctest::Approx(0.3));
  CHECK_FALSE(parse_intent("attrit(1.5)"));
  CHECK_FALSE(parse_intent("attrit(").has_value());
}

// Acceptance gate. One PASS/FAIL line per criterion; exit status is the
// number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "coaplan/adversarial.hpp"
#include "coaplan/combat_models.hpp"
#include "coaplan/engine.hpp"
#include "coaplan/routing.hpp"
#include "coaplan/syncmatrix.hpp"
#include "coaplan/temporal_network.hpp"
#include "support/coverage_sim.hpp"
#include "support/fixtures.hpp"
#include "support/flag_scanner.hpp"
#include "support/random_scenario.hpp"
#include "support/routing_oracle.hpp"
#include "support/stn_oracle.hpp"

using namespace coaplan;
using testing::shipped_kb;
using testing::shipped_scenario;

namespace {

// ---- pinned limits -------------------------------------------------------

constexpr std::size_t kMinLeaves = 100;
constexpr std::size_t kMinRows = 4;
constexpr double kMaxPlanMs = 2000;
constexpr int kDeterminismRuns = 10;
constexpr int kFlagScenarios = 100;
constexpr int kStnNetworks = 200;
constexpr int kStnMaxPoints = 30;  // origin included
constexpr int kStnMaxConstraints = 80;
constexpr int kRoutingGraphs = 500;
constexpr int kRoutingMaxNodes = 50;
constexpr int kAttritionGrid = 20;
constexpr double kStepRefinementTolerance = 0.02;  // absolute casualty fraction
constexpr int kChainRandomScenarios = 50;
constexpr std::size_t kMaxChainDepth = 3;

int failures = 0;

void report(const std::string& name, bool ok, const std::string& detail) {
  std::cout << (ok ? "PASS " : "FAIL ") << name << ": " << detail << std::endl;
  if (!ok) ++failures;
}

// Runs a check, turning an escaped exception into a failure line.
void criterion(const std::string& name, const std::function<std::pair<bool, std::string>()>& body) {
  try {
    auto [ok, detail] = body();
    report(name, ok, detail);
  } catch (const std::exception& e) {
    report(name, false, std::string("exception: ") + e.what());
  }
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

std::string root_of(const Plan& p, std::string id) {
  while (!p.activity(id).parent.empty()) id = p.activity(id).parent;
  return id;
}

// Length of the provenance chain ending at `id`: 1 for an ordinary action,
// 2 for a reaction, 3 for a counteraction.
std::size_t chain_depth(const Plan& p, const std::string& id) {
  std::size_t depth = 1;
  std::string cur = root_of(p, id);
  std::set<std::string> seen;
  while (!p.activity(cur).trigger.empty() && seen.insert(cur).second) {
    ++depth;
    cur = root_of(p, p.activity(cur).trigger);
  }
  return depth;
}

double euclid(const Scenario& s, const std::string& a, const std::string& b) {
  const auto& na = s.terrain.node(a);
  const auto& nb = s.terrain.node(b);
  return std::hypot(na.x - nb.x, na.y - nb.y);
}

// ---- criteria ------------------------------------------------------------

std::pair<bool, std::string> scale() {
  auto t0 = std::chrono::steady_clock::now();
  Scenario s = shipped_scenario("brigade");
  Plan p = plan(s, shipped_kb());
  double ms = ms_since(t0);
  std::set<std::string> rows;
  for (const auto* l : p.leaves()) rows.insert(l->functional_row);
  int reactions = 0, counteractions = 0;
  for (const auto& id : p.roots) {
    reactions += p.activity(id).provenance == ProvenanceKind::reaction;
    counteractions += p.activity(id).provenance == ProvenanceKind::counteraction;
  }
  std::size_t leaves = p.leaves().size();
  bool ok = s.goals.size() == 8 && s.units.size() == 20 && s.terrain.size() == 60 && leaves >= kMinLeaves &&
            rows.size() >= kMinRows && reactions >= 1 && counteractions >= 1 && ms < kMaxPlanMs;
  char buf[256];
  std::snprintf(buf, sizeof buf, "leaves=%zu rows=%zu reactions=%d counteractions=%d wall_ms=%.1f (limit %.0f)", leaves,
                rows.size(), reactions, counteractions, ms, kMaxPlanMs);
  return {ok, buf};
}

std::pair<bool, std::string> determinism(const std::string& cli, const std::filesystem::path& work) {
  std::filesystem::create_directories(work);
  std::string first;
  int identical = 0;
  for (int i = 0; i < kDeterminismRuns; ++i) {
    auto out = work / ("brigade-" + std::to_string(i) + ".json");
    std::string cmd = "\"" + cli + "\" plan --scenario \"" COAPLAN_DATA_DIR "/scenarios/brigade.yaml\" --kb \"" COAPLAN_DATA_DIR
                      "/kb/base.yaml\" --kb \"" COAPLAN_DATA_DIR "/kb/nation-b.yaml\" --out \"" + out.string() +
                      "\" > /dev/null";
    if (std::system(cmd.c_str()) != 0) return {false, "run " + std::to_string(i) + " exited non-zero"};
    std::string text = read_file(out);
    if (i == 0) first = text;
    identical += !text.empty() && text == first;
  }
  return {identical == kDeterminismRuns,
          std::to_string(identical) + "/" + std::to_string(kDeterminismRuns) + " byte-identical exports"};
}

std::pair<bool, std::string> flag_completeness() {
  std::size_t violations = 0, flags = 0;
  std::string first;
  for (int seed = 1; seed <= kFlagScenarios; ++seed) {
    bool two_sided = seed % 2 == 0;
    Scenario s = testing::random_scenario(static_cast<std::uint64_t>(seed), {two_sided});
    Plan p = two_sided ? wargame(s, shipped_kb()) : plan(s, shipped_kb());
    flags += p.flags.size();
    auto v = testing::scan_unflagged(p, s, shipped_kb());
    if (!v.empty() && first.empty()) first = " first: seed " + std::to_string(seed) + " " + v.front().what;
    violations += v.size();
  }
  return {violations == 0, std::to_string(kFlagScenarios) + " scenarios, " + std::to_string(flags) + " flags, " +
                               std::to_string(violations) + " unflagged violations" + first};
}

TemporalConstraint random_constraint(std::mt19937_64& rng, int points) {
  std::uniform_int_distribution<int> pick(0, points - 1), lo(-30, 60), span(0, 90), shape(0, 9);
  TemporalConstraint c;
  c.from = pick(rng);
  do c.to = pick(rng);
  while (c.to == c.from);
  int k = shape(rng);
  Minutes min = lo(rng);
  c.min_offset = k == 0 ? -kUnbounded : min;
  c.max_offset = k <= 3 ? kUnbounded : min + span(rng);
  if (is_unbounded(c.min_offset) && is_unbounded(c.max_offset)) c.max_offset = span(rng);
  return c;
}

std::pair<bool, std::string> stn() {
  std::mt19937_64 rng(4242);
  std::uniform_int_distribution<int> n_points(2, kStnMaxPoints), n_cons(1, kStnMaxConstraints);
  int adds = 0, rejected = 0, mismatches = 0;
  for (int net_i = 0; net_i < kStnNetworks; ++net_i) {
    TemporalNetwork net;  // point 0 is the origin
    int points = n_points(rng);
    for (int i = 1; i < points; ++i) net.add_point("p" + std::to_string(i));
    std::vector<TemporalConstraint> accepted;
    int cons = n_cons(rng);
    for (int k = 0; k < cons; ++k) {
      auto c = random_constraint(rng, points);
      TemporalNetwork before = net;
      auto trial = accepted;
      trial.push_back(c);
      auto oracle = testing::floyd_warshall_windows(net.point_count(), trial);
      auto r = net.add_constraint(c);
      ++adds;
      if (r.consistent != oracle.consistent) {
        ++mismatches;
        continue;
      }
      if (!r.consistent) {
        ++rejected;
        if (!(net == before)) ++mismatches;
        continue;
      }
      accepted.push_back(c);
      for (std::size_t p = 0; p < net.point_count(); ++p)
        if (net.window(static_cast<TimePointId>(p)) != oracle.windows[p]) ++mismatches;
    }
  }
  return {mismatches == 0 && rejected > 0,
          std::to_string(kStnNetworks) + " networks, " + std::to_string(adds) + " adds, " + std::to_string(rejected) +
              " rejected, " + std::to_string(mismatches) + " mismatches"};
}

std::pair<bool, std::string> routing() {
  std::mt19937_64 rng(5150);
  int compared = 0, unreachable = 0, mismatches = 0, largest = 0;
  for (int gi = 0; gi < kRoutingGraphs; ++gi) {
    auto g = testing::random_graph(rng, kRoutingMaxNodes, gi % 2 ? 0.04 : 0.12);
    largest = std::max(largest, static_cast<int>(g.size()));
    double speed = std::uniform_int_distribution<int>(5, 60)(rng);
    std::uniform_int_distribution<int> pick(0, static_cast<int>(g.size()) - 1);
    for (int q = 0; q < 4; ++q) {
      const auto& a = g.node(pick(rng)).id;
      const auto& b = g.node(pick(rng)).id;
      auto want = testing::brute_force_route(g, speed, a, b);
      if (!want) {
        ++unreachable;
        try {
          shortest_path(g, speed, a, b);
          ++mismatches;
        } catch (const UnreachableError&) {
        }
        continue;
      }
      auto got = shortest_path(g, speed, a, b);
      ++compared;
      if (got.hours != want->hours || got.nodes != want->nodes || got.duration != hours_to_minutes(want->hours))
        ++mismatches;
    }
  }
  return {mismatches == 0, std::to_string(kRoutingGraphs) + " graphs (max " + std::to_string(largest) + " nodes), " +
                               std::to_string(compared) + " routes, " + std::to_string(unreachable) + " unreachable, " +
                               std::to_string(mismatches) + " mismatches"};
}

std::pair<bool, std::string> coverage() {
  int cases = 0, mismatches = 0;
  for (Minutes transit = 0; transit <= 90; transit += 15)
    for (Minutes endurance = 120; endurance <= 360; endurance += 60)
      for (Minutes recovery = 0; recovery <= 90; recovery += 30) {
        if (endurance <= 2 * transit) continue;  // no time on station
        ++cases;
        int closed = coverage_feasible(1, transit, endurance, recovery).min_uavs;
        int sim = testing::simulate_min_uavs(transit, endurance, recovery);
        bool ok = closed == sim && coverage_feasible(closed, transit, endurance, recovery).feasible &&
                  !coverage_feasible(closed - 1, transit, endurance, recovery).feasible &&
                  !testing::simulate_coverage(closed - 1, transit, endurance, recovery);
        mismatches += !ok;
      }
  return {mismatches == 0, std::to_string(cases) + " feasible grid points, " + std::to_string(mismatches) + " mismatches"};
}

std::pair<bool, std::string> attrition() {
  const CrmCoefficients c = default_coefficients();
  int range_bad = 0, symmetry_bad = 0, monotone_bad = 0, attrit_bad = 0, attrit_cases = 0;
  double worst_step = 0;
  auto in_unit = [](double f) { return f >= 0 && f <= 1; };
  auto power = [](int i) { return 5.0 * (i + 1); };

  for (int i = 0; i < kAttritionGrid; ++i)
    for (int j = 0; j < kAttritionGrid; ++j)
      for (auto intent : {EngagementIntent::none, EngagementIntent::destroy, EngagementIntent::defeat,
                          EngagementIntent::attrit, EngagementIntent::suppress})
        for (auto posture : {Posture::none, Posture::hasty_attack, Posture::deliberate_attack, Posture::defend,
                             Posture::delay}) {
          EngagementInput in;
          in.attacker_power = power(i);
          in.defender_power = power(j);
          in.intent = intent;
          in.posture = posture;
          in.target_fraction = 0.25;
          in.max_minutes = 300;
          auto r = resolve_engagement(in, c);
          range_bad += !in_unit(r.attacker_casualty_fraction) || !in_unit(r.defender_casualty_fraction);
        }

  // Posture-neutral, equal powers.
  for (int i = 0; i < kAttritionGrid; ++i)
    for (double minutes : {30.0, 120.0, 480.0}) {
      EngagementInput in;
      in.attacker_power = in.defender_power = power(i);
      in.posture = Posture::none;
      in.max_minutes = minutes;
      auto r = resolve_engagement(in, c);
      symmetry_bad += r.attacker_casualty_fraction != r.defender_casualty_fraction;
    }

  // Stronger attacker: defender losses never fall, attacker losses never rise.
  for (int j = 0; j < kAttritionGrid; ++j) {
    std::optional<AttritionResult> prev;
    for (int i = 0; i < kAttritionGrid; ++i) {
      EngagementInput in;
      in.attacker_power = power(i);
      in.defender_power = power(j);
      in.posture = Posture::hasty_attack;
      in.max_minutes = 120;
      auto r = resolve_engagement(in, c);
      if (prev && (r.defender_casualty_fraction < prev->defender_casualty_fraction ||
                   r.attacker_casualty_fraction > prev->attacker_casualty_fraction))
        ++monotone_bad;
      prev = r;
    }
  }

  // Step refinement.
  for (int i = 0; i < kAttritionGrid; ++i)
    for (int j = 0; j < kAttritionGrid; ++j) {
      EngagementInput in;
      in.attacker_power = power(i);
      in.defender_power = power(j);
      in.posture = Posture::hasty_attack;
      in.max_minutes = 120;
      auto coarse = resolve_engagement(in, c, 6);
      auto fine = resolve_engagement(in, c, 3);
      worst_step = std::max({worst_step, std::abs(coarse.defender_casualty_fraction - fine.defender_casualty_fraction),
                             std::abs(coarse.attacker_casualty_fraction - fine.attacker_casualty_fraction)});
    }

  // Attack to attrit ends no later than attack to destroy.
  for (int i = 0; i < kAttritionGrid; ++i)
    for (int j = 0; j < kAttritionGrid; ++j)
      for (double f : {0.1, 0.3, 0.5, 0.69}) {
        EngagementInput in;
        in.attacker_power = power(i);
        in.defender_power = power(j);
        in.intent = EngagementIntent::destroy;
        auto destroy = attack_duration(in, c);
        in.intent = EngagementIntent::attrit;
        in.target_fraction = f;
        auto attrit = attack_duration(in, c);
        if (destroy.outcome != EngagementOutcome::defender_below_threshold ||
            attrit.outcome != EngagementOutcome::defender_below_threshold)
          continue;
        ++attrit_cases;
        attrit_bad += attrit.duration > destroy.duration;
      }

  char buf[320];
  std::snprintf(buf, sizeof buf,
                "range violations=%d symmetry violations=%d monotonicity violations=%d step 6 vs 3 max diff=%.4f "
                "(limit %.2f) attrit>destroy=%d of %d",
                range_bad, symmetry_bad, monotone_bad, worst_step, kStepRefinementTolerance, attrit_bad, attrit_cases);
  bool ok = range_bad == 0 && symmetry_bad == 0 && monotone_bad == 0 && worst_step < kStepRefinementTolerance &&
            attrit_bad == 0 && attrit_cases > 0;
  return {ok, buf};
}

std::pair<bool, std::string> anchors() {
  std::ostringstream detail;
  bool ok = true;
  {
    Plan p = plan(shipped_scenario("seize"), shipped_kb());
    const Activity& root = p.activity("g1-seize");
    Minutes first_move = kUnbounded, last_end = 0;
    for (const auto* l : testing::subtree_leaves(p, root.id)) {
      if (l->task_type == "move-in-area") first_move = std::min(first_move, l->start);
      last_end = std::max(last_end, l->end);
    }
    bool seize = first_move < kUnbounded && root.start == first_move && root.end >= last_end;
    ok = ok && seize;
    detail << "seize start=" << root.start << " first move=" << first_move << " end=" << root.end
           << " last derived end=" << last_end;
  }
  {
    Plan p = plan(shipped_scenario("close-with-and-engage"), shipped_kb());
    const Activity& root = p.activity("g1-engage");
    Minutes first_attack = kUnbounded;
    for (const auto* l : testing::subtree_leaves(p, root.id))
      if (l->task_type == "hasty-attack" || l->task_type == "deliberate-attack")
        first_attack = std::min(first_attack, l->start);
    bool engage = first_attack < kUnbounded && root.start == first_attack;
    ok = ok && engage;
    detail << "; engage start=" << root.start << " first attack=" << first_attack;
  }
  return {ok, detail.str()};
}

std::pair<bool, std::string> adversarial_chain() {
  std::vector<std::pair<Scenario, bool>> cases;
  for (const char* name : {"minimal", "seize", "close-with-and-engage", "brigade"})
    cases.emplace_back(shipped_scenario(name), false);
  cases.emplace_back(shipped_scenario("wargame"), true);
  cases.emplace_back(shipped_scenario("wargame"), false);
  for (int seed = 1; seed <= kChainRandomScenarios; ++seed) {
    bool two_sided = seed % 2 == 1;
    cases.emplace_back(testing::random_scenario(static_cast<std::uint64_t>(1000 + seed), {two_sided}), two_sided);
  }
  int fires = 0, expected = 0, missing = 0, too_deep = 0, unsound = 0;
  std::size_t deepest = 0;
  std::string first;
  for (const auto& [s, two_sided] : cases) {
    Plan p = two_sided ? wargame(s, shipped_kb()) : plan(s, shipped_kb());
    for (const auto& [id, a] : p.activities) {
      std::size_t d = chain_depth(p, id);
      deepest = std::max(deepest, d);
      too_deep += d > kMaxChainDepth;
      if (a.provenance == ProvenanceKind::reaction && a.parent.empty()) {
        const Activity& trig = p.activity(a.trigger);
        const ReactionRule* rule = nullptr;
        for (const auto* r : shipped_kb().reaction_rules(s.unit(trig.executor).nation))
          if (r->id == a.rule) rule = r;
        if (!rule || !reaction_holds(*rule, s, trig.task_type, trig.side,
                                     testing::replay_position(p, s, trig.executor, trig.start), s.unit(a.executor),
                                     testing::replay_position(p, s, a.executor, trig.start)))
          ++unsound;
      }
      if (!a.leaf || a.task_type != "artillery-fire") continue;
      ProvenanceKind rootp = p.activity(root_of(p, id)).provenance;
      if (rootp == ProvenanceKind::reaction || rootp == ProvenanceKind::counteraction) continue;
      ++fires;
      // Independent range check: opposing counter-battery artillery within weapon range, straight line.
      std::string here = testing::replay_position(p, s, a.executor, a.start);
      bool in_range = false;
      for (const auto& u : s.units)
        if (u.allegiance != a.side && u.has_capability("counter-battery") &&
            euclid(s, testing::replay_position(p, s, u.id, a.start), here) <= u.weapon_range)
          in_range = true;
      if (!in_range) continue;
      ++expected;
      const Activity* reaction = p.find(id + "!counter-battery");
      const Activity* counter = p.find(id + "!counter-battery+counter");
      bool ok = reaction && reaction->provenance == ProvenanceKind::reaction && counter &&
                counter->provenance == ProvenanceKind::counteraction && counter->task_type == "displace" &&
                counter->executor == a.executor;
      if (!ok) {
        ++missing;
        if (first.empty()) first = " first missing: " + id;
      }
    }
  }
  std::ostringstream detail;
  detail << cases.size() << " plans, " << fires << " artillery-fire leaves, " << expected << " in range, " << missing
         << " missing chains, deepest chain " << deepest << " (limit " << kMaxChainDepth << "), " << unsound
         << " unsound reactions" << first;
  return {expected > 0 && missing == 0 && too_deep == 0 && unsound == 0, detail.str()};
}

std::pair<bool, std::string> replan_contract() {
  std::ostringstream detail;
  bool ok = true;

  int identity = 0, identity_total = 0;
  std::vector<std::pair<Scenario, bool>> cases{{shipped_scenario("brigade"), false}, {shipped_scenario("wargame"), true}};
  for (int seed = 1; seed <= 8; ++seed)
    cases.emplace_back(testing::random_scenario(static_cast<std::uint64_t>(seed), {seed % 2 == 0}), seed % 2 == 0);
  for (const auto& [s, two_sided] : cases) {
    Plan base = two_sided ? wargame(s, shipped_kb()) : plan(s, shipped_kb());
    ++identity_total;
    identity += export_plan(replan(base, s, shipped_kb(), {})) == export_plan(base);
  }
  ok = ok && identity == identity_total;
  detail << "empty edits identity " << identity << "/" << identity_total;

  // accept_flag, every flag of the brigade plan.
  Scenario brigade = shipped_scenario("brigade");
  Plan base = plan(brigade, shipped_kb());
  int preserved = 0;
  for (const auto& f : base.flags) {
    Plan after = replan(base, brigade, shipped_kb(), {edit_from_json({{"kind", "accept_flag"}, {"target", f.id}})});
    bool same = after.activities.size() == base.activities.size();
    for (const auto& [id, a] : base.activities) {
      const Activity* b = after.find(id);
      same = same && b && b->start == a.start && b->end == a.end && b->executor == a.executor;
    }
    const Flag* g = nullptr;
    for (const auto& x : after.flags)
      if (x.kind == f.kind && x.activities == f.activities) g = &x;
    preserved += same && g && g->accepted;
  }
  ok = ok && preserved == static_cast<int>(base.flags.size()) && !base.flags.empty();
  detail << "; accept_flag preserved " << preserved << "/" << base.flags.size();

  // Deleting an action: everything reachable from it through children and
  // trigger links disappears.
  int deletions = 0, clean = 0;
  for (const auto& [s, two_sided] : cases) {
    Plan p = two_sided ? wargame(s, shipped_kb()) : plan(s, shipped_kb());
    for (const auto& [id, a] : p.activities) {
      if (a.provenance != ProvenanceKind::reaction || !a.parent.empty()) continue;
      const std::string victim = a.trigger;
      std::set<std::string> reach{victim};
      for (bool grew = true; grew;) {
        grew = false;
        for (const auto& [xid, x] : p.activities) {
          if (reach.count(xid)) continue;
          if ((!x.parent.empty() && reach.count(x.parent)) || (!x.trigger.empty() && reach.count(x.trigger))) {
            reach.insert(xid);
            grew = true;
          }
        }
      }
      Plan after = replan(p, s, shipped_kb(), {edit_from_json({{"kind", "delete_activity"}, {"target", victim}})});
      bool gone = true;
      for (const auto& r : reach) gone = gone && !after.find(r);
      for (const auto& [xid, x] : after.activities) gone = gone && !reach.count(x.trigger);
      ++deletions;
      clean += gone;
    }
  }
  ok = ok && deletions > 0 && clean == deletions;
  detail << "; delete removed dependents " << clean << "/" << deletions;
  return {ok, detail.str()};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coaplan acceptance gate"};
  std::string cli;
  std::string work = (std::filesystem::temp_directory_path() / "coaplan-acceptance").string();
  app.add_option("--cli", cli, "Path to the coaplan executable")->required();
  app.add_option("--work", work, "Scratch directory");
  CLI11_PARSE(app, argc, argv);

  criterion("scale", scale);
  criterion("determinism", [&] { return determinism(cli, work); });
  criterion("flag-completeness", flag_completeness);
  criterion("stn-oracle", stn);
  criterion("routing-oracle", routing);
  criterion("coverage-oracle", coverage);
  criterion("attrition-properties", attrition);
  criterion("anchor-semantics", anchors);
  criterion("adversarial-chain", adversarial_chain);
  criterion("replan-contract", replan_contract);
  std::cout << (failures == 0 ? "ALL PASS" : std::to_string(failures) + " FAILED") << std::endl;
  return failures == 0 ? 0 : 1;
}

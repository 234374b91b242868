#include "coaplan/combat_models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace coaplan {

namespace {

constexpr std::array kPostures{Posture::none, Posture::hasty_attack, Posture::deliberate_attack, Posture::defend,
                               Posture::delay};

// Engagements with no stopping rule are cut off after a week.
constexpr double kOpenEngagementCap = 7 * 24 * 60;

}  // namespace

double CrmCoefficients::f(double ratio) const {
  if (curve.empty()) return 0;
  if (std::isinf(ratio) || ratio >= curve.back().first) return curve.back().second;
  if (ratio <= curve.front().first) return curve.front().second;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    auto [x1, y1] = curve[i];
    if (ratio <= x1) {
      auto [x0, y0] = curve[i - 1];
      return y0 + (y1 - y0) * (ratio - x0) / (x1 - x0);
    }
  }
  return curve.back().second;
}

PostureFactors CrmCoefficients::factors(Posture p) const {
  auto it = posture.find(to_string(p));
  return it == posture.end() ? PostureFactors{} : it->second;
}

CrmCoefficients coefficients_from_json(const Json& doc) {
  Node root(doc, "");
  if (root.integer("schema_version") != 1) root.at("schema_version").fail("unsupported schema_version");
  CrmCoefficients c;
  c.model_id = root.str("model_id");
  c.step = root.integer_or("step_minutes", 6);
  if (c.step <= 0) root.at("step_minutes").fail("step must be > 0");
  Node rates = root.at("rates");
  c.attacker_rate = rates.number("attacker");
  c.defender_rate = rates.number("defender");
  if (c.attacker_rate < 0) rates.at("attacker").fail("rate must be >= 0");
  if (c.defender_rate < 0) rates.at("defender").fail("rate must be >= 0");
  Node posture = root.at("posture");
  for (Posture p : kPostures) {
    Node f = posture.at(to_string(p));
    PostureFactors pf{f.number("attacker"), f.number("defender")};
    if (pf.attacker < 0 || pf.defender < 0) f.fail("posture multipliers must be >= 0");
    c.posture[to_string(p)] = pf;
  }
  Node curve = root.at("curve");
  for (const auto& knot : curve.items()) {
    auto xy = knot.items();
    if (xy.size() != 2) knot.fail("knot must be [ratio, value]");
    c.curve.emplace_back(xy[0].number(), xy[1].number());
  }
  if (c.curve.empty()) curve.fail("curve needs at least one knot");
  for (std::size_t i = 0; i < c.curve.size(); ++i) {
    if (c.curve[i].second < 0) curve.fail("curve values must be >= 0");
    if (i > 0 && !(c.curve[i].first > c.curve[i - 1].first)) curve.fail("curve ratios must increase strictly");
    if (i > 0 && c.curve[i].second < c.curve[i - 1].second) curve.fail("curve must be nondecreasing");
  }
  Node th = root.at("thresholds");
  c.destroy_remaining = th.number("destroy_remaining");
  c.defeat_remaining = th.number("defeat_remaining");
  c.culmination = th.number("culmination");
  for (double v : {c.destroy_remaining, c.defeat_remaining, c.culmination})
    if (!(v >= 0 && v <= 1)) th.fail("thresholds must lie in [0, 1]");
  return c;
}

Json coefficients_to_json(const CrmCoefficients& c) {
  Json posture = Json::object();
  for (const auto& [name, pf] : c.posture) posture[name] = {{"attacker", pf.attacker}, {"defender", pf.defender}};
  Json curve = Json::array();
  for (auto [x, y] : c.curve) curve.push_back({x, y});
  return Json{{"schema_version", 1},
              {"model_id", c.model_id},
              {"step_minutes", c.step},
              {"rates", {{"attacker", c.attacker_rate}, {"defender", c.defender_rate}}},
              {"posture", posture},
              {"curve", curve},
              {"thresholds",
               {{"destroy_remaining", c.destroy_remaining},
                {"defeat_remaining", c.defeat_remaining},
                {"culmination", c.culmination}}}};
}

CrmCoefficients load_coefficients(const std::filesystem::path& path) {
  return coefficients_from_json(load_document(path));
}

CrmCoefficients default_coefficients() {
  CrmCoefficients c;
  c.model_id = "ratio-response-v1";
  c.step = 6;
  c.attacker_rate = 0.10;
  c.defender_rate = 0.10;
  c.posture = {{"none", {1.0, 1.0}},
               {"hasty_attack", {1.2, 1.0}},
               {"deliberate_attack", {0.9, 1.1}},
               {"defend", {1.0, 0.8}},
               {"delay", {0.7, 0.6}}};
  c.curve = {{0.0, 0.0}, {0.5, 0.4}, {1.0, 1.0}, {2.0, 1.6}, {3.0, 2.0}, {6.0, 2.5}};
  c.destroy_remaining = 0.3;
  c.defeat_remaining = 0.6;
  c.culmination = 0.4;
  return c;
}

EngagementIntent engagement_intent(const Intent& i) {
  if (i.tag == "destroy") return EngagementIntent::destroy;
  if (i.tag == "defeat") return EngagementIntent::defeat;
  if (i.tag == "attrit") return EngagementIntent::attrit;
  if (i.tag == "suppress") return EngagementIntent::suppress;
  if (i.tag == "mask") return EngagementIntent::mask;
  return EngagementIntent::none;
}

std::string to_string(EngagementOutcome o) {
  switch (o) {
    case EngagementOutcome::defender_below_threshold: return "defender_below_threshold";
    case EngagementOutcome::duration_elapsed: return "duration_elapsed";
    case EngagementOutcome::attacker_culminated: return "attacker_culminated";
  }
  return "duration_elapsed";
}

std::optional<double> intent_threshold(EngagementIntent intent, double target_fraction, const CrmCoefficients& c) {
  switch (intent) {
    case EngagementIntent::destroy: return c.destroy_remaining;
    case EngagementIntent::defeat: return c.defeat_remaining;
    // Never deeper than destroy: attrit is the lesser aim.
    case EngagementIntent::attrit: return std::max(1.0 - target_fraction, c.destroy_remaining);
    default: return std::nullopt;
  }
}

AttritionResult resolve_engagement(const EngagementInput& in, const CrmCoefficients& c) {
  return resolve_engagement(in, c, static_cast<double>(c.step));
}

AttritionResult resolve_engagement(const EngagementInput& in, const CrmCoefficients& c, double step_minutes) {
  if (!(step_minutes > 0)) throw Error("resolve_engagement: step must be > 0");
  if (!(in.attacker_power >= 0) || !(in.defender_power >= 0)) throw Error("resolve_engagement: powers must be >= 0");
  if (in.attacker_power == 0 && in.defender_power == 0) throw Error("resolve_engagement: both powers are zero");

  AttritionResult res;
  res.trace.push_back({0, 1, 1});
  const bool no_effect = in.intent == EngagementIntent::suppress || in.intent == EngagementIntent::mask;
  const auto threshold = intent_threshold(in.intent, in.target_fraction, c);
  const double limit = in.max_minutes ? std::max(0.0, *in.max_minutes)
                       : threshold     ? std::numeric_limits<double>::infinity()
                                       : kOpenEngagementCap;

  if (in.defender_power == 0) {
    res.outcome = EngagementOutcome::defender_below_threshold;
    return res;
  }
  if (no_effect) {
    res.elapsed_minutes = std::isinf(limit) ? 0 : limit;
    res.duration = static_cast<Minutes>(std::ceil(res.elapsed_minutes));
    res.trace.push_back({res.elapsed_minutes, 1, 1});
    return res;
  }

  const PostureFactors pf = c.factors(in.posture);
  const double h = step_minutes / 60.0;
  double a = 0, d = 0, t = 0;
  for (;;) {
    if (threshold && d >= 1 - *threshold) {
      res.outcome = EngagementOutcome::defender_below_threshold;
      break;
    }
    if (d >= 1) {
      res.outcome = EngagementOutcome::defender_below_threshold;
      break;
    }
    if (a >= c.culmination) {
      res.outcome = EngagementOutcome::attacker_culminated;
      break;
    }
    if (t >= limit) {
      res.outcome = EngagementOutcome::duration_elapsed;
      break;
    }
    if (t >= kOpenEngagementCap * 4) {  // rates too small to ever stop
      res.outcome = EngagementOutcome::duration_elapsed;
      break;
    }
    double att = in.attacker_power * (1 - a);
    double def = in.defender_power * (1 - d);
    double ratio = att / def;
    double inv = att > 0 ? def / att : std::numeric_limits<double>::infinity();
    double dd = h * c.defender_rate * c.f(ratio) * pf.defender * in.terrain_factor;
    double da = h * c.attacker_rate * c.f(inv) * pf.attacker;

    double theta = 1;
    if (threshold && dd > 0) theta = std::min(theta, ((1 - *threshold) - d) / dd);
    if (dd > 0) theta = std::min(theta, (1 - d) / dd);
    if (da > 0) theta = std::min(theta, (c.culmination - a) / da);
    if (!std::isinf(limit)) theta = std::min(theta, (limit - t) / step_minutes);
    theta = std::max(theta, 0.0);

    double na = a + theta * da, nd = d + theta * dd;
    double nt = t + theta * step_minutes;
    // Snap the crossing step onto its threshold to avoid representation drift.
    if (threshold && dd > 0 && theta == ((1 - *threshold) - d) / dd) nd = 1 - *threshold;
    if (dd > 0 && theta == (1 - d) / dd) nd = 1;
    if (da > 0 && theta == (c.culmination - a) / da) na = c.culmination;
    if (!std::isinf(limit) && theta == (limit - t) / step_minutes) nt = limit;
    if (na > 1 || nd > 1) res.clamped = true;
    a = std::clamp(na, 0.0, 1.0);
    d = std::clamp(nd, 0.0, 1.0);
    t = nt;
    res.trace.push_back({t, 1 - a, 1 - d});
  }
  res.attacker_casualty_fraction = a;
  res.defender_casualty_fraction = d;
  res.elapsed_minutes = t;
  double whole = std::round(t);
  res.duration = std::fabs(t - whole) < 1e-9 ? static_cast<Minutes>(whole) : static_cast<Minutes>(std::ceil(t));
  return res;
}

AttritionResult attack_duration(const EngagementInput& in, const CrmCoefficients& c) {
  if (in.intent != EngagementIntent::destroy && in.intent != EngagementIntent::defeat &&
      in.intent != EngagementIntent::attrit)
    throw Error("attack_duration: intent must be destroy, defeat or attrit");
  return resolve_engagement(in, c);
}

std::optional<double> bypass_point(const std::vector<TraceStep>& trace, double threshold) {
  for (const auto& s : trace)
    if (s.defender_remaining <= threshold) return s.minutes;
  return std::nullopt;
}

ConsumptionDelta consume(Minutes duration, const std::map<std::string, double>& rates_per_hour) {
  ConsumptionDelta d;
  double hours = static_cast<double>(duration) / 60.0;
  for (const auto& [resource, rate] : rates_per_hour) {
    double v = hours * rate;
    d.by_resource[resource] = v;
    d.total += v;
  }
  return d;
}

CoverageResult coverage_feasible(int n_uavs, Minutes transit_out, Minutes endurance, Minutes recovery) {
  if (n_uavs < 0 || transit_out < 0 || endurance < 0 || recovery < 0)
    throw Error("coverage_feasible: arguments must be >= 0");
  if (endurance <= 2 * transit_out) throw Error("coverage_feasible: no on-station time (endurance <= 2 x transit)");
  CoverageResult r;
  r.on_station = endurance - 2 * transit_out;
  r.cycle = endurance + recovery;
  r.min_uavs = static_cast<int>((r.cycle + r.on_station - 1) / r.on_station);
  r.feasible = n_uavs >= r.min_uavs;
  return r;
}

}  // namespace coaplan

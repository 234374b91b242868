#include "coaplan/plan.hpp"

#include <algorithm>
#include <array>

namespace coaplan {

// ---- config --------------------------------------------------------------

PlanConfig config_from_json(const Json& doc, const std::filesystem::path& base_dir) {
  Node root(doc, "");
  if (!doc.is_object()) root.fail("config must be a mapping");
  if (root.integer_or("schema_version", 1) != 1) root.at("schema_version").fail("unsupported schema_version");
  PlanConfig c;
  c.max_expansion_depth = static_cast<int>(root.integer_or("max_expansion_depth", c.max_expansion_depth));
  if (c.max_expansion_depth <= 0) root.at("max_expansion_depth").fail("must be > 0");
  c.period_length = root.integer_or("period_length", c.period_length);
  if (c.period_length <= 0) root.at("period_length").fail("must be > 0");

  if (auto a = root.find("attrition")) {
    std::string model = a->str_or("model_id", c.coefficients.model_id);
    if (auto t = a->find("coefficients")) {
      if (t->json().is_object()) {
        c.coefficients = coefficients_from_json(t->json());
      } else if (t->str() != "builtin") {
        std::filesystem::path p = t->str();
        if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
        try {
          c.coefficients = load_coefficients(p);
        } catch (const SchemaError& e) {
          throw SchemaError(t->path() + " (" + p.string() + ")" + e.path(),
                            std::string(e.what()).substr(e.path().size() + 2));
        }
      }
    }
    if (c.coefficients.model_id != model)
      a->at("model_id").fail("coefficient table is \"" + c.coefficients.model_id + "\", config names \"" + model + "\"");
  }
  if (auto k = root.find("contact")) {
    c.bypass_threshold = k->number_or("bypass_threshold", c.bypass_threshold);
    c.engage_threshold = k->number_or("engage_threshold", c.engage_threshold);
    c.main_body_ratio = k->number_or("main_body_ratio", c.main_body_ratio);
    if (!(c.bypass_threshold >= 0 && c.bypass_threshold <= 1)) k->at("bypass_threshold").fail("must lie in [0, 1]");
    if (!(c.engage_threshold > 0)) k->at("engage_threshold").fail("must be > 0");
    if (!(c.main_body_ratio > 0)) k->at("main_body_ratio").fail("must be > 0");
  }
  if (auto l = root.find("logistics")) {
    c.resupply_threshold = l->integer_or("resupply_threshold", c.resupply_threshold);
    c.resupply_speed = l->number_or("resupply_speed", c.resupply_speed);
    c.resupply_slice = l->integer_or("slice", c.resupply_slice);
    c.trains_unit_type = l->str_or("trains_unit_type", c.trains_unit_type);
    c.reposition_task = l->str_or("reposition_task", c.reposition_task);
    if (c.resupply_threshold <= 0) l->at("resupply_threshold").fail("must be > 0");
    if (!(c.resupply_speed > 0)) l->at("resupply_speed").fail("must be > 0");
    if (c.resupply_slice <= 0) l->at("slice").fail("must be > 0");
  }
  if (root.has("support_range_mode")) {
    std::string m = root.str("support_range_mode");
    if (m == "euclidean") c.support_range_mode = DistanceMode::euclidean;
    else if (m == "path") c.support_range_mode = DistanceMode::path;
    else root.at("support_range_mode").fail("must be euclidean or path");
  }
  if (auto tf = root.find("terrain_factor")) {
    for (const char* cls : {"open", "restricted", "severely_restricted"}) {
      if (!tf->has(cls)) continue;
      double v = tf->number(cls);
      if (!(v > 0 && v <= 1)) tf->at(cls).fail("terrain factor must lie in (0, 1]");
      c.terrain_factor[cls] = v;
    }
  }
  return c;
}

PlanConfig load_config(const std::filesystem::path& path) {
  return config_from_json(load_document(path), path.parent_path());
}

Json config_to_json(const PlanConfig& c) {
  return Json{{"schema_version", 1},
              {"max_expansion_depth", c.max_expansion_depth},
              {"period_length", c.period_length},
              {"attrition", {{"model_id", c.coefficients.model_id}, {"coefficients", coefficients_to_json(c.coefficients)}}},
              {"contact",
               {{"bypass_threshold", c.bypass_threshold},
                {"engage_threshold", c.engage_threshold},
                {"main_body_ratio", c.main_body_ratio}}},
              {"logistics",
               {{"resupply_threshold", c.resupply_threshold},
                {"resupply_speed", c.resupply_speed},
                {"slice", c.resupply_slice},
                {"trains_unit_type", c.trains_unit_type},
                {"reposition_task", c.reposition_task}}},
              {"support_range_mode", c.support_range_mode == DistanceMode::path ? "path" : "euclidean"},
              {"terrain_factor", c.terrain_factor}};
}

// ---- edits ---------------------------------------------------------------

std::string to_string(EditKind k) {
  switch (k) {
    case EditKind::accept_flag: return "accept_flag";
    case EditKind::pin_activity: return "pin_activity";
    case EditKind::reassign_executor: return "reassign_executor";
    case EditKind::delete_activity: return "delete_activity";
    case EditKind::change_intent: return "change_intent";
    case EditKind::reposition_unit: return "reposition_unit";
  }
  return "accept_flag";
}

EditCommand edit_from_json(const Json& j) {
  Node n(j, "");
  if (!j.is_object()) n.fail("edit must be a mapping");
  EditCommand e;
  std::string kind = n.str("kind");
  static const std::array kinds{EditKind::accept_flag,     EditKind::pin_activity,  EditKind::reassign_executor,
                                EditKind::delete_activity, EditKind::change_intent, EditKind::reposition_unit};
  auto it = std::find_if(kinds.begin(), kinds.end(), [&](EditKind k) { return to_string(k) == kind; });
  if (it == kinds.end()) n.at("kind").fail("unknown edit kind \"" + kind + "\"");
  e.kind = *it;
  e.target = n.str_or("target", "");
  switch (e.kind) {
    case EditKind::accept_flag:
      e.flag_kind = n.str_or("flag_kind", "");
      e.flag_activities = n.strings_or_empty("flag_activities");
      if (e.target.empty() && e.flag_kind.empty()) n.fail("accept_flag needs a target flag id or a flag key");
      if (!e.flag_kind.empty()) flag_kind_from_string(e.flag_kind);
      std::sort(e.flag_activities.begin(), e.flag_activities.end());
      break;
    case EditKind::pin_activity:
      e.start = n.at("start").minutes();
      e.end = n.at("end").minutes();
      if (e.start < 0 || e.end < e.start) n.fail("pin needs 0 <= start <= end");
      break;
    case EditKind::reassign_executor: e.executor = n.str("executor"); break;
    case EditKind::change_intent: e.intent = n.str("intent"); break;
    case EditKind::delete_activity: break;
    case EditKind::reposition_unit:
      e.node = n.str("node");
      if (n.has("not_before")) e.not_before = n.at("not_before").minutes();
      break;
  }
  if (e.kind != EditKind::accept_flag && e.target.empty()) n.at("target").fail("edit needs a target");
  return e;
}

Json edit_to_json(const EditCommand& e) {
  Json j{{"kind", to_string(e.kind)}, {"target", e.target}};
  switch (e.kind) {
    case EditKind::accept_flag:
      j["flag_kind"] = e.flag_kind;
      j["flag_activities"] = e.flag_activities;
      break;
    case EditKind::pin_activity:
      j["start"] = e.start;
      j["end"] = e.end;
      break;
    case EditKind::reassign_executor: j["executor"] = e.executor; break;
    case EditKind::change_intent: j["intent"] = e.intent; break;
    case EditKind::delete_activity: break;
    case EditKind::reposition_unit:
      j["node"] = e.node;
      if (e.not_before) j["not_before"] = *e.not_before;
      break;
  }
  return j;
}

// ---- flags, provenance ---------------------------------------------------

std::string to_string(FlagKind k) {
  switch (k) {
    case FlagKind::over_commitment: return "over_commitment";
    case FlagKind::out_of_support_range: return "out_of_support_range";
    case FlagKind::supply_shortfall: return "supply_shortfall";
    case FlagKind::reposition_cue: return "reposition_cue";
    case FlagKind::temporal_conflict: return "temporal_conflict";
    case FlagKind::anchor_unresolved: return "anchor_unresolved";
    case FlagKind::unreachable: return "unreachable";
  }
  return "over_commitment";
}

FlagKind flag_kind_from_string(const std::string& s) {
  for (FlagKind k : {FlagKind::over_commitment, FlagKind::out_of_support_range, FlagKind::supply_shortfall,
                     FlagKind::reposition_cue, FlagKind::temporal_conflict, FlagKind::anchor_unresolved,
                     FlagKind::unreachable})
    if (to_string(k) == s) return k;
  throw Error("unknown flag kind \"" + s + "\"");
}

std::string to_string(ProvenanceKind k) {
  switch (k) {
    case ProvenanceKind::user_goal: return "user_goal";
    case ProvenanceKind::expansion: return "expansion";
    case ProvenanceKind::reaction: return "reaction";
    case ProvenanceKind::counteraction: return "counteraction";
  }
  return "user_goal";
}

// ---- plan ----------------------------------------------------------------

const Activity& Plan::activity(const std::string& id) const {
  auto it = activities.find(id);
  if (it == activities.end()) throw Error("unknown activity \"" + id + "\"");
  return it->second;
}

const Activity* Plan::find(const std::string& id) const {
  auto it = activities.find(id);
  return it == activities.end() ? nullptr : &it->second;
}

const Flag* Plan::find_flag(const std::string& id) const {
  for (const auto& f : flags)
    if (f.id == id) return &f;
  return nullptr;
}

std::vector<const Activity*> Plan::leaves() const {
  std::vector<const Activity*> out;
  for (const auto& [id, a] : activities)
    if (a.leaf) out.push_back(&a);
  return out;
}

Minutes Plan::horizon() const {
  Minutes h = 0;
  for (const auto& [id, a] : activities)
    if (a.leaf) h = std::max(h, a.end);
  return h;
}

std::string position_at(const Plan& plan, const Scenario& s, const std::string& unit, Minutes t) {
  const Unit& u = s.unit(unit);
  std::string where = u.location;
  Minutes best = -1;
  std::string best_id;
  for (const auto& [id, a] : plan.activities) {
    if (!a.leaf || a.executor != unit || a.destination.empty() || a.end > t) continue;
    if (a.end > best || (a.end == best && id > best_id)) {
      best = a.end;
      best_id = id;
      where = a.destination;
    }
  }
  return where;
}

}  // namespace coaplan

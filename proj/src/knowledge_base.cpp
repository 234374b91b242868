#include "coaplan/knowledge_base.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <regex>
#include <set>

#include "coaplan/digest.hpp"

namespace coaplan {

std::string Intent::str() const {
  if (!fraction) return tag;
  Json j = *fraction;
  return tag + "(" + j.dump() + ")";
}

std::optional<Intent> parse_intent(const std::string& text) {
  static const std::regex re(R"(\s*([A-Za-z_][A-Za-z0-9_\-]*)\s*(?:\(\s*([0-9]*\.?[0-9]+)\s*\))?\s*)");
  std::smatch m;
  if (!std::regex_match(text, m, re)) return std::nullopt;
  Intent i;
  i.tag = m[1].str();
  if (m[2].matched) {
    double f = std::stod(m[2].str());
    if (!(f > 0 && f < 1)) return std::nullopt;
    i.fraction = f;
  }
  return i;
}

std::string to_string(DurationKind v) {
  switch (v) {
    case DurationKind::fixed: return "fixed";
    case DurationKind::rate_based: return "rate_based";
    case DurationKind::engagement_driven: return "engagement_driven";
    case DurationKind::route: return "route";
  }
  return "fixed";
}

std::string to_string(Posture v) {
  switch (v) {
    case Posture::none: return "none";
    case Posture::hasty_attack: return "hasty_attack";
    case Posture::deliberate_attack: return "deliberate_attack";
    case Posture::defend: return "defend";
    case Posture::delay: return "delay";
  }
  return "none";
}

std::string to_string(SiteRule v) {
  switch (v) {
    case SiteRule::executor: return "executor";
    case SiteRule::target: return "target";
    case SiteRule::destination: return "destination";
  }
  return "executor";
}

std::string to_string(DestinationRule v) {
  switch (v) {
    case DestinationRule::none: return "none";
    case DestinationRule::target: return "target";
    case DestinationRule::adjacent: return "adjacent";
    case DestinationRule::home: return "home";
    case DestinationRule::displace: return "displace";
  }
  return "none";
}

std::string to_string(RangeCheck v) {
  switch (v) {
    case RangeCheck::none: return "none";
    case RangeCheck::support: return "support";
    case RangeCheck::weapon: return "weapon";
  }
  return "none";
}

std::string to_string(RangeMode v) { return v == RangeMode::path ? "path" : "euclidean"; }

namespace {

template <typename E, std::size_t N>
E enum_from(const Node& n, const std::array<E, N>& values) {
  std::string s = n.str();
  for (E v : values)
    if (to_string(v) == s) return v;
  n.fail("unknown value \"" + s + "\"");
}

template <typename E, std::size_t N>
E enum_or(const Node& n, std::string_view key, const std::array<E, N>& values, E fallback) {
  return n.has(key) ? enum_from(n.at(key), values) : fallback;
}

constexpr std::array kDuration{DurationKind::fixed, DurationKind::rate_based, DurationKind::engagement_driven,
                               DurationKind::route};
constexpr std::array kPosture{Posture::none, Posture::hasty_attack, Posture::deliberate_attack, Posture::defend,
                              Posture::delay};
constexpr std::array kSite{SiteRule::executor, SiteRule::target, SiteRule::destination};
constexpr std::array kDestination{DestinationRule::none, DestinationRule::target, DestinationRule::adjacent,
                                  DestinationRule::home, DestinationRule::displace};
constexpr std::array kRange{RangeCheck::none, RangeCheck::support, RangeCheck::weapon};
constexpr std::array kRangeMode{RangeMode::euclidean, RangeMode::path};

std::vector<std::string> sorted_unique(std::vector<std::string> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

void append_unique(std::vector<std::string>& into, const std::vector<std::string>& from) {
  for (const auto& s : from)
    if (!contains(into, s)) into.push_back(s);
}

Json string_list(const std::vector<std::string>& v) { return v; }

std::string contact_role_name(ContactRole r) {
  switch (r) {
    case ContactRole::security: return "security";
    case ContactRole::main_body: return "main_body";
    case ContactRole::follow_on: return "follow_on";
  }
  return "security";
}

DurationModel duration_from(const Node& n) {
  DurationModel d;
  d.kind = enum_from(n.at("model"), kDuration);
  d.minutes = n.integer_or("minutes", 0);
  d.quantity = n.number_or("quantity", 0);
  d.rate = n.number_or("rate", 1);
  d.max_minutes = n.integer_or("max_minutes", 0);
  if (d.kind == DurationKind::fixed && d.minutes <= 0) n.at("minutes").fail("fixed duration must be > 0");
  if (d.kind == DurationKind::rate_based) {
    if (!(d.rate > 0)) n.at("rate").fail("rate must be > 0");
    if (!(d.quantity >= 0)) n.at("quantity").fail("quantity must be >= 0");
  }
  if (d.minutes < 0 || d.max_minutes < 0) n.fail("durations must be >= 0");
  return d;
}

Json duration_to_json(const DurationModel& d) {
  Json j{{"model", to_string(d.kind)}};
  switch (d.kind) {
    case DurationKind::fixed: j["minutes"] = d.minutes; break;
    case DurationKind::rate_based:
      j["quantity"] = d.quantity;
      j["rate"] = d.rate;
      break;
    case DurationKind::engagement_driven:
      j["minutes"] = d.minutes;
      j["max_minutes"] = d.max_minutes;
      break;
    case DurationKind::route: break;
  }
  return j;
}

TaskTemplate template_from(const Node& n, const KbSegment& seg) {
  TaskTemplate t;
  t.task_type = n.str("task_type");
  t.nation = seg.nation;
  t.segment = seg.segment_id;
  t.intents = n.strings_or_empty("intents");
  t.functional_row = n.str("functional_row");
  if (auto a = n.find("anchors")) {
    t.anchors.start = a->strings_or_empty("start");
    if (a->has("end") && !(a->at("end").json().is_string() && a->str("end") == "all"))
      t.anchors.end = a->strings_or_empty("end");
    if (a->has("start") && a->at("start").json().is_string() && a->str("start") == "first") t.anchors.start.clear();
  }
  t.duration = duration_from(n.at("duration"));
  if (auto c = n.find("consumption")) {
    if (!c->json().is_object()) c->fail("expected a mapping of resource class to rate");
    for (auto it = c->json().begin(); it != c->json().end(); ++it) {
      Node rate(it.value(), json_pointer_append(c->path(), it.key()));
      double r = rate.number();
      if (!(r >= 0)) rate.fail("consumption rate must be >= 0");
      t.consumption[it.key()] = r;
    }
  }
  t.required_capabilities = sorted_unique(n.strings_or_empty("required_capabilities"));
  t.posture = enum_or(n, "posture", kPosture, Posture::none);
  t.contests = n.boolean_or("contests", false);
  t.exclusive = n.boolean_or("exclusive", true);
  t.site = enum_or(n, "site", kSite, SiteRule::executor);
  t.destination = enum_or(n, "destination", kDestination, DestinationRule::none);
  t.range_check = enum_or(n, "range_check", kRange, RangeCheck::none);
  t.on_contact = n.boolean_or("on_contact", false);
  if (auto c = n.find("coverage")) {
    CoverageSpec cov;
    cov.transit = c->integer("transit");
    cov.endurance = c->integer("endurance");
    cov.recovery = c->integer_or("recovery", 0);
    t.coverage = cov;
  }
  if (t.duration.kind == DurationKind::route && t.destination == DestinationRule::none)
    n.at("duration").fail("route duration requires a destination rule");
  return t;
}

Json template_to_json(const TaskTemplate& t) {
  Json j{{"task_type", t.task_type},
         {"nation", t.nation},
         {"intents", t.intents},
         {"functional_row", t.functional_row},
         {"anchors", {{"start", t.anchors.start}, {"end", t.anchors.end}}},
         {"duration", duration_to_json(t.duration)},
         {"consumption", t.consumption},
         {"required_capabilities", t.required_capabilities},
         {"posture", to_string(t.posture)},
         {"contests", t.contests},
         {"exclusive", t.exclusive},
         {"site", to_string(t.site)},
         {"destination", to_string(t.destination)},
         {"range_check", to_string(t.range_check)},
         {"on_contact", t.on_contact}};
  if (t.coverage)
    j["coverage"] = {{"transit", t.coverage->transit}, {"endurance", t.coverage->endurance},
                     {"recovery", t.coverage->recovery}};
  return j;
}

ExecutorBinding binding_from(const Node& n) {
  ExecutorBinding b;
  if (n.json().is_string()) {
    std::string s = n.str();
    if (s == "same") b.kind = ExecutorBindingKind::same;
    else if (s == "unbound") b.kind = ExecutorBindingKind::unbound;
    else if (s == "parent_target") b.kind = ExecutorBindingKind::parent_target;
    else n.fail("unknown executor binding \"" + s + "\"");
    return b;
  }
  if (n.has("subordinate")) {
    b.kind = ExecutorBindingKind::subordinate;
    b.index = static_cast<int>(n.integer("subordinate"));
    if (b.index < 1) n.at("subordinate").fail("subordinate index is 1-based");
  } else if (n.has("role")) {
    b.kind = ExecutorBindingKind::role;
    b.role = n.str("role");
  } else {
    n.fail("executor binding must be same, unbound, parent_target, {subordinate: k} or {role: tag}");
  }
  return b;
}

Json binding_to_json(const ExecutorBinding& b) {
  switch (b.kind) {
    case ExecutorBindingKind::same: return "same";
    case ExecutorBindingKind::unbound: return "unbound";
    case ExecutorBindingKind::parent_target: return "parent_target";
    case ExecutorBindingKind::subordinate: return Json{{"subordinate", b.index}};
    case ExecutorBindingKind::role: return Json{{"role", b.role}};
  }
  return "same";
}

std::string target_binding_name(TargetBindingKind k) {
  switch (k) {
    case TargetBindingKind::same: return "same";
    case TargetBindingKind::none: return "none";
    case TargetBindingKind::parent_executor: return "parent_executor";
  }
  return "same";
}

PointRef point_from(const Node& n) {
  std::string s = n.str();
  auto dot = s.rfind('.');
  if (dot == std::string::npos) n.fail("expected <subtask>.start or <subtask>.end");
  PointRef p;
  p.local_id = s.substr(0, dot);
  std::string which = s.substr(dot + 1);
  if (which == "start") p.point = PointKind::start;
  else if (which == "end") p.point = PointKind::end;
  else n.fail("expected <subtask>.start or <subtask>.end");
  return p;
}

std::string point_name(const PointRef& p) { return p.local_id + (p.point == PointKind::start ? ".start" : ".end"); }

ExpansionMethod method_from(const Node& n, const KbSegment& seg) {
  ExpansionMethod m;
  m.id = n.str("id");
  m.task_type = n.str("task_type");
  m.nation = seg.nation;
  m.segment = seg.segment_id;
  m.priority = static_cast<int>(n.integer_or("priority", 0));
  if (auto g = n.find("guard")) {
    m.guard.intents = sorted_unique(g->strings_or_empty("intents"));
    m.guard.capabilities = sorted_unique(g->strings_or_empty("capabilities"));
    m.guard.nations = sorted_unique(g->strings_or_empty("nations"));
    m.guard.roe_require = sorted_unique(g->strings_or_empty("roe_require"));
    m.guard.roe_forbid = sorted_unique(g->strings_or_empty("roe_forbid"));
    m.guard.target_kinds = sorted_unique(g->strings_or_empty("target_kinds"));
    for (std::size_t i = 0; i < m.guard.target_kinds.size(); ++i) {
      const auto& k = m.guard.target_kinds[i];
      if (k != "unit" && k != "measure" && k != "node" && k != "none")
        g->at("target_kinds").fail("unknown target kind \"" + k + "\"");
    }
  }
  std::set<std::string> locals;
  auto subtasks = n.at("subtasks").items();
  if (subtasks.empty()) n.at("subtasks").fail("a method needs at least one subtask");
  for (const auto& s : subtasks) {
    SubtaskSpec st;
    st.local_id = s.str("id");
    if (st.local_id.find_first_of("/!+.") != std::string::npos) s.at("id").fail("subtask id may not contain '/', '!', '+' or '.'");
    if (!locals.insert(st.local_id).second) s.at("id").fail("duplicate subtask id \"" + st.local_id + "\"");
    st.task_type = s.str("task_type");
    st.intent = s.str_or("intent", "inherit");
    if (s.has("executor")) st.executor = binding_from(s.at("executor"));
    std::string tb = s.str_or("target", "same");
    if (tb == "same") st.target = TargetBindingKind::same;
    else if (tb == "none") st.target = TargetBindingKind::none;
    else if (tb == "parent_executor") st.target = TargetBindingKind::parent_executor;
    else s.at("target").fail("target binding must be same, none or parent_executor");
    m.subtasks.push_back(st);
  }
  if (n.has("relations"))
    for (const auto& r : n.at("relations").items()) {
      MethodRelation rel;
      rel.from = point_from(r.at("from"));
      rel.to = point_from(r.at("to"));
      if (!locals.count(rel.from.local_id)) r.at("from").fail("unknown subtask \"" + rel.from.local_id + "\"");
      if (!locals.count(rel.to.local_id)) r.at("to").fail("unknown subtask \"" + rel.to.local_id + "\"");
      rel.min_offset = r.has("min") ? read_bound(r.at("min").json(), -kUnbounded) : 0;
      rel.max_offset = r.has("max") ? read_bound(r.at("max").json(), kUnbounded) : kUnbounded;
      if (rel.min_offset > rel.max_offset) r.fail("min exceeds max");
      m.relations.push_back(rel);
    }
  return m;
}

Json method_to_json(const ExpansionMethod& m) {
  Json subs = Json::array(), rels = Json::array();
  for (const auto& s : m.subtasks)
    subs.push_back({{"id", s.local_id},
                    {"task_type", s.task_type},
                    {"intent", s.intent},
                    {"executor", binding_to_json(s.executor)},
                    {"target", target_binding_name(s.target)}});
  for (const auto& r : m.relations)
    rels.push_back({{"from", point_name(r.from)},
                    {"to", point_name(r.to)},
                    {"min", write_bound(r.min_offset)},
                    {"max", write_bound(r.max_offset)}});
  return Json{{"id", m.id},
              {"task_type", m.task_type},
              {"nation", m.nation},
              {"priority", m.priority},
              {"guard",
               {{"intents", m.guard.intents},
                {"capabilities", m.guard.capabilities},
                {"nations", m.guard.nations},
                {"roe_require", m.guard.roe_require},
                {"roe_forbid", m.guard.roe_forbid},
                {"target_kinds", m.guard.target_kinds}}},
              {"subtasks", subs},
              {"relations", rels}};
}

ReactionSpec reaction_spec_from(const Node& n) {
  ReactionSpec r;
  r.task_type = n.str("task_type");
  r.intent = n.str_or("intent", "");
  if (auto d = n.find("delay")) {
    r.delay_min = d->has("min") ? read_bound(d->at("min").json(), 0) : 0;
    r.delay_max = d->has("max") ? read_bound(d->at("max").json(), kUnbounded) : kUnbounded;
    if (r.delay_min < 0) d->fail("delay min must be >= 0");
    if (r.delay_min > r.delay_max) d->fail("delay min exceeds max");
  }
  return r;
}

Json reaction_spec_to_json(const ReactionSpec& r) {
  return Json{{"task_type", r.task_type},
              {"intent", r.intent},
              {"delay", {{"min", write_bound(r.delay_min)}, {"max", write_bound(r.delay_max)}}}};
}

ReactionRule reaction_from(const Node& n, const KbSegment& seg) {
  ReactionRule r;
  r.id = n.str("id");
  r.nation = seg.nation;
  r.segment = seg.segment_id;
  r.priority = static_cast<int>(n.integer_or("priority", 0));
  Node t = n.at("trigger");
  r.trigger_task_types = sorted_unique(t.at("task_types").strings());
  std::string side = t.str_or("acting_side", "any");
  if (side == "friendly") r.acting_side = Allegiance::friendly;
  else if (side == "enemy") r.acting_side = Allegiance::enemy;
  else if (side != "any") t.at("acting_side").fail("acting_side must be friendly, enemy or any");
  r.opposing_capability = t.str("opposing_capability");
  r.range_mode = enum_or(t, "range_mode", kRangeMode, RangeMode::euclidean);
  r.reaction = reaction_spec_from(n.at("reaction"));
  if (n.has("counteraction")) r.counteraction = reaction_spec_from(n.at("counteraction"));
  return r;
}

Json reaction_to_json(const ReactionRule& r) {
  Json j{{"id", r.id},
         {"nation", r.nation},
         {"priority", r.priority},
         {"trigger",
          {{"task_types", r.trigger_task_types},
           {"acting_side", r.acting_side ? to_string(*r.acting_side) : "any"},
           {"opposing_capability", r.opposing_capability},
           {"range_mode", to_string(r.range_mode)}}},
         {"reaction", reaction_spec_to_json(r.reaction)}};
  if (r.counteraction) j["counteraction"] = reaction_spec_to_json(*r.counteraction);
  return j;
}

ContactAction contact_action_from(const Node& n) {
  ContactAction a;
  a.local_id = n.str("id");
  a.task_type = n.str("task_type");
  a.intent = n.str_or("intent", "");
  std::string e = n.str_or("executor", "security");
  if (e == "security") a.executor = ContactRole::security;
  else if (e == "main_body") a.executor = ContactRole::main_body;
  else if (e == "follow_on") a.executor = ContactRole::follow_on;
  else n.at("executor").fail("executor must be security, main_body or follow_on");
  std::string tg = n.str_or("target", "enemy");
  if (tg != "enemy" && tg != "none") n.at("target").fail("target must be enemy or none");
  a.target_enemy = tg == "enemy";
  return a;
}

constexpr std::array kDecisions{"bypass", "avoid", "engage", "assist_main_body"};

}  // namespace

class KbBuilder {
 public:
  explicit KbBuilder(KnowledgeBase& kb) : kb_(kb) {}

  void add_segment(const Json& doc, std::size_t index, std::vector<Diagnostic>& diags) {
    Node root(doc, "");
    if (!doc.is_object()) root.fail("KB segment must be a mapping");
    Node header = root.at("segment");
    KbSegment seg;
    seg.segment_id = header.str("segment_id");
    seg.nation = header.str_or("nation", "");
    seg.shadows = header.str_or("shadows", "");
    seg.source = doc;
    std::string where = "segment[" + std::to_string(index) + "] " + seg.segment_id;
    if (!seg.shadows.empty() && seg.shadows != "base") {
      bool known = std::any_of(kb_.segments_.begin(), kb_.segments_.end(),
                               [&](const KbSegment& s) { return s.segment_id == seg.shadows; });
      if (!known)
        diags.push_back({Severity::error, "/segment/shadows", "dangling-reference",
                         where + ": shadows unknown segment \"" + seg.shadows + "\""});
    }
    kb_.segments_.push_back(seg);

    if (auto v = root.find("vocabulary")) {
      append_unique(kb_.intents_, v->strings_or_empty("intents"));
      append_unique(kb_.capabilities_, v->strings_or_empty("capabilities"));
      append_unique(kb_.rows_, v->strings_or_empty("functional_rows"));
    }

    std::set<std::string> local;
    auto dup = [&](const std::string& kind, const std::string& id, const std::string& path) {
      if (!local.insert(kind + ":" + id).second)
        diags.push_back({Severity::error, path, "duplicate-id", where + ": duplicate " + kind + " id \"" + id + "\""});
    };
    if (root.has("templates"))
      for (const auto& n : root.at("templates").items()) {
        auto t = template_from(n, seg);
        dup("template", t.task_type, n.path());
        kb_.templates_[t.task_type][seg.nation] = t;
      }
    if (root.has("methods"))
      for (const auto& n : root.at("methods").items()) {
        auto m = method_from(n, seg);
        dup("method", m.id, n.path());
        kb_.methods_[m.id][seg.nation] = m;
        method_paths_[m.id] = n.path();
      }
    if (root.has("reactions"))
      for (const auto& n : root.at("reactions").items()) {
        auto r = reaction_from(n, seg);
        dup("reaction", r.id, n.path());
        kb_.reactions_[r.id][seg.nation] = r;
      }
    if (auto c = root.find("contact")) {
      for (const char* decision : kDecisions) {
        if (!c->has(decision)) continue;
        std::vector<ContactAction> actions;
        for (const auto& n : c->at(decision).items()) actions.push_back(contact_action_from(n));
        kb_.contact_[decision] = actions;
      }
      for (auto it = c->json().begin(); it != c->json().end(); ++it)
        if (std::find(kDecisions.begin(), kDecisions.end(), it.key()) == kDecisions.end())
          c->fail("unknown contact decision \"" + it.key() + "\"");
    }
  }

  void check_references(std::vector<Diagnostic>& diags) {
    for (const auto& [id, by_nation] : kb_.methods_)
      for (const auto& [nation, m] : by_nation) {
        if (!kb_.find_template(m.task_type, nation))
          diags.push_back({Severity::error, method_paths_[id], "unknown-task-type",
                           "method \"" + id + "\" applies to unknown task type \"" + m.task_type + "\""});
        for (const auto& s : m.subtasks)
          if (!kb_.find_template(s.task_type, nation))
            diags.push_back({Severity::error, method_paths_[id], "unknown-task-type",
                             "method \"" + id + "\" subtask \"" + s.local_id + "\" references unknown task type \"" +
                                 s.task_type + "\""});
      }
    for (const auto& [id, by_nation] : kb_.reactions_)
      for (const auto& [nation, r] : by_nation) {
        for (const auto* spec : {&r.reaction, r.counteraction ? &*r.counteraction : nullptr})
          if (spec && !kb_.find_template(spec->task_type, nation))
            diags.push_back({Severity::error, "/reactions", "unknown-task-type",
                             "reaction \"" + id + "\" references unknown task type \"" + spec->task_type + "\""});
      }
    for (const auto& [decision, actions] : kb_.contact_)
      for (const auto& a : actions)
        if (!kb_.has_task_type(a.task_type))
          diags.push_back({Severity::error, "/contact/" + decision, "unknown-task-type",
                           "contact action \"" + a.local_id + "\" references unknown task type \"" + a.task_type + "\""});
  }

 private:
  KnowledgeBase& kb_;
  std::map<std::string, std::string> method_paths_;
};

KnowledgeBase KnowledgeBase::from_documents(const std::vector<Json>& docs, const std::vector<std::string>& sources) {
  if (docs.empty()) throw Error("no knowledge-base segments given");
  KnowledgeBase kb;
  KbBuilder builder(kb);
  std::vector<Diagnostic> diags;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    try {
      builder.add_segment(docs[i], i, diags);
    } catch (const SchemaError& e) {
      if (i >= sources.size()) throw;
      throw SchemaError(sources[i] + "#" + e.path(), std::string(e.what()).substr(e.path().size() + 2));
    }
  }
  builder.check_references(diags);
  if (has_errors(diags)) throw ValidationError(diags);
  return kb;
}

KnowledgeBase KnowledgeBase::load(const std::vector<std::filesystem::path>& paths) {
  std::vector<Json> docs;
  std::vector<std::string> sources;
  for (const auto& p : paths) {
    docs.push_back(load_document(p));
    sources.push_back(p.string());
  }
  return from_documents(docs, sources);
}

namespace {

template <typename T>
const T* resolve(const std::map<std::string, std::map<std::string, T>>& overlay, const std::string& id,
                 const std::string& nation) {
  auto it = overlay.find(id);
  if (it == overlay.end()) return nullptr;
  if (!nation.empty()) {
    auto n = it->second.find(nation);
    if (n != it->second.end()) return &n->second;
  }
  auto u = it->second.find("");
  return u == it->second.end() ? nullptr : &u->second;
}

}  // namespace

const TaskTemplate* KnowledgeBase::find_template(const std::string& task_type, const std::string& nation) const {
  return resolve(templates_, task_type, nation);
}

const TaskTemplate& KnowledgeBase::task_template(const std::string& task_type, const std::string& nation) const {
  const TaskTemplate* t = find_template(task_type, nation);
  if (!t) throw Error("unknown task type: " + task_type);
  return *t;
}

bool KnowledgeBase::has_task_type(const std::string& task_type) const { return templates_.count(task_type) > 0; }

std::vector<std::string> KnowledgeBase::task_types() const {
  std::vector<std::string> out;
  for (const auto& [id, _] : templates_) out.push_back(id);
  return out;
}

std::vector<const ExpansionMethod*> KnowledgeBase::methods_for(const std::string& task_type,
                                                               const std::string& nation) const {
  std::vector<const ExpansionMethod*> out;
  for (const auto& [id, _] : methods_) {
    const ExpansionMethod* m = resolve(methods_, id, nation);
    if (m && m->task_type == task_type) out.push_back(m);
  }
  std::stable_sort(out.begin(), out.end(), [](const ExpansionMethod* a, const ExpansionMethod* b) {
    if (a->priority != b->priority) return a->priority > b->priority;
    return a->id < b->id;
  });
  return out;
}

std::vector<const ReactionRule*> KnowledgeBase::reaction_rules(const std::string& nation) const {
  std::vector<const ReactionRule*> out;
  for (const auto& [id, _] : reactions_)
    if (const ReactionRule* r = resolve(reactions_, id, nation)) out.push_back(r);
  std::stable_sort(out.begin(), out.end(), [](const ReactionRule* a, const ReactionRule* b) {
    if (a->priority != b->priority) return a->priority > b->priority;
    return a->id < b->id;
  });
  return out;
}

const std::vector<ContactAction>* KnowledgeBase::contact_actions(const std::string& decision) const {
  auto it = contact_.find(decision);
  return it == contact_.end() ? nullptr : &it->second;
}

bool KnowledgeBase::known_intent(const std::string& tag) const { return contains(intents_, tag); }

bool KnowledgeBase::involves_movement(const std::string& task_type, const std::string& nation) const {
  std::set<std::string> seen;
  std::function<bool(const std::string&)> visit = [&](const std::string& type) {
    if (!seen.insert(type).second) return false;
    const TaskTemplate* t = find_template(type, nation);
    if (!t) return false;
    if (t->duration.kind == DurationKind::route) return true;
    for (const auto* m : methods_for(type, nation))
      for (const auto& s : m->subtasks)
        if (s.executor.kind == ExecutorBindingKind::same && visit(s.task_type)) return true;
    return false;
  };
  return visit(task_type);
}

Json KnowledgeBase::to_json() const {
  Json templates = Json::array(), methods = Json::array(), reactions = Json::array(), contact = Json::object();
  for (const auto& [id, by_nation] : templates_)
    for (const auto& [nation, t] : by_nation) templates.push_back(template_to_json(t));
  for (const auto& [id, by_nation] : methods_)
    for (const auto& [nation, m] : by_nation) methods.push_back(method_to_json(m));
  for (const auto& [id, by_nation] : reactions_)
    for (const auto& [nation, r] : by_nation) reactions.push_back(reaction_to_json(r));
  for (const auto& [decision, actions] : contact_) {
    Json list = Json::array();
    for (const auto& a : actions)
      list.push_back({{"id", a.local_id},
                      {"task_type", a.task_type},
                      {"intent", a.intent},
                      {"executor", contact_role_name(a.executor)},
                      {"target", a.target_enemy ? "enemy" : "none"}});
    contact[decision] = list;
  }
  return Json{{"vocabulary",
               {{"intents", string_list(intents_)},
                {"capabilities", string_list(capabilities_)},
                {"functional_rows", string_list(rows_)}}},
              {"templates", templates},
              {"methods", methods},
              {"reactions", reactions},
              {"contact", contact}};
}

bool guard_passes(const Guard& g, const GuardContext& ctx) {
  if (!g.intents.empty() && !contains(g.intents, ctx.intent.tag)) return false;
  if (!g.target_kinds.empty() && !contains(g.target_kinds, ctx.target_kind)) return false;
  const Unit* u = ctx.executor;
  if (!u) return g.capabilities.empty() && g.nations.empty() && g.roe_require.empty();
  for (const auto& c : g.capabilities)
    if (!u->has_capability(c)) return false;
  if (!g.nations.empty() && !contains(g.nations, u->nation)) return false;
  for (const auto& r : g.roe_require)
    if (!u->has_roe(r)) return false;
  for (const auto& r : g.roe_forbid)
    if (u->has_roe(r)) return false;
  return true;
}

std::vector<const ExpansionMethod*> applicable_methods(const KnowledgeBase& kb, const std::string& task_type,
                                                       const GuardContext& ctx) {
  std::string nation = ctx.executor ? ctx.executor->nation : "";
  if (!kb.find_template(task_type, nation)) throw Error("unknown task type: " + task_type);
  std::vector<const ExpansionMethod*> out;
  for (const auto* m : kb.methods_for(task_type, nation))
    if (guard_passes(m->guard, ctx)) out.push_back(m);
  return out;
}

std::vector<Diagnostic> lint_kb(const KnowledgeBase& kb) {
  std::vector<Diagnostic> out;
  Json merged = kb.to_json();

  // Capability vocabulary: declared tags plus every template requirement.
  std::set<std::string> caps(kb.capability_vocabulary().begin(), kb.capability_vocabulary().end());
  for (const auto& t : merged["templates"])
    for (const auto& c : t["required_capabilities"]) caps.insert(c.get<std::string>());

  // Decomposition graph over task types. Subordinate bindings strictly
  // descend the (finite, acyclic) command tree, so cycles through them end.
  std::map<std::string, std::set<std::string>> graph;
  std::map<std::pair<std::string, std::string>, std::string> edge_method;
  for (std::size_t i = 0; i < merged["methods"].size(); ++i) {
    const auto& m = merged["methods"][i];
    std::string id = m["id"], type = m["task_type"];
    std::string path = "/methods/" + std::to_string(i);
    for (const auto& c : m["guard"]["capabilities"])
      if (!caps.count(c.get<std::string>()))
        out.push_back({Severity::warning, path + "/guard/capabilities", "unreachable-method",
                       "unreachable method \"" + id + "\": capability \"" + c.get<std::string>() +
                           "\" is never declared"});
    for (const auto& in : m["guard"]["intents"])
      if (!kb.known_intent(in.get<std::string>()))
        out.push_back({Severity::warning, path + "/guard/intents", "unreachable-method",
                       "unreachable method \"" + id + "\": intent \"" + in.get<std::string>() +
                           "\" is not in the vocabulary"});
    for (const auto& s : m["subtasks"]) {
      if (s["executor"].is_object() && s["executor"].contains("subordinate")) continue;
      graph[type].insert(s["task_type"].get<std::string>());
      edge_method.emplace(std::pair{type, s["task_type"].get<std::string>()}, id);
    }
  }

  // Tarjan SCC over the non-descending edges.
  std::map<std::string, int> index, low;
  std::vector<std::string> stack;
  std::set<std::string> on_stack;
  int counter = 0;
  std::vector<std::vector<std::string>> cycles;
  std::function<void(const std::string&)> strong = [&](const std::string& v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack.insert(v);
    for (const auto& w : graph[v]) {
      if (!index.count(w)) {
        strong(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack.count(w)) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::vector<std::string> comp;
      std::string w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack.erase(w);
        comp.push_back(w);
      } while (w != v);
      if (comp.size() > 1 || graph[v].count(v)) {
        std::sort(comp.begin(), comp.end());
        cycles.push_back(comp);
      }
    }
  };
  std::vector<std::string> roots;
  for (const auto& [v, _] : graph) roots.push_back(v);
  for (const auto& v : roots)
    if (!index.count(v)) strong(v);
  std::sort(cycles.begin(), cycles.end());
  for (const auto& comp : cycles) {
    std::string names, methods;
    std::set<std::string> ms;
    for (const auto& a : comp)
      for (const auto& b : comp)
        if (auto it = edge_method.find({a, b}); it != edge_method.end()) ms.insert(it->second);
    for (const auto& n : comp) names += (names.empty() ? "" : " -> ") + n;
    for (const auto& m : ms) methods += (methods.empty() ? "" : ", ") + m;
    out.push_back({Severity::error, "/methods", "potential-infinite-expansion",
                   "potential infinite expansion: " + names + " (methods " + methods +
                       ") with no subordinate binding"});
  }

  for (std::size_t i = 0; i < merged["templates"].size(); ++i) {
    const auto& t = merged["templates"][i];
    std::string row = t["functional_row"];
    if (!contains(kb.functional_rows(), row))
      out.push_back({Severity::error, "/templates/" + std::to_string(i) + "/functional_row", "dangling-functional-row",
                     "task type \"" + t["task_type"].get<std::string>() + "\" uses undeclared functional row \"" + row + "\""});
    for (const auto& in : t["intents"])
      if (!kb.known_intent(in.get<std::string>()))
        out.push_back({Severity::warning, "/templates/" + std::to_string(i) + "/intents", "unknown-intent",
                       "task type \"" + t["task_type"].get<std::string>() + "\" lists unknown intent \"" +
                           in.get<std::string>() + "\""});
  }
  return out;
}

std::string kb_digest(const KnowledgeBase& kb) { return json_digest(kb.to_json()); }

}  // namespace coaplan

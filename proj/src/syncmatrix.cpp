#include "coaplan/syncmatrix.hpp"

#include <algorithm>
#include <cstdlib>

#include "coaplan/digest.hpp"

namespace coaplan {

// ---- matrix --------------------------------------------------------------

std::string period_label(Minutes t) {
  Minutes a = std::llabs(t);
  char buf[48];
  std::snprintf(buf, sizeof buf, "H%c%lld:%02lld", t < 0 ? '-' : '+', static_cast<long long>(a / 60),
                static_cast<long long>(a % 60));
  return buf;
}

SyncMatrix build_matrix(const Plan& plan, Minutes period) {
  if (period <= 0) throw Error("matrix period must be > 0");
  SyncMatrix m;
  m.period = period;
  Minutes h = plan.horizon();
  Minutes n = std::max<Minutes>(1, (h + period - 1) / period);
  for (Minutes i = 0; i < n; ++i) m.columns.push_back({i * period, (i + 1) * period, period_label(i * period)});

  auto leaves = plan.leaves();
  std::vector<std::string> present;
  for (const Activity* a : leaves) present.push_back(a->functional_row);
  std::sort(present.begin(), present.end());
  present.erase(std::unique(present.begin(), present.end()), present.end());
  for (const auto& r : plan.row_order)
    if (std::binary_search(present.begin(), present.end(), r)) m.rows.push_back(r);
  for (const auto& r : present)
    if (std::find(m.rows.begin(), m.rows.end(), r) == m.rows.end()) m.rows.push_back(r);

  std::sort(leaves.begin(), leaves.end(), [](const Activity* l, const Activity* r) {
    return std::tie(l->start, l->id) < std::tie(r->start, r->id);
  });
  m.cells.assign(m.rows.size(), std::vector<std::vector<MatrixCell>>(m.columns.size()));
  for (const Activity* a : leaves) {
    auto row = static_cast<std::size_t>(std::find(m.rows.begin(), m.rows.end(), a->functional_row) - m.rows.begin());
    MatrixCell cell{a->id, a->executor,
                    a->task_type + (a->executor.empty() ? "" : " (" + a->executor + ")") +
                        (a->questionable() ? " [?]" : ""),
                    a->questionable()};
    Minutes first = std::min(n - 1, std::max<Minutes>(0, a->start) / period);
    Minutes last = a->end > a->start ? std::min(n - 1, (a->end - 1) / period) : first;
    for (Minutes c = first; c <= last; ++c) m.cells[row][static_cast<std::size_t>(c)].push_back(cell);
  }
  return m;
}

Json matrix_to_json(const SyncMatrix& m) {
  Json cols = Json::array();
  for (const auto& c : m.columns) cols.push_back({{"start", c.start}, {"end", c.end}, {"label", c.label}});
  Json cells = Json::array();
  for (const auto& row : m.cells) {
    Json r = Json::array();
    for (const auto& col : row) {
      Json cs = Json::array();
      for (const auto& c : col)
        cs.push_back({{"activity", c.activity}, {"unit", c.unit}, {"label", c.label}, {"questionable", c.questionable}});
      r.push_back(cs);
    }
    cells.push_back(r);
  }
  return {{"period", m.period}, {"rows", m.rows}, {"columns", cols}, {"cells", cells}};
}

namespace {

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

}  // namespace

std::string matrix_csv(const SyncMatrix& m) {
  std::string out = quote("row");
  for (const auto& c : m.columns) out += "," + quote(c.label);
  out += "\n";
  for (std::size_t r = 0; r < m.rows.size(); ++r) {
    out += quote(m.rows[r]);
    for (const auto& col : m.cells[r]) {
      std::string joined;
      for (const auto& c : col) joined += (joined.empty() ? "" : "; ") + c.label;
      out += "," + quote(joined);
    }
    out += "\n";
  }
  return out;
}

// ---- canonical document --------------------------------------------------

namespace {

constexpr const char* kKind = "coaplan-plan";

Json route_to_json(const Route& r) {
  return {{"nodes", r.nodes},
          {"total_length", r.total_length},
          {"hours", r.hours},
          {"duration", r.duration},
          {"effective_speed", r.effective_speed}};
}

Route route_from_json(const Node& n) {
  Route r;
  r.nodes = n.strings_or_empty("nodes");
  r.total_length = n.number("total_length");
  r.hours = n.number("hours");
  r.duration = n.at("duration").minutes();
  r.effective_speed = n.number("effective_speed");
  return r;
}

Json window_json(const TemporalNetwork& stn, TimePointId p) {
  return Json::array({write_bound(stn.earliest(p)), write_bound(stn.latest(p))});
}

Json activity_to_json(const Activity& a, const TemporalNetwork& stn) {
  Json j{{"id", a.id},
         {"task_type", a.task_type},
         {"intent", a.intent},
         {"executor", a.executor},
         {"target", a.target},
         {"parent", a.parent},
         {"children", a.children},
         {"depth", a.depth},
         {"side", to_string(a.side)},
         {"provenance", to_string(a.provenance)},
         {"rule", a.rule},
         {"trigger", a.trigger},
         {"functional_row", a.functional_row},
         {"start_point", a.start_point},
         {"end_point", a.end_point},
         {"leaf", a.leaf},
         {"exclusive", a.exclusive},
         {"start", a.start},
         {"end", a.end},
         {"duration", a.duration},
         {"origin_node", a.origin_node},
         {"site", a.site},
         {"destination", a.destination},
         {"route", a.route ? route_to_json(*a.route) : Json(nullptr)},
         {"start_anchor", a.start_anchor},
         {"end_anchor", a.end_anchor},
         {"flags", a.flags},
         {"start_window", window_json(stn, a.start_point)},
         {"end_window", window_json(stn, a.end_point)}};
  return j;
}

template <typename E, std::size_t N>
E enum_from(const Node& n, const E (&values)[N]) {
  std::string s = n.str();
  for (E v : values)
    if (to_string(v) == s) return v;
  n.fail("unknown value \"" + s + "\"");
}

Activity activity_from_json(const Node& n) {
  static const Allegiance sides[] = {Allegiance::friendly, Allegiance::enemy};
  static const ProvenanceKind provs[] = {ProvenanceKind::user_goal, ProvenanceKind::expansion,
                                         ProvenanceKind::reaction, ProvenanceKind::counteraction};
  Activity a;
  a.id = n.str("id");
  a.task_type = n.str("task_type");
  a.intent = n.str("intent");
  a.executor = n.str("executor");
  a.target = n.str("target");
  a.parent = n.str("parent");
  a.children = n.strings_or_empty("children");
  a.depth = static_cast<int>(n.integer("depth"));
  a.side = enum_from(n.at("side"), sides);
  a.provenance = enum_from(n.at("provenance"), provs);
  a.rule = n.str("rule");
  a.trigger = n.str("trigger");
  a.functional_row = n.str("functional_row");
  a.start_point = static_cast<TimePointId>(n.integer("start_point"));
  a.end_point = static_cast<TimePointId>(n.integer("end_point"));
  a.leaf = n.at("leaf").boolean();
  a.exclusive = n.at("exclusive").boolean();
  a.start = n.at("start").minutes();
  a.end = n.at("end").minutes();
  a.duration = n.at("duration").minutes();
  a.origin_node = n.str("origin_node");
  a.site = n.str("site");
  a.destination = n.str("destination");
  if (n.has("route")) a.route = route_from_json(n.at("route"));
  a.start_anchor = n.str("start_anchor");
  a.end_anchor = n.str("end_anchor");
  a.flags = n.strings_or_empty("flags");
  return a;
}

Json flag_to_json(const Flag& f) {
  return {{"id", f.id},
          {"kind", to_string(f.kind)},
          {"activities", f.activities},
          {"message", f.message},
          {"remedy", f.remedy ? edit_to_json(*f.remedy) : Json(nullptr)},
          {"accepted", f.accepted}};
}

}  // namespace

Json export_plan_json(const Plan& plan) {
  Json doc;
  doc["schema_version"] = kPlanSchemaVersion;
  doc["kind"] = kKind;
  doc["scenario_digest"] = plan.scenario_digest;
  doc["kb_digest"] = plan.kb_digest;
  doc["config"] = config_to_json(plan.config);
  if (plan.wargame) doc["wargame"] = true;
  doc["roots"] = plan.roots;
  doc["row_order"] = plan.row_order;

  Json acts = Json::array();
  for (const auto& [id, a] : plan.activities) acts.push_back(activity_to_json(a, plan.stn));
  doc["activities"] = acts;

  Json points = Json::array();
  for (std::size_t i = 0; i < plan.stn.point_count(); ++i) points.push_back(plan.stn.label(static_cast<TimePointId>(i)));
  Json cons = Json::array();
  for (std::size_t i = 0; i < plan.stn.constraint_count(); ++i) {
    const auto& c = plan.stn.constraint(static_cast<ConstraintId>(i));
    cons.push_back({{"from", c.from},
                    {"to", c.to},
                    {"min", write_bound(c.min_offset)},
                    {"max", write_bound(c.max_offset)},
                    {"origin", to_string(c.origin)},
                    {"active", plan.stn.active(static_cast<ConstraintId>(i))}});
  }
  doc["stn"] = {{"points", points}, {"constraints", cons}};

  Json cals = Json::object();
  for (const auto& [unit, entries] : plan.calendars) {
    Json es = Json::array();
    for (const auto& e : entries)
      es.push_back({{"activity", e.activity},
                    {"start", e.start},
                    {"end", e.end},
                    {"exclusive", e.exclusive},
                    {"blocking", e.blocking}});
    cals[unit] = es;
  }
  doc["calendars"] = cals;

  Json flags = Json::array();
  for (const auto& f : plan.flags) flags.push_back(flag_to_json(f));
  doc["flags"] = flags;

  Json att = Json::array();
  for (const auto& e : plan.attrition)
    att.push_back({{"source", e.source},
                   {"unit", e.unit},
                   {"power_before", e.power_before},
                   {"power_after", e.power_after},
                   {"casualty_fraction", e.casualty_fraction},
                   {"clamped", e.clamped}});
  doc["attrition"] = att;

  Json con = Json::array();
  for (const auto& e : plan.consumption)
    con.push_back({{"activity", e.activity},
                   {"unit", e.unit},
                   {"resource", e.resource},
                   {"amount", e.amount},
                   {"level_after", e.level_after}});
  doc["consumption"] = con;

  Json eng = Json::array();
  for (const auto& e : plan.engagements)
    eng.push_back({{"id", e.id},
                   {"node", e.node},
                   {"attacker_activity", e.attacker_activity},
                   {"defender_activity", e.defender_activity},
                   {"attacker", e.attacker},
                   {"defender", e.defender},
                   {"start", e.start},
                   {"end", e.end},
                   {"resolved_by_activity", e.resolved_by_activity},
                   {"outcome", e.outcome},
                   {"attacker_casualty_fraction", e.attacker_casualty_fraction},
                   {"defender_casualty_fraction", e.defender_casualty_fraction}});
  doc["engagements"] = eng;

  Json ev = Json::array();
  for (const auto& e : plan.events)
    ev.push_back({{"seq", e.seq}, {"kind", e.kind}, {"activity", e.activity}, {"detail", e.detail}});
  doc["events"] = ev;

  Json edits = Json::array();
  for (const auto& e : plan.edits) edits.push_back(edit_to_json(e));
  doc["edits"] = edits;

  doc["final_power"] = plan.final_power;
  doc["final_supply"] = plan.final_supply;
  doc["plan_digest"] = plan.digest;
  return doc;
}

std::string compute_plan_digest(const Plan& plan) {
  Json doc = export_plan_json(plan);
  doc.erase("plan_digest");
  return json_digest(doc);
}

std::string export_plan(const Plan& plan, ExportFormat format, Minutes period) {
  if (format == ExportFormat::matrix_csv)
    return matrix_csv(build_matrix(plan, period > 0 ? period : plan.config.period_length));
  return emit_canonical(export_plan_json(plan));
}

Plan import_plan(std::string_view text) { return import_plan_json(parse_document(text, "<plan>")); }

Plan import_plan_json(const Json& doc) {
  Node root(doc, "");
  if (!doc.is_object()) root.fail("plan document must be a mapping");
  if (root.str_or("kind", "") != kKind) root.fail("not a plan document");
  if (root.integer_or("schema_version", -1) != kPlanSchemaVersion)
    root.at("schema_version").fail("unsupported schema_version");

  Plan p;
  p.scenario_digest = root.str("scenario_digest");
  p.kb_digest = root.str("kb_digest");
  p.config = config_from_json(root.at("config").json());
  p.wargame = root.boolean_or("wargame", false);
  p.roots = root.strings_or_empty("roots");
  p.row_order = root.strings_or_empty("row_order");
  for (const auto& n : root.at("activities").items()) {
    Activity a = activity_from_json(n);
    std::string id = a.id;
    if (!p.activities.emplace(id, std::move(a)).second) n.at("id").fail("duplicate activity id");
  }

  static const ConstraintOrigin origins[] = {ConstraintOrigin::duration, ConstraintOrigin::vertical,
                                             ConstraintOrigin::method,   ConstraintOrigin::user,
                                             ConstraintOrigin::adversarial, ConstraintOrigin::commitment,
                                             ConstraintOrigin::external};
  Node stn = root.at("stn");
  std::vector<std::string> labels = stn.strings_or_empty("points");
  std::vector<TemporalConstraint> cons;
  std::vector<bool> active;
  for (const auto& c : stn.at("constraints").items()) {
    TemporalConstraint tc;
    tc.from = static_cast<TimePointId>(c.integer("from"));
    tc.to = static_cast<TimePointId>(c.integer("to"));
    tc.min_offset = read_bound(c.at("min").json(), -kUnbounded);
    tc.max_offset = read_bound(c.at("max").json(), kUnbounded);
    tc.origin = enum_from(c.at("origin"), origins);
    cons.push_back(tc);
    active.push_back(c.at("active").boolean());
  }
  try {
    p.stn = TemporalNetwork::restore(std::move(labels), std::move(cons), std::move(active));
  } catch (const Error& e) {
    stn.fail(e.what());
  }

  if (auto cals = root.find("calendars"); cals && cals->json().is_object()) {
    for (auto it = cals->json().begin(); it != cals->json().end(); ++it) {
      Node entries(it.value(), json_pointer_append(cals->path(), it.key()));
      auto& out = p.calendars[it.key()];
      for (const auto& e : entries.items())
        out.push_back({e.str("activity"), e.at("start").minutes(), e.at("end").minutes(), e.at("exclusive").boolean(),
                       e.at("blocking").boolean()});
    }
  }
  for (const auto& f : root.at("flags").items()) {
    Flag fl;
    fl.id = f.str("id");
    fl.kind = flag_kind_from_string(f.str("kind"));
    fl.activities = f.strings_or_empty("activities");
    fl.message = f.str("message");
    if (f.has("remedy")) fl.remedy = edit_from_json(f.at("remedy").json());
    fl.accepted = f.at("accepted").boolean();
    p.flags.push_back(std::move(fl));
  }
  for (const auto& e : root.at("attrition").items())
    p.attrition.push_back({e.str("source"), e.str("unit"), e.number("power_before"), e.number("power_after"),
                           e.number("casualty_fraction"), e.at("clamped").boolean()});
  for (const auto& e : root.at("consumption").items())
    p.consumption.push_back(
        {e.str("activity"), e.str("unit"), e.str("resource"), e.number("amount"), e.number("level_after")});
  for (const auto& e : root.at("engagements").items()) {
    Engagement g;
    g.id = e.str("id");
    g.node = e.str("node");
    g.attacker_activity = e.str("attacker_activity");
    g.defender_activity = e.str("defender_activity");
    g.attacker = e.str("attacker");
    g.defender = e.str("defender");
    g.start = e.at("start").minutes();
    g.end = e.at("end").minutes();
    g.resolved_by_activity = e.at("resolved_by_activity").boolean();
    g.outcome = e.str("outcome");
    g.attacker_casualty_fraction = e.number("attacker_casualty_fraction");
    g.defender_casualty_fraction = e.number("defender_casualty_fraction");
    p.engagements.push_back(std::move(g));
  }
  for (const auto& e : root.at("events").items())
    p.events.push_back({static_cast<int>(e.integer("seq")), e.str("kind"), e.str("activity"), e.str("detail")});
  for (const auto& e : root.at("edits").items()) p.edits.push_back(edit_from_json(e.json()));
  for (const char* key : {"final_power", "final_supply"}) {
    auto& out = std::string(key) == "final_power" ? p.final_power : p.final_supply;
    const Json& m = root.at(key).json();
    if (!m.is_object()) root.at(key).fail("must be a mapping");
    for (auto it = m.begin(); it != m.end(); ++it) out[it.key()] = it.value().get<double>();
  }
  p.digest = root.str("plan_digest");
  if (compute_plan_digest(p) != p.digest) throw Error("plan digest does not match the document content");
  return p;
}

}  // namespace coaplan

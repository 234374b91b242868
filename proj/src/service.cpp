#include "coaplan/service.hpp"

#include <chrono>
#include <regex>

#include <httplib.h>

#include "coaplan/digest.hpp"
#include "coaplan/engine.hpp"
#include "coaplan/syncmatrix.hpp"

namespace coaplan {

std::string to_string(JobState s) {
  switch (s) {
    case JobState::queued: return "queued";
    case JobState::running: return "running";
    case JobState::done: return "done";
    case JobState::failed: return "failed";
  }
  return "queued";
}

namespace {

using Clock = std::chrono::steady_clock;

double now_ms() { return std::chrono::duration<double, std::milli>(Clock::now().time_since_epoch()).count(); }

HttpResponse json_response(int status, const Json& body) { return {status, "application/json", body.dump(2) + "\n"}; }

HttpResponse error_response(int status, const std::string& message, Json diagnostics = Json::array()) {
  Json body{{"error", message}};
  if (!diagnostics.empty()) body["diagnostics"] = diagnostics;
  return json_response(status, body);
}

Json diagnostics_json(const std::vector<Diagnostic>& diags) {
  Json out = Json::array();
  for (const auto& d : diags)
    out.push_back({{"severity", to_string(d.severity)}, {"path", d.path}, {"code", d.code}, {"message", d.message}});
  return out;
}

Json job_json(const JobRecord& j) {
  Json out{{"id", j.id},
           {"state", to_string(j.state)},
           {"mode", j.mode},
           {"scenario", j.scenario},
           {"kbs", j.kbs},
           {"scenario_digest", j.scenario_digest},
           {"kb_digest", j.kb_digest},
           {"config", j.config},
           {"timings", {{"queued_ms", j.queued_ms}, {"run_ms", j.run_ms}}}};
  if (!j.parent_plan.empty()) out["parent_plan"] = j.parent_plan;
  if (j.state == JobState::done) out["plan"] = j.plan;
  if (j.state == JobState::failed) {
    out["error"] = j.error;
    out["status"] = j.error_status;
    if (!j.diagnostics.empty()) out["diagnostics"] = j.diagnostics;
  }
  return out;
}

std::string next_id(const char* prefix, int& counter) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s-%06d", prefix, counter++);
  return buf;
}

// Turn any exception from parsing or validation into a 422 body.
std::optional<HttpResponse> as_unprocessable(const std::exception_ptr& ep) {
  try {
    std::rethrow_exception(ep);
  } catch (const ValidationError& e) {
    return error_response(422, "validation failed", diagnostics_json(e.diagnostics()));
  } catch (const ParseError& e) {
    return error_response(422, std::string("parse error at offset ") + std::to_string(e.offset()) + ": " + e.what());
  } catch (const SchemaError& e) {
    return error_response(422, e.what());
  } catch (const EditError& e) {
    return error_response(422, e.what());
  } catch (const Json::exception& e) {
    return error_response(422, e.what());
  } catch (...) {
    return std::nullopt;
  }
}

}  // namespace

Service::Service() : worker_([this] { worker(); }) {}

Service::~Service() {
  stop();
  {
    std::lock_guard lock(mu_);
    shutdown_ = true;
  }
  cv_.notify_all();
  worker_.join();
}

// ---- routing -------------------------------------------------------------

HttpResponse Service::handle(const std::string& method, const std::string& path,
                             const std::map<std::string, std::string>& query, const std::string& body) {
  static const std::regex job_re(R"(^/jobs/([^/]+)$)");
  static const std::regex plan_re(R"(^/plans/([^/]+)(?:/(matrix|flags|utilization|events|edits|meta))?$)");
  std::smatch m;
  try {
    if (method == "POST" && path == "/scenarios") return post_scenario(body);
    if (method == "POST" && path == "/kbs") return post_kb(body);
    if (method == "POST" && path == "/jobs") return post_job(body);
    if (std::regex_match(path, m, job_re)) {
      if (method != "GET") return error_response(405, "method not allowed");
      return get_job(m[1]);
    }
    if (std::regex_match(path, m, plan_re)) {
      std::string view = m[2];
      if (view == "edits") {
        if (method != "POST") return error_response(405, "method not allowed");
        return post_edits(m[1], body);
      }
      if (method != "GET") return error_response(405, "method not allowed");
      return get_plan(m[1], view, query);
    }
    return error_response(404, "no route for " + method + " " + path);
  } catch (...) {
    if (auto r = as_unprocessable(std::current_exception())) return *r;
    try {
      throw;
    } catch (const std::exception& e) {
      return error_response(500, e.what());
    }
  }
}

HttpResponse Service::post_scenario(const std::string& body) {
  Scenario s = parse_scenario(body, "<upload>");
  auto diags = validate_scenario(s);
  if (has_errors(diags)) return error_response(422, "scenario is invalid", diagnostics_json(diags));
  std::string digest = scenario_digest(s);
  std::lock_guard lock(mu_);
  scenarios_.try_emplace(digest, std::move(s), body);
  return json_response(201, {{"id", digest}, {"digest", digest}, {"diagnostics", diagnostics_json(diags)}});
}

HttpResponse Service::post_kb(const std::string& body) {
  Json doc = parse_document(body, "<upload>");
  Node root(doc, "");
  if (!doc.is_object() || !doc.contains("segment")) root.fail("KB segment must be a mapping with a segment header");
  Node header = root.at("segment");
  std::string seg = header.str("segment_id");
  std::string digest = json_digest(doc);
  std::lock_guard lock(mu_);
  kbs_.try_emplace(digest, doc);
  return json_response(201, {{"id", digest}, {"segment_id", seg}, {"nation", header.str_or("nation", "")}});
}

HttpResponse Service::post_job(const std::string& body) {
  Json req = parse_document(body, "<request>");
  Node n(req, "");
  if (!req.is_object()) n.fail("job request must be a mapping");
  JobRecord job;
  job.mode = n.str_or("mode", "plan");
  if (job.mode != "plan" && job.mode != "wargame") n.at("mode").fail("mode must be plan or wargame");
  job.scenario = n.str("scenario");
  job.kbs = n.at("kbs").strings();
  if (job.kbs.empty()) n.at("kbs").fail("at least one KB segment is required");
  job.config = req.contains("config") && !req["config"].is_null() ? req["config"] : Json::object();
  config_from_json(job.config);  // reject a bad config before queueing
  {
    std::lock_guard lock(mu_);
    if (!scenarios_.count(job.scenario)) return error_response(404, "unknown scenario \"" + job.scenario + "\"");
    for (const auto& k : job.kbs)
      if (!kbs_.count(k)) return error_response(404, "unknown KB segment \"" + k + "\"");
  }
  std::string id = enqueue(std::move(job));
  return json_response(202, {{"job", id}});
}

HttpResponse Service::post_edits(const std::string& plan_id, const std::string& body) {
  StoredPlan base;
  {
    std::lock_guard lock(mu_);
    auto it = plans_.find(plan_id);
    if (it == plans_.end()) return error_response(404, "unknown plan \"" + plan_id + "\"");
    base = it->second;
  }
  Json req = parse_document(body, "<request>");
  Json list = req;
  if (req.is_object()) {
    Node n(req, "");
    if (auto d = n.find("expected_digest"); d && d->str() != base.plan->digest)
      return error_response(409, "plan " + plan_id + " has digest " + base.plan->digest + ", not " + d->str());
    list = req.contains("edits") ? req["edits"] : Json::array();
  }
  if (!list.is_array()) Node(req, "").fail("expected a list of edit commands");
  std::vector<EditCommand> edits;
  for (const auto& e : list) edits.push_back(edit_from_json(e));

  Scenario s;
  std::vector<Json> docs;
  {
    std::lock_guard lock(mu_);
    s = scenarios_.at(base.scenario).first;
    for (const auto& k : base.kbs) docs.push_back(kbs_.at(k));
  }
  KnowledgeBase kb = KnowledgeBase::from_documents(docs);
  JobRecord job;
  job.mode = "replan";
  job.scenario = base.scenario;
  job.kbs = base.kbs;
  job.config = config_to_json(base.plan->config);
  job.parent_plan = plan_id;
  job.edits = validate_edits(*base.plan, s, kb, edits);
  std::string id = enqueue(std::move(job));
  return json_response(202, {{"job", id}, {"parent_plan", plan_id}});
}

HttpResponse Service::get_job(const std::string& id) {
  std::lock_guard lock(mu_);
  auto it = jobs_.find(id);
  if (it == jobs_.end()) return error_response(404, "unknown job \"" + id + "\"");
  return json_response(200, job_json(it->second));
}

HttpResponse Service::get_plan(const std::string& id, const std::string& view,
                               const std::map<std::string, std::string>& q) {
  StoredPlan sp;
  Scenario s;
  {
    std::lock_guard lock(mu_);
    auto it = plans_.find(id);
    if (it == plans_.end()) return error_response(404, "unknown plan \"" + id + "\"");
    sp = it->second;
    if (view == "utilization") s = scenarios_.at(sp.scenario).first;
  }
  const Plan& p = *sp.plan;
  if (view.empty()) return {200, "application/json", sp.canonical};
  if (view == "meta")
    return json_response(200, {{"id", sp.id},
                               {"parent", sp.parent},
                               {"job", sp.job},
                               {"scenario", sp.scenario},
                               {"kbs", sp.kbs},
                               {"digest", p.digest}});
  if (view == "matrix") {
    Minutes period = p.config.period_length;
    if (auto it = q.find("period"); it != q.end()) {
      try {
        std::size_t used = 0;
        period = std::stoll(it->second, &used);
        if (used != it->second.size()) throw std::invalid_argument("period");
      } catch (const std::exception&) {
        return error_response(422, "period must be a positive integer");
      }
      if (period <= 0) return error_response(422, "period must be a positive integer");
    }
    std::string format = q.count("format") ? q.at("format") : "csv";
    SyncMatrix mx = build_matrix(p, period);
    if (format == "csv") return {200, "text/csv", matrix_csv(mx)};
    if (format == "json") return json_response(200, matrix_to_json(mx));
    return error_response(422, "format must be csv or json");
  }
  Json doc = export_plan_json(p);
  if (view == "flags") return json_response(200, doc["flags"]);
  if (view == "events") return json_response(200, doc["events"]);
  Json rows = Json::array();
  for (const auto& u : utilization_report(p, s))
    rows.push_back({{"unit", u.unit},
                    {"committed", u.committed},
                    {"idle", u.idle},
                    {"horizon", u.horizon},
                    {"fraction", u.fraction}});
  return json_response(200, rows);
}

// ---- jobs ----------------------------------------------------------------

std::string Service::enqueue(JobRecord job) {
  std::lock_guard lock(mu_);
  job.id = next_id("job", next_job_);
  job.queued_ms = now_ms();  // enqueue stamp until the job starts
  std::string id = job.id;
  jobs_[id] = std::move(job);
  queue_.push_back(id);
  cv_.notify_all();
  return id;
}

void Service::worker() {
  for (;;) {
    JobRecord job;
    {
      std::unique_lock lock(mu_);
      cv_.wait(lock, [&] { return shutdown_ || !queue_.empty(); });
      if (shutdown_) return;
      std::string id = queue_.front();
      queue_.pop_front();
      auto& rec = jobs_.at(id);
      rec.state = JobState::running;
      job = rec;
    }
    run(job);
    {
      std::lock_guard lock(mu_);
      jobs_[job.id] = job;
    }
    cv_.notify_all();
  }
}

void Service::run(JobRecord& job) {
  auto t0 = Clock::now();
  job.queued_ms = now_ms() - job.queued_ms;
  try {
    Scenario s;
    std::vector<Json> docs;
    std::shared_ptr<const Plan> parent;
    {
      std::lock_guard lock(mu_);
      s = scenarios_.at(job.scenario).first;
      for (const auto& k : job.kbs) docs.push_back(kbs_.at(k));
      if (!job.parent_plan.empty()) parent = plans_.at(job.parent_plan).plan;
    }
    KnowledgeBase kb = KnowledgeBase::from_documents(docs);
    PlanConfig config = config_from_json(job.config);
    job.scenario_digest = scenario_digest(s);
    job.kb_digest = kb_digest(kb);
    Plan result;
    if (job.mode == "wargame") {
      result = wargame(s, kb, config);
    } else if (job.mode == "replan") {
      std::vector<EditCommand> all = parent->edits;
      all.insert(all.end(), job.edits.begin(), job.edits.end());
      result = parent->wargame ? wargame(s, kb, parent->config, all) : plan(s, kb, parent->config, all);
    } else {
      result = plan(s, kb, config);
    }
    StoredPlan sp;
    sp.parent = job.parent_plan;
    sp.job = job.id;
    sp.scenario = job.scenario;
    sp.kbs = job.kbs;
    sp.canonical = export_plan(result);
    sp.plan = std::make_shared<const Plan>(std::move(result));
    {
      std::lock_guard lock(mu_);
      sp.id = next_id("plan", next_plan_);
      job.plan = sp.id;
      plans_[sp.id] = std::move(sp);
    }
    job.state = JobState::done;
  } catch (const ValidationError& e) {
    job.state = JobState::failed;
    job.error_status = 422;
    job.error = "validation failed";
    job.diagnostics = diagnostics_json(e.diagnostics());
  } catch (const EditError& e) {
    job.state = JobState::failed;
    job.error_status = 422;
    job.error = e.what();
  } catch (const SchemaError& e) {
    job.state = JobState::failed;
    job.error_status = 422;
    job.error = e.what();
  } catch (const std::exception& e) {
    job.state = JobState::failed;
    job.error_status = 500;
    job.error = e.what();
  }
  job.run_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

JobRecord Service::wait(const std::string& job_id) {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] {
    auto it = jobs_.find(job_id);
    return it == jobs_.end() || it->second.state == JobState::done || it->second.state == JobState::failed;
  });
  auto it = jobs_.find(job_id);
  if (it == jobs_.end()) throw Error("unknown job \"" + job_id + "\"");
  return it->second;
}

std::optional<JobRecord> Service::job(const std::string& id) const {
  std::lock_guard lock(mu_);
  auto it = jobs_.find(id);
  if (it == jobs_.end()) return std::nullopt;
  return it->second;
}

// ---- HTTP ----------------------------------------------------------------

bool Service::serve(const std::string& host, int port) {
  httplib::Server server;
  auto route = [this](const httplib::Request& req, httplib::Response& res) {
    std::map<std::string, std::string> query(req.params.begin(), req.params.end());
    HttpResponse r = handle(req.method, req.path, query, req.body);
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  };
  server.Get(R"(/.*)", route);
  server.Post(R"(/.*)", route);
  server.Put(R"(/.*)", route);
  server.Delete(R"(/.*)", route);
  {
    std::lock_guard lock(mu_);
    server_ = &server;
  }
  int bound = port == 0 ? server.bind_to_any_port(host) : (server.bind_to_port(host, port) ? port : -1);
  if (bound <= 0) {
    std::lock_guard lock(mu_);
    server_ = nullptr;
    return false;
  }
  bound_port_ = bound;
  bool ok = server.listen_after_bind();
  {
    std::lock_guard lock(mu_);
    server_ = nullptr;
  }
  return ok;
}

void Service::stop() {
  std::lock_guard lock(mu_);
  if (server_) static_cast<httplib::Server*>(server_)->stop();
}

}  // namespace coaplan

#pragma once

// In-memory planning service: artifact store, asynchronous job queue and the
// HTTP routes the planner UI talks to. Plans are immutable once published;
// edits always produce a new plan with a parent link.

#include <atomic>
#include <condition_variable>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "coaplan/knowledge_base.hpp"
#include "coaplan/plan.hpp"
#include "coaplan/scenario.hpp"

namespace coaplan {

enum class JobState { queued, running, done, failed };
std::string to_string(JobState s);

struct JobRecord {
  std::string id;
  JobState state = JobState::queued;
  std::string mode;  // plan | wargame | replan
  std::string scenario;
  std::vector<std::string> kbs;
  std::string scenario_digest;
  std::string kb_digest;
  Json config;
  std::string parent_plan;           // replan only
  std::vector<EditCommand> edits;    // replan only
  std::string plan;                  // set when done
  int error_status = 0;              // HTTP status describing the failure
  std::string error;
  Json diagnostics = Json::array();
  double queued_ms = 0, run_ms = 0;
};

struct StoredPlan {
  std::string id;
  std::string parent;  // plan this one was re-planned from
  std::string job;
  std::string scenario;
  std::vector<std::string> kbs;
  std::shared_ptr<const Plan> plan;
  std::string canonical;
};

struct HttpResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

class Service {
 public:
  Service();
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Route one request. `query` holds decoded query parameters.
  HttpResponse handle(const std::string& method, const std::string& path,
                      const std::map<std::string, std::string>& query, const std::string& body);

  // Blocks until the job leaves queued/running; returns its final record.
  JobRecord wait(const std::string& job_id);
  std::optional<JobRecord> job(const std::string& id) const;

  // Serve over HTTP until stop() is called from another thread. Returns false
  // when the address cannot be bound.
  bool serve(const std::string& host, int port);
  void stop();
  int bound_port() const { return bound_port_; }

 private:
  HttpResponse post_scenario(const std::string& body);
  HttpResponse post_kb(const std::string& body);
  HttpResponse post_job(const std::string& body);
  HttpResponse post_edits(const std::string& plan_id, const std::string& body);
  HttpResponse get_job(const std::string& id);
  HttpResponse get_plan(const std::string& id, const std::string& view, const std::map<std::string, std::string>& q);

  std::string enqueue(JobRecord job);
  void worker();
  void run(JobRecord& job);

  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::map<std::string, std::pair<Scenario, std::string>> scenarios_;  // id -> (scenario, source text)
  std::map<std::string, Json> kbs_;
  std::map<std::string, JobRecord> jobs_;
  std::map<std::string, StoredPlan> plans_;
  std::deque<std::string> queue_;
  int next_job_ = 1;
  int next_plan_ = 1;
  bool shutdown_ = false;
  std::thread worker_;
  void* server_ = nullptr;  // httplib::Server while serving
  std::atomic<int> bound_port_{0};
};

}  // namespace coaplan

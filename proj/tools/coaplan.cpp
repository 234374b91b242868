// coaplan: batch planner and HTTP service.
//
// Exit codes: 0 success, 2 invalid input (diagnostics on stderr), 3 planning failure.

#include <chrono>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "coaplan/engine.hpp"
#include "coaplan/service.hpp"
#include "coaplan/syncmatrix.hpp"

namespace {

using namespace coaplan;

constexpr int kOk = 0;
constexpr int kInvalid = 2;
constexpr int kPlanningFailed = 3;

struct Options {
  std::string scenario;
  std::vector<std::string> kbs;
  std::string config;
  std::string out;
  std::string format = "canonical";
  long long period = 0;
  std::string serve;
};

class MissingFile : public Error {
 public:
  using Error::Error;
};

void require_file(const std::string& what, const std::string& path) {
  if (path.empty()) throw MissingFile("missing --" + what);
  if (!std::filesystem::is_regular_file(path)) throw MissingFile(what + " file not found: " + path);
}

KnowledgeBase load_kb(const Options& o) {
  if (o.kbs.empty()) throw MissingFile("missing --kb");
  std::vector<std::filesystem::path> paths;
  for (const auto& k : o.kbs) {
    require_file("kb", k);
    paths.emplace_back(k);
  }
  return KnowledgeBase::load(paths);
}

void print_diagnostics(const std::vector<Diagnostic>& diags) {
  for (const auto& d : diags) std::cerr << to_string(d.severity) << " " << d.path << " [" << d.code << "] " << d.message << "\n";
}

void write_output(const Options& o, const std::string& text) {
  if (o.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(o.out, std::ios::binary);
  if (!f) throw Error("cannot write " + o.out);
  f << text;
}

int run_plan(const Options& o, bool wargame_mode) {
  require_file("scenario", o.scenario);
  if (!o.config.empty()) require_file("config", o.config);
  if (o.format != "canonical" && o.format != "matrix_csv") throw MissingFile("--format must be canonical or matrix_csv");
  KnowledgeBase kb = load_kb(o);
  Scenario s = load_scenario(o.scenario);
  PlanConfig config = o.config.empty() ? PlanConfig{} : load_config(o.config);

  auto t0 = std::chrono::steady_clock::now();
  Plan p = wargame_mode ? wargame(s, kb, config) : plan(s, kb, config);
  double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

  std::string text = o.format == "matrix_csv" ? export_plan(p, ExportFormat::matrix_csv, o.period)
                                              : export_plan(p, ExportFormat::canonical);
  write_output(o, text);
  std::size_t leaves = p.leaves().size();
  std::ostream& summary = o.out.empty() ? std::cerr : std::cout;
  char buf[160];
  std::snprintf(buf, sizeof buf, "leaves %zu flags %zu activities %zu wall_ms %.1f", leaves, p.flags.size(),
                p.activities.size(), ms);
  summary << buf << "\n";
  return kOk;
}

int run_validate(const Options& o) {
  require_file("scenario", o.scenario);
  Scenario s = load_scenario(o.scenario);
  std::vector<Diagnostic> diags;
  if (!o.kbs.empty()) {
    KnowledgeBase kb = load_kb(o);
    diags = validate_scenario(s, &kb);
  } else {
    diags = validate_scenario(s);
  }
  print_diagnostics(diags);
  std::cout << (has_errors(diags) ? "invalid" : "valid") << " (" << diags.size() << " diagnostics)\n";
  return has_errors(diags) ? kInvalid : kOk;
}

int run_lint(const Options& o) {
  KnowledgeBase kb = load_kb(o);
  auto diags = lint_kb(kb);
  print_diagnostics(diags);
  std::cout << (has_errors(diags) ? "lint failed" : "lint ok") << " (" << diags.size() << " diagnostics)\n";
  return has_errors(diags) ? kInvalid : kOk;
}

Service* g_service = nullptr;

int run_serve(const Options& o) {
  auto colon = o.serve.rfind(':');
  if (colon == std::string::npos) throw MissingFile("--serve expects addr:port");
  std::string host = o.serve.substr(0, colon);
  int port = std::stoi(o.serve.substr(colon + 1));
  Service service;
  g_service = &service;
  std::signal(SIGINT, [](int) {
    if (g_service) g_service->stop();
  });
  std::signal(SIGTERM, [](int) {
    if (g_service) g_service->stop();
  });
  std::cerr << "serving on " << host << ":" << port << "\n";
  bool ok = service.serve(host, port);
  g_service = nullptr;
  if (!ok) {
    std::cerr << "cannot listen on " << o.serve << "\n";
    return kPlanningFailed;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coaplan: course-of-action planner"};
  Options o;
  app.add_option("--serve", o.serve, "Serve the HTTP API on addr:port");

  auto add_common = [&](CLI::App* sub, bool planning) {
    sub->add_option("--scenario", o.scenario, "Scenario document");
    sub->add_option("--kb", o.kbs, "KB segment (repeatable, overlay order)");
    if (!planning) return;
    sub->add_option("--config", o.config, "Planner configuration");
    sub->add_option("--out", o.out, "Output path (default: standard output)");
    sub->add_option("--format", o.format, "canonical | matrix_csv");
    sub->add_option("--period", o.period, "Matrix period in minutes");
  };
  auto* plan_cmd = app.add_subcommand("plan", "Expand and schedule friendly goals");
  auto* war_cmd = app.add_subcommand("wargame", "Plan friendly and enemy goals together");
  auto* val_cmd = app.add_subcommand("validate", "Validate a scenario");
  auto* kb_cmd = app.add_subcommand("kb", "Knowledge-base tools");
  auto* lint_cmd = kb_cmd->add_subcommand("lint", "Lint KB segments");
  kb_cmd->require_subcommand(1);
  add_common(plan_cmd, true);
  add_common(war_cmd, true);
  add_common(val_cmd, false);
  lint_cmd->add_option("--kb", o.kbs, "KB segment (repeatable, overlay order)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kInvalid;
  }

  try {
    if (!o.serve.empty()) return run_serve(o);
    if (*plan_cmd) return run_plan(o, false);
    if (*war_cmd) return run_plan(o, true);
    if (*val_cmd) return run_validate(o);
    if (*lint_cmd) return run_lint(o);
    std::cerr << app.help();
    return kInvalid;
  } catch (const MissingFile& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const ValidationError& e) {
    print_diagnostics(e.diagnostics());
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.source() << ":" << e.line() << ":" << e.column() << " (offset " << e.offset()
              << "): " << e.what() << "\n";
    return kInvalid;
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "planning failed: " << e.what() << "\n";
    return kPlanningFailed;
  }
}

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "coaplan/document.hpp"
#include "coaplan/engine.hpp"
#include "coaplan/service.hpp"
#include "coaplan/syncmatrix.hpp"

namespace py = pybind11;
using namespace coaplan;

namespace {

// Values cross the boundary as JSON text; the json module does the conversion.
py::object to_py(const Json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

Json from_py(const py::handle& obj) {
  return Json::parse(py::module_::import("json").attr("dumps")(obj).cast<std::string>());
}

py::list diagnostics_py(const std::vector<Diagnostic>& diags) {
  py::list out;
  for (const auto& d : diags) {
    py::dict item;
    item["severity"] = to_string(d.severity);
    item["path"] = d.path;
    item["code"] = d.code;
    item["message"] = d.message;
    out.append(item);
  }
  return out;
}

std::vector<EditCommand> edits_from_py(const py::object& edits) {
  std::vector<EditCommand> out;
  if (edits.is_none()) return out;
  for (const auto& e : edits) out.push_back(edit_from_json(from_py(e)));
  return out;
}

ExportFormat format_from_string(const std::string& f) {
  if (f == "canonical") return ExportFormat::canonical;
  if (f == "matrix_csv") return ExportFormat::matrix_csv;
  throw Error("unknown export format: " + f);
}

}  // namespace

PYBIND11_MODULE(_coaplan, m) {
  m.doc() = "Course-of-action planning engine";

  auto error = py::register_exception<Error>(m, "Error");
  py::register_exception<ParseError>(m, "ParseError", error.ptr());
  py::register_exception<SchemaError>(m, "SchemaError", error.ptr());
  py::register_exception<PlanningError>(m, "PlanningError", error.ptr());
  py::register_exception<EditError>(m, "EditError", error.ptr());
  static py::exception<ValidationError> validation(m, "ValidationError", error.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ValidationError& e) {
      py::object exc = py::reinterpret_borrow<py::object>(validation.ptr())(e.what());
      exc.attr("diagnostics") = diagnostics_py(e.diagnostics());
      PyErr_SetObject(validation.ptr(), exc.ptr());
    }
  });

  py::class_<Scenario>(m, "Scenario")
      .def_static("load", &load_scenario, py::arg("path"))
      .def_static("parse", &parse_scenario, py::arg("text"), py::arg("source") = "<memory>")
      .def_property_readonly("name", [](const Scenario& s) { return s.name; })
      .def_property_readonly("digest", &scenario_digest)
      .def("to_dict", [](const Scenario& s) { return to_py(scenario_to_json(s)); });

  py::class_<KnowledgeBase>(m, "KnowledgeBase")
      .def_static("load", &KnowledgeBase::load, py::arg("paths"))
      .def_static(
          "parse",
          [](const std::vector<std::string>& texts) {
            std::vector<Json> docs;
            std::vector<std::string> sources;
            for (std::size_t i = 0; i < texts.size(); ++i) {
              sources.push_back("<segment " + std::to_string(i) + ">");
              docs.push_back(parse_document(texts[i], sources.back()));
            }
            return KnowledgeBase::from_documents(docs, sources);
          },
          py::arg("texts"))
      .def_property_readonly("digest", &kb_digest)
      .def_property_readonly("task_types", &KnowledgeBase::task_types)
      .def_property_readonly("functional_rows", &KnowledgeBase::functional_rows)
      .def("to_dict", [](const KnowledgeBase& kb) { return to_py(kb.to_json()); });

  py::class_<PlanConfig>(m, "PlanConfig")
      .def(py::init<>())
      .def_static("load", &load_config, py::arg("path"))
      .def_static(
          "from_dict", [](const py::dict& d) { return config_from_json(from_py(d)); }, py::arg("doc"))
      .def("to_dict", [](const PlanConfig& c) { return to_py(config_to_json(c)); });

  py::class_<Plan>(m, "Plan")
      .def_property_readonly("digest", [](const Plan& p) { return p.digest; })
      .def_property_readonly("wargame", [](const Plan& p) { return p.wargame; })
      .def_property_readonly("horizon", &Plan::horizon)
      .def_property_readonly("leaf_count", [](const Plan& p) { return p.leaves().size(); })
      .def_property_readonly("flags", [](const Plan& p) { return to_py(export_plan_json(p)["flags"]); })
      .def("to_dict", [](const Plan& p) { return to_py(export_plan_json(p)); })
      .def(
          "export",
          [](const Plan& p, const std::string& format, Minutes period) {
            return export_plan(p, format_from_string(format), period);
          },
          py::arg("format") = "canonical", py::arg("period") = 0)
      .def(
          "matrix", [](const Plan& p, Minutes period) { return to_py(matrix_to_json(build_matrix(p, period))); },
          py::arg("period"));

  m.def(
      "plan",
      [](const Scenario& s, const KnowledgeBase& kb, const PlanConfig& c, const py::object& edits) {
        auto e = edits_from_py(edits);
        py::gil_scoped_release release;
        return plan(s, kb, c, e);
      },
      py::arg("scenario"), py::arg("kb"), py::arg("config") = PlanConfig{}, py::arg("edits") = py::none());
  m.def(
      "wargame",
      [](const Scenario& s, const KnowledgeBase& kb, const PlanConfig& c, const py::object& edits) {
        auto e = edits_from_py(edits);
        py::gil_scoped_release release;
        return wargame(s, kb, c, e);
      },
      py::arg("scenario"), py::arg("kb"), py::arg("config") = PlanConfig{}, py::arg("edits") = py::none());
  m.def(
      "replan",
      [](const Plan& base, const Scenario& s, const KnowledgeBase& kb, const py::object& edits) {
        auto e = edits_from_py(edits);
        py::gil_scoped_release release;
        return replan(base, s, kb, e);
      },
      py::arg("base"), py::arg("scenario"), py::arg("kb"), py::arg("edits"));
  m.def(
      "import_plan", [](const std::string& text) { return import_plan(text); }, py::arg("text"));
  m.def(
      "validate_scenario",
      [](const Scenario& s, const KnowledgeBase* kb) { return diagnostics_py(validate_scenario(s, kb)); },
      py::arg("scenario"), py::arg("kb") = nullptr);
  m.def(
      "lint_kb", [](const KnowledgeBase& kb) { return diagnostics_py(lint_kb(kb)); }, py::arg("kb"));
  m.def(
      "utilization",
      [](const Plan& p, const Scenario& s) {
        py::list out;
        for (const auto& u : utilization_report(p, s)) {
          py::dict item;
          item["unit"] = u.unit;
          item["committed"] = u.committed;
          item["idle"] = u.idle;
          item["horizon"] = u.horizon;
          item["fraction"] = u.fraction;
          out.append(item);
        }
        return out;
      },
      py::arg("plan"), py::arg("scenario"));
  m.def("period_label", &period_label, py::arg("minutes"));

  py::class_<Service>(m, "Service")
      .def(py::init<>())
      .def(
          "handle",
          [](Service& svc, const std::string& method, const std::string& path,
             const std::map<std::string, std::string>& query, const std::string& body) {
            HttpResponse r;
            {
              py::gil_scoped_release release;
              r = svc.handle(method, path, query, body);
            }
            return py::make_tuple(r.status, r.content_type, r.body);
          },
          py::arg("method"), py::arg("path"), py::arg("query") = std::map<std::string, std::string>{},
          py::arg("body") = "")
      .def(
          "wait",
          [](Service& svc, const std::string& job) {
            HttpResponse r;
            {
              py::gil_scoped_release release;
              svc.wait(job);
              r = svc.handle("GET", "/jobs/" + job, {}, "");
            }
            return to_py(Json::parse(r.body));
          },
          py::arg("job"))
      .def("serve", &Service::serve, py::arg("host") = "127.0.0.1", py::arg("port") = 0,
           py::call_guard<py::gil_scoped_release>())
      .def("stop", &Service::stop, py::call_guard<py::gil_scoped_release>())
      .def_property_readonly("bound_port", &Service::bound_port);
}

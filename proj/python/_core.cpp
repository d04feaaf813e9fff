#include <pybind11/pybind11.h>

#include "eewiki/workspace.h"
#include "json_io.h"

namespace py = pybind11;
using ee::api::json;

namespace {

ee::EngineLimits limits_of(const std::string& text) { return ee::parse_limits(text); }

std::string parse(const std::string& text) {
  const auto rb = ee::parse_rulebase(text);
  json rules = json::array();
  for (const auto& r : rb.rules) {
    json premises = json::array();
    for (const auto& p : r.premises) premises.push_back(p.to_string());
    rules.push_back({{"id", r.id()}, {"premises", premises}, {"conclusion", r.conclusion.to_string()}});
  }
  json tables = json::array();
  for (const auto& t : rb.tables) {
    json rows = json::array();
    for (const auto& row : t.rows) {
      json cells = json::array();
      for (const auto& v : row) cells.push_back(v.text());
      rows.push_back(std::move(cells));
    }
    tables.push_back({{"name", t.name}, {"heading", t.heading.to_string()}, {"rows", rows}});
  }
  return json{{"rules", rules},
              {"tables", tables},
              {"diagnostics", ee::api::diagnostics_json(rb.diagnostics)}}
      .dump();
}

std::string validate(const std::string& text) {
  return ee::api::validation_json(ee::validate(ee::parse_rulebase(text))).dump();
}

std::string ask(const std::string& text, const std::string& request, const std::string& limits) {
  const auto q = ee::api::query_from(json::parse(request));
  return ee::api::answer_json(ee::solve(ee::parse_rulebase(text), q, limits_of(limits))).dump();
}

std::string explain(const std::string& text, const std::string& goal, const std::string& limits) {
  const auto rb = ee::parse_rulebase(text);
  ee::require_valid(rb);
  const ee::Explainer ex(rb, limits_of(limits));
  return ee::api::explanation_json(ex, ex.explain_goal(ee::parse_sentence(goal))).dump();
}

std::string menu(const std::string& text) {
  return ee::api::menu_json(ee::build_menu(ee::parse_rulebase(text))).dump();
}

std::string search(const std::string& text, const std::string& query) {
  if (ee::search_words(query).empty()) return ee::api::search_json({}).dump();
  return ee::api::search_json(ee::search(ee::parse_rulebase(text), query)).dump();
}

std::string sql(const std::string& text, const std::string& request, const std::string& mappings,
                bool run, const std::string& limits) {
  const auto rb = ee::parse_rulebase(text);
  const auto q = ee::api::query_from(json::parse(request));
  const auto maps = mappings.empty() ? ee::default_mappings(rb) : ee::parse_mappings(mappings);
  const auto plan = ee::compile_sql(rb, q, maps);
  auto out = ee::api::plan_json(rb, plan);
  if (run) {
    ee::SqliteClient db;
    db.load(rb, maps);
    out["answers"] = ee::api::answer_json(ee::run_hybrid(plan, db, limits_of(limits)));
  }
  return out.dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Rulebase engine bindings; every function returns a JSON document.";
  static py::exception<ee::Error> error(m, "Error");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ee::Error& e) {
      PyErr_SetObject(error.ptr(), py::make_tuple(e.code(), e.what()).ptr());
    } catch (const json::exception& e) {
      PyErr_SetObject(error.ptr(), py::make_tuple("bad_request", e.what()).ptr());
    }
  });
  m.def("parse", &parse, py::arg("text"));
  m.def("validate", &validate, py::arg("text"));
  m.def("ask", &ask, py::arg("text"), py::arg("request"), py::arg("limits") = "");
  m.def("explain", &explain, py::arg("text"), py::arg("goal"), py::arg("limits") = "");
  m.def("menu", &menu, py::arg("text"));
  m.def("search", &search, py::arg("text"), py::arg("query"));
  m.def("sql", &sql, py::arg("text"), py::arg("request"), py::arg("mappings") = "",
        py::arg("run") = false, py::arg("limits") = "");
}

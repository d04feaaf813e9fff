#include "json_io.h"

namespace ee::api {

json error_body(const std::string& code, const std::string& message,
                const std::optional<json>& details) {
  json j = {{"code", code}, {"message", message}};
  if (details) j["details"] = *details;
  return j;
}

json to_json(const Diagnostic& d) {
  return {{"severity", d.severity == Severity::error ? "error" : "warning"},
          {"lines", {d.lines.first, d.lines.last}},
          {"code", d.code},
          {"message", d.message},
          {"text", d.to_string()}};
}

json to_json(const SafetyIssue& s) {
  return {{"severity", s.severity == Severity::error ? "error" : "warning"},
          {"rule", s.rule_id},
          {"lines", {s.lines.first, s.lines.last}},
          {"variable", s.variable},
          {"reason", s.reason},
          {"text", s.to_string()}};
}

json diagnostics_json(const std::vector<Diagnostic>& ds) {
  json out = json::array();
  for (const auto& d : ds) out.push_back(to_json(d));
  return out;
}

json validation_json(const Validation& v) {
  json errors = json::array();
  json warnings = json::array();
  for (const auto& s : v.safety.errors) errors.push_back(to_json(s));
  for (const auto& s : v.safety.warnings) warnings.push_back(to_json(s));
  json strata = json::array();
  for (const auto& [p, n] : v.strata.stratum) {
    strata.push_back({{"predicate", p.to_string()}, {"stratum", n}});
  }
  return {{"ok", v.ok()},
          {"parse", diagnostics_json(v.parse)},
          {"safety", {{"safe", v.safety.safe()}, {"errors", errors}, {"warnings", warnings}}},
          {"strata", strata},
          {"cycle", v.strata.cycle_witness ? json(*v.strata.cycle_witness) : json(nullptr)},
          {"lines", v.lines()},
          {"text", v.render()}};
}

json rejected_details(const Rulebase& rb, const RejectedRulebase& e) {
  json d = {{"diagnostics", e.details()}};
  if (e.code() == "not_stratified") {
    const auto s = stratify(rb);
    if (s.cycle_witness) d["cycle"] = *s.cycle_witness;
  }
  return d;
}

namespace {

json entry_json(const MenuEntry& e) {
  return {{"text", e.text()},
          {"predicate", e.predicate.to_string()},
          {"variables", e.pattern.variables()}};
}

}  // namespace

json answer_json(const AnswerTable& t) {
  json rows = json::array();
  for (const auto& r : t.rows) {
    json row = json::array();
    for (const auto& v : r) row.push_back(v.text());
    rows.push_back(std::move(row));
  }
  return {{"columns", t.columns},
          {"rows", rows},
          {"handles", t.handles},
          {"diagnostics", t.diagnostics}};
}


json error_json(const Error& e, const Rulebase* rb) {
  if (const auto* r = dynamic_cast<const RejectedRulebase*>(&e); r && rb) {
    return error_body(e.code(), e.what(), rejected_details(*rb, *r));
  }
  if (const auto* c = dynamic_cast<const RevisionConflict*>(&e)) {
    return error_body(e.code(), e.what(), json{{"current_revision", c->current()}});
  }
  if (const auto* p = dynamic_cast<const ParseError*>(&e)) {
    return error_body(e.code(), e.what(), json{{"diagnostics", diagnostics_json(p->diagnostics())}});
  }
  return error_body(e.code(), e.what());
}

json menu_json(const std::vector<MenuLayer>& layers) {
  json out = json::array();
  for (const auto& layer : layers) {
    json entries = json::array();
    for (const auto& e : layer.entries) entries.push_back(entry_json(e));
    out.push_back({{"rank", layer.rank}, {"entries", entries}});
  }
  return {{"layers", out}};
}

json search_json(const std::vector<RankedEntry>& results) {
  json out = json::array();
  for (const auto& r : results) {
    auto e = entry_json(r.entry);
    e["score"] = r.score;
    out.push_back(std::move(e));
  }
  return {{"results", out}};
}

json node_json(const Explainer& ex, const ProofNode& n) {
  json children = json::array();
  for (const auto& c : n.children) {
    const auto child = ex.node(c);
    children.push_back({{"id", child.id},
                        {"kind", to_string(child.kind)},
                        {"conclusion", child.conclusion},
                        {"leaf", child.leaf()}});
  }
  json j = {{"id", n.id},
            {"kind", to_string(n.kind)},
            {"conclusion", n.conclusion},
            {"leaf", n.leaf()},
            {"children", children}};
  if (!n.rule_id.empty()) j["rule"] = n.rule_id;
  if (n.kind == ProofKind::table_row) {
    j["table"] = n.table;
    j["row"] = n.row;
  }
  return j;
}

json explanation_json(const Explainer& ex, const std::variant<ProofNode, FailureNode>& result) {
  if (const auto* p = std::get_if<ProofNode>(&result)) {
    return {{"status", "proof"},
            {"root", node_json(ex, *p)},
            {"text", ex.render(*p, Format::text)},
            {"html", ex.render(*p, Format::html)}};
  }
  const auto& f = std::get<FailureNode>(result);
  json attempts = json::array();
  for (const auto& a : f.attempts) {
    attempts.push_back({{"rule", a.rule_id},
                        {"satisfied", a.satisfied},
                        {"missing", a.missing},
                        {"conclusion", a.conclusion}});
  }
  return {{"status", "failure"},
          {"goal", f.goal},
          {"attempts", attempts},
          {"text", Explainer::render(f, Format::text)},
          {"html", Explainer::render(f, Format::html)}};
}

std::vector<std::string> in_engine_sentences(const Rulebase& rb, const SqlPlan& plan) {
  const RelationSet rels(rb);
  std::vector<std::string> out;
  for (const auto& p : plan.in_engine) {
    auto r = rels.find(p);
    out.push_back(r ? generalize(rels, *r).to_string() : p.to_string());
  }
  return out;
}

json plan_json(const Rulebase& rb, const SqlPlan& plan) {
  json fetches = json::array();
  for (const auto& f : plan.fetches) {
    fetches.push_back({{"heading", f.heading.to_string()}, {"sql", f.sql}});
  }
  return {{"sql", plan.sql},
          {"columns", plan.columns},
          {"in_engine", in_engine_sentences(rb, plan)},
          {"fetches", fetches}};
}

std::optional<std::string> opt_string(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw InvalidArgument(std::string("'") + key + "' must be a string");
  return it->get<std::string>();
}

std::string req_string(const json& j, const char* key) {
  auto s = opt_string(j, key);
  if (!s) throw InvalidArgument(std::string("'") + key + "' is required");
  return *s;
}

// Strings as written; numbers in their JSON spelling.
Value value_of(const json& j, const std::string& what) {
  if (j.is_string()) return Value(j.get<std::string>());
  if (j.is_number()) return Value(j.dump());
  throw InvalidArgument(what + " must be a string or a number");
}

Query query_from(const json& body) {
  const auto pattern = parse_sentence(req_string(body, "pattern"));
  std::vector<std::pair<std::string, Constraint>> edits;
  auto it = body.find("constraints");
  if (it != body.end() && !it->is_null()) {
    if (!it->is_array()) throw InvalidArgument("'constraints' must be an array");
    for (const auto& c : *it) {
      if (!c.is_object()) throw InvalidArgument("each constraint must be an object");
      const auto var = req_string(c, "variable");
      if (c.contains("equals")) {
        edits.emplace_back(var, Equals{value_of(c["equals"], "'equals'")});
      } else if (c.contains("approx")) {
        std::size_t distance = 0;
        if (c.contains("distance")) {
          if (!c["distance"].is_number_unsigned()) {
            throw InvalidArgument("'distance' must be a non-negative integer");
          }
          distance = c["distance"].get<std::size_t>();
        }
        edits.emplace_back(var, Approx{value_of(c["approx"], "'approx'").text(), distance});
      } else if (c.contains("min") || c.contains("max")) {
        Range r;
        if (c.contains("min") && !c["min"].is_null()) r.min = value_of(c["min"], "'min'");
        if (c.contains("max") && !c["max"].is_null()) r.max = value_of(c["max"], "'max'");
        edits.emplace_back(var, r);
      } else {
        throw InvalidArgument("constraint on '" + var + "' needs equals, min/max or approx");
      }
    }
  }
  return specialize(pattern, edits);
}

}  // namespace ee::api

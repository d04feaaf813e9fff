#pragma once

// JSON shapes shared by the HTTP service and `--format json` in the CLI.

#include <json.hpp>
#include <optional>
#include <variant>

#include "eewiki/explainer.h"
#include "eewiki/menu.h"
#include "eewiki/sql.h"
#include "eewiki/validator.h"

namespace ee::api {

using json = nlohmann::json;

json error_body(const std::string& code, const std::string& message,
                const std::optional<json>& details = std::nullopt);
json error_json(const Error& e, const Rulebase* rb = nullptr);

json to_json(const Diagnostic& d);
json to_json(const SafetyIssue& s);
json diagnostics_json(const std::vector<Diagnostic>& ds);
json validation_json(const Validation& v);
// Diagnostics and, for not_stratified, the rules on the cycle.
json rejected_details(const Rulebase& rb, const RejectedRulebase& e);

json menu_json(const std::vector<MenuLayer>& layers);
json search_json(const std::vector<RankedEntry>& results);
json answer_json(const AnswerTable& t);

// Children are summarized (id, kind, conclusion, leaf) for lazy drill-down.
json node_json(const Explainer& ex, const ProofNode& n);
json explanation_json(const Explainer& ex, const std::variant<ProofNode, FailureNode>& result);

// Relations the plan leaves to the engine, spelled with some- placeholders.
std::vector<std::string> in_engine_sentences(const Rulebase& rb, const SqlPlan& plan);
json plan_json(const Rulebase& rb, const SqlPlan& plan);

// Request fields. Throw InvalidArgument on a missing or mistyped field.
std::optional<std::string> opt_string(const json& j, const char* key);
std::string req_string(const json& j, const char* key);
// Strings as written; numbers in their JSON spelling.
Value value_of(const json& j, const std::string& what);
// {"pattern": ..., "constraints": [{"variable", "equals" | "min"/"max" | "approx"/"distance"}]}
Query query_from(const json& body);

}  // namespace ee::api

#pragma once

// Static checks: range restriction (safety), binding order for negated and
// builtin premises, and stratification of negation and aggregation.

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eewiki/relations.h"
#include "eewiki/rulebook.h"

namespace ee {

struct SafetyIssue {
  Severity severity = Severity::error;
  std::string rule_id;
  LineSpan lines;
  std::string variable;
  std::string reason;

  // "ERROR rule@1-3 y <reason>"
  std::string to_string() const;
};

struct SafetyReport {
  std::vector<SafetyIssue> errors;
  std::vector<SafetyIssue> warnings;

  bool safe() const noexcept { return errors.empty(); }
};

SafetyReport check_safety(const Rule& rule);
SafetyReport check_safety(const Rulebase& rb);

struct Stratification {
  std::map<PredicateId, int> stratum;
  // Set when some relation depends on its own negation; ids of the rules
  // on such cycles, in source order.
  std::optional<std::vector<std::string>> cycle_witness;

  bool stratified() const noexcept { return !cycle_witness.has_value(); }
  int of(const PredicateId& p) const;
};

Stratification stratify(const Rulebase& rb, std::span<const SentencePattern> extra_headings = {});
Stratification stratify(const Rulebase& rb, const RelationSet& relations);

struct Validation {
  std::vector<Diagnostic> parse;
  SafetyReport safety;
  Stratification strata;

  bool ok() const;
  // Error-level lines only unless warnings is true. One line per finding,
  // ordered by source line.
  std::vector<std::string> lines(bool warnings = true) const;
  std::string render() const;
};

Validation validate(const Rulebase& rb);

// Throws RejectedRulebase ("parse_error", "not_safe" or "not_stratified")
// when rb cannot be queried.
void require_valid(const Rulebase& rb);

}  // namespace ee

#pragma once

// Query evaluation under the stratified (perfect model) semantics.
// solve() is query directed: the program is rewritten with magic sets so
// that only facts relevant to the query are derived; relations used under
// negation or aggregation are computed in full, stratum by stratum.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "eewiki/errors.h"
#include "eewiki/relations.h"
#include "eewiki/rulebook.h"

namespace ee {

struct EngineLimits {
  std::int64_t max_fixpoint_rounds = 10000;
  std::int64_t max_derived_facts = 1000000;
};

struct Equals {
  Value value;
};
struct Range {
  std::optional<Value> min;
  std::optional<Value> max;
};
struct Approx {
  std::string text;
  std::size_t max_distance = 0;
};
using Constraint = std::variant<Equals, Range, Approx>;

// Levenshtein distance over bytes.
std::size_t edit_distance(std::string_view a, std::string_view b);
bool satisfies(const Constraint& c, const Value& v);
// Comparison used by range constraints and comparison builtins: numeric
// when both sides are numbers, bytewise text otherwise.
int compare_values(const Value& a, const Value& b);

struct Query {
  SentencePattern pattern;
  std::vector<std::pair<std::string, Constraint>> constraints;

  static Query parse(std::string_view sentence) { return Query{parse_sentence(sentence), {}}; }
  bool accepts(const std::string& variable, const Value& v) const;
};

struct AnswerTable {
  std::vector<std::string> columns;          // query variables, pattern order
  std::vector<std::vector<Value>> rows;      // sorted, no duplicates
  std::vector<std::string> handles;          // explanation node id per row
  std::vector<std::string> diagnostics;      // e.g. division by zero

  bool empty() const noexcept { return rows.empty(); }
  // Aligned text table: header line, then one line per row.
  std::string render_text() const;
};

// Stable id of a rendered sentence: 16 hex digits of its FNV-1a hash, with
// numeric words hashed in normalized form.
std::string proof_handle(std::string_view rendered);

// Called whenever a negated premise is checked: the relation of the rule
// being evaluated, the relation looked up, and whether the tuple was found.
using NegationTrace =
    std::function<void(const PredicateId& head, const PredicateId& negated, bool found)>;

struct SolveOptions {
  EngineLimits limits;
  bool query_directed = true;
  NegationTrace trace;
};

// Precondition: require_valid(rb) passes; solve checks it and throws
// RejectedRulebase otherwise.
AnswerTable solve(const Rulebase& rb, const Query& q, const EngineLimits& limits = {});
AnswerTable solve(const Rulebase& rb, const Query& q, const SolveOptions& options);

// Extends b with the builtin's output, or returns nullopt when the builtin
// is false or undefined (division by zero, which is noted in diagnostics).
// Throws TypeMismatch for a non-numeric arithmetic input and
// UnboundVariable for an unbound input.
std::optional<Binding> eval_builtin(const BuiltinCall& call, const Binding& b,
                                    std::vector<std::string>* diagnostics = nullptr);

// Folds operands (already distinct per contributing tuple). Throws
// TypeMismatch for non-numeric operands of total/maximum/minimum.
Value fold_aggregate(AggregateFn fn, const std::vector<Value>& operands);

// Conclusions of an aggregate rule given the solutions of its other premises.
// Groups by the conclusion variables other than the output; solutions are
// first made distinct on all premise variables. Empty groups yield nothing.
std::vector<GroundFact> eval_aggregate(const Rule& rule, const std::vector<Binding>& solutions);

// The full perfect model with the first derivation of every fact.
class Model {
 public:
  struct Origin {
    std::uint64_t seq = 0;                 // derivation order
    std::optional<std::size_t> table_row;  // set for table facts
    std::optional<std::size_t> rule;       // index into Rulebase::rules
    Binding binding;                       // the rule's variables
  };

  const Rulebase& rulebase() const;
  const RelationSet& relations() const;
  std::size_t size(std::size_t relation) const;
  std::vector<Value> fact(std::size_t relation, std::size_t index) const;
  std::optional<std::size_t> find(std::size_t relation, const std::vector<Value>& args) const;
  Origin origin(std::size_t relation, std::size_t index) const;

  // Bindings extending seed under which sentence holds, over every reading.
  std::vector<Binding> solutions(const SentencePattern& sentence, const Binding& seed = {}) const;
  // The earliest derived (relation, index) spelling exactly this instance.
  std::optional<std::pair<std::size_t, std::size_t>> lookup(const SentencePattern& sentence,
                                                            const Binding& binding) const;
  const std::vector<std::string>& diagnostics() const;

  struct Impl;

 private:
  friend Model evaluate_model(const Rulebase& rb, const EngineLimits& limits);
  std::shared_ptr<const Impl> impl_;
};

Model evaluate_model(const Rulebase& rb, const EngineLimits& limits = {});

}  // namespace ee

#pragma once

// Wiki text -> Rulebase. Blocks are separated by blank lines:
//
//   premise sentence            heading sentence with some-placeholders
//   not : premise sentence      ===
//   -----                       cell | cell | cell
//   conclusion sentence         cell | cell | cell
//
// Lines starting with '#' are comments.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "eewiki/errors.h"
#include "eewiki/sentence.h"

namespace ee {

enum class BuiltinOp { add, sub, mul, div, round, lt, le, gt, ge, ne };
enum class AggregateFn { sum, count, max, min };

std::string_view to_string(BuiltinOp op);
std::string_view to_string(AggregateFn fn);
bool is_comparison(BuiltinOp op);

// Arithmetic: args = {a, b, result}. round: args = {a, places, result}.
// Comparisons: args = {a, b}. Each arg is a variable or a constant value.
// `output` names the result variable when the result slot is a variable.
struct BuiltinCall {
  BuiltinOp op = BuiltinOp::add;
  std::vector<Term> args;
  std::optional<std::string> output;

  // Variables read by the call (everything except the result slot).
  std::vector<std::string> inputs() const;
};

// "<out> is the <total|count|maximum|minimum> of each <operand>"
struct AggregateCall {
  AggregateFn fn = AggregateFn::sum;
  std::string operand;
  std::string output;
};

// Recognizes builtin and aggregate surface forms by exact skeleton.
std::optional<BuiltinCall> recognize_builtin(const SentencePattern& sentence);
std::optional<AggregateCall> recognize_aggregate(const SentencePattern& sentence);

enum class PremiseKind { positive, negated, builtin, aggregate };

struct Premise {
  PremiseKind kind = PremiseKind::positive;
  SentencePattern sentence;  // without the "not :" marker
  std::optional<BuiltinCall> builtin;
  std::optional<AggregateCall> aggregate;

  // The line as written in wiki text.
  std::string to_string() const;
};

struct LineSpan {
  std::size_t first = 0;  // 1-based, inclusive
  std::size_t last = 0;
  friend bool operator==(const LineSpan&, const LineSpan&) = default;
};

struct Rule {
  std::vector<Premise> premises;
  SentencePattern conclusion;
  LineSpan source_span;

  // "rule@<first>-<last>"
  std::string id() const;
  // Variables of every premise and the conclusion, first-appearance order.
  std::vector<std::string> variables() const;
  const AggregateCall* aggregate() const;
};

struct FactTable {
  SentencePattern heading;
  std::vector<std::vector<Value>> rows;
  std::string name;  // optional
  LineSpan source_span;

  PredicateId predicate() const { return skeleton_of(heading); }
  GroundFact fact(std::size_t row) const { return GroundFact{predicate(), rows.at(row)}; }
};

enum class Severity { warning, error };

struct Diagnostic {
  Severity severity = Severity::warning;
  LineSpan lines;
  std::string code;
  std::string message;

  // "WARNING block@3-5 - <code>: <message>"
  std::string to_string() const;
};

struct Rulebase {
  std::vector<Rule> rules;
  std::vector<FactTable> tables;
  std::vector<Diagnostic> diagnostics;

  bool has_errors() const;
  const FactTable* table_for(const PredicateId& predicate) const;
  // Adds rows to the table for heading's predicate, creating it if needed.
  // Duplicate rows are dropped. Returns the number of rows added.
  std::size_t add_rows(const SentencePattern& heading, const std::vector<std::vector<Value>>& rows,
                       const std::string& name = {});
};

class ParseError : public Error {
 public:
  explicit ParseError(std::vector<Diagnostic> diagnostics);
  const std::vector<Diagnostic>& diagnostics() const noexcept { return diagnostics_; }

 private:
  std::vector<Diagnostic> diagnostics_;
};

// Never throws; problems land in Rulebase::diagnostics and malformed blocks
// are skipped.
Rulebase parse_rulebase(std::string_view text);
// Throws ParseError when any error-level diagnostic was produced.
Rulebase parse_rulebase_strict(std::string_view text);

// Canonical wiki text. Diagnostics are not written.
std::string serialize(const Rulebase& rb);

// Structural equality ignoring source spans and diagnostics.
bool same_structure(const Rulebase& a, const Rulebase& b);

}  // namespace ee

#pragma once

// Sentences as predicates. An English sentence is a whitespace-separated
// token sequence; tokens spelled `some-name` / `that-name` are placeholders.
// Replacing the placeholders by holes gives the sentence's skeleton, which is
// the identity of the predicate it denotes.

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "eewiki/decimal.h"

namespace ee {

// A value filling a placeholder. Numeric when the text is a plain decimal
// numeral; two numeric values are equal when they are numerically equal
// ("1.0" == "1"), everything else compares by exact text.
class Value {
 public:
  Value() : Value(std::string()) {}
  explicit Value(std::string text);
  static Value of(const Decimal& number) { return Value(number.to_string()); }

  const std::string& text() const noexcept { return text_; }
  const std::optional<Decimal>& numeric() const noexcept { return numeric_; }
  bool is_numeric() const noexcept { return numeric_.has_value(); }
  std::size_t hash() const noexcept { return hash_; }

  // Numbers sort before non-numbers; numbers numerically, the rest bytewise.
  friend std::strong_ordering operator<=>(const Value& a, const Value& b);
  friend bool operator==(const Value& a, const Value& b);

 private:
  std::string text_;
  std::optional<Decimal> numeric_;
  std::size_t hash_ = 0;
};

struct ValueHash {
  std::size_t operator()(const Value& v) const noexcept { return v.hash(); }
};

class Term {
 public:
  static Term constant(std::string text);
  // prefix/suffix hold punctuation glued to the placeholder, as in "[some-C".
  static Term variable(std::string name, bool introduces, std::string prefix = {},
                       std::string suffix = {});

  bool is_variable() const noexcept { return variable_; }
  bool is_constant() const noexcept { return !variable_; }
  // Constant text, or the variable name.
  const std::string& text() const noexcept { return text_; }
  const std::string& name() const noexcept { return text_; }
  bool introduces() const noexcept { return introduces_; }
  const std::string& prefix() const noexcept { return prefix_; }
  const std::string& suffix() const noexcept { return suffix_; }

  // The token as written.
  std::string spelled() const;

  friend bool operator==(const Term&, const Term&) = default;

 private:
  bool variable_ = false;
  bool introduces_ = false;
  std::string text_;
  std::string prefix_;
  std::string suffix_;
};

class SentencePattern {
 public:
  SentencePattern() = default;
  explicit SentencePattern(std::vector<Term> terms) : terms_(std::move(terms)) {}

  const std::vector<Term>& terms() const noexcept { return terms_; }
  std::size_t size() const noexcept { return terms_.size(); }
  bool empty() const noexcept { return terms_.empty(); }

  // Distinct variable names in order of first appearance.
  std::vector<std::string> variables() const;
  bool is_ground() const;
  bool mentions(std::string_view variable) const;
  std::string to_string() const;

  friend bool operator==(const SentencePattern&, const SentencePattern&) = default;

 private:
  std::vector<Term> terms_;
};

// Splits on runs of Unicode whitespace. Throws EmptySentence on blank input.
SentencePattern parse_sentence(std::string_view line);

// Splits on runs of Unicode whitespace; no classification.
std::vector<std::string> split_tokens(std::string_view line);

class PredicateId {
 public:
  struct Part {
    bool hole = false;
    std::string text;  // constant token
    std::string prefix;
    std::string suffix;
    friend bool operator==(const Part&, const Part&) = default;
  };

  PredicateId() = default;
  explicit PredicateId(std::vector<Part> parts);

  const std::vector<Part>& parts() const noexcept { return parts_; }
  std::size_t arity() const noexcept { return arity_; }
  const std::string& key() const noexcept { return key_; }

  // Holes shown as "○".
  std::string to_string() const;
  // Holes replaced by the given values (size must equal arity()).
  std::string render(std::span<const Value> args) const;
  // Holes spelled as `some-<name>`.
  std::string generalized(std::span<const std::string> names) const;

  friend bool operator==(const PredicateId& a, const PredicateId& b) { return a.key_ == b.key_; }
  friend std::strong_ordering operator<=>(const PredicateId& a, const PredicateId& b) {
    return a.key_ <=> b.key_;
  }

 private:
  std::vector<Part> parts_;
  std::size_t arity_ = 0;
  std::string key_;
};

struct PredicateIdHash {
  std::size_t operator()(const PredicateId& p) const noexcept;
};

PredicateId skeleton_of(const SentencePattern& pattern);

struct GroundFact {
  PredicateId predicate;
  std::vector<Value> args;

  std::string render() const { return predicate.render(args); }
  friend bool operator==(const GroundFact&, const GroundFact&) = default;
};

class Binding {
 public:
  using Map = std::map<std::string, Value>;

  // False (and no change) when name is already bound to a different value.
  bool bind(const std::string& name, const Value& value);
  const Value* find(std::string_view name) const;
  bool contains(std::string_view name) const { return find(name) != nullptr; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }
  const Map& values() const noexcept { return values_; }
  Binding restricted_to(std::span<const std::string> names) const;

  friend bool operator==(const Binding&, const Binding&) = default;

 private:
  Map values_;
};

// One way of reading a pattern as an instance of a predicate skeleton.
// holes[i] says what fills hole i: a pattern variable or a value spelled by
// a run of constant tokens. pinned lists pattern variables that sit where
// the skeleton has a constant token.
struct HoleFill {
  std::optional<std::string> variable;
  std::optional<Value> value;
};

struct Alignment {
  std::vector<HoleFill> holes;
  std::vector<std::pair<std::string, Value>> pinned;
};

std::vector<Alignment> align(const SentencePattern& pattern, const PredicateId& predicate,
                             std::size_t limit = 64);
bool aligns(const SentencePattern& pattern, const PredicateId& predicate);

// Binding iff the pattern can be read as the fact; repeated variables must
// agree. The seeded overload extends an existing binding.
std::optional<Binding> match(const SentencePattern& pattern, const GroundFact& fact);
std::optional<Binding> match(const SentencePattern& pattern, const GroundFact& fact,
                             const Binding& seed);
// One binding per distinct reading of the pattern as the fact.
std::vector<Binding> match_all(const SentencePattern& pattern, const GroundFact& fact,
                               const Binding& seed = {});

struct Instance {
  GroundFact fact;
  std::string text;
};

// Throws UnboundVariable for the first variable without a value.
Instance instantiate(const SentencePattern& pattern, const Binding& binding);

// Like instantiate(), but unbound variables stay spelled as `some-<name>`.
std::string render_partial(const SentencePattern& pattern, const Binding& binding);

}  // namespace ee

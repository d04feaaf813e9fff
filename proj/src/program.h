#pragma once

// Internal Datalog form of a rulebase. Values are interned; every premise
// becomes a literal over one relation, introducing an auxiliary relation
// when the premise has several readings.

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "eewiki/engine.h"

namespace ee::ir {

using ValueId = std::uint32_t;
using Tuple = std::vector<ValueId>;
constexpr ValueId kUnbound = std::numeric_limits<ValueId>::max();

struct TupleHash {
  std::size_t operator()(const Tuple& t) const noexcept {
    std::size_t h = 1469598103934665603ULL;
    for (auto v : t) h = (h ^ v) * 1099511628211ULL;
    return h;
  }
};

// Ids are per spelling, so "0.60" keeps its trailing zero; canon() maps
// equal values ("0.6", "0.60") to one id, which is what joins compare.
class ValuePool {
 public:
  ValueId intern(const Value& v);
  // Canonical id of a value equal to v, if any.
  std::optional<ValueId> find(const Value& v) const;
  const Value& get(ValueId id) const { return values_[id]; }
  ValueId canon(ValueId id) const { return canon_[id]; }
  Tuple canon(const Tuple& t) const {
    Tuple out(t);
    for (auto& v : out) v = canon_[v];
    return out;
  }

 private:
  std::vector<Value> values_;
  std::vector<ValueId> canon_;
  std::unordered_map<std::string, ValueId> by_text_;
  std::unordered_map<Value, ValueId, ValueHash> by_value_;
};

struct Arg {
  bool is_var = false;
  int var = -1;
  ValueId value = kUnbound;

  static Arg variable(int v) { return Arg{true, v, kUnbound}; }
  static Arg constant(ValueId c) { return Arg{false, -1, c}; }
  friend bool operator==(const Arg&, const Arg&) = default;
};

enum class LitKind { positive, negated, builtin, aggregate };

struct Literal {
  LitKind kind = LitKind::positive;
  int relation = -1;
  std::vector<Arg> args;  // builtin: operands, then the result slot (not for comparisons)
  BuiltinOp op = BuiltinOp::add;
  AggregateFn fn = AggregateFn::sum;
  int operand = -1;
  int output = -1;
};

struct Rule {
  int head = -1;
  std::vector<Arg> head_args;
  std::vector<Literal> body;
  std::vector<std::string> var_names;
  int source_rule = -1;  // index of the user rule, -1 for generated rules
  std::string label;     // for diagnostics

  bool is_aggregate() const { return !body.empty() && body.back().kind == LitKind::aggregate; }
};

enum class RelKind { user, table, aux, query, magic };

struct Relation {
  std::string name;
  std::size_t arity = 0;
  RelKind kind = RelKind::user;
  int user = -1;             // RelationSet index for user/table relations
  std::vector<int> sources;  // aux: the user relations it reads
};

struct Program {
  std::vector<Relation> relations;
  std::vector<Rule> rules;
  std::vector<std::vector<Tuple>> facts;  // initial facts per relation
  std::vector<int> user_relation;         // RelationSet index -> relation
  std::vector<int> table_relation;        // RelationSet index -> relation holding table rows
  int query = -1;

  int add_relation(Relation r) {
    relations.push_back(std::move(r));
    facts.emplace_back();
    return static_cast<int>(relations.size()) - 1;
  }
};

// Lowers rb; when q is given, adds relation "__query" whose tuples are the
// answers in column order q.pattern.variables().
Program lower(const Rulebase& rb, const RelationSet& rels, ValuePool& pool,
              const Query* q = nullptr);

// Magic-set rewrite for the query relation.
Program magic_rewrite(const Program& p);

// Tuples keep their spelling; position and indexes are keyed by canonical ids.
struct Store {
  const ValuePool* pool = nullptr;
  std::size_t arity = 0;
  std::vector<Tuple> tuples;
  std::vector<std::uint64_t> seq;
  std::unordered_map<Tuple, std::uint32_t, TupleHash> position;

  struct Index {
    std::unordered_map<Tuple, std::vector<std::uint32_t>, TupleHash> buckets;
    std::size_t upto = 0;
  };
  std::unordered_map<std::uint64_t, Index> indexes;

  std::optional<std::uint32_t> find(const Tuple& t) const {
    auto it = position.find(pool->canon(t));
    if (it == position.end()) return std::nullopt;
    return it->second;
  }
  // key holds canonical ids of the masked columns.
  const std::vector<std::uint32_t>* lookup(std::uint64_t mask, const Tuple& key);
  bool add(const Tuple& t) {
    return position.emplace(pool->canon(t), static_cast<std::uint32_t>(tuples.size())).second;
  }
};

struct Provenance {
  int rule = -1;       // user rule index
  Tuple binding;       // per rule variable, kUnbound when not bound
};

struct EvalOptions {
  EngineLimits limits;
  bool provenance = false;
  NegationTrace trace;
  const RelationSet* relations = nullptr;  // for trace names
};

class Evaluator {
 public:
  Evaluator(const Program& p, ValuePool& pool, EvalOptions options);
  void run();

  const Store& store(int relation) const { return stores_[static_cast<std::size_t>(relation)]; }
  const std::vector<Provenance>& provenance(int relation) const {
    return prov_[static_cast<std::size_t>(relation)];
  }
  const std::vector<std::string>& diagnostics() const { return diagnostics_; }

 private:
  struct Env;
  void run_component(const std::vector<int>& rules, const std::vector<bool>& in_component);
  void run_aggregate(const Rule& rule);
  // Enumerates body solutions; delta_literal >= 0 restricts that literal to delta tuples.
  template <typename F>
  void join(const Rule& rule, std::size_t literal, std::vector<ValueId>& env, int delta_literal,
            std::size_t body_end, const F& emit);
  void insert(const Rule& rule, const std::vector<ValueId>& env);
  bool builtin(const Rule& rule, const Literal& lit, std::vector<ValueId>& env, int& bound_var);

  const Program& p_;
  ValuePool& pool_;
  EvalOptions options_;
  std::vector<Store> stores_;
  std::vector<std::vector<Provenance>> prov_;
  std::vector<std::size_t> limit_;                   // visible tuples per relation
  std::vector<std::pair<std::size_t, std::size_t>> delta_;
  std::vector<std::string> diagnostics_;
  std::uint64_t seq_ = 0;
  std::int64_t derived_ = 0;
};

// Arithmetic and round: nullopt on division by zero. Throws TypeMismatch.
std::optional<Value> arithmetic(BuiltinOp op, const Value& a, const Value& b);
bool comparison(BuiltinOp op, const Value& a, const Value& b);

}  // namespace ee::ir

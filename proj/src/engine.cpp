#include "eewiki/engine.h"

#include <algorithm>
#include <map>

#include "eewiki/validator.h"
#include "program.h"

namespace ee {

namespace {

void check_constraints(const Query& q) {
  const auto vars = q.pattern.variables();
  for (const auto& [name, c] : q.constraints) {
    if (std::find(vars.begin(), vars.end(), name) == vars.end()) throw UnknownVariable(name);
  }
}

}  // namespace

AnswerTable solve(const Rulebase& rb, const Query& q, const EngineLimits& limits) {
  SolveOptions options;
  options.limits = limits;
  return solve(rb, q, options);
}

AnswerTable solve(const Rulebase& rb, const Query& q, const SolveOptions& options) {
  require_valid(rb);
  check_constraints(q);
  const RelationSet rels(rb);
  ir::ValuePool pool;
  ir::Program program = ir::lower(rb, rels, pool, &q);
  const int query = program.query;
  if (options.query_directed) program = ir::magic_rewrite(program);

  ir::EvalOptions eval;
  eval.limits = options.limits;
  eval.trace = options.trace;
  eval.relations = &rels;
  ir::Evaluator evaluator(program, pool, eval);
  evaluator.run();

  AnswerTable out;
  out.columns = q.pattern.variables();
  out.diagnostics = evaluator.diagnostics();
  std::vector<std::vector<Value>> rows;
  for (const auto& t : evaluator.store(query).tuples) {
    std::vector<Value> row;
    bool keep = true;
    for (std::size_t c = 0; c < t.size(); ++c) {
      row.push_back(pool.get(t[c]));
      keep = keep && q.accepts(out.columns[c], row.back());
    }
    if (keep) rows.push_back(std::move(row));
  }
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  for (const auto& row : rows) {
    Binding b;
    for (std::size_t c = 0; c < row.size(); ++c) b.bind(out.columns[c], row[c]);
    out.handles.push_back(proof_handle(instantiate(q.pattern, b).text));
  }
  out.rows = std::move(rows);
  return out;
}

// ---- Model -------------------------------------------------------------------

struct Model::Impl {
  Rulebase rb;
  RelationSet rels;
  ir::ValuePool pool;
  ir::Program program;
  std::unique_ptr<ir::Evaluator> evaluator;

  const ir::Store& store(std::size_t relation) const {
    return evaluator->store(program.user_relation.at(relation));
  }
  std::optional<ir::Tuple> encode(const std::vector<Value>& args) const {
    ir::Tuple t;
    for (const auto& v : args) {
      auto id = pool.find(v);
      if (!id) return std::nullopt;
      t.push_back(*id);
    }
    return t;
  }
};

Model evaluate_model(const Rulebase& rb, const EngineLimits& limits) {
  require_valid(rb);
  auto impl = std::make_shared<Model::Impl>();
  impl->rb = rb;
  impl->rels = RelationSet(impl->rb);
  impl->program = ir::lower(impl->rb, impl->rels, impl->pool);
  ir::EvalOptions eval;
  eval.limits = limits;
  eval.provenance = true;
  impl->evaluator = std::make_unique<ir::Evaluator>(impl->program, impl->pool, eval);
  impl->evaluator->run();
  Model m;
  m.impl_ = std::move(impl);
  return m;
}

const Rulebase& Model::rulebase() const { return impl_->rb; }
const RelationSet& Model::relations() const { return impl_->rels; }
const std::vector<std::string>& Model::diagnostics() const { return impl_->evaluator->diagnostics(); }

std::size_t Model::size(std::size_t relation) const { return impl_->store(relation).tuples.size(); }

std::vector<Value> Model::fact(std::size_t relation, std::size_t index) const {
  std::vector<Value> out;
  for (auto id : impl_->store(relation).tuples.at(index)) out.push_back(impl_->pool.get(id));
  return out;
}

std::optional<std::size_t> Model::find(std::size_t relation, const std::vector<Value>& args) const {
  auto t = impl_->encode(args);
  if (!t) return std::nullopt;
  auto pos = impl_->store(relation).find(*t);
  if (!pos) return std::nullopt;
  return *pos;
}

Model::Origin Model::origin(std::size_t relation, std::size_t index) const {
  const auto& store = impl_->store(relation);
  Origin o;
  o.seq = store.seq.at(index);
  const int table = impl_->program.table_relation.at(relation);
  if (table >= 0) {
    const auto& rows = impl_->evaluator->store(table);
    if (auto pos = rows.find(store.tuples.at(index))) {
      o.table_row = *pos;
      return o;
    }
  }
  const auto& p = impl_->evaluator->provenance(impl_->program.user_relation.at(relation)).at(index);
  if (p.rule >= 0) {
    o.rule = static_cast<std::size_t>(p.rule);
    // The user rule's IR form is the unique rule with this source index.
    for (const auto& r : impl_->program.rules) {
      if (r.source_rule != p.rule) continue;
      for (std::size_t v = 0; v < r.var_names.size(); ++v) {
        if (p.binding[v] != ir::kUnbound) o.binding.bind(r.var_names[v], impl_->pool.get(p.binding[v]));
      }
      break;
    }
  }
  return o;
}

std::vector<Binding> Model::solutions(const SentencePattern& sentence, const Binding& seed) const {
  std::vector<Binding> out;
  for (const auto& reading : impl_->rels.readings(sentence)) {
    const auto& store = impl_->store(reading.relation);
    Binding base = seed;
    bool ok = true;
    for (const auto& [name, value] : reading.alignment.pinned) ok = ok && base.bind(name, value);
    if (!ok) continue;
    for (const auto& t : store.tuples) {
      Binding b = base;
      bool fits = true;
      for (std::size_t k = 0; k < t.size() && fits; ++k) {
        const auto& fill = reading.alignment.holes[k];
        const Value& v = impl_->pool.get(t[k]);
        fits = fill.variable ? b.bind(*fill.variable, v) : *fill.value == v;
      }
      if (fits && std::find(out.begin(), out.end(), b) == out.end()) out.push_back(std::move(b));
    }
  }
  return out;
}

std::optional<std::pair<std::size_t, std::size_t>> Model::lookup(const SentencePattern& sentence,
                                                                 const Binding& binding) const {
  std::optional<std::pair<std::size_t, std::size_t>> best;
  std::uint64_t best_seq = 0;
  for (const auto& reading : impl_->rels.readings(sentence)) {
    bool ok = true;
    for (const auto& [name, value] : reading.alignment.pinned) {
      const Value* v = binding.find(name);
      ok = ok && v && *v == value;
    }
    if (!ok) continue;
    std::vector<Value> args;
    for (const auto& fill : reading.alignment.holes) {
      if (fill.value) {
        args.push_back(*fill.value);
      } else if (const Value* v = binding.find(*fill.variable)) {
        args.push_back(*v);
      } else {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    auto pos = find(reading.relation, args);
    if (!pos) continue;
    const auto seq = impl_->store(reading.relation).seq[*pos];
    if (!best || seq < best_seq) {
      best = std::make_pair(reading.relation, *pos);
      best_seq = seq;
    }
  }
  return best;
}

}  // namespace ee

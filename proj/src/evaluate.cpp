#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>

#include "program.h"

namespace ee::ir {

const std::vector<std::uint32_t>* Store::lookup(std::uint64_t mask, const Tuple& key) {
  auto& index = indexes[mask];
  for (; index.upto < tuples.size(); ++index.upto) {
    const auto& t = tuples[index.upto];
    Tuple k;
    for (std::size_t c = 0; c < t.size(); ++c) {
      if (mask & (std::uint64_t{1} << c)) k.push_back(pool->canon(t[c]));
    }
    index.buckets[k].push_back(static_cast<std::uint32_t>(index.upto));
  }
  auto it = index.buckets.find(key);
  return it == index.buckets.end() ? nullptr : &it->second;
}

namespace {

// Strongly connected components of the relation graph, numbered so that a
// component comes after everything it depends on.
std::vector<int> relation_components(const Program& p) {
  const std::size_t n = p.relations.size();
  std::vector<std::vector<int>> edges(n);
  for (const auto& r : p.rules) {
    for (const auto& l : r.body) {
      if (l.relation >= 0) edges[static_cast<std::size_t>(r.head)].push_back(l.relation);
    }
  }
  std::vector<int> index(n, -1), low(n, 0), comp(n, -1);
  std::vector<int> stack;
  std::vector<bool> on_stack(n, false);
  int counter = 0, ncomp = 0;
  std::function<void(int)> visit = [&](int v) {
    const auto vs = static_cast<std::size_t>(v);
    index[vs] = low[vs] = counter++;
    stack.push_back(v);
    on_stack[vs] = true;
    for (int w : edges[vs]) {
      const auto ws = static_cast<std::size_t>(w);
      if (index[ws] < 0) {
        visit(w);
        low[vs] = std::min(low[vs], low[ws]);
      } else if (on_stack[ws]) {
        low[vs] = std::min(low[vs], index[ws]);
      }
    }
    if (low[vs] == index[vs]) {
      int w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[static_cast<std::size_t>(w)] = false;
        comp[static_cast<std::size_t>(w)] = ncomp;
      } while (w != v);
      ++ncomp;
    }
  };
  for (std::size_t v = 0; v < n; ++v) {
    if (index[v] < 0) visit(static_cast<int>(v));
  }
  return comp;
}

}  // namespace

Evaluator::Evaluator(const Program& p, ValuePool& pool, EvalOptions options)
    : p_(p), pool_(pool), options_(std::move(options)) {
  const std::size_t n = p.relations.size();
  stores_.resize(n);
  prov_.resize(n);
  limit_.assign(n, 0);
  delta_.assign(n, {0, 0});
  for (std::size_t r = 0; r < n; ++r) {
    auto& s = stores_[r];
    s.pool = &pool_;
    s.arity = p.relations[r].arity;
    if (s.arity > 64) throw InvalidArgument("sentences with more than 64 placeholders are not supported");
    for (const auto& t : p.facts[r]) {
      if (s.add(t)) {
        s.tuples.push_back(t);
        s.seq.push_back(seq_++);
        if (options_.provenance) prov_[r].push_back({});
      }
    }
  }
}

void Evaluator::run() {
  const auto comp = relation_components(p_);
  int ncomp = 0;
  for (auto c : comp) ncomp = std::max(ncomp, c + 1);
  std::vector<std::vector<int>> rules_of(static_cast<std::size_t>(ncomp));
  for (std::size_t r = 0; r < p_.rules.size(); ++r) {
    rules_of[static_cast<std::size_t>(comp[static_cast<std::size_t>(p_.rules[r].head)])].push_back(
        static_cast<int>(r));
  }
  for (int c = 0; c < ncomp; ++c) {
    const auto& rules = rules_of[static_cast<std::size_t>(c)];
    if (rules.empty()) continue;
    std::vector<bool> in(p_.relations.size(), false);
    for (std::size_t r = 0; r < p_.relations.size(); ++r) in[r] = comp[r] == c;
    run_component(rules, in);
  }
}

void Evaluator::run_component(const std::vector<int>& rule_ids, const std::vector<bool>& in) {
  for (std::size_t r = 0; r < stores_.size(); ++r) limit_[r] = stores_[r].tuples.size();

  std::vector<int> plain;
  bool recursive = false;
  for (int id : rule_ids) {
    const auto& rule = p_.rules[static_cast<std::size_t>(id)];
    for (const auto& l : rule.body) {
      const bool inside = l.relation >= 0 && in[static_cast<std::size_t>(l.relation)];
      if (inside && (l.kind == LitKind::negated || rule.is_aggregate())) {
        throw std::logic_error("relation depends on its own negation: " + rule.label);
      }
      recursive |= inside;
    }
    if (rule.is_aggregate()) {
      run_aggregate(rule);
    } else {
      plain.push_back(id);
    }
  }

  std::vector<std::size_t> start(stores_.size());
  auto snapshot = [&] {
    for (std::size_t r = 0; r < stores_.size(); ++r) {
      if (in[r]) {
        start[r] = stores_[r].tuples.size();
        limit_[r] = start[r];
      }
    }
  };
  auto close_round = [&] {
    bool changed = false;
    for (std::size_t r = 0; r < stores_.size(); ++r) {
      if (!in[r]) continue;
      delta_[r] = {start[r], stores_[r].tuples.size()};
      changed |= delta_[r].second > delta_[r].first;
    }
    return changed;
  };

  std::vector<std::pair<int, std::vector<ValueId>>> pending;
  auto fire = [&](int id, int delta_literal) {
    const auto& rule = p_.rules[static_cast<std::size_t>(id)];
    std::vector<ValueId> env(rule.var_names.size(), kUnbound);
    join(rule, 0, env, delta_literal, rule.body.size(),
         [&](const std::vector<ValueId>& e) { pending.emplace_back(id, e); });
    for (const auto& [rid, e] : pending) insert(p_.rules[static_cast<std::size_t>(rid)], e);
    pending.clear();
  };

  snapshot();
  for (int id : plain) fire(id, -1);
  if (!recursive) return;
  bool changed = close_round();
  std::int64_t rounds = 1;
  while (changed) {
    if (++rounds > options_.limits.max_fixpoint_rounds) {
      throw LimitExceeded("more than " + std::to_string(options_.limits.max_fixpoint_rounds) +
                          " fixpoint rounds");
    }
    snapshot();
    for (int id : plain) {
      const auto& rule = p_.rules[static_cast<std::size_t>(id)];
      for (std::size_t i = 0; i < rule.body.size(); ++i) {
        const auto& l = rule.body[i];
        if (l.kind != LitKind::positive || !in[static_cast<std::size_t>(l.relation)]) continue;
        const auto& d = delta_[static_cast<std::size_t>(l.relation)];
        if (d.second > d.first) fire(id, static_cast<int>(i));
      }
    }
    changed = close_round();
  }
}

template <typename F>
void Evaluator::join(const Rule& rule, std::size_t i, std::vector<ValueId>& env, int delta_literal,
                     std::size_t end, const F& emit) {
  if (i == end) {
    emit(env);
    return;
  }
  const Literal& lit = rule.body[i];
  auto value = [&](const Arg& a) { return a.is_var ? env[static_cast<std::size_t>(a.var)] : a.value; };

  switch (lit.kind) {
    case LitKind::positive: {
      auto& store = stores_[static_cast<std::size_t>(lit.relation)];
      std::size_t lo = 0;
      std::size_t hi = limit_[static_cast<std::size_t>(lit.relation)];
      if (delta_literal == static_cast<int>(i)) {
        lo = delta_[static_cast<std::size_t>(lit.relation)].first;
        hi = delta_[static_cast<std::size_t>(lit.relation)].second;
      }
      std::uint64_t mask = 0;
      Tuple key;
      for (std::size_t c = 0; c < lit.args.size(); ++c) {
        const ValueId v = value(lit.args[c]);
        if (v != kUnbound) {
          mask |= std::uint64_t{1} << c;
          key.push_back(pool_.canon(v));
        }
      }
      std::vector<int> newly;
      auto try_tuple = [&](std::size_t idx) {
        const Tuple& t = store.tuples[idx];
        bool ok = true;
        for (std::size_t c = 0; c < lit.args.size() && ok; ++c) {
          const Arg& a = lit.args[c];
          if (!a.is_var) continue;
          ValueId& slot = env[static_cast<std::size_t>(a.var)];
          if (slot == kUnbound) {
            slot = t[c];
            newly.push_back(a.var);
          } else {
            ok = pool_.canon(slot) == pool_.canon(t[c]);
          }
        }
        if (ok) join(rule, i + 1, env, delta_literal, end, emit);
        for (int v : newly) env[static_cast<std::size_t>(v)] = kUnbound;
        newly.clear();
      };
      if (mask == 0) {
        for (std::size_t idx = lo; idx < hi; ++idx) try_tuple(idx);
      } else if (const auto* bucket = store.lookup(mask, key)) {
        auto it = std::lower_bound(bucket->begin(), bucket->end(), static_cast<std::uint32_t>(lo));
        for (; it != bucket->end() && *it < hi; ++it) try_tuple(*it);
      }
      return;
    }
    case LitKind::negated: {
      Tuple t;
      for (const auto& a : lit.args) {
        const ValueId v = value(a);
        if (v == kUnbound) throw std::logic_error("unbound variable under negation in " + rule.label);
        t.push_back(v);
      }
      const bool found = stores_[static_cast<std::size_t>(lit.relation)].find(t).has_value();
      if (options_.trace && options_.relations) {
        const int head_user = p_.relations[static_cast<std::size_t>(rule.head)].user;
        const auto& neg = p_.relations[static_cast<std::size_t>(lit.relation)];
        std::vector<int> sources = neg.kind == RelKind::aux ? neg.sources : std::vector<int>{neg.user};
        if (head_user >= 0) {
          for (int s : sources) {
            if (s >= 0) {
              options_.trace(options_.relations->id(static_cast<std::size_t>(head_user)),
                             options_.relations->id(static_cast<std::size_t>(s)), found);
            }
          }
        }
      }
      if (!found) join(rule, i + 1, env, delta_literal, end, emit);
      return;
    }
    case LitKind::builtin: {
      int bound = -1;
      if (builtin(rule, lit, env, bound)) join(rule, i + 1, env, delta_literal, end, emit);
      if (bound >= 0) env[static_cast<std::size_t>(bound)] = kUnbound;
      return;
    }
    case LitKind::aggregate:
      throw std::logic_error("aggregate evaluated as a join step");
  }
}

bool Evaluator::builtin(const Rule& rule, const Literal& lit, std::vector<ValueId>& env,
                        int& bound_var) {
  auto value = [&](const Arg& a) {
    const ValueId v = a.is_var ? env[static_cast<std::size_t>(a.var)] : a.value;
    if (v == kUnbound) throw UnboundVariable(rule.var_names[static_cast<std::size_t>(a.var)]);
    return v;
  };
  const Value& a = pool_.get(value(lit.args[0]));
  const Value& b = pool_.get(value(lit.args[1]));
  if (is_comparison(lit.op)) return comparison(lit.op, a, b);
  auto result = arithmetic(lit.op, a, b);
  if (!result) {
    const std::string note = rule.label + ": division by zero in '" + a.text() + " / " + b.text() + "'";
    if (std::find(diagnostics_.begin(), diagnostics_.end(), note) == diagnostics_.end()) {
      diagnostics_.push_back(note);
    }
    return false;
  }
  const Arg& slot = lit.args[2];
  const ValueId r = pool_.intern(*result);
  if (!slot.is_var) return pool_.get(slot.value) == *result;
  ValueId& cur = env[static_cast<std::size_t>(slot.var)];
  if (cur != kUnbound) return pool_.canon(cur) == pool_.canon(r);
  cur = r;
  bound_var = slot.var;
  return true;
}

void Evaluator::run_aggregate(const Rule& rule) {
  const Literal& agg = rule.body.back();
  std::set<std::vector<ValueId>> solutions;
  std::vector<ValueId> env(rule.var_names.size(), kUnbound);
  std::set<std::vector<ValueId>> seen;
  join(rule, 0, env, -1, rule.body.size() - 1, [&](const std::vector<ValueId>& e) {
    std::vector<ValueId> s = e;
    s[static_cast<std::size_t>(agg.output)] = kUnbound;
    std::vector<ValueId> key = s;
    for (auto& v : key) {
      if (v != kUnbound) v = pool_.canon(v);
    }
    if (seen.insert(std::move(key)).second) solutions.insert(std::move(s));
  });
  std::vector<int> group;
  for (const auto& a : rule.head_args) {
    if (a.is_var && a.var != agg.output &&
        std::find(group.begin(), group.end(), a.var) == group.end()) {
      group.push_back(a.var);
    }
  }
  std::map<std::vector<ValueId>, std::vector<Value>> groups;
  for (const auto& s : solutions) {
    std::vector<ValueId> key;
    for (int v : group) key.push_back(pool_.canon(s[static_cast<std::size_t>(v)]));
    const ValueId operand = s[static_cast<std::size_t>(agg.operand)];
    groups[key].push_back(pool_.get(operand));
  }
  for (const auto& [key, operands] : groups) {
    std::vector<ValueId> e(rule.var_names.size(), kUnbound);
    for (std::size_t k = 0; k < group.size(); ++k) e[static_cast<std::size_t>(group[k])] = key[k];
    e[static_cast<std::size_t>(agg.output)] = pool_.intern(fold_aggregate(agg.fn, operands));
    insert(rule, e);
  }
}

void Evaluator::insert(const Rule& rule, const std::vector<ValueId>& env) {
  Tuple t;
  t.reserve(rule.head_args.size());
  for (const auto& a : rule.head_args) {
    t.push_back(a.is_var ? env[static_cast<std::size_t>(a.var)] : a.value);
  }
  auto& store = stores_[static_cast<std::size_t>(rule.head)];
  if (!store.add(t)) return;
  store.tuples.push_back(std::move(t));
  store.seq.push_back(seq_++);
  if (options_.provenance) {
    prov_[static_cast<std::size_t>(rule.head)].push_back(
        Provenance{rule.source_rule, rule.source_rule >= 0 ? env : Tuple{}});
  }
  if (++derived_ > options_.limits.max_derived_facts) {
    throw LimitExceeded("more than " + std::to_string(options_.limits.max_derived_facts) +
                        " derived facts");
  }
}

}  // namespace ee::ir

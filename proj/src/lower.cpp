#include <algorithm>
#include <map>
#include <set>

#include "program.h"

namespace ee::ir {

namespace {

struct RuleBuilder {
  Rule rule;
  std::map<std::string, int> vars;

  int var(const std::string& name) {
    auto [it, fresh] = vars.try_emplace(name, static_cast<int>(rule.var_names.size()));
    if (fresh) rule.var_names.push_back(name);
    return it->second;
  }
};

// Arguments of a reading; variables in `fixed` become constants. nullopt when
// two fixings of the same variable disagree.
std::optional<std::vector<Arg>> reading_args(const Alignment& a, ValuePool& pool, RuleBuilder& b,
                                             std::map<std::string, ValueId>& fixed) {
  for (const auto& [name, value] : a.pinned) {
    const ValueId id = pool.intern(value);
    auto [it, fresh] = fixed.try_emplace(name, id);
    if (!fresh && it->second != id) return std::nullopt;
  }
  std::vector<Arg> args;
  for (const auto& fill : a.holes) {
    if (fill.value) {
      args.push_back(Arg::constant(pool.intern(*fill.value)));
    } else if (auto it = fixed.find(*fill.variable); it != fixed.end()) {
      args.push_back(Arg::constant(it->second));
    } else {
      args.push_back(Arg::variable(b.var(*fill.variable)));
    }
  }
  return args;
}

class Lowering {
 public:
  Lowering(const Rulebase& rb, const RelationSet& rels, ValuePool& pool)
      : rb_(rb), rels_(rels), pool_(pool) {}

  Program run(const Query* q) {
    p_.user_relation.assign(rels_.size(), -1);
    p_.table_relation.assign(rels_.size(), -1);
    for (std::size_t i = 0; i < rels_.size(); ++i) {
      const auto arity = rels_.id(i).arity();
      const int u = p_.add_relation({rels_.id(i).to_string(), arity, RelKind::user,
                                     static_cast<int>(i), {}});
      p_.user_relation[i] = u;
      if (!rels_.has_table(i)) continue;
      int t = u;
      if (rels_.has_rules(i)) {
        t = p_.add_relation({rels_.id(i).to_string() + " #table", arity, RelKind::table,
                             static_cast<int>(i), {}});
        Rule copy;
        copy.head = u;
        copy.label = "table " + rels_.id(i).to_string();
        for (std::size_t k = 0; k < arity; ++k) {
          copy.var_names.push_back("x" + std::to_string(k + 1));
          copy.head_args.push_back(Arg::variable(static_cast<int>(k)));
        }
        copy.body.push_back(Literal{LitKind::positive, t, copy.head_args});
        p_.rules.push_back(std::move(copy));
      }
      p_.table_relation[i] = t;
      if (const FactTable* table = rb_.table_for(rels_.id(i))) {
        for (const auto& row : table->rows) {
          Tuple tuple;
          for (const auto& v : row) tuple.push_back(pool_.intern(v));
          p_.facts[static_cast<std::size_t>(t)].push_back(std::move(tuple));
        }
      }
    }
    for (std::size_t r = 0; r < rb_.rules.size(); ++r) lower_rule(r);
    if (q) lower_query(*q);
    return std::move(p_);
  }

 private:
  // Literal over the premise's only reading, or over an auxiliary relation
  // holding the union of its readings.
  Literal premise_literal(const SentencePattern& s, LitKind kind, RuleBuilder& b,
                          const std::string& name) {
    auto readings = rels_.readings(s);
    if (readings.size() == 1 && readings[0].alignment.pinned.empty()) {
      std::map<std::string, ValueId> fixed;
      auto args = reading_args(readings[0].alignment, pool_, b, fixed);
      return Literal{kind, p_.user_relation[readings[0].relation], std::move(*args)};
    }
    const auto vars = s.variables();
    Relation aux{name, vars.size(), RelKind::aux, -1, {}};
    for (const auto& r : readings) {
      const int u = static_cast<int>(r.relation);
      if (std::find(aux.sources.begin(), aux.sources.end(), u) == aux.sources.end()) {
        aux.sources.push_back(u);
      }
    }
    const int id = p_.add_relation(std::move(aux));
    for (const auto& r : readings) {
      RuleBuilder ab;
      ab.rule.head = id;
      ab.rule.label = name;
      std::map<std::string, ValueId> fixed;
      auto args = reading_args(r.alignment, pool_, ab, fixed);
      if (!args) continue;
      for (const auto& v : vars) {
        auto it = fixed.find(v);
        ab.rule.head_args.push_back(it != fixed.end() ? Arg::constant(it->second)
                                                      : Arg::variable(ab.var(v)));
      }
      ab.rule.body.push_back(
          Literal{LitKind::positive, p_.user_relation[r.relation], std::move(*args)});
      p_.rules.push_back(std::move(ab.rule));
    }
    std::vector<Arg> args;
    for (const auto& v : vars) args.push_back(Arg::variable(b.var(v)));
    return Literal{kind, id, std::move(args)};
  }

  Arg term_arg(const Term& t, RuleBuilder& b) {
    return t.is_variable() ? Arg::variable(b.var(t.name())) : Arg::constant(pool_.intern(Value(t.text())));
  }

  void lower_rule(std::size_t index) {
    const auto& rule = rb_.rules[index];
    RuleBuilder b;
    b.rule.source_rule = static_cast<int>(index);
    b.rule.label = rule.id();
    b.rule.head = p_.user_relation[*rels_.find(skeleton_of(rule.conclusion))];
    for (std::size_t k = 0; k < rule.premises.size(); ++k) {
      const auto& prem = rule.premises[k];
      const std::string aux_name = "aux " + rule.id() + "#" + std::to_string(k + 1);
      switch (prem.kind) {
        case PremiseKind::positive:
          b.rule.body.push_back(premise_literal(prem.sentence, LitKind::positive, b, aux_name));
          break;
        case PremiseKind::negated:
          b.rule.body.push_back(premise_literal(prem.sentence, LitKind::negated, b, aux_name));
          break;
        case PremiseKind::builtin: {
          Literal lit;
          lit.kind = LitKind::builtin;
          lit.op = prem.builtin->op;
          for (const auto& t : prem.builtin->args) lit.args.push_back(term_arg(t, b));
          b.rule.body.push_back(std::move(lit));
          break;
        }
        case PremiseKind::aggregate: {
          Literal lit;
          lit.kind = LitKind::aggregate;
          lit.fn = prem.aggregate->fn;
          lit.operand = b.var(prem.aggregate->operand);
          lit.output = b.var(prem.aggregate->output);
          b.rule.body.push_back(std::move(lit));
          break;
        }
      }
    }
    for (const auto& t : rule.conclusion.terms()) {
      if (t.is_variable()) b.rule.head_args.push_back(Arg::variable(b.var(t.name())));
    }
    p_.rules.push_back(std::move(b.rule));
  }

  void lower_query(const Query& q) {
    const auto columns = q.pattern.variables();
    p_.query = p_.add_relation({"__query", columns.size(), RelKind::query, -1, {}});
    std::map<std::string, ValueId> equals;
    for (const auto& [name, c] : q.constraints) {
      const auto* e = std::get_if<Equals>(&c);
      if (!e) continue;
      const ValueId id = pool_.intern(e->value);
      auto [it, fresh] = equals.try_emplace(name, id);
      if (!fresh && it->second != id) return;  // contradictory constraints
    }
    for (const auto& r : rels_.readings(q.pattern)) {
      RuleBuilder b;
      b.rule.head = p_.query;
      b.rule.label = "query";
      std::map<std::string, ValueId> fixed = equals;
      auto args = reading_args(r.alignment, pool_, b, fixed);
      if (!args) continue;
      for (const auto& v : columns) {
        auto it = fixed.find(v);
        b.rule.head_args.push_back(it != fixed.end() ? Arg::constant(it->second)
                                                     : Arg::variable(b.var(v)));
      }
      b.rule.body.push_back(
          Literal{LitKind::positive, p_.user_relation[r.relation], std::move(*args)});
      p_.rules.push_back(std::move(b.rule));
    }
  }

  const Rulebase& rb_;
  const RelationSet& rels_;
  ValuePool& pool_;
  Program p_;
};

std::string adornment_name(const std::vector<bool>& bound) {
  std::string s;
  for (bool b : bound) s.push_back(b ? 'b' : 'f');
  return s;
}

class MagicRewrite {
 public:
  explicit MagicRewrite(const Program& p) : in_(p) {}

  Program run() {
    out_ = in_;
    out_.rules.clear();
    const std::size_t n = in_.relations.size();
    std::vector<std::vector<int>> rules_of(n);
    for (std::size_t r = 0; r < in_.rules.size(); ++r) {
      rules_of[static_cast<std::size_t>(in_.rules[r].head)].push_back(static_cast<int>(r));
    }
    idb_.assign(n, false);
    for (const auto& r : in_.rules) idb_[static_cast<std::size_t>(r.head)] = true;

    // Relations read under negation or aggregation, and everything they
    // depend on, are computed in full.
    full_.assign(n, false);
    std::vector<int> work;
    auto mark = [&](int rel) {
      if (!full_[static_cast<std::size_t>(rel)]) {
        full_[static_cast<std::size_t>(rel)] = true;
        work.push_back(rel);
      }
    };
    for (const auto& r : in_.rules) {
      if (r.is_aggregate()) {
        mark(r.head);
        for (const auto& l : r.body) {
          if (l.relation >= 0) mark(l.relation);
        }
      }
      for (const auto& l : r.body) {
        if (l.kind == LitKind::negated) mark(l.relation);
      }
    }
    while (!work.empty()) {
      const int rel = work.back();
      work.pop_back();
      for (int r : rules_of[static_cast<std::size_t>(rel)]) {
        for (const auto& l : in_.rules[static_cast<std::size_t>(r)].body) {
          if (l.relation >= 0) mark(l.relation);
        }
      }
    }
    for (std::size_t rel = 0; rel < n; ++rel) {
      if (!full_[rel]) continue;
      for (int r : rules_of[rel]) out_.rules.push_back(in_.rules[static_cast<std::size_t>(r)]);
    }

    for (const auto& r : in_.rules) {
      if (r.head == in_.query) rewrite(r, -1, {});
    }
    while (!pending_.empty()) {
      auto [rel, bound] = pending_.back();
      pending_.pop_back();
      const int adorned = adorned_.at({rel, bound});
      for (int r : rules_of[static_cast<std::size_t>(rel)]) {
        Rule copy = in_.rules[static_cast<std::size_t>(r)];
        copy.head = adorned;
        rewrite(copy, rel, bound);
      }
    }
    return std::move(out_);
  }

 private:
  int adorned(int rel, const std::vector<bool>& bound) {
    auto key = std::make_pair(rel, bound);
    if (auto it = adorned_.find(key); it != adorned_.end()) return it->second;
    Relation r = in_.relations[static_cast<std::size_t>(rel)];
    r.name += " ^" + adornment_name(bound);
    const int id = out_.add_relation(std::move(r));
    adorned_[key] = id;
    Relation m;
    m.name = "magic " + in_.relations[static_cast<std::size_t>(rel)].name + " ^" + adornment_name(bound);
    m.arity = static_cast<std::size_t>(std::count(bound.begin(), bound.end(), true));
    m.kind = RelKind::magic;
    m.user = in_.relations[static_cast<std::size_t>(rel)].user;
    magic_[key] = out_.add_relation(std::move(m));
    pending_.push_back(key);
    return id;
  }

  static std::vector<Arg> bound_args(const std::vector<Arg>& args, const std::vector<bool>& bound) {
    std::vector<Arg> out;
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (bound[i]) out.push_back(args[i]);
    }
    return out;
  }

  // rel < 0: the query rule (no magic guard).
  void rewrite(Rule rule, int rel, const std::vector<bool>& head_bound) {
    std::vector<bool> is_bound(rule.var_names.size(), false);
    std::vector<Literal> body;
    if (rel >= 0) {
      Literal guard{LitKind::positive, magic_.at({rel, head_bound}), bound_args(rule.head_args, head_bound)};
      for (const auto& a : guard.args) {
        if (a.is_var) is_bound[static_cast<std::size_t>(a.var)] = true;
      }
      body.push_back(std::move(guard));
    }
    auto arg_bound = [&](const Arg& a) { return !a.is_var || is_bound[static_cast<std::size_t>(a.var)]; };
    for (auto lit : rule.body) {
      if (lit.kind == LitKind::positive && idb_[static_cast<std::size_t>(lit.relation)] &&
          !full_[static_cast<std::size_t>(lit.relation)]) {
        std::vector<bool> b;
        for (const auto& a : lit.args) b.push_back(arg_bound(a));
        const int target = adorned(lit.relation, b);
        Rule m;
        m.head = magic_.at({lit.relation, b});
        m.head_args = bound_args(lit.args, b);
        m.var_names = rule.var_names;
        m.label = "magic for " + rule.label;
        for (const auto& l : body) {
          if (l.kind != LitKind::negated) m.body.push_back(l);
        }
        out_.rules.push_back(std::move(m));
        lit.relation = target;
      }
      if (lit.kind == LitKind::positive) {
        for (const auto& a : lit.args) {
          if (a.is_var) is_bound[static_cast<std::size_t>(a.var)] = true;
        }
      } else if (lit.kind == LitKind::builtin && !is_comparison(lit.op)) {
        const auto& out = lit.args.back();
        if (out.is_var) is_bound[static_cast<std::size_t>(out.var)] = true;
      }
      body.push_back(std::move(lit));
    }
    rule.body = std::move(body);
    out_.rules.push_back(std::move(rule));
  }

  const Program& in_;
  Program out_;
  std::vector<bool> idb_;
  std::vector<bool> full_;
  std::map<std::pair<int, std::vector<bool>>, int> adorned_;
  std::map<std::pair<int, std::vector<bool>>, int> magic_;
  std::vector<std::pair<int, std::vector<bool>>> pending_;
};

}  // namespace

Program lower(const Rulebase& rb, const RelationSet& rels, ValuePool& pool, const Query* q) {
  return Lowering(rb, rels, pool).run(q);
}

Program magic_rewrite(const Program& p) { return MagicRewrite(p).run(); }

}  // namespace ee::ir

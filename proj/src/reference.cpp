#include "eewiki/reference.h"

#include <algorithm>
#include <map>
#include <set>

#include "eewiki/validator.h"

namespace ee {

namespace {

using Facts = std::map<PredicateId, std::set<std::vector<Value>>>;

class Naive {
 public:
  Naive(const Rulebase& rb, const EngineLimits& limits) : rb_(rb), limits_(limits) {}

  const Facts& run() {
    for (const auto& t : rb_.tables) {
      auto& rows = facts_[t.predicate()];
      for (const auto& row : t.rows) rows.insert(row);
    }
    const Stratification strata = stratify(rb_);
    std::map<int, std::vector<const Rule*>> by_stratum;
    for (const auto& r : rb_.rules) by_stratum[strata.of(skeleton_of(r.conclusion))].push_back(&r);
    for (const auto& [s, rules] : by_stratum) {
      bool changed = true;
      while (changed) {
        if (++rounds_ > limits_.max_fixpoint_rounds) {
          throw LimitExceeded("more than " + std::to_string(limits_.max_fixpoint_rounds) +
                              " fixpoint rounds");
        }
        changed = false;
        for (const Rule* r : rules) {
          for (auto& f : consequences(*r)) changed = add(f) || changed;
        }
      }
    }
    return facts_;
  }

  std::vector<std::string> diagnostics;

 private:
  bool add(const GroundFact& f) {
    if (!facts_[f.predicate].insert(f.args).second) return false;
    if (++derived_ > limits_.max_derived_facts) {
      throw LimitExceeded("more than " + std::to_string(limits_.max_derived_facts) +
                          " derived facts");
    }
    return true;
  }

  // Every extension of b under which pattern reads as some known fact.
  std::vector<Binding> matches(const SentencePattern& pattern, const Binding& b) const {
    std::vector<Binding> out;
    for (const auto& [pred, rows] : facts_) {
      for (const auto& row : rows) {
        for (auto& m : match_all(pattern, GroundFact{pred, row}, b)) {
          if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(std::move(m));
        }
      }
    }
    return out;
  }

  std::vector<Binding> solutions(const Rule& r) {
    std::vector<Binding> current{Binding{}};
    for (const auto& p : r.premises) {
      if (p.kind == PremiseKind::aggregate) break;
      std::vector<Binding> next;
      for (const auto& b : current) {
        switch (p.kind) {
          case PremiseKind::positive:
            for (auto& m : matches(p.sentence, b)) next.push_back(std::move(m));
            break;
          case PremiseKind::negated:
            if (matches(p.sentence, b).empty()) next.push_back(b);
            break;
          case PremiseKind::builtin:
            if (auto e = eval_builtin(*p.builtin, b, &diagnostics)) next.push_back(std::move(*e));
            break;
          case PremiseKind::aggregate:
            break;
        }
      }
      current = std::move(next);
    }
    return current;
  }

  std::vector<GroundFact> consequences(const Rule& r) {
    auto sols = solutions(r);
    if (r.aggregate()) return eval_aggregate(r, sols);
    std::vector<GroundFact> out;
    for (const auto& b : sols) out.push_back(instantiate(r.conclusion, b).fact);
    return out;
  }

  const Rulebase& rb_;
  EngineLimits limits_;
  Facts facts_;
  std::int64_t rounds_ = 0;
  std::int64_t derived_ = 0;
};

}  // namespace

AnswerTable solve_reference(const Rulebase& rb, const Query& q, const EngineLimits& limits) {
  require_valid(rb);
  const auto vars = q.pattern.variables();
  for (const auto& [name, c] : q.constraints) {
    if (std::find(vars.begin(), vars.end(), name) == vars.end()) throw UnknownVariable(name);
  }
  Naive naive(rb, limits);
  const Facts& facts = naive.run();

  AnswerTable out;
  out.columns = vars;
  out.diagnostics = naive.diagnostics;
  std::set<std::vector<Value>> rows;
  for (const auto& [pred, tuples] : facts) {
    for (const auto& t : tuples) {
      for (const auto& b : match_all(q.pattern, GroundFact{pred, t})) {
        std::vector<Value> row;
        bool keep = true;
        for (const auto& v : vars) {
          row.push_back(*b.find(v));
          keep = keep && q.accepts(v, row.back());
        }
        if (keep) rows.insert(std::move(row));
      }
    }
  }
  for (const auto& row : rows) {
    Binding b;
    for (std::size_t c = 0; c < row.size(); ++c) b.bind(vars[c], row[c]);
    out.handles.push_back(proof_handle(instantiate(q.pattern, b).text));
    out.rows.push_back(row);
  }
  return out;
}

}  // namespace ee

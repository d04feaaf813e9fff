#include "eewiki/validator.h"

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>

namespace ee {

namespace {

std::string level(Severity s) { return s == Severity::error ? "ERROR" : "WARNING"; }

void check_rule(const Rule& rule, SafetyReport& report) {
  std::set<std::string> bound;
  std::set<std::string> introduced;
  std::set<std::pair<std::string, std::string>> seen;
  auto issue = [&](Severity sev, const std::string& var, const std::string& reason) {
    if (!seen.emplace(var, reason).second) return;
    SafetyIssue i{sev, rule.id(), rule.source_span, var, reason};
    (sev == Severity::error ? report.errors : report.warnings).push_back(std::move(i));
  };
  auto lint = [&](const SentencePattern& s) {
    for (const auto& t : s.terms()) {
      if (!t.is_variable()) continue;
      if (t.introduces()) {
        introduced.insert(t.name());
      } else if (!introduced.count(t.name())) {
        issue(Severity::warning, t.name(), "that-" + t.name() + " appears before any some-" + t.name());
        introduced.insert(t.name());
      }
    }
  };

  for (const auto& p : rule.premises) {
    lint(p.sentence);
    switch (p.kind) {
      case PremiseKind::positive:
        for (const auto& v : p.sentence.variables()) bound.insert(v);
        break;
      case PremiseKind::negated:
        for (const auto& v : p.sentence.variables()) {
          if (!bound.count(v)) issue(Severity::error, v, "variable of a negated sentence is not bound by an earlier premise");
        }
        break;
      case PremiseKind::builtin:
        for (const auto& v : p.builtin->inputs()) {
          if (!bound.count(v)) issue(Severity::error, v, "builtin input is not bound by an earlier premise");
        }
        if (p.builtin->output) bound.insert(*p.builtin->output);
        break;
      case PremiseKind::aggregate:
        if (!bound.count(p.aggregate->operand)) {
          issue(Severity::error, p.aggregate->operand, "aggregate operand is not bound by an earlier premise");
        }
        bound.insert(p.aggregate->output);
        break;
    }
  }
  lint(rule.conclusion);
  for (const auto& v : rule.conclusion.variables()) {
    if (!bound.count(v)) issue(Severity::error, v, "conclusion variable does not occur in a positive premise");
  }
}

// Tarjan's strongly connected components; returns component per node, numbered
// in reverse topological order (a component's successors get smaller numbers).
std::vector<int> components(const std::vector<std::vector<std::pair<std::size_t, bool>>>& edges) {
  const std::size_t n = edges.size();
  std::vector<int> index(n, -1), low(n, 0), comp(n, -1);
  std::vector<std::size_t> stack;
  std::vector<bool> on_stack(n, false);
  int counter = 0;
  int ncomp = 0;
  std::function<void(std::size_t)> visit = [&](std::size_t v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;
    for (const auto& [w, neg] : edges[v]) {
      (void)neg;
      if (index[w] < 0) {
        visit(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      while (true) {
        const auto w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        comp[w] = ncomp;
        if (w == v) break;
      }
      ++ncomp;
    }
  };
  for (std::size_t v = 0; v < n; ++v) {
    if (index[v] < 0) visit(v);
  }
  return comp;
}

}  // namespace

std::string SafetyIssue::to_string() const {
  return level(severity) + " " + rule_id + " " + variable + " " + reason;
}

SafetyReport check_safety(const Rule& rule) {
  SafetyReport r;
  check_rule(rule, r);
  return r;
}

SafetyReport check_safety(const Rulebase& rb) {
  SafetyReport r;
  for (const auto& rule : rb.rules) check_rule(rule, r);
  return r;
}

int Stratification::of(const PredicateId& p) const {
  auto it = stratum.find(p);
  return it == stratum.end() ? 0 : it->second;
}

Stratification stratify(const Rulebase& rb, std::span<const SentencePattern> extra_headings) {
  return stratify(rb, RelationSet(rb, extra_headings));
}

Stratification stratify(const Rulebase& rb, const RelationSet& rels) {
  const std::size_t n = rels.size();
  // edges[head] = (premise relation, negative)
  std::vector<std::vector<std::pair<std::size_t, bool>>> edges(n);
  std::vector<std::vector<std::pair<std::size_t, bool>>> rule_edges(rb.rules.size());
  std::vector<std::size_t> head_of(rb.rules.size());
  for (std::size_t r = 0; r < rb.rules.size(); ++r) {
    const auto& rule = rb.rules[r];
    const auto head = *rels.find(skeleton_of(rule.conclusion));
    head_of[r] = head;
    const bool aggregate = rule.aggregate() != nullptr;
    for (const auto& p : rule.premises) {
      if (p.kind != PremiseKind::positive && p.kind != PremiseKind::negated) continue;
      const bool negative = aggregate || p.kind == PremiseKind::negated;
      for (auto target : rels.resolve(p.sentence)) {
        edges[head].emplace_back(target, negative);
        rule_edges[r].emplace_back(target, negative);
      }
    }
  }
  const auto comp = components(edges);
  int ncomp = 0;
  for (auto c : comp) ncomp = std::max(ncomp, c + 1);

  std::vector<bool> bad(static_cast<std::size_t>(ncomp), false);
  for (std::size_t v = 0; v < n; ++v) {
    for (const auto& [w, neg] : edges[v]) {
      if (neg && comp[v] == comp[w]) bad[static_cast<std::size_t>(comp[v])] = true;
    }
  }

  Stratification out;
  if (std::any_of(bad.begin(), bad.end(), [](bool b) { return b; })) {
    std::vector<std::string> witness;
    for (std::size_t r = 0; r < rb.rules.size(); ++r) {
      const int c = comp[head_of[r]];
      if (!bad[static_cast<std::size_t>(c)]) continue;
      const bool on_cycle = std::any_of(rule_edges[r].begin(), rule_edges[r].end(),
                                        [&](const auto& e) { return comp[e.first] == c; });
      if (on_cycle) witness.push_back(rb.rules[r].id());
    }
    out.cycle_witness = std::move(witness);
    return out;
  }

  // Components are numbered so that dependencies come first.
  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(ncomp));
  for (std::size_t v = 0; v < n; ++v) members[static_cast<std::size_t>(comp[v])].push_back(v);
  std::vector<int> level(static_cast<std::size_t>(ncomp), 0);
  for (int c = 0; c < ncomp; ++c) {
    int s = 0;
    for (auto v : members[static_cast<std::size_t>(c)]) {
      for (const auto& [w, neg] : edges[v]) {
        if (comp[w] == c) continue;
        s = std::max(s, level[static_cast<std::size_t>(comp[w])] + (neg ? 1 : 0));
      }
    }
    level[static_cast<std::size_t>(c)] = s;
  }
  for (std::size_t v = 0; v < n; ++v) out.stratum[rels.id(v)] = level[static_cast<std::size_t>(comp[v])];
  return out;
}

bool Validation::ok() const {
  return safety.safe() && strata.stratified() &&
         std::none_of(parse.begin(), parse.end(),
                      [](const Diagnostic& d) { return d.severity == Severity::error; });
}

std::vector<std::string> Validation::lines(bool warnings) const {
  std::vector<std::pair<std::size_t, std::string>> keyed;
  for (const auto& d : parse) {
    if (warnings || d.severity == Severity::error) keyed.emplace_back(d.lines.first, d.to_string());
  }
  for (const auto& e : safety.errors) keyed.emplace_back(e.lines.first, e.to_string());
  if (warnings) {
    for (const auto& w : safety.warnings) keyed.emplace_back(w.lines.first, w.to_string());
  }
  std::stable_sort(keyed.begin(), keyed.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::string> out;
  for (auto& [line, text] : keyed) out.push_back(std::move(text));
  if (strata.cycle_witness) {
    std::string rules;
    for (const auto& id : *strata.cycle_witness) rules += (rules.empty() ? "" : ", ") + id;
    for (const auto& id : *strata.cycle_witness) {
      out.push_back("ERROR " + id + " - conclusion depends on its own negation through " + rules);
    }
  }
  return out;
}

std::string Validation::render() const {
  std::ostringstream os;
  for (const auto& l : lines()) os << l << "\n";
  return os.str();
}

Validation validate(const Rulebase& rb) {
  Validation v;
  v.parse = rb.diagnostics;
  v.safety = check_safety(rb);
  v.strata = stratify(rb);
  return v;
}

void require_valid(const Rulebase& rb) {
  const auto v = validate(rb);
  if (v.ok()) return;
  const auto details = v.lines(false);
  if (rb.has_errors()) throw RejectedRulebase("parse_error", "the rulebase has syntax errors", details);
  if (!v.safety.safe()) throw RejectedRulebase("not_safe", "the rulebase has unsafe rules", details);
  throw RejectedRulebase("not_stratified", "a conclusion depends on its own negation", details);
}

}  // namespace ee

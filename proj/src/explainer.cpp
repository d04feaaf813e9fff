#include "eewiki/explainer.h"

#include <algorithm>

namespace ee {

namespace {

bool binding_less(const Binding& a, const Binding& b) { return a.values() < b.values(); }

std::string html_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string premise_text(const Premise& p, const Binding& b) {
  const std::string s = render_partial(p.sentence, b);
  return p.kind == PremiseKind::negated ? "not : " + s : s;
}

// Bindings extending b under which premise p holds in the model, smallest
// first. Aggregate premises are not re-derived here and never hold.
std::vector<Binding> extensions(const Model& m, const Premise& p, const Binding& b) {
  std::vector<Binding> out;
  switch (p.kind) {
    case PremiseKind::positive:
      out = m.solutions(p.sentence, b);
      std::sort(out.begin(), out.end(), binding_less);
      break;
    case PremiseKind::negated:
      if (m.solutions(p.sentence, b).empty()) out.push_back(b);
      break;
    case PremiseKind::builtin:
      try {
        if (auto e = eval_builtin(*p.builtin, b)) out.push_back(std::move(*e));
      } catch (const Error&) {
      }
      break;
    case PremiseKind::aggregate:
      break;
  }
  return out;
}

std::vector<std::string> hole_variables(const SentencePattern& s) {
  std::vector<std::string> out;
  for (const auto& t : s.terms()) {
    if (t.is_variable()) out.push_back(t.name());
  }
  return out;
}

struct Search {
  const Model& model;
  const Rule& rule;
  std::size_t budget;
  std::size_t best_prefix = 0;
  std::optional<Binding> best;

  void run(std::size_t i, const Binding& b) {
    if (!best || i > best_prefix || (i == best_prefix && binding_less(b, *best))) {
      best_prefix = i;
      best = b;
    }
    if (i == rule.premises.size()) return;
    for (const auto& e : extensions(model, rule.premises[i], b)) {
      if (budget == 0) return;
      --budget;
      run(i + 1, e);
    }
  }
};

}  // namespace

std::string_view to_string(ProofKind kind) {
  switch (kind) {
    case ProofKind::rule_step: return "rule";
    case ProofKind::table_row: return "table_row";
    case ProofKind::builtin_step: return "builtin";
    case ProofKind::negation_check: return "negation";
    case ProofKind::aggregate_step: return "aggregate";
  }
  return "?";
}

Explainer::Explainer(const Rulebase& rb, const EngineLimits& limits)
    : Explainer(evaluate_model(rb, limits)) {}

Explainer::Explainer(Model model) : model_(std::move(model)) {
  const auto& rels = model_.relations();
  for (std::size_t r = 0; r < rels.size(); ++r) {
    for (std::size_t i = 0; i < model_.size(r); ++i) {
      index_.try_emplace(proof_handle(render_fact(r, i)), Ref{r, i});
    }
  }
}

std::string Explainer::render_fact(std::size_t relation, std::size_t index) const {
  const auto args = model_.fact(relation, index);
  return model_.relations().id(relation).render(args);
}

std::string Explainer::add_leaf(ProofKind kind, std::string text) const {
  const std::string id =
      proof_handle(std::string(kind == ProofKind::negation_check ? "not:" : "builtin:") + text);
  ProofNode n;
  n.id = id;
  n.kind = kind;
  n.conclusion = std::move(text);
  cache_.try_emplace(id, std::move(n));
  return id;
}

std::string Explainer::child_for(const Premise& p, const Binding& b) const {
  switch (p.kind) {
    case PremiseKind::positive: {
      auto hit = model_.lookup(p.sentence, b);
      if (!hit) throw std::logic_error("premise of a derived fact is missing: " + p.to_string());
      return proof_handle(render_fact(hit->first, hit->second));
    }
    case PremiseKind::negated:
      return add_leaf(ProofKind::negation_check, premise_text(p, b));
    default:
      return add_leaf(ProofKind::builtin_step, premise_text(p, b));
  }
}

// Caller holds mutex_.
ProofNode Explainer::build(const Ref& ref) const {
  ProofNode n;
  n.conclusion = render_fact(ref.relation, ref.index);
  n.id = proof_handle(n.conclusion);
  n.fact = GroundFact{model_.relations().id(ref.relation), model_.fact(ref.relation, ref.index)};
  const auto origin = model_.origin(ref.relation, ref.index);
  if (origin.table_row || !origin.rule) {
    n.kind = ProofKind::table_row;
    n.table = model_.relations().exemplar(ref.relation).to_string();
    n.row = origin.table_row.value_or(0);
    return n;
  }
  const Rule& rule = model_.rulebase().rules.at(*origin.rule);
  n.rule_id = rule.id();
  if (const AggregateCall* agg = rule.aggregate()) {
    n.kind = ProofKind::aggregate_step;
    // Re-derive the contributing solutions of the group.
    std::vector<Binding> sols{origin.binding.restricted_to(hole_variables(rule.conclusion))};
    for (const auto& p : rule.premises) {
      if (p.kind == PremiseKind::aggregate) break;
      std::vector<Binding> next;
      for (const auto& b : sols) {
        for (auto& e : extensions(model_, p, b)) next.push_back(std::move(e));
      }
      sols = std::move(next);
    }
    std::sort(sols.begin(), sols.end(), binding_less);
    sols.erase(std::unique(sols.begin(), sols.end()), sols.end());
    std::vector<std::string> operands;
    for (const auto& b : sols) {
      for (const auto& p : rule.premises) {
        if (p.kind == PremiseKind::aggregate) break;
        auto id = child_for(p, b);
        if (std::find(n.children.begin(), n.children.end(), id) == n.children.end()) {
          n.children.push_back(std::move(id));
        }
      }
      if (const Value* v = b.find(agg->operand)) operands.push_back(v->text());
    }
    std::string text = origin.binding.find(agg->output)->text() + " is the " +
                       std::string(to_string(agg->fn)) + " of each " + agg->operand + ":";
    for (std::size_t i = 0; i < operands.size(); ++i) text += (i ? ", " : " ") + operands[i];
    n.children.push_back(add_leaf(ProofKind::aggregate_step, std::move(text)));
    return n;
  }
  n.kind = ProofKind::rule_step;
  for (const auto& p : rule.premises) n.children.push_back(child_for(p, origin.binding));
  return n;
}

std::optional<ProofNode> Explainer::find(const std::string& id) const {
  std::lock_guard lock(mutex_);
  if (auto it = cache_.find(id); it != cache_.end()) return it->second;
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  ProofNode n = build(it->second);
  cache_.emplace(id, n);
  return n;
}

ProofNode Explainer::node(const std::string& id) const {
  auto n = find(id);
  if (!n) throw NotFound("explanation node " + id);
  return *n;
}

ProofNode Explainer::explain(const GroundFact& fact) const {
  const auto rel = model_.relations().find(fact.predicate);
  if (rel) {
    if (auto pos = model_.find(*rel, fact.args)) return node(proof_handle(render_fact(*rel, *pos)));
  }
  throw NotDerivable(fact.render());
}

FailureNode Explainer::explain_failure(const SentencePattern& goal, std::size_t budget) const {
  if (model_.relations().readings(goal).empty()) throw UnknownPredicate(goal.to_string());
  FailureNode out;
  out.goal = goal.to_string();
  for (const auto& rule : model_.rulebase().rules) {
    const auto concl_vars = hole_variables(rule.conclusion);
    std::optional<Search> best;
    for (const auto& reading : align(goal, skeleton_of(rule.conclusion))) {
      Binding seed;
      bool ok = true;
      for (std::size_t k = 0; k < reading.holes.size() && ok; ++k) {
        if (reading.holes[k].value) ok = seed.bind(concl_vars[k], *reading.holes[k].value);
      }
      if (!ok) continue;
      Search s{model_, rule, budget, 0, std::nullopt};
      s.run(0, seed);
      if (!best || s.best_prefix > best->best_prefix ||
          (s.best_prefix == best->best_prefix && binding_less(*s.best, *best->best))) {
        best.reset();
        best.emplace(std::move(s));
      }
    }
    if (!best) continue;
    FailureAttempt a;
    a.rule_id = rule.id();
    for (std::size_t i = 0; i < rule.premises.size(); ++i) {
      auto text = premise_text(rule.premises[i], *best->best);
      (i < best->best_prefix ? a.satisfied : a.missing).push_back(std::move(text));
    }
    a.conclusion = render_partial(rule.conclusion, *best->best);
    out.attempts.push_back(std::move(a));
  }
  return out;
}

std::variant<ProofNode, FailureNode> Explainer::explain_goal(const SentencePattern& goal,
                                                             std::size_t budget) const {
  if (model_.relations().readings(goal).empty()) throw UnknownPredicate(goal.to_string());
  auto sols = model_.solutions(goal);
  if (sols.empty()) return explain_failure(goal, budget);
  std::sort(sols.begin(), sols.end(), binding_less);
  const auto hit = model_.lookup(goal, sols.front());
  return node(proof_handle(render_fact(hit->first, hit->second)));
}

void Explainer::render_text(const ProofNode& n, std::vector<std::string>& blocks,
                            std::map<std::string, bool>& seen) const {
  if (n.leaf() || seen[n.id]) return;
  seen[n.id] = true;
  std::vector<ProofNode> kids;
  std::string block;
  for (const auto& c : n.children) {
    kids.push_back(node(c));
    block += kids.back().conclusion + "\n";
  }
  block += "---\n" + n.conclusion + "\n";
  blocks.push_back(std::move(block));
  for (const auto& k : kids) render_text(k, blocks, seen);
}

void Explainer::render_html(const ProofNode& n, std::string& out, int depth) const {
  const std::string anchor = "pf-" + n.id;
  if (n.leaf()) {
    out += "<span class=\"proof-leaf " + std::string(to_string(n.kind)) + "\" id=\"" + anchor +
           "\">" + html_escape(n.conclusion) + "</span>";
    return;
  }
  out += "<details class=\"proof\" id=\"" + anchor + "\"" + (depth == 0 ? " open" : "") +
         "><summary>" + html_escape(n.conclusion) + "</summary><ol class=\"premises\">";
  for (const auto& c : n.children) {
    out += "<li>";
    if (depth < 64) {
      render_html(node(c), out, depth + 1);
    } else {
      out += "<a href=\"#pf-" + c + "\">" + html_escape(node(c).conclusion) + "</a>";
    }
    out += "</li>";
  }
  out += "</ol><hr class=\"rule-line\"><p class=\"conclusion\">" + html_escape(n.conclusion) +
         "</p></details>";
}

std::string Explainer::render(const ProofNode& root, Format format) const {
  if (format == Format::html) {
    std::string out;
    render_html(root, out, 0);
    return out + "\n";
  }
  if (root.leaf()) return root.conclusion + "\n";
  std::vector<std::string> blocks;
  std::map<std::string, bool> seen;
  render_text(root, blocks, seen);
  std::string out;
  for (std::size_t i = 0; i < blocks.size(); ++i) out += (i ? "\n" : "") + blocks[i];
  return out;
}

std::string Explainer::render(const FailureNode& f, Format format) {
  std::string out;
  if (format == Format::html) {
    out = "<div class=\"failure\">";
    for (const auto& a : f.attempts) {
      out += "<div class=\"attempt\" data-rule=\"" + a.rule_id + "\">";
      for (const auto& s : a.satisfied) out += "<p class=\"premise\">" + html_escape(s) + "</p>";
      for (const auto& s : a.missing) {
        out += "<p class=\"premise missing\">" + html_escape(s) + " <em>[missing]</em></p>";
      }
      out += "<hr class=\"rule-line\"><p class=\"conclusion not-shown\">" +
             html_escape(a.conclusion) + " <em>[not shown]</em></p></div>";
    }
    if (f.attempts.empty()) {
      out += "<p class=\"conclusion not-shown\">" + html_escape(f.goal) + " <em>[not shown]</em></p>";
    }
    return out + "</div>\n";
  }
  if (f.attempts.empty()) return f.goal + " [not shown]\n";
  for (std::size_t i = 0; i < f.attempts.size(); ++i) {
    const auto& a = f.attempts[i];
    if (i) out += "\n";
    for (const auto& s : a.satisfied) out += s + "\n";
    for (const auto& s : a.missing) out += s + " [missing]\n";
    out += "---\n" + a.conclusion + " [not shown]\n";
  }
  return out;
}

ProofNode explain(const Rulebase& rb, const GroundFact& fact) { return Explainer(rb).explain(fact); }

FailureNode explain_failure(const Rulebase& rb, const SentencePattern& goal, std::size_t budget) {
  return Explainer(rb).explain_failure(goal, budget);
}

}  // namespace ee

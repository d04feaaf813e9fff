#pragma once

// Step-by-step English explanations. A proof node shows the premises used,
// a rule line, and the conclusion; every node has a stable id (a hash of
// its rendered conclusion) so a client can drill down one node at a time.
// For goals that do not hold, a failure node lists, per rule, how far the
// premises could be satisfied and which ones are missing.

#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "eewiki/engine.h"

namespace ee {

enum class ProofKind { rule_step, table_row, builtin_step, negation_check, aggregate_step };
std::string_view to_string(ProofKind kind);

struct ProofNode {
  std::string id;
  ProofKind kind = ProofKind::table_row;
  // The rendered sentence; "600 / 1000 = 0.6" for builtins, "not : ..." for
  // negation checks.
  std::string conclusion;
  std::optional<GroundFact> fact;     // rule, aggregate and table nodes
  std::string rule_id;                // rule and aggregate nodes
  std::string table;                  // table rows: the heading
  std::size_t row = 0;
  std::vector<std::string> children;  // premise order

  bool leaf() const noexcept { return children.empty(); }
};

struct FailureAttempt {
  std::string rule_id;
  std::vector<std::string> satisfied;  // leading premises that hold
  std::vector<std::string> missing;    // the rest, unbound variables as some-name
  std::string conclusion;
};

struct FailureNode {
  std::string goal;
  std::vector<FailureAttempt> attempts;
};

enum class Format { text, html };

class Explainer {
 public:
  explicit Explainer(Model model);
  explicit Explainer(const Rulebase& rb, const EngineLimits& limits = {});

  const Model& model() const noexcept { return model_; }

  // Throws NotDerivable when the fact is not in the model.
  ProofNode explain(const GroundFact& fact) const;
  // Any node reachable from a fact in the model. Throws NotFound.
  ProofNode node(const std::string& id) const;
  std::optional<ProofNode> find(const std::string& id) const;

  // Goal may contain variables; they stay open. Throws UnknownPredicate
  // when no rule or table defines the goal.
  FailureNode explain_failure(const SentencePattern& goal, std::size_t budget = 10000) const;
  // A proof of the smallest instance of goal that holds, else the failure.
  std::variant<ProofNode, FailureNode> explain_goal(const SentencePattern& goal,
                                                    std::size_t budget = 10000) const;

  std::string render(const ProofNode& root, Format format = Format::text) const;
  static std::string render(const FailureNode& failure, Format format = Format::text);

 private:
  struct Ref {
    std::size_t relation;
    std::size_t index;
  };

  ProofNode build(const Ref& ref) const;
  std::string render_fact(std::size_t relation, std::size_t index) const;
  std::string add_leaf(ProofKind kind, std::string text) const;
  std::string child_for(const Premise& p, const Binding& b) const;
  void render_text(const ProofNode& n, std::vector<std::string>& blocks,
                   std::map<std::string, bool>& seen) const;
  void render_html(const ProofNode& n, std::string& out, int depth) const;

  Model model_;
  std::map<std::string, Ref> index_;
  mutable std::mutex mutex_;
  mutable std::map<std::string, ProofNode> cache_;
};

ProofNode explain(const Rulebase& rb, const GroundFact& fact);
FailureNode explain_failure(const Rulebase& rb, const SentencePattern& goal,
                            std::size_t budget = 10000);

}  // namespace ee

#pragma once

// The relations a rulebase defines: one per distinct skeleton among table
// headings and rule conclusions (plus any extra headings supplied by a
// table mapping). A premise or query sentence denotes every relation it can
// be read as, see align().

#include <optional>
#include <span>
#include <vector>

#include "eewiki/rulebook.h"

namespace ee {

struct Reading {
  std::size_t relation;
  Alignment alignment;
};

class RelationSet {
 public:
  RelationSet() = default;
  RelationSet(const Rulebase& rb, std::span<const SentencePattern> extra_headings = {});

  std::size_t size() const noexcept { return ids_.size(); }
  // Sorted by skeleton key, so independent of rule order.
  const PredicateId& id(std::size_t i) const { return ids_.at(i); }
  // A sentence spelling the relation: its table heading, else the first conclusion.
  const SentencePattern& exemplar(std::size_t i) const { return exemplars_.at(i); }
  bool has_table(std::size_t i) const { return has_table_.at(i); }
  bool has_rules(std::size_t i) const { return has_rules_.at(i); }
  std::optional<std::size_t> find(const PredicateId& id) const;

  std::vector<Reading> readings(const SentencePattern& sentence) const;
  // Distinct relations among readings(), ascending.
  std::vector<std::size_t> resolve(const SentencePattern& sentence) const;

 private:
  std::vector<PredicateId> ids_;
  std::vector<SentencePattern> exemplars_;
  std::vector<bool> has_table_;
  std::vector<bool> has_rules_;
};

}  // namespace ee

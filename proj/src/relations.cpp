#include "eewiki/relations.h"

#include <algorithm>
#include <map>

namespace ee {

RelationSet::RelationSet(const Rulebase& rb, std::span<const SentencePattern> extra_headings) {
  struct Entry {
    SentencePattern exemplar;
    bool table = false;
    bool rules = false;
  };
  std::map<PredicateId, Entry> found;
  for (const auto& t : rb.tables) {
    auto& e = found[t.predicate()];
    e.exemplar = t.heading;
    e.table = true;
  }
  for (const auto& h : extra_headings) {
    auto [it, fresh] = found.try_emplace(skeleton_of(h));
    if (fresh) it->second.exemplar = h;
    it->second.table = true;
  }
  for (const auto& r : rb.rules) {
    auto [it, fresh] = found.try_emplace(skeleton_of(r.conclusion));
    if (fresh) it->second.exemplar = r.conclusion;
    it->second.rules = true;
  }
  for (auto& [id, e] : found) {
    ids_.push_back(id);
    exemplars_.push_back(std::move(e.exemplar));
    has_table_.push_back(e.table);
    has_rules_.push_back(e.rules);
  }
}

std::optional<std::size_t> RelationSet::find(const PredicateId& id) const {
  auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
  if (it == ids_.end() || !(*it == id)) return std::nullopt;
  return static_cast<std::size_t>(it - ids_.begin());
}

std::vector<Reading> RelationSet::readings(const SentencePattern& sentence) const {
  std::vector<Reading> out;
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    for (auto& a : align(sentence, ids_[i])) out.push_back({i, std::move(a)});
  }
  return out;
}

std::vector<std::size_t> RelationSet::resolve(const SentencePattern& sentence) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (aligns(sentence, ids_[i])) out.push_back(i);
  }
  return out;
}

}  // namespace ee

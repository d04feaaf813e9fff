#include "eewiki/menu.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>

namespace ee {

namespace {

MenuEntry entry_for(const RelationSet& rels, std::size_t r) {
  return MenuEntry{rels.id(r), generalize(rels, r)};
}

bool by_text(const MenuEntry& a, const MenuEntry& b) { return a.text() < b.text(); }

}  // namespace

SentencePattern generalize(const RelationSet& rels, std::size_t r) {
  std::vector<std::string> names;
  std::set<std::string> used;
  for (const auto& t : rels.exemplar(r).terms()) {
    if (!t.is_variable()) continue;
    std::string name = t.name();
    for (int k = 2; used.count(name); ++k) name = t.name() + std::to_string(k);
    used.insert(name);
    names.push_back(std::move(name));
  }
  return parse_sentence(rels.id(r).generalized(names));
}

std::vector<MenuLayer> build_menu(const Rulebase& rb) {
  const RelationSet rels(rb);
  const std::size_t n = rels.size();
  // premises[r]: relations the rules concluding r read.
  std::vector<std::set<std::size_t>> premises(n);
  std::vector<bool> used(n, false);
  for (const auto& rule : rb.rules) {
    const auto head = rels.find(skeleton_of(rule.conclusion));
    for (const auto& p : rule.premises) {
      if (p.kind != PremiseKind::positive && p.kind != PremiseKind::negated) continue;
      for (auto d : rels.resolve(p.sentence)) {
        used[d] = true;
        if (head) premises[*head].insert(d);
      }
    }
  }
  const auto headings_only = [&](std::size_t r) { return rels.has_table(r) && !rels.has_rules(r); };

  std::vector<int> layer(n, -1);
  std::vector<std::size_t> frontier;
  for (std::size_t r = 0; r < n; ++r) {
    if (!used[r] && !headings_only(r)) {
      layer[r] = 0;
      frontier.push_back(r);
    }
  }
  int depth = 0;
  while (!frontier.empty()) {
    std::vector<std::size_t> next;
    for (auto r : frontier) {
      for (auto d : premises[r]) {
        if (layer[d] < 0 && !headings_only(d)) {
          layer[d] = depth + 1;
          next.push_back(d);
        }
      }
    }
    if (!next.empty()) ++depth;
    frontier = std::move(next);
  }
  // Relations only reachable through cycles, then the table headings.
  bool unplaced = false;
  for (std::size_t r = 0; r < n; ++r) {
    if (layer[r] < 0 && !headings_only(r)) {
      layer[r] = depth + 1;
      unplaced = true;
    }
  }
  const int last = depth + (unplaced ? 2 : 1);
  for (std::size_t r = 0; r < n; ++r) {
    if (layer[r] < 0) layer[r] = last;
  }

  std::map<int, std::vector<MenuEntry>> grouped;
  for (std::size_t r = 0; r < n; ++r) grouped[layer[r]].push_back(entry_for(rels, r));
  std::vector<MenuLayer> out;
  for (auto& [k, entries] : grouped) {
    std::sort(entries.begin(), entries.end(), by_text);
    out.push_back(MenuLayer{static_cast<int>(out.size()), std::move(entries)});
  }
  return out;
}

std::vector<std::string> search_words(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (unsigned char c : text) {
    if (std::isalnum(c) || c == '_') {
      cur += static_cast<char>(std::tolower(c));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::vector<RankedEntry> search(const Rulebase& rb, std::string_view text) {
  const RelationSet rels(rb);
  const std::size_t n = rels.size();
  std::vector<std::map<std::string, double>> tf(n);
  std::map<std::string, int> df;
  for (std::size_t r = 0; r < n; ++r) {
    for (const auto& part : rels.id(r).parts()) {
      if (part.hole) continue;
      for (auto& w : search_words(part.text)) tf[r][w] += 1;
    }
    for (const auto& [w, c] : tf[r]) ++df[w];
  }
  const auto idf = [&](const std::string& w) {
    auto it = df.find(w);
    const double d = it == df.end() ? 0 : it->second;
    return std::log((n + 1.0) / (d + 1.0)) + 1.0;
  };
  // Placeholders typed into the query carry no words.
  std::string constants;
  if (!search_words(text).empty()) {
    const auto sentence = parse_sentence(text);
    for (const auto& t : sentence.terms()) {
      if (t.is_constant()) constants += t.text() + " ";
    }
  }
  std::map<std::string, double> q;
  for (auto& w : search_words(constants)) q[w] += 1;
  double qnorm = 0;
  for (auto& [w, c] : q) {
    c *= idf(w);
    qnorm += c * c;
  }
  qnorm = std::sqrt(qnorm);

  std::vector<RankedEntry> out;
  for (std::size_t r = 0; r < n; ++r) {
    double dot = 0;
    double dnorm = 0;
    for (const auto& [w, c] : tf[r]) {
      const double x = c * idf(w);
      dnorm += x * x;
      if (auto it = q.find(w); it != q.end()) dot += x * it->second;
    }
    dnorm = std::sqrt(dnorm);
    const double score = (qnorm > 0 && dnorm > 0) ? dot / (qnorm * dnorm) : 0.0;
    out.push_back(RankedEntry{entry_for(rels, r), score});
  }
  std::sort(out.begin(), out.end(), [](const RankedEntry& a, const RankedEntry& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.entry.text() < b.entry.text();
  });
  return out;
}

Query specialize(const SentencePattern& pattern,
                 const std::vector<std::pair<std::string, Constraint>>& edits) {
  const auto vars = pattern.variables();
  for (const auto& [name, c] : edits) {
    if (std::find(vars.begin(), vars.end(), name) == vars.end()) throw UnknownVariable(name);
  }
  return Query{pattern, edits};
}

}  // namespace ee

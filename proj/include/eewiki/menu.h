#pragma once

// Question discovery. The menu shows generalized sentences in layers: first
// the conclusions nothing else builds on, then the premises of those rules,
// and so on; table headings come last. search() ranks sentences against
// free text; specialize() turns a chosen sentence into a query.

#include <string>
#include <vector>

#include "eewiki/engine.h"

namespace ee {

struct MenuEntry {
  PredicateId predicate;
  SentencePattern pattern;  // placeholders spelled some-name

  std::string text() const { return pattern.to_string(); }
};

struct MenuLayer {
  int rank = 0;
  std::vector<MenuEntry> entries;  // ordered by text
};

std::vector<MenuLayer> build_menu(const Rulebase& rb);

// The relation's sentence with a distinct some- placeholder per hole, named
// after the exemplar's variables.
SentencePattern generalize(const RelationSet& rels, std::size_t r);

struct RankedEntry {
  MenuEntry entry;
  double score = 0;
};

// Cosine similarity of idf-weighted lowercase words of each sentence's
// constant tokens against the words of text. Best first, ties by text.
std::vector<RankedEntry> search(const Rulebase& rb, std::string_view text);

// Lowercase alphanumeric words ('_' included).
std::vector<std::string> search_words(std::string_view text);

// Throws UnknownVariable for an edit naming a variable not in pattern.
Query specialize(const SentencePattern& pattern,
                 const std::vector<std::pair<std::string, Constraint>>& edits);

}  // namespace ee

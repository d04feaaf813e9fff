#include <gtest/gtest.h>

#include <set>

#include "eewiki/menu.h"
#include "support.h"

using namespace ee;
using ee::testing::load_fixture;

namespace {

const char* kFraction =
    "for estimated demand some-id some-fraction of the order will be some-product from some-refinery";
const char* kAuthors = "some-name is an author , with email some-email , of some-title";

const std::vector<std::string> kFixtures = {"semantic_resolution.ee", "rdf_authors.ee",
                                            "owl_all_different.ee", "oil_supply.ee", "part_of.ee"};

std::vector<std::string> texts(const MenuLayer& layer) {
  std::vector<std::string> out;
  for (const auto& e : layer.entries) out.push_back(e.text());
  return out;
}

}  // namespace

TEST(Menu, OilLayerZeroIsTheFraction) {
  const auto menu = build_menu(parse_rulebase(load_fixture("oil_supply.ee")));
  ASSERT_FALSE(menu.empty());
  EXPECT_EQ(menu[0].rank, 0);
  EXPECT_EQ(texts(menu[0]), std::vector<std::string>{kFraction});
  ASSERT_EQ(menu.size(), 3u);
  EXPECT_EQ(menu[1].entries.size(), 2u);
  EXPECT_EQ(menu[2].entries.size(), 5u);
}

TEST(Menu, AuthorsThenTriples) {
  const auto menu = build_menu(parse_rulebase(load_fixture("rdf_authors.ee")));
  ASSERT_EQ(menu.size(), 2u);
  EXPECT_EQ(texts(menu[0]), std::vector<std::string>{kAuthors});
  EXPECT_EQ(texts(menu[1]),
            std::vector<std::string>{"some-subject is related by some-predicate to some-object"});
}

TEST(Menu, EveryRelationExactlyOnce) {
  for (const auto& name : kFixtures) {
    const auto rb = parse_rulebase(load_fixture(name));
    const RelationSet rels(rb);
    std::set<PredicateId> seen;
    std::size_t total = 0;
    for (const auto& layer : build_menu(rb)) {
      for (const auto& e : layer.entries) {
        EXPECT_TRUE(seen.insert(e.predicate).second) << name << ": " << e.text();
        ++total;
      }
    }
    EXPECT_EQ(total, rels.size()) << name;
  }
}

TEST(Menu, LayerZeroIsNotUsedAsAPremise) {
  for (const auto& name : kFixtures) {
    const auto rb = parse_rulebase(load_fixture(name));
    const RelationSet rels(rb);
    std::set<std::size_t> used;
    for (const auto& r : rb.rules) {
      for (const auto& p : r.premises) {
        if (p.kind != PremiseKind::positive && p.kind != PremiseKind::negated) continue;
        for (auto rel : rels.resolve(p.sentence)) used.insert(rel);
      }
    }
    const auto menu = build_menu(rb);
    ASSERT_FALSE(menu.empty()) << name;
    for (const auto& e : menu[0].entries) {
      const auto rel = rels.find(e.predicate);
      ASSERT_TRUE(rel);
      EXPECT_FALSE(used.count(*rel)) << name << ": " << e.text();
      EXPECT_TRUE(rels.has_rules(*rel)) << name << ": " << e.text();
    }
  }
}

TEST(Menu, RanksIncreaseAndEntriesAreSorted) {
  for (const auto& name : kFixtures) {
    const auto menu = build_menu(parse_rulebase(load_fixture(name)));
    for (std::size_t i = 0; i < menu.size(); ++i) {
      EXPECT_EQ(menu[i].rank, static_cast<int>(i)) << name;
      const auto t = texts(menu[i]);
      EXPECT_TRUE(std::is_sorted(t.begin(), t.end())) << name;
      EXPECT_FALSE(t.empty()) << name;
    }
  }
}

TEST(Menu, PureTablesComeLast) {
  const auto rb = parse_rulebase(load_fixture("oil_supply.ee"));
  const RelationSet rels(rb);
  const auto menu = build_menu(rb);
  for (const auto& e : menu.back().entries) {
    EXPECT_FALSE(rels.has_rules(*rels.find(e.predicate))) << e.text();
  }
  for (std::size_t i = 0; i + 1 < menu.size(); ++i) {
    for (const auto& e : menu[i].entries) EXPECT_TRUE(rels.has_rules(*rels.find(e.predicate)));
  }
}

TEST(Menu, EmptyRulebase) { EXPECT_TRUE(build_menu(parse_rulebase("")).empty()); }

TEST(Menu, TablesOnly) {
  const auto menu = build_menu(parse_rulebase("h of some-a\n===\n1\n"));
  ASSERT_EQ(menu.size(), 1u);
  EXPECT_EQ(texts(menu[0]), std::vector<std::string>{"h of some-a"});
}

TEST(Generalize, RepeatedPlaceholdersBecomeDistinct) {
  const auto rb = parse_rulebase("p of some-x\n-----\nq of that-x and that-x\n\np of some-a\n===\n1\n");
  const RelationSet rels(rb);
  std::vector<std::string> all;
  for (std::size_t r = 0; r < rels.size(); ++r) all.push_back(generalize(rels, r).to_string());
  EXPECT_NE(std::find(all.begin(), all.end(), "q of some-x and some-x2"), all.end());
}

TEST(Search, AuthorsEmailRanksTheAuthorsSentenceFirst) {
  const auto r = search(parse_rulebase(load_fixture("rdf_authors.ee")), "authors email");
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0].entry.text(), kAuthors);
  EXPECT_GT(r[0].score, 0.0);
  EXPECT_EQ(r[1].score, 0.0);
}

TEST(Search, ScoresAreDescending) {
  const auto r = search(parse_rulebase(load_fixture("oil_supply.ee")), "refinery gallons season");
  ASSERT_FALSE(r.empty());
  for (std::size_t i = 1; i < r.size(); ++i) {
    EXPECT_GE(r[i - 1].score, r[i].score);
    if (r[i - 1].score == r[i].score) EXPECT_LT(r[i - 1].entry.text(), r[i].entry.text());
  }
}

TEST(Search, NoOverlapKeepsTextualOrder) {
  const auto r = search(parse_rulebase(load_fixture("oil_supply.ee")), "zebra");
  ASSERT_EQ(r.size(), 8u);
  for (std::size_t i = 0; i < r.size(); ++i) EXPECT_EQ(r[i].score, 0.0);
  for (std::size_t i = 1; i < r.size(); ++i) EXPECT_LT(r[i - 1].entry.text(), r[i].entry.text());
}

TEST(Search, ASentenceFindsItselfFirst) {
  for (const auto& name : kFixtures) {
    const auto rb = parse_rulebase(load_fixture(name));
    for (const auto& layer : build_menu(rb)) {
      for (const auto& e : layer.entries) {
        // Only constant words are indexed; the skeleton spells exactly those.
        const auto r = search(rb, skeleton_of(e.pattern).to_string());
        ASSERT_FALSE(r.empty());
        EXPECT_NEAR(r[0].score, 1.0, 1e-9) << name << ": " << e.text();
        // Several sentences may share every constant word; this one is among them.
        bool found = false;
        for (const auto& x : r) found = found || (x.score == r[0].score && x.entry.text() == e.text());
        EXPECT_TRUE(found) << name << ": " << e.text();
      }
    }
  }
}

TEST(SearchWords, LowercaseAlphanumeric) {
  EXPECT_EQ(search_words("Authors, e-mail part_of 42!"),
            (std::vector<std::string>{"authors", "e", "mail", "part_of", "42"}));
  EXPECT_TRUE(search_words(" ,;- ").empty());
}

TEST(Specialize, ConstraintsByVariable) {
  const auto q = specialize(parse_sentence(kAuthors), {{"name", Equals{Value("Jeen Broekstra")}}});
  EXPECT_EQ(q.pattern.to_string(), kAuthors);
  ASSERT_EQ(q.constraints.size(), 1u);
  EXPECT_TRUE(q.accepts("name", Value("Jeen Broekstra")));
  EXPECT_FALSE(q.accepts("name", Value("Adrian Walker")));
  const auto t = solve(parse_rulebase(load_fixture("rdf_authors.ee")), q);
  EXPECT_EQ(t.rows.size(), 1u);
}

TEST(Specialize, UnknownVariable) {
  try {
    specialize(parse_sentence(kAuthors), {{"colour", Equals{Value("red")}}});
    FAIL() << "expected UnknownVariable";
  } catch (const UnknownVariable& e) {
    EXPECT_EQ(e.name(), "colour");
    EXPECT_EQ(e.code(), "unknown_variable");
  }
}

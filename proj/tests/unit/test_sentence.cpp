#include <gtest/gtest.h>

#include <random>

#include "eewiki/errors.h"
#include "eewiki/sentence.h"

using namespace ee;

TEST(Decimal, ParsesAndPrintsExactly) {
  EXPECT_EQ(Decimal::parse("0.60")->to_string(), "0.60");
  EXPECT_EQ(Decimal::parse("-12.5")->to_string(), "-12.5");
  EXPECT_EQ(Decimal::parse(".5")->to_string(), "0.5");
  EXPECT_FALSE(Decimal::parse("1e3"));
  EXPECT_FALSE(Decimal::parse("12a"));
  EXPECT_FALSE(Decimal::parse(""));
}

TEST(Decimal, ArithmeticIsExact) {
  const auto a = *Decimal::parse("0.1");
  const auto b = *Decimal::parse("0.2");
  EXPECT_EQ(a + b, *Decimal::parse("0.3"));
  EXPECT_EQ((*Decimal::parse("600") - *Decimal::parse("0.25")).to_string(), "599.75");
  EXPECT_EQ((*Decimal::parse("1.5") * *Decimal::parse("-2")).normalized().to_string(), "-3");
  EXPECT_EQ(Decimal::divide(Decimal(600), Decimal(1000)).normalized().to_string(), "0.6");
}

TEST(Decimal, RoundsHalfAwayFromZero) {
  EXPECT_EQ(Decimal::parse("0.6666")->rounded(2).to_string(), "0.67");
  EXPECT_EQ(Decimal::parse("2.675")->rounded(2).to_string(), "2.68");
  EXPECT_EQ(Decimal::parse("0.125")->rounded(2).to_string(), "0.13");
  EXPECT_EQ(Decimal::parse("-2.5")->rounded(0).to_string(), "-3");
  EXPECT_EQ(Decimal::parse("0.6")->rounded(2).to_string(), "0.60");
}

TEST(Value, NumericEqualityIgnoresSpelling) {
  EXPECT_EQ(Value("0.60"), Value("0.6"));
  EXPECT_EQ(Value("1.0"), Value("1"));
  EXPECT_NE(Value("Fred"), Value("fred"));
  EXPECT_TRUE(Value("-3").is_numeric());
  EXPECT_FALSE(Value("3 gallons").is_numeric());
  EXPECT_EQ(Value("0.60").hash(), Value("0.6").hash());
  EXPECT_LT(Value("9"), Value("10"));
  EXPECT_LT(Value("10"), Value("a"));
}

TEST(ParseSentence, ClassifiesVariables) {
  const auto p = parse_sentence("some-paper is related by fact#:title to some-title");
  EXPECT_EQ(p.size(), 7u);
  EXPECT_EQ(p.variables(), (std::vector<std::string>{"paper", "title"}));
  EXPECT_EQ(skeleton_of(p).to_string(), "○ is related by fact#:title to ○");
  EXPECT_EQ(skeleton_of(p).arity(), 2u);
}

TEST(ParseSentence, ConstantsOnly) {
  const auto p = parse_sentence("Socrates is mortal");
  EXPECT_EQ(p.size(), 3u);
  EXPECT_TRUE(p.variables().empty());
  EXPECT_TRUE(p.is_ground());
}

TEST(ParseSentence, ArithmeticForm) {
  const auto p = parse_sentence("that-amount / that-total = some-long-fraction");
  EXPECT_EQ(p.size(), 5u);
  EXPECT_EQ(p.variables(), (std::vector<std::string>{"amount", "total", "long-fraction"}));
  EXPECT_FALSE(p.terms()[0].introduces());
  EXPECT_TRUE(p.terms()[4].introduces());
}

TEST(ParseSentence, NormalizesWhitespaceAndRejectsBlank) {
  EXPECT_EQ(parse_sentence("  a \t b  c ").to_string(), "a b c");
  EXPECT_EQ(split_tokens("x y").size(), 2u);
  EXPECT_THROW(parse_sentence(" \t "), EmptySentence);
  EXPECT_THROW(parse_sentence(""), EmptySentence);
}

TEST(ParseSentence, QuantifierTextIsConstant) {
  const auto p = parse_sentence("(A c,t) [that-C c t => (E c1) [that-C1 c1 t and c part_of c1 at t]]");
  EXPECT_EQ(p.terms()[0].text(), "(A");
  EXPECT_TRUE(p.terms()[0].is_constant());
  EXPECT_EQ(p.variables(), (std::vector<std::string>{"C", "C1"}));
  EXPECT_EQ(p.terms()[1].text(), "c,t)");
}

TEST(Skeleton, NamesErasedCaseKept) {
  const auto a = skeleton_of(parse_sentence("some-x likes some-y"));
  const auto b = skeleton_of(parse_sentence("some-a likes that-b"));
  const auto c = skeleton_of(parse_sentence("some-x Likes some-y"));
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.arity(), 2u);
  EXPECT_NE(a, c);
}

TEST(Skeleton, TwoPremiseConclusionHasArityThree) {
  const auto p = parse_sentence(
      "the retailer term that-item1 and the manufacturer term that-item2 agree - they are of type "
      "that-class");
  EXPECT_EQ(skeleton_of(p).arity(), 3u);
}

TEST(Match, BindsHoles) {
  const auto p = parse_sentence("some-paper is related by fact#:title to some-title");
  const GroundFact f{skeleton_of(p), {Value("Paper"), Value("An Overview of RDF Query Languages")}};
  const auto b = match(p, f);
  ASSERT_TRUE(b);
  EXPECT_EQ(b->find("paper")->text(), "Paper");
  EXPECT_EQ(b->find("title")->text(), "An Overview of RDF Query Languages");
}

TEST(Match, GroundAndRepeatedVariables) {
  const auto g = parse_sentence("Socrates is mortal");
  const auto b = match(g, GroundFact{skeleton_of(g), {}});
  ASSERT_TRUE(b);
  EXPECT_TRUE(b->empty());

  const auto rep = parse_sentence("some-x equals some-x");
  EXPECT_FALSE(match(rep, GroundFact{skeleton_of(rep), {Value("a"), Value("b")}}));
  EXPECT_TRUE(match(rep, GroundFact{skeleton_of(rep), {Value("a"), Value("a")}}));
  const auto other = parse_sentence("some-x differs from some-y");
  EXPECT_FALSE(match(other, GroundFact{skeleton_of(rep), {Value("a"), Value("a")}}));
}

TEST(Match, ConstantInHolePosition) {
  const auto heading = parse_sentence("some-s is related by some-p to some-o");
  const auto premise = parse_sentence("some-x is related by fact#:name to some-n");
  const GroundFact f{skeleton_of(heading), {Value("u"), Value("fact#:name"), Value("Jeen Broekstra")}};
  const auto b = match(premise, f);
  ASSERT_TRUE(b);
  EXPECT_EQ(b->find("n")->text(), "Jeen Broekstra");
  const GroundFact g{skeleton_of(heading), {Value("u"), Value("fact#:email"), Value("x")}};
  EXPECT_FALSE(match(premise, g));
}

TEST(Instantiate, RendersAuthorsConclusion) {
  const auto p = parse_sentence("that-name is an author , with email that-email , of that-title");
  Binding b;
  b.bind("name", Value("Jeen Broekstra"));
  b.bind("email", Value("jbroeks@cs.vu.nl"));
  b.bind("title", Value("An Overview of RDF Query Languages"));
  EXPECT_EQ(instantiate(p, b).text,
            "Jeen Broekstra is an author , with email jbroeks@cs.vu.nl , of An Overview of RDF Query "
            "Languages");
  Binding partial;
  partial.bind("name", Value("x"));
  partial.bind("email", Value("y"));
  try {
    instantiate(p, partial);
    FAIL();
  } catch (const UnboundVariable& e) {
    EXPECT_EQ(e.name(), "title");
  }
  const auto g = parse_sentence("Socrates is mortal");
  EXPECT_EQ(instantiate(g, {}).text, "Socrates is mortal");
}

TEST(Instantiate, RoundTripProperty) {
  std::mt19937 rng(7);
  const std::vector<std::string> words = {"alpha", "beta", "x", "of", "is", "some-a", "some-b",
                                          "that-a", "some-c"};
  const std::vector<std::string> values = {"1", "0.50", "Jeen Broekstra", "a b c", "z"};
  for (int i = 0; i < 500; ++i) {
    std::string s;
    const int n = 1 + static_cast<int>(rng() % 6);
    for (int k = 0; k < n; ++k) s += (k ? " " : "") + words[rng() % words.size()];
    const auto p = parse_sentence(s);
    Binding b;
    for (const auto& v : p.variables()) b.bind(v, Value(values[rng() % values.size()]));
    const auto inst = instantiate(p, b);
    const auto back = match(p, inst.fact);
    ASSERT_TRUE(back) << s;
    EXPECT_EQ(*back, b.restricted_to(p.variables())) << s;
    if (p.is_ground()) EXPECT_EQ(skeleton_of(parse_sentence(inst.text)), skeleton_of(p));
  }
}

TEST(Binding, RejectsConflicts) {
  Binding b;
  EXPECT_TRUE(b.bind("x", Value("1")));
  EXPECT_TRUE(b.bind("x", Value("1.0")));
  EXPECT_FALSE(b.bind("x", Value("2")));
  EXPECT_EQ(b.find("x")->text(), "1");
  EXPECT_EQ(b.find("y"), nullptr);
}

TEST(RenderPartial, KeepsOpenVariables) {
  const auto p = parse_sentence("some-name is an author , with email some-email , of some-title");
  Binding b;
  b.bind("name", Value("Adrian Walker"));
  EXPECT_EQ(render_partial(p, b),
            "Adrian Walker is an author , with email some-email , of some-title");
}

#include "support.h"

#include <algorithm>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include "eewiki/menu.h"

#ifndef EEWIKI_TEST_DATA
#error "EEWIKI_TEST_DATA must name the tests directory"
#endif

namespace ee::testing {

std::string fixture_path(const std::string& name) {
  return std::string(EEWIKI_TEST_DATA) + "/fixtures/" + name;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string load_fixture(const std::string& name) { return read_text(fixture_path(name)); }

std::string load_golden(const std::string& name) {
  return read_text(std::string(EEWIKI_TEST_DATA) + "/golden/" + name);
}

std::vector<std::string> relation_queries(const Rulebase& rb) {
  const RelationSet rels(rb);
  std::vector<std::string> out;
  for (std::size_t r = 0; r < rels.size(); ++r) out.push_back(generalize(rels, r).to_string());
  return out;
}

std::string rows_text(const AnswerTable& t) {
  std::string s;
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) s += (i ? " | " : "") + row[i].text();
    s += "\n";
  }
  return s;
}

std::set<std::pair<std::string, std::string>> brute_force_part_of(const Rulebase& rb) {
  const auto* inst = rb.table_for(skeleton_of(parse_sentence("some-c is an instance of some-C at some-t")));
  const auto* part = rb.table_for(skeleton_of(parse_sentence("some-c is part_of some-c1 at some-t")));
  std::set<std::pair<std::string, std::string>> out;
  if (!inst) return out;
  std::set<std::string> classes;
  for (const auto& r : inst->rows) classes.insert(r[1].text());
  const auto is_part = [&](const Value& c, const Value& c1, const Value& t) {
    if (!part) return false;
    return std::any_of(part->rows.begin(), part->rows.end(), [&](const auto& r) {
      return r[0] == c && r[1] == c1 && r[2] == t;
    });
  };
  for (const auto& C : classes) {
    for (const auto& C1 : classes) {
      if (C == C1) continue;
      bool all = true;
      for (const auto& a : inst->rows) {
        if (a[1].text() != C) continue;
        bool some = false;
        for (const auto& b : inst->rows) {
          if (b[1].text() == C1 && b[2] == a[2] && is_part(a[0], b[0], a[2])) some = true;
        }
        all = all && some;
      }
      if (all) out.emplace(C, C1);
    }
  }
  return out;
}

std::string random_oil_instance(std::uint64_t seed, int* refineries) {
  const std::string fixture = load_fixture("oil_supply.ee");
  const auto first_table = fixture.find("\n===\n");
  const auto rules_end = fixture.rfind("\n\n", first_table);
  std::string text = fixture.substr(0, rules_end) + "\n\n";

  std::mt19937_64 rng(seed);
  const auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  const int n = pick(1, 6);
  if (refineries) *refineries = n;
  text += "Estimated demand some-id in some-region is for some-quantity gallons of some-finished-product "
          "in some-month of some-year\n===\nd1 | NJ | 1000 | y | October | 2006\n\n";
  text += "refinery some-refinery is in region some-region\n===\n";
  for (int i = 1; i <= n; ++i) text += "R" + std::to_string(i) + " | " + (i == 1 || pick(0, 3) ? "NJ" : "TX") + "\n";
  text += "\nsome-month is in season some-season\n===\nOctober | fall\n\n";
  text += "product some-product can substitute for some-finished-product in season some-season\n===\n"
          "x | y | fall\nz | y | fall\n\n";
  text += "refinery some-refinery has some-amount gallons of some-product\n===\n";
  static const char* products[] = {"x", "y", "z", "w"};
  for (int i = 1; i <= n; ++i) {
    text += "R" + std::to_string(i) + " | " + std::to_string(pick(1, 2000)) + " | " + products[pick(0, i == 1 ? 2 : 3)] + "\n";
  }
  return text;
}

namespace {

struct Pred {
  std::string name;
  int arity;
  int level;  // 0 for tables
};

std::string sentence(const Pred& p, const std::vector<std::string>& args) {
  std::string s = p.name + " of " + args[0];
  for (std::size_t i = 1; i < args.size(); ++i) s += " and " + args[i];
  return s;
}

class Gen {
 public:
  Gen(std::uint64_t seed, const GenOptions& o) : rng_(seed), o_(o) {}

  Generated run() {
    const int tables = pick(2, 4);
    const int derived = pick(2, 6);
    for (int i = 0; i < tables; ++i) preds_.push_back({"b" + std::to_string(i), pick(1, 3), 0});
    const int levels = pick(1, 3);
    for (int i = 0; i < derived; ++i) {
      preds_.push_back({"d" + std::to_string(i), pick(1, 3), 1 + pick(0, levels - 1)});
    }
    std::ostringstream text;
    std::vector<std::string> blocks;
    for (int i = 0; i < tables; ++i) blocks.push_back(table(preds_[i]));
    // Every derived relation gets one rule, then extra rules up to the cap.
    const int extra = pick(0, std::max(0, o_.max_rules - derived));
    std::vector<const Pred*> heads;
    for (int i = tables; i < static_cast<int>(preds_.size()); ++i) heads.push_back(&preds_[i]);
    for (int i = 0; i < extra; ++i) heads.push_back(&preds_[tables + pick(0, derived - 1)]);
    for (const auto* h : heads) blocks.push_back(rule(*h));
    std::shuffle(blocks.begin(), blocks.end(), rng_);
    for (std::size_t i = 0; i < blocks.size(); ++i) text << (i ? "\n" : "") << blocks[i];

    Generated g;
    g.text = text.str();
    g.rb = parse_rulebase(g.text);
    g.queries = relation_queries(g.rb);
    // A few queries with a constant in place of a placeholder.
    for (const auto& p : preds_) {
      if (chance(0.3)) {
        std::vector<std::string> args;
        for (int i = 0; i < p.arity; ++i) {
          args.push_back(i == 0 ? std::to_string(pick(0, 5)) : "some-q" + std::to_string(i));
        }
        g.queries.push_back(sentence(p, args));
      }
    }
    return g;
  }

 private:
  int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool chance(double p) { return std::bernoulli_distribution(p)(rng_); }
  std::string value() { return std::to_string(pick(0, 5)); }

  std::string table(const Pred& p) {
    std::vector<std::string> heading;
    for (int i = 0; i < p.arity; ++i) heading.push_back("some-c" + std::to_string(i));
    std::string s = sentence(p, heading) + "\n===\n";
    const int rows = pick(1, std::max(1, o_.max_facts / 4));
    for (int r = 0; r < rows; ++r) {
      for (int i = 0; i < p.arity; ++i) s += (i ? " | " : "") + value();
      s += "\n";
    }
    return s;
  }

  // Relations a rule at this level may read: lower levels, or also its own
  // level for plain recursive rules.
  std::vector<const Pred*> readable(int level, bool strictly_lower) {
    std::vector<const Pred*> out;
    for (const auto& p : preds_) {
      if (p.level < level || (!strictly_lower && o_.recursion && p.level == level)) {
        out.push_back(&p);
      }
    }
    return out;
  }

  std::string rule(const Pred& head) {
    const bool aggregate = o_.aggregation && chance(0.2);
    const bool arithmetic = !aggregate && o_.arithmetic && chance(0.3);
    const bool lower_only = aggregate || arithmetic;
    const auto positives = readable(head.level, lower_only);
    const auto lower = readable(head.level, true);

    std::vector<std::string> lines;
    std::vector<std::string> bound;  // usable variables, first-binding order
    std::set<std::string> seen;
    int fresh = 0;
    const auto var_for = [&](std::vector<std::string>& args) {
      // Reuse a bound variable half of the time so premises join.
      if (!bound.empty() && chance(0.5)) {
        args.push_back("that-" + bound[pick(0, static_cast<int>(bound.size()) - 1)]);
      } else if (chance(0.15)) {
        args.push_back(value());
      } else {
        const std::string v = "v" + std::to_string(fresh++);
        args.push_back("some-" + v);
        bound.push_back(v);
      }
    };
    const int n = pick(1, 3);
    for (int i = 0; i < n; ++i) {
      const auto* p = positives[pick(0, static_cast<int>(positives.size()) - 1)];
      std::vector<std::string> args;
      for (int k = 0; k < p->arity; ++k) var_for(args);
      lines.push_back(sentence(*p, args));
    }
    if (bound.empty()) {
      // Constants only so far: bind something from a table.
      const auto* p = &preds_[0];
      std::vector<std::string> args;
      for (int k = 0; k < p->arity; ++k) {
        const std::string v = "v" + std::to_string(fresh++);
        args.push_back("some-" + v);
        bound.push_back(v);
      }
      lines.push_back(sentence(*p, args));
    }
    const auto any_bound = [&] { return "that-" + bound[pick(0, static_cast<int>(bound.size()) - 1)]; };

    if (o_.comparisons && chance(0.3)) {
      static const char* ops[] = {"is less than", "is at most", "is greater than", "is at least",
                                  "is not equal to"};
      lines.push_back(any_bound() + " " + ops[pick(0, 4)] + " " + (chance(0.5) ? any_bound() : value()));
    }
    if (arithmetic) {
      const std::string out = "v" + std::to_string(fresh++);
      const int op = pick(0, 3);
      if (op == 3) {
        const std::string q = "q" + std::to_string(fresh++);
        lines.push_back(any_bound() + " / " + any_bound() + " = some-" + q);
        lines.push_back("that-" + q + " rounded to 2 places after the decimal point is some-" + out);
      } else {
        static const char* ops[] = {"+", "-", "*"};
        lines.push_back(any_bound() + " " + ops[op] + " " + (chance(0.3) ? value() : any_bound()) +
                        " = some-" + out);
      }
      bound.push_back(out);
    }
    if (o_.negation && !lower.empty() && chance(0.3)) {
      const auto* p = lower[pick(0, static_cast<int>(lower.size()) - 1)];
      std::vector<std::string> args;
      for (int k = 0; k < p->arity; ++k) args.push_back(chance(0.8) ? any_bound() : value());
      lines.push_back("not : " + sentence(*p, args));
    }
    std::vector<std::string> head_args;
    if (aggregate) {
      static const char* fns[] = {"total", "count", "maximum", "minimum"};
      const std::string out = "v" + std::to_string(fresh++);
      lines.push_back("some-" + out + " is the " + fns[pick(0, 3)] + " of each " + any_bound());
      for (int k = 0; k + 1 < head.arity; ++k) head_args.push_back(any_bound());
      head_args.push_back("that-" + out);
    } else {
      for (int k = 0; k < head.arity; ++k) head_args.push_back(any_bound());
    }
    std::string s;
    for (const auto& l : lines) s += l + "\n";
    return s + "-----\n" + sentence(head, head_args) + "\n";
  }

  std::mt19937_64 rng_;
  GenOptions o_;
  std::vector<Pred> preds_;
};

}  // namespace

Generated random_rulebase(std::uint64_t seed, const GenOptions& options) {
  return Gen(seed, options).run();
}

}  // namespace ee::testing

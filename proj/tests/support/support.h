#pragma once

// Test helpers: fixture loading and a random rulebase generator.

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "eewiki/engine.h"

namespace ee::testing {

std::string fixture_path(const std::string& name);
std::string read_text(const std::string& path);
std::string load_fixture(const std::string& name);
std::string load_golden(const std::string& name);

// One all-placeholder sentence per relation of rb.
std::vector<std::string> relation_queries(const Rulebase& rb);

struct GenOptions {
  int max_rules = 15;
  int max_facts = 50;
  bool negation = true;
  bool aggregation = true;
  bool comparisons = true;
  bool arithmetic = true;
  bool recursion = true;
};

// Safe and stratified by construction. Values are integers 0..5 plus what
// arithmetic and aggregates make of them. Arithmetic and aggregates only
// read relations of strictly lower levels, so evaluation stays finite;
// divisions are always followed by rounding to 2 places.
struct Generated {
  std::string text;
  Rulebase rb;
  std::vector<std::string> queries;
};
Generated random_rulebase(std::uint64_t seed, const GenOptions& options = {});

// Part-of pairs (C, C1) by direct quantifier checking over the instance and
// part_of tables: C and C1 differ, both have instances, and every instance
// of C at t is part_of some instance of C1 at t.
std::set<std::pair<std::string, std::string>> brute_force_part_of(const Rulebase& rb);

// The supply-chain rules with random refineries, stock and substitutions
// for a single demand; refinery R1 can always supply. refineries receives the refinery count.
std::string random_oil_instance(std::uint64_t seed, int* refineries = nullptr);

// Rows as text, for readable assertion messages.
std::string rows_text(const AnswerTable& t);

}  // namespace ee::testing

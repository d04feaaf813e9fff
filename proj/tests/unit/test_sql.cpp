#include <gtest/gtest.h>

#include <atomic>
#include <thread>

#include "eewiki/menu.h"
#include "eewiki/sql.h"
#include "support.h"

using namespace ee;
using ee::testing::load_fixture;
using ee::testing::rows_text;

namespace {

const char* kAgree =
    "the retailer term some-item1 and the manufacturer term some-item2 agree - they are of type "
    "some-class";
const char* kAuthors = "some-name is an author , with email some-email , of some-title";
const char* kFraction =
    "for estimated demand some-id some-fraction of the order will be some-product from some-refinery";
const char* kCollection =
    "some-tag names a collection of distinct items of type some-type that includes some-item";

std::size_t count(const std::string& s, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = s.find(needle); p != std::string::npos; p = s.find(needle, p + 1)) ++n;
  return n;
}

struct Both {
  SqlPlan plan;
  AnswerTable sql;
  AnswerTable engine;
};

Both both(const Rulebase& rb, const Query& q) {
  const auto mappings = default_mappings(rb);
  SqliteClient db;
  db.load(rb, mappings);
  Both r{compile_sql(rb, q, mappings), {}, {}};
  r.sql = run_hybrid(r.plan, db);
  r.engine = solve(rb, q);
  return r;
}

// Wraps a client and counts how many are alive at once.
class Counted : public DbClient {
 public:
  Counted(std::atomic<int>& live, std::atomic<int>& peak) : live_(live) {
    const int now = ++live_;
    int seen = peak.load();
    while (now > seen && !peak.compare_exchange_weak(seen, now)) {
    }
  }
  ~Counted() override { --live_; }
  std::vector<SqlRow> query(const std::string&) override { return {}; }
  std::optional<std::vector<std::string>> columns(const std::string&) override { return std::nullopt; }

 private:
  std::atomic<int>& live_;
};

}  // namespace

TEST(SqlIdentifier, Spelling) {
  EXPECT_EQ(sql_identifier("supply-stock"), "SUPPLY_STOCK");
  EXPECT_EQ(sql_identifier("3d"), "C3D");
  EXPECT_EQ(sql_identifier("select"), "SELECT1");
  EXPECT_EQ(sql_identifier("a b"), "A_B");
}

TEST(SqlMappings, DefaultNames) {
  const auto rb = parse_rulebase(load_fixture("semantic_resolution.ee"));
  const auto m = default_mappings(rb);
  ASSERT_EQ(m.size(), 5u);
  EXPECT_EQ(m[0].relation, "T1");
  EXPECT_EQ(m[4].relation, "T5");
  EXPECT_EQ(m[0].columns, (std::vector<std::string>{"ITEM", "CLASS", "NS"}));
}

TEST(SqlMappings, ParseIni) {
  const auto m = parse_mappings(
      "[relation TRIPLES]\n"
      "heading = some-subject is related by some-predicate to some-object\n"
      "columns = S, P, O\n"
      "source = warehouse\n");
  ASSERT_EQ(m.size(), 1u);
  EXPECT_EQ(m[0].relation, "TRIPLES");
  EXPECT_EQ(m[0].columns, (std::vector<std::string>{"S", "P", "O"}));
  EXPECT_EQ(m[0].source, "warehouse");
  EXPECT_EQ(m[0].heading.to_string(), "some-subject is related by some-predicate to some-object");
}

TEST(SqlMappings, BadIniIsConfigError) {
  EXPECT_THROW(parse_mappings("[relation T]\ncolumns = A\n"), ConfigError);
  EXPECT_THROW(parse_mappings("[relation T]\nheading = h of some-a\ncolumns = A, B\n"), ConfigError);
  EXPECT_THROW(parse_mappings("[relation T\nheading"), ConfigError);
}

TEST(CompileSql, TwoRulesMakeAUnion) {
  const auto rb = parse_rulebase(load_fixture("semantic_resolution.ee"));
  const auto plan = compile_sql(rb, Query::parse(kAgree), default_mappings(rb));
  EXPECT_TRUE(plan.in_engine.empty());
  EXPECT_EQ(count(plan.sql, "UNION"), 1u) << plan.sql;
  // One per rule, plus the outer projection.
  EXPECT_EQ(count(plan.sql, "SELECT DISTINCT"), 3u) << plan.sql;
  EXPECT_EQ(plan.columns, (std::vector<std::string>{"item1", "item2", "class"}));
}

TEST(CompileSql, Deterministic) {
  const auto rb = parse_rulebase(load_fixture("oil_supply.ee"));
  const auto a = compile_sql(rb, Query::parse(kFraction), default_mappings(rb));
  const auto b = compile_sql(rb, Query::parse(kFraction), default_mappings(rb));
  EXPECT_EQ(a.sql, b.sql);
}

TEST(CompileSql, OilPlanHasUnionAndGroupedSum) {
  const auto rb = parse_rulebase(load_fixture("oil_supply.ee"));
  const auto plan = compile_sql(rb, Query::parse(kFraction), default_mappings(rb));
  EXPECT_NE(plan.sql.find("UNION"), std::string::npos) << plan.sql;
  EXPECT_NE(plan.sql.find("SUM("), std::string::npos) << plan.sql;
  EXPECT_NE(plan.sql.find("GROUP BY"), std::string::npos) << plan.sql;
}

TEST(CompileSql, RecursionRunsInEngine) {
  const auto rb = parse_rulebase(load_fixture("owl_all_different.ee"));
  const auto plan = compile_sql(rb, Query::parse(kCollection), default_mappings(rb));
  EXPECT_EQ(plan.in_engine.size(), 2u);
  ASSERT_EQ(plan.fetches.size(), 1u);
  EXPECT_EQ(plan.fetches[0].sql.find("SELECT"), 0u);
  EXPECT_NE(plan.fetches[0].sql.find("T1"), std::string::npos);
}

TEST(CompileSql, UnmappedPredicate) {
  const auto rb = parse_rulebase(load_fixture("rdf_authors.ee"));
  EXPECT_THROW(compile_sql(rb, Query::parse(kAuthors), {}), UnmappedPredicate);
}

TEST(CompileSql, RejectsInvalidRulebase) {
  const auto rb = parse_rulebase(load_fixture("negation_cycle.ee"));
  const auto q = ee::testing::relation_queries(rb);
  ASSERT_FALSE(q.empty());
  EXPECT_THROW(compile_sql(rb, Query::parse(q.back()), default_mappings(rb)), RejectedRulebase);
}

TEST(RunHybrid, FixturesMatchTheEngine) {
  for (const char* name : {"semantic_resolution.ee", "rdf_authors.ee", "oil_supply.ee",
                           "owl_all_different.ee", "part_of.ee"}) {
    const auto rb = parse_rulebase(load_fixture(name));
    for (const auto& q : ee::testing::relation_queries(rb)) {
      const auto r = both(rb, Query::parse(q));
      EXPECT_EQ(r.sql.columns, r.engine.columns) << name << ": " << q;
      EXPECT_EQ(r.sql.rows, r.engine.rows) << name << ": " << q << "\n"
                                           << r.plan.sql << "\nsql:\n"
                                           << rows_text(r.sql) << "engine:\n"
                                           << rows_text(r.engine);
      EXPECT_EQ(r.sql.handles, r.engine.handles) << name << ": " << q;
    }
  }
}

TEST(RunHybrid, OilFractions) {
  const auto rb = parse_rulebase(load_fixture("oil_supply.ee"));
  const auto r = both(rb, Query::parse(kFraction));
  ASSERT_EQ(r.sql.rows.size(), 2u) << rows_text(r.sql);
  EXPECT_EQ(r.sql.rows[0][1], Value("0.40"));
  EXPECT_EQ(r.sql.rows[1][1], Value("0.60"));
}

TEST(RunHybrid, ConstraintsApply) {
  const auto rb = parse_rulebase(load_fixture("oil_supply.ee"));
  const auto q = specialize(parse_sentence(kFraction), {{"fraction", Range{Value("0.5"), {}}}});
  const auto r = both(rb, q);
  ASSERT_EQ(r.sql.rows.size(), 1u);
  EXPECT_EQ(r.sql.rows, r.engine.rows);
}

TEST(RunHybrid, SchemaMismatch) {
  const auto rb = parse_rulebase(load_fixture("owl_all_different.ee"));
  const auto plan = compile_sql(rb, Query::parse(kCollection), default_mappings(rb));
  SqliteClient db;
  db.execute("CREATE TABLE T1 (SUBJECT, PREDICATE)");
  try {
    run_hybrid(plan, db);
    FAIL() << "expected SchemaMismatch";
  } catch (const SchemaMismatch& e) {
    EXPECT_EQ(e.relation(), "T1");
    EXPECT_EQ(e.found(), (std::vector<std::string>{"SUBJECT", "PREDICATE"}));
    EXPECT_EQ(e.code(), "schema_mismatch");
  }
}

TEST(RunHybrid, MissingTableIsSchemaMismatch) {
  const auto rb = parse_rulebase(load_fixture("rdf_authors.ee"));
  const auto plan = compile_sql(rb, Query::parse(kAuthors), default_mappings(rb));
  SqliteClient db;
  EXPECT_THROW(run_hybrid(plan, db), SchemaMismatch);
}

TEST(SqliteClient, UnopenableFile) {
  EXPECT_THROW(SqliteClient("/nonexistent/dir/x.db", false), DbUnavailable);
}

TEST(SqliteClient, NumbersAndNulls) {
  SqliteClient db;
  db.execute("CREATE TABLE T (A, B); INSERT INTO T VALUES (1.5, NULL), ('x', 2)");
  const auto rows = db.query("SELECT A, B FROM T ORDER BY rowid");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0][0]->text(), "1.5");
  EXPECT_FALSE(rows[0][1].has_value());
  EXPECT_EQ(rows[1][0]->text(), "x");
  EXPECT_EQ(rows[1][1]->text(), "2");
  EXPECT_EQ(db.columns("T"), (std::vector<std::string>{"A", "B"}));
  EXPECT_FALSE(db.columns("NOPE"));
}

TEST(ConnectionPool, RetriesThenDbUnavailable) {
  int calls = 0;
  ConnectionPool pool(
      [&]() -> std::unique_ptr<DbClient> {
        ++calls;
        throw std::runtime_error("refused");
      },
      2, 3, std::chrono::milliseconds(1));
  try {
    pool.acquire();
    FAIL() << "expected DbUnavailable";
  } catch (const DbUnavailable& e) {
    EXPECT_EQ(e.attempts(), 3);
    EXPECT_EQ(e.code(), "db_unavailable");
  }
  EXPECT_EQ(calls, 3);
  EXPECT_EQ(pool.open_connections(), 0u);
}

TEST(ConnectionPool, UnknownDriverIsConfigError) {
  SourceConfig s;
  s.name = "w";
  s.driver = "oracle";
  EXPECT_THROW(ConnectionPool::for_source(s), ConfigError);
}

TEST(ConnectionPool, BoundsConcurrentConnections) {
  std::atomic<int> live{0}, peak{0};
  ConnectionPool pool([&] { return std::make_unique<Counted>(live, peak); }, 3);
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&] {
      for (int i = 0; i < 20; ++i) {
        auto lease = pool.acquire();
        lease->query("SELECT 1");
        std::this_thread::sleep_for(std::chrono::microseconds(200));
      }
    });
  }
  for (auto& t : threads) t.join();
  EXPECT_LE(peak.load(), 3);
  EXPECT_LE(pool.open_connections(), 3u);
}

TEST(Properties, RandomNonRecursiveInstancesMatchTheEngine) {
  ee::testing::GenOptions opts;
  opts.recursion = false;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto g = ee::testing::random_rulebase(seed, opts);
    for (const auto& q : g.queries) {
      Both r;
      try {
        r = both(g.rb, Query::parse(q));
      } catch (const std::exception& e) {
        FAIL() << "seed " << seed << ": " << q << ": " << e.what() << "\n" << g.text;
      }
      EXPECT_TRUE(r.plan.in_engine.empty()) << "seed " << seed << ": " << q;
      ASSERT_EQ(r.sql.rows, r.engine.rows) << "seed " << seed << ": " << q << "\n"
                                           << g.text << "\n"
                                           << r.plan.sql << "\nsql:\n"
                                           << rows_text(r.sql) << "engine:\n"
                                           << rows_text(r.engine);
    }
  }
}

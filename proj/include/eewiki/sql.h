#pragma once

// Fact tables as relational tables, and queries as SQL. A relation defined
// by rules becomes a UNION of one SELECT DISTINCT per rule; shared variables
// become join conditions, negation NOT EXISTS, aggregation GROUP BY.
// Recursive relations, and everything depending on them, are evaluated in
// the engine over rows fetched with plain SELECTs.

#include <chrono>
#include <condition_variable>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "eewiki/engine.h"

struct sqlite3;

namespace ee {

struct TableMapping {
  SentencePattern heading;
  std::string relation;              // SQL table name
  std::vector<std::string> columns;  // one per placeholder, heading order
  std::string source;                // empty: the embedded database

  PredicateId predicate() const { return skeleton_of(heading); }
};

// Upper case, '-' as '_', anything else non-alphanumeric as '_', reserved
// words suffixed with 1.
std::string sql_identifier(std::string_view name);

// One mapping per table of rb: its name (or T1, T2, ... in order) and
// columns named after the heading's placeholders.
std::vector<TableMapping> default_mappings(const Rulebase& rb);

// INI text with one section per table:
//   [relation TRIPLES]
//   heading = some-subject is related by some-predicate to some-object
//   columns = SUBJECT, PREDICATE, OBJECT
//   source = warehouse
// Throws ConfigError.
std::vector<TableMapping> parse_mappings(const std::string& text);
std::vector<TableMapping> load_mappings(const std::string& path);

struct SqlFetch {
  SentencePattern heading;
  std::string sql;
};

struct SqlPlan {
  // The statement answering the query, or, when part of the query runs in
  // the engine, the fetch statements separated by ";\n".
  std::string sql;
  std::vector<std::string> columns;  // query variables, pattern order
  std::vector<PredicateId> in_engine;
  std::vector<SqlFetch> fetches;
  std::vector<TableMapping> tables;  // mappings the plan reads

  Query query;
  Rulebase engine_rules;  // rules of the in-engine relations
};

// Throws RejectedRulebase, UnmappedPredicate, UnsupportedInSql.
SqlPlan compile_sql(const Rulebase& rb, const Query& q, const std::vector<TableMapping>& mappings);

using SqlRow = std::vector<std::optional<Value>>;  // nullopt for NULL

class DbClient {
 public:
  virtual ~DbClient() = default;
  virtual std::vector<SqlRow> query(const std::string& sql) = 0;
  // Column names of a table, nullopt when it does not exist.
  virtual std::optional<std::vector<std::string>> columns(const std::string& table) = 0;
};

class SqliteClient : public DbClient {
 public:
  // ":memory:" for a private in-memory database. Throws DbUnavailable.
  explicit SqliteClient(const std::string& path = ":memory:", bool create = true);
  ~SqliteClient() override;
  SqliteClient(const SqliteClient&) = delete;
  SqliteClient& operator=(const SqliteClient&) = delete;

  std::vector<SqlRow> query(const std::string& sql) override;
  std::optional<std::vector<std::string>> columns(const std::string& table) override;
  void execute(const std::string& sql);
  // Creates and fills the mapped tables from rb's fact tables. Numbers are
  // stored as numbers, everything else as text.
  void load(const Rulebase& rb, const std::vector<TableMapping>& mappings);

 private:
  ::sqlite3* db_ = nullptr;
};

// An external database, as configured in the workspace.
struct SourceConfig {
  std::string name;
  std::string driver = "sqlite";
  std::string host;
  std::string database;
  std::string credentials;
  std::size_t max_connections = 4;
  int retries = 3;
  std::chrono::milliseconds retry_delay{50};
};

// At most max connections; acquire() blocks while all are leased. Opening
// a connection is retried; the last failure becomes DbUnavailable.
class ConnectionPool {
 public:
  using Factory = std::function<std::unique_ptr<DbClient>()>;

  ConnectionPool(Factory factory, std::size_t max, int retries = 3,
                 std::chrono::milliseconds delay = std::chrono::milliseconds(50));
  static std::unique_ptr<ConnectionPool> for_source(const SourceConfig& source);

  class Lease {
   public:
    Lease(ConnectionPool* pool, std::unique_ptr<DbClient> client)
        : pool_(pool), client_(std::move(client)) {}
    Lease(Lease&&) = default;
    ~Lease();
    DbClient& operator*() const { return *client_; }
    DbClient* operator->() const { return client_.get(); }

   private:
    ConnectionPool* pool_;
    std::unique_ptr<DbClient> client_;
  };

  Lease acquire();
  std::size_t open_connections() const;

 private:
  void release(std::unique_ptr<DbClient> client);

  Factory factory_;
  std::size_t max_;
  int retries_;
  std::chrono::milliseconds delay_;
  mutable std::mutex mutex_;
  std::condition_variable cv_;
  std::vector<std::unique_ptr<DbClient>> idle_;
  std::size_t open_ = 0;
};

// Checks every mapped table for its columns (SchemaMismatch), runs the SQL,
// finishes in-engine relations, and applies the query's constraints.
AnswerTable run_hybrid(const SqlPlan& plan, DbClient& db, const EngineLimits& limits = {});
AnswerTable run_hybrid(const SqlPlan& plan, ConnectionPool& pool, const EngineLimits& limits = {});

}  // namespace ee

#pragma once

// Wiki storage. Each rulebase is a directory under the storage root:
//
//   <id>/source.ee        wiki text, byte for byte as saved
//   <id>/tables/<t>.tsv   ingested tables: heading line, then tab-separated rows
//   <id>/meta             revision and timestamps
//
// Writes to one rulebase are serialized and replace files atomically.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "eewiki/engine.h"
#include "eewiki/sql.h"

namespace ee {

struct WorkspaceConfig {
  std::filesystem::path root = "wiki";
  EngineLimits limits;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path ui_dir;
  std::map<std::string, SourceConfig> sources;
};

// `key = value` lines under [storage], [engine], [service] and
// [source NAME]. Relative paths are taken from base_dir. Unknown sections
// and keys are errors (ConfigError).
WorkspaceConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
WorkspaceConfig load_config(const std::filesystem::path& path);

// "rounds=N,facts=M", either part optional.
EngineLimits parse_limits(std::string_view text, EngineLimits base = {});

struct RulebaseEntry {
  std::string id;
  std::string source;
  std::int64_t revision = 0;
  std::string updated_at;  // UTC, ISO 8601
  std::vector<Diagnostic> diagnostics;
};

struct IngestResult {
  std::string table;
  std::size_t added = 0;
  std::size_t total = 0;
};

// N-Triples lines as rows (subject, predicate, object). IRIs lose their
// brackets, blank nodes `_:x` become `__x`, literals lose quotes, language
// tags and datatypes. Throws BadTriple.
std::vector<std::vector<Value>> parse_ntriples(std::string_view text);

// Heading of the triple table.
inline constexpr std::string_view kTripleHeading =
    "some-subject is related by some-predicate to some-object";

class Workspace {
 public:
  explicit Workspace(std::filesystem::path root);

  static bool valid_id(std::string_view id);

  std::vector<std::string> list() const;
  bool exists(const std::string& id) const;
  // Throws NotFound.
  RulebaseEntry get(const std::string& id) const;

  // Accepted iff expected_revision is the current revision (0 for a new
  // rulebase). Parse problems are recorded but never block a save.
  // Throws RevisionConflict, InvalidArgument for a bad id.
  RulebaseEntry save(const std::string& id, const std::string& source, std::int64_t expected_revision);

  // The parsed source together with the ingested tables. Throws NotFound.
  Rulebase rulebase(const std::string& id) const;

  // Both throw NotFound when the rulebase does not exist; duplicates are
  // dropped. Each accepted ingestion bumps the revision.
  IngestResult ingest_ntriples(const std::string& id, const std::string& table, std::string_view text);
  IngestResult ingest_rows(const std::string& id, const std::string& table,
                           const SentencePattern& heading, std::string_view text, char delimiter = '\t');

 private:
  struct Meta {
    std::int64_t revision = 0;
    std::string updated_at;
  };

  std::filesystem::path dir(const std::string& id) const;
  std::shared_mutex& lock_for(const std::string& id) const;
  Meta read_meta(const std::string& id) const;
  void write_meta(const std::string& id, const Meta& meta) const;
  IngestResult add_rows(const std::string& id, const std::string& table, const SentencePattern& heading,
                        const std::vector<std::vector<Value>>& rows);

  std::filesystem::path root_;
  mutable std::mutex locks_mutex_;
  mutable std::map<std::string, std::unique_ptr<std::shared_mutex>> locks_;
};

}  // namespace ee

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <thread>

#include "eewiki/workspace.h"
#include "support.h"

using namespace ee;
using ee::testing::load_fixture;
using ee::testing::read_text;
namespace fs = std::filesystem;

namespace {

const char* kAuthorTriples =
    "<Paper> <fact#:title> \"An Overview of RDF Query Languages\" .\n"
    "<Paper> <fact#:author> _:Description1 .\n"
    "_:Description1 <rdf:_1> <http://www.cs.vu.nl/~jbroeks/> .\n"
    "<http://www.cs.vu.nl/~jbroeks/> <fact#:name> \"Jeen Broekstra\" .\n"
    "<http://www.cs.vu.nl/~jbroeks/> <fact#:email> \"jbroeks@cs.vu.nl\" .\n";

const char* kAuthorsRule =
    "some-paper is related by fact#:title to some-title\n"
    "that-paper is related by fact#:author to some-description\n"
    "that-description is related by some-rdf-node to some-home-page\n"
    "that-home-page is related by fact#:name to some-name\n"
    "that-home-page is related by fact#:email to some-email\n"
    "-----\n"
    "that-name is an author , with email that-email , of that-title\n";

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("eewiki-test-" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::vector<std::string> row(std::initializer_list<const char*> cells) { return {cells.begin(), cells.end()}; }

std::vector<std::vector<std::string>> texts(const std::vector<std::vector<Value>>& rows) {
  std::vector<std::vector<std::string>> out;
  for (const auto& r : rows) {
    out.emplace_back();
    for (const auto& v : r) out.back().push_back(v.text());
  }
  return out;
}

}  // namespace

TEST(Config, AllSections) {
  const auto c = parse_config(
      "[storage]\nroot = data\n"
      "[engine]\nmax_fixpoint_rounds = 50\nmax_derived_facts = 1000\n"
      "[service]\nhost = 0.0.0.0\nport = 9000\nui_dir = /srv/ui\n"
      "[source warehouse]\ndriver = sqlite\ndatabase = w.db\nmax_connections = 2\nretries = 5\n"
      "retry_delay_ms = 10\n",
      "/etc/eewiki");
  EXPECT_EQ(c.root, fs::path("/etc/eewiki/data"));
  EXPECT_EQ(c.limits.max_fixpoint_rounds, 50);
  EXPECT_EQ(c.limits.max_derived_facts, 1000);
  EXPECT_EQ(c.host, "0.0.0.0");
  EXPECT_EQ(c.port, 9000);
  EXPECT_EQ(c.ui_dir, fs::path("/srv/ui"));
  ASSERT_EQ(c.sources.count("warehouse"), 1u);
  const auto& s = c.sources.at("warehouse");
  EXPECT_EQ(s.name, "warehouse");
  EXPECT_EQ(s.database, "/etc/eewiki/w.db");
  EXPECT_EQ(s.max_connections, 2u);
  EXPECT_EQ(s.retries, 5);
  EXPECT_EQ(s.retry_delay, std::chrono::milliseconds(10));
}

TEST(Config, Defaults) {
  const auto c = parse_config("");
  EXPECT_EQ(c.port, 8080);
  EXPECT_EQ(c.limits.max_fixpoint_rounds, EngineLimits{}.max_fixpoint_rounds);
  EXPECT_TRUE(c.sources.empty());
}

TEST(Config, UnknownKeysAndSectionsAreErrors) {
  EXPECT_THROW(parse_config("[storage]\nrot = x\n"), ConfigError);
  EXPECT_THROW(parse_config("[storage2]\nroot = x\n"), ConfigError);
  EXPECT_THROW(parse_config("[engine]\nmax_fixpoint_rounds = many\n"), ConfigError);
  EXPECT_THROW(parse_config("[engine]\nmax_derived_facts = 0\n"), ConfigError);
  EXPECT_THROW(parse_config("[service]\nport = 70000\n"), ConfigError);
  EXPECT_THROW(parse_config("[source w]\npassword = x\n"), ConfigError);
}

TEST(Config, MissingFile) { EXPECT_THROW(load_config("/nonexistent/eewiki.cfg"), ConfigError); }

TEST(Limits, Parse) {
  const auto l = parse_limits("rounds=5, facts=7");
  EXPECT_EQ(l.max_fixpoint_rounds, 5);
  EXPECT_EQ(l.max_derived_facts, 7);
  const auto only = parse_limits("facts=3");
  EXPECT_EQ(only.max_fixpoint_rounds, EngineLimits{}.max_fixpoint_rounds);
  EXPECT_EQ(parse_limits("").max_derived_facts, EngineLimits{}.max_derived_facts);
  EXPECT_THROW(parse_limits("rounds"), ConfigError);
  EXPECT_THROW(parse_limits("depth=3"), ConfigError);
  EXPECT_THROW(parse_limits("rounds=-1"), ConfigError);
}

TEST(NTriples, AuthorTriples) {
  const auto rows = parse_ntriples(kAuthorTriples);
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(texts(rows)[0], row({"Paper", "fact#:title", "An Overview of RDF Query Languages"}));
  EXPECT_EQ(texts(rows)[1], row({"Paper", "fact#:author", "__Description1"}));
  EXPECT_EQ(texts(rows)[2], row({"__Description1", "rdf:_1", "http://www.cs.vu.nl/~jbroeks/"}));
  EXPECT_EQ(texts(rows)[4], row({"http://www.cs.vu.nl/~jbroeks/", "fact#:email", "jbroeks@cs.vu.nl"}));
}

TEST(NTriples, LiteralsLoseTagsAndTypes) {
  const auto rows = parse_ntriples(
      "<a> <b> \"chat\"@fr .\n"
      "<a> <c> \"42\"^^<http://www.w3.org/2001/XMLSchema#integer> .\n"
      "# comment\n\n"
      "<a> <d> \"say \\\"hi\\\"\" . # trailing\n");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0][2].text(), "chat");
  EXPECT_EQ(rows[1][2].text(), "42");
  EXPECT_TRUE(rows[1][2].is_numeric());
  EXPECT_EQ(rows[2][2].text(), "say \"hi\"");
}

TEST(NTriples, BadLines) {
  const auto line_of = [](const char* text) -> std::size_t {
    try {
      parse_ntriples(text);
    } catch (const BadTriple& e) {
      EXPECT_EQ(e.code(), "bad_triple");
      return e.line();
    }
    return 0;
  };
  EXPECT_EQ(line_of("<a> <b> <c>\n"), 1u);
  EXPECT_EQ(line_of("<a> <b> <c> .\n<a> <b .\n"), 2u);
  EXPECT_EQ(line_of("<a> <b> \"open .\n"), 1u);
  EXPECT_EQ(line_of("<a> <b> .\n"), 1u);
  EXPECT_EQ(line_of("<a> <b> <c> . extra\n"), 1u);
}

TEST(NTriples, Empty) {
  EXPECT_TRUE(parse_ntriples("").empty());
  EXPECT_TRUE(parse_ntriples("# nothing\n\n").empty());
}

TEST(Workspace, ValidIds) {
  EXPECT_TRUE(Workspace::valid_id("authors"));
  EXPECT_TRUE(Workspace::valid_id("oil_supply-2"));
  EXPECT_FALSE(Workspace::valid_id(""));
  EXPECT_FALSE(Workspace::valid_id(".."));
  EXPECT_FALSE(Workspace::valid_id("a/b"));
  EXPECT_FALSE(Workspace::valid_id("a b"));
}

TEST(Workspace, SaveAndRevisions) {
  TempDir tmp;
  Workspace ws(tmp.path());
  EXPECT_TRUE(ws.list().empty());
  EXPECT_FALSE(ws.exists("authors"));
  EXPECT_THROW(ws.get("authors"), NotFound);
  EXPECT_THROW(ws.rulebase("authors"), NotFound);

  const auto e1 = ws.save("authors", kAuthorsRule, 0);
  EXPECT_EQ(e1.revision, 1);
  EXPECT_FALSE(e1.updated_at.empty());
  EXPECT_EQ(ws.list(), std::vector<std::string>{"authors"});

  const auto e2 = ws.save("authors", kAuthorsRule + std::string("\n# edited\n"), 1);
  EXPECT_EQ(e2.revision, 2);
  try {
    ws.save("authors", "stale", 1);
    FAIL() << "expected RevisionConflict";
  } catch (const RevisionConflict& c) {
    EXPECT_EQ(c.current(), 2);
  }
  EXPECT_EQ(ws.get("authors").revision, 2);
  EXPECT_THROW(ws.save("fresh", "x", 3), RevisionConflict);
  EXPECT_THROW(ws.save("../up", "x", 0), InvalidArgument);
}

TEST(Workspace, SourceIsStoredByteForByte) {
  TempDir tmp;
  Workspace ws(tmp.path());
  const std::string text = load_fixture("oil_supply.ee") + "\r\n\ttrailing  \n\n";
  ws.save("oil", text, 0);
  EXPECT_EQ(ws.get("oil").source, text);
  EXPECT_EQ(read_text((tmp.path() / "oil" / "source.ee").string()), text);
  Workspace again(tmp.path());
  EXPECT_EQ(again.get("oil").source, text);
}

TEST(Workspace, ParseProblemsDoNotBlockASave) {
  TempDir tmp;
  Workspace ws(tmp.path());
  const auto e = ws.save("broken", "just one line\n", 0);
  EXPECT_EQ(e.revision, 1);
  ASSERT_FALSE(e.diagnostics.empty());
  EXPECT_EQ(ws.get("broken").diagnostics.size(), e.diagnostics.size());
}

TEST(Workspace, IngestTriplesAnswersTheAuthorsQuery) {
  TempDir tmp;
  Workspace ws(tmp.path());
  ws.save("authors", kAuthorsRule, 0);
  EXPECT_THROW(ws.ingest_ntriples("nobody", "triples", kAuthorTriples), NotFound);
  const auto r = ws.ingest_ntriples("authors", "triples", kAuthorTriples);
  EXPECT_EQ(r.added, 5u);
  EXPECT_EQ(r.total, 5u);
  EXPECT_EQ(ws.get("authors").revision, 2);

  const auto t = solve(ws.rulebase("authors"),
                       Query::parse("some-name is an author , with email some-email , of some-title"));
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.rows[0][0].text(), "Jeen Broekstra");
}

TEST(Workspace, IngestIsIdempotent) {
  TempDir tmp;
  Workspace ws(tmp.path());
  ws.save("authors", kAuthorsRule, 0);
  ws.ingest_ntriples("authors", "triples", kAuthorTriples);
  const auto files = read_text((tmp.path() / "authors" / "tables" / "triples.tsv").string());
  const auto r = ws.ingest_ntriples("authors", "triples", kAuthorTriples);
  EXPECT_EQ(r.added, 0u);
  EXPECT_EQ(r.total, 5u);
  EXPECT_EQ(ws.get("authors").revision, 2);
  EXPECT_EQ(read_text((tmp.path() / "authors" / "tables" / "triples.tsv").string()), files);
}

TEST(Workspace, IngestRows) {
  TempDir tmp;
  Workspace ws(tmp.path());
  ws.save("oil", "", 0);
  const auto heading = parse_sentence("refinery some-refinery has some-amount gallons of some-product");
  const auto r = ws.ingest_rows("oil", "stock", heading, "R1,600,x\nR2,400,z\n\nR1,600,x\n", ',');
  EXPECT_EQ(r.added, 2u);
  EXPECT_EQ(r.total, 2u);
  const auto rb = ws.rulebase("oil");
  ASSERT_EQ(rb.tables.size(), 1u);
  EXPECT_EQ(rb.tables[0].name, "stock");
  EXPECT_EQ(texts(rb.tables[0].rows)[1], row({"R2", "400", "z"}));

  try {
    ws.ingest_rows("oil", "stock", heading, "R3,1\n", ',');
    FAIL() << "expected WidthMismatch";
  } catch (const WidthMismatch& e) {
    EXPECT_EQ(e.row(), 1u);
    EXPECT_EQ(e.code(), "width_mismatch");
  }
  EXPECT_THROW(ws.ingest_rows("oil", "stock", parse_sentence("h of some-a and some-b and some-c"), "a,b,c", ','),
               InvalidArgument);
  EXPECT_THROW(ws.ingest_rows("oil", "../x", heading, "a,b,c", ','), InvalidArgument);
}

TEST(Workspace, IngestedRowsMergeWithSourceTables) {
  TempDir tmp;
  Workspace ws(tmp.path());
  ws.save("t", "h of some-a\n===\n1\n2\n", 0);
  ws.ingest_rows("t", "extra", parse_sentence("h of some-b"), "2\n3\n");
  const auto rb = ws.rulebase("t");
  ASSERT_EQ(rb.tables.size(), 1u);
  EXPECT_EQ(rb.tables[0].rows.size(), 3u);
}

TEST(Workspace, WhitespaceInLiteralsIsNormalized) {
  TempDir tmp;
  Workspace ws(tmp.path());
  ws.save("t", "", 0);
  ws.ingest_ntriples("t", "triples", "<a> <b> \"x\\ty\\nz\" .\n");
  const auto rb = Workspace(tmp.path()).rulebase("t");
  ASSERT_EQ(rb.tables.size(), 1u);
  ASSERT_EQ(rb.tables[0].rows.size(), 1u);
  // Values are word sequences: inner whitespace collapses to single spaces.
  EXPECT_EQ(rb.tables[0].rows[0][2].text(), "x y z");
  const auto t = solve(rb, Query::parse("some-s is related by some-p to some-o"));
  EXPECT_EQ(t.rows.size(), 1u);
}

TEST(Workspace, ConcurrentSavesSerialize) {
  TempDir tmp;
  Workspace ws(tmp.path());
  ws.save("x", "", 0);
  std::atomic<int> ok{0}, conflicts{0};
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&] {
      try {
        ws.save("x", "p of some-a\n===\n1\n", 1);
        ++ok;
      } catch (const RevisionConflict&) {
        ++conflicts;
      }
    });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(ok.load(), 1);
  EXPECT_EQ(conflicts.load(), 7);
  EXPECT_EQ(ws.get("x").revision, 2);
}

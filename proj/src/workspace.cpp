#include "eewiki/workspace.h"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace ee {

namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw NotFound(p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Write to a sibling temporary, then rename over the target.
void write_file(const fs::path& p, const std::string& content) {
  fs::create_directories(p.parent_path());
  const fs::path tmp = p.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw std::runtime_error("cannot write " + tmp.string());
  }
  fs::rename(tmp, p);
}

std::string now_utc() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string tsv_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  return out;
}

std::vector<std::string> tsv_split(const std::string& line) {
  std::vector<std::string> cells(1);
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (c == '\t') {
      cells.emplace_back();
    } else if (c == '\\' && i + 1 < line.size()) {
      const char n = line[++i];
      cells.back() += n == 't' ? '\t' : n == 'n' ? '\n' : n == 'r' ? '\r' : n;
    } else {
      cells.back() += c;
    }
  }
  return cells;
}

// Runs of whitespace become one space, as in table cells of wiki text.
std::string normalize(std::string_view s) {
  std::string out;
  for (char c : s) {
    const bool ws = c == ' ' || c == '\t' || c == '\r' || c == '\n';
    if (ws) {
      if (!out.empty() && out.back() != ' ') out += ' ';
    } else {
      out += c;
    }
  }
  if (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

std::string trim(std::string_view s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string_view::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return std::string(s.substr(a, b - a + 1));
}

struct TableFile {
  SentencePattern heading;
  std::vector<std::vector<Value>> rows;
};

TableFile read_table(const fs::path& p) {
  std::istringstream in(read_file(p));
  TableFile t;
  std::string line;
  if (!std::getline(in, line)) return t;
  t.heading = parse_sentence(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<Value> row;
    for (auto& c : tsv_split(line)) row.emplace_back(std::move(c));
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::int64_t to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long x = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "' needs a whole number, got '" + v + "'");
  }
}

std::int64_t positive(const std::string& key, const std::string& v) {
  const auto x = to_int(key, v);
  if (x <= 0) throw ConfigError("'" + key + "' must be positive");
  return x;
}

}  // namespace

// ---- configuration -----------------------------------------------------------

WorkspaceConfig parse_config(const std::string& text, const fs::path& base_dir) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(e.what());
  }
  const auto path = [&](const std::string& v) {
    const fs::path p(v);
    return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
  };
  WorkspaceConfig c;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) throw ConfigError("key '" + section + "' outside a section");
    for (const auto& [key, node] : body) {
      const std::string v = node.get_value<std::string>();
      const auto unknown = [&] { throw ConfigError("unknown key '" + key + "' in [" + section + "]"); };
      if (section == "storage") {
        if (key != "root") unknown();
        c.root = path(v);
      } else if (section == "engine") {
        if (key == "max_fixpoint_rounds") {
          c.limits.max_fixpoint_rounds = positive(key, v);
        } else if (key == "max_derived_facts") {
          c.limits.max_derived_facts = positive(key, v);
        } else {
          unknown();
        }
      } else if (section == "service") {
        if (key == "host") {
          c.host = v;
        } else if (key == "port") {
          const auto port = to_int(key, v);
          if (port < 0 || port > 65535) throw ConfigError("port out of range");
          c.port = static_cast<int>(port);
        } else if (key == "ui_dir") {
          c.ui_dir = path(v);
        } else {
          unknown();
        }
      } else if (section.rfind("source ", 0) == 0) {
        SourceConfig& s = c.sources[section.substr(7)];
        s.name = section.substr(7);
        if (key == "driver") {
          s.driver = v;
        } else if (key == "host") {
          s.host = v;
        } else if (key == "database") {
          s.database = s.driver == "sqlite" && v != ":memory:" ? path(v).string() : v;
        } else if (key == "credentials") {
          s.credentials = v;
        } else if (key == "max_connections") {
          s.max_connections = static_cast<std::size_t>(positive(key, v));
        } else if (key == "retries") {
          s.retries = static_cast<int>(positive(key, v));
        } else if (key == "retry_delay_ms") {
          s.retry_delay = std::chrono::milliseconds(to_int(key, v));
        } else {
          unknown();
        }
      } else {
        throw ConfigError("unknown section [" + section + "]");
      }
    }
    if (body.empty() && section.rfind("source ", 0) == 0) {
      c.sources[section.substr(7)].name = section.substr(7);
    }
  }
  return c;
}

WorkspaceConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

EngineLimits parse_limits(std::string_view text, EngineLimits base) {
  std::string s(text);
  std::istringstream in(s);
  std::string part;
  while (std::getline(in, part, ',')) {
    part = trim(part);
    if (part.empty()) continue;
    const auto eq = part.find('=');
    if (eq == std::string::npos) throw ConfigError("limits: expected name=value, got '" + part + "'");
    const std::string key = trim(part.substr(0, eq));
    const std::string value = trim(part.substr(eq + 1));
    if (key == "rounds") {
      base.max_fixpoint_rounds = positive(key, value);
    } else if (key == "facts") {
      base.max_derived_facts = positive(key, value);
    } else {
      throw ConfigError("limits: unknown limit '" + key + "'");
    }
  }
  return base;
}

// ---- N-Triples ---------------------------------------------------------------

std::vector<std::vector<Value>> parse_ntriples(std::string_view text) {
  std::vector<std::vector<Value>> out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    std::size_t i = 0;
    const auto skip_ws = [&] {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    };
    skip_ws();
    if (i == line.size() || line[i] == '#') {
      if (end == text.size()) break;
      continue;
    }
    std::vector<Value> row;
    for (int k = 0; k < 3; ++k) {
      skip_ws();
      if (i == line.size() || line[i] == '.') {
        throw BadTriple(line_no, std::string("missing ") + (k == 0 ? "subject" : k == 1 ? "predicate" : "object"));
      }
      if (line[i] == '<') {
        const auto close = line.find('>', i);
        if (close == std::string_view::npos) throw BadTriple(line_no, "unterminated IRI");
        row.emplace_back(std::string(line.substr(i + 1, close - i - 1)));
        i = close + 1;
      } else if (line.substr(i, 2) == "_:") {
        std::size_t j = i + 2;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
        if (j == i + 2) throw BadTriple(line_no, "empty blank node label");
        row.emplace_back("__" + std::string(line.substr(i + 2, j - i - 2)));
        i = j;
      } else if (line[i] == '"' && k == 2) {
        std::string lit;
        ++i;
        bool closed = false;
        while (i < line.size()) {
          const char c = line[i++];
          if (c == '"') {
            closed = true;
            break;
          }
          if (c == '\\' && i < line.size()) {
            const char n = line[i++];
            lit += n == 'n' ? '\n' : n == 't' ? '\t' : n == 'r' ? '\r' : n;
          } else {
            lit += c;
          }
        }
        if (!closed) throw BadTriple(line_no, "unterminated literal");
        if (i < line.size() && line[i] == '@') {
          while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '.') ++i;
        } else if (line.substr(i, 3) == "^^<") {
          const auto close = line.find('>', i);
          if (close == std::string_view::npos) throw BadTriple(line_no, "unterminated datatype");
          i = close + 1;
        }
        row.emplace_back(normalize(lit));
      } else {
        throw BadTriple(line_no, "unexpected '" + std::string(1, line[i]) + "'");
      }
    }
    skip_ws();
    if (i == line.size() || line[i] != '.') throw BadTriple(line_no, "missing final '.'");
    ++i;
    skip_ws();
    if (i != line.size() && line[i] != '#') throw BadTriple(line_no, "text after final '.'");
    out.push_back(std::move(row));
    if (end == text.size()) break;
  }
  return out;
}

// ---- workspace ---------------------------------------------------------------

Workspace::Workspace(fs::path root) : root_(std::move(root)) { fs::create_directories(root_); }

bool Workspace::valid_id(std::string_view id) {
  static const std::regex re("[A-Za-z0-9_-]+");
  return id.size() <= 128 && std::regex_match(id.begin(), id.end(), re);
}

fs::path Workspace::dir(const std::string& id) const {
  if (!valid_id(id)) throw InvalidArgument("'" + id + "' is not a valid name (letters, digits, '_' and '-')");
  return root_ / id;
}

std::shared_mutex& Workspace::lock_for(const std::string& id) const {
  std::lock_guard guard(locks_mutex_);
  auto& m = locks_[id];
  if (!m) m = std::make_unique<std::shared_mutex>();
  return *m;
}

std::vector<std::string> Workspace::list() const {
  std::vector<std::string> out;
  for (const auto& e : fs::directory_iterator(root_)) {
    const auto name = e.path().filename().string();
    if (e.is_directory() && valid_id(name) && fs::exists(e.path() / "meta")) out.push_back(name);
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool Workspace::exists(const std::string& id) const {
  return valid_id(id) && fs::exists(root_ / id / "meta");
}

Workspace::Meta Workspace::read_meta(const std::string& id) const {
  Meta m;
  std::istringstream in(read_file(dir(id) / "meta"));
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "revision") m.revision = std::stoll(value);
    if (key == "updated_at") m.updated_at = value;
  }
  return m;
}

void Workspace::write_meta(const std::string& id, const Meta& m) const {
  write_file(dir(id) / "meta",
             "revision = " + std::to_string(m.revision) + "\nupdated_at = " + m.updated_at + "\n");
}

RulebaseEntry Workspace::get(const std::string& id) const {
  if (!exists(id)) throw NotFound("rulebase '" + id + "'");
  std::shared_lock lock(lock_for(id));
  RulebaseEntry e;
  e.id = id;
  const Meta m = read_meta(id);
  e.revision = m.revision;
  e.updated_at = m.updated_at;
  e.source = read_file(dir(id) / "source.ee");
  e.diagnostics = parse_rulebase(e.source).diagnostics;
  return e;
}

RulebaseEntry Workspace::save(const std::string& id, const std::string& source,
                              std::int64_t expected_revision) {
  const fs::path d = dir(id);
  std::unique_lock lock(lock_for(id));
  const std::int64_t current = fs::exists(d / "meta") ? read_meta(id).revision : 0;
  if (expected_revision != current) throw RevisionConflict(current);
  RulebaseEntry e;
  e.id = id;
  e.source = source;
  e.revision = current + 1;
  e.updated_at = now_utc();
  e.diagnostics = parse_rulebase(source).diagnostics;
  std::string diag;
  for (const auto& x : e.diagnostics) diag += x.to_string() + "\n";
  write_file(d / "source.ee", source);
  write_file(d / "diagnostics", diag);
  write_meta(id, Meta{e.revision, e.updated_at});
  return e;
}

Rulebase Workspace::rulebase(const std::string& id) const {
  if (!exists(id)) throw NotFound("rulebase '" + id + "'");
  std::shared_lock lock(lock_for(id));
  Rulebase rb = parse_rulebase(read_file(dir(id) / "source.ee"));
  const fs::path tables = dir(id) / "tables";
  if (fs::exists(tables)) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(tables)) {
      if (e.path().extension() == ".tsv") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      TableFile t = read_table(f);
      if (!t.heading.empty()) rb.add_rows(t.heading, t.rows, f.stem().string());
    }
  }
  return rb;
}

IngestResult Workspace::add_rows(const std::string& id, const std::string& table,
                                 const SentencePattern& heading,
                                 const std::vector<std::vector<Value>>& rows) {
  if (!exists(id)) throw NotFound("rulebase '" + id + "'");
  if (!valid_id(table)) throw InvalidArgument("'" + table + "' is not a valid table name");
  std::unique_lock lock(lock_for(id));
  const fs::path file = dir(id) / "tables" / (table + ".tsv");
  TableFile t;
  if (fs::exists(file)) {
    t = read_table(file);
    if (skeleton_of(t.heading) != skeleton_of(heading)) {
      throw InvalidArgument("table '" + table + "' has heading '" + t.heading.to_string() + "'");
    }
  } else {
    t.heading = heading;
  }
  std::set<std::vector<Value>> seen(t.rows.begin(), t.rows.end());
  IngestResult r;
  r.table = table;
  for (const auto& row : rows) {
    if (seen.insert(row).second) {
      t.rows.push_back(row);
      ++r.added;
    }
  }
  r.total = t.rows.size();
  if (r.added == 0) return r;
  std::string out = t.heading.to_string() + "\n";
  for (const auto& row : t.rows) {
    for (std::size_t k = 0; k < row.size(); ++k) out += (k ? "\t" : "") + tsv_escape(row[k].text());
    out += "\n";
  }
  write_file(file, out);
  Meta m = read_meta(id);
  ++m.revision;
  m.updated_at = now_utc();
  write_meta(id, m);
  return r;
}

IngestResult Workspace::ingest_ntriples(const std::string& id, const std::string& table,
                                        std::string_view text) {
  if (!exists(id)) throw NotFound("rulebase '" + id + "'");
  return add_rows(id, table, parse_sentence(kTripleHeading), parse_ntriples(text));
}

IngestResult Workspace::ingest_rows(const std::string& id, const std::string& table,
                                    const SentencePattern& heading, std::string_view text,
                                    char delimiter) {
  if (!exists(id)) throw NotFound("rulebase '" + id + "'");
  const std::size_t arity = skeleton_of(heading).arity();
  std::vector<std::vector<Value>> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t row_no = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row_no;
    std::vector<Value> row;
    std::size_t start = 0;
    while (true) {
      const auto pos = line.find(delimiter, start);
      const std::string cell =
          normalize(line.substr(start, pos == std::string::npos ? std::string::npos : pos - start));
      row.emplace_back(cell);
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
    if (row.size() != arity) throw WidthMismatch(row_no, arity, row.size());
    rows.push_back(std::move(row));
  }
  return add_rows(id, table, heading, rows);
}

}  // namespace ee

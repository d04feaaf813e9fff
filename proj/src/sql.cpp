#include "eewiki/sql.h"

#include <sqlite3.h>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "eewiki/validator.h"

namespace ee {

SchemaMismatch::SchemaMismatch(std::string relation, std::vector<std::string> expected,
                               std::vector<std::string> found)
    : Error("schema_mismatch",
            [&] {
              auto join = [](const std::vector<std::string>& v) {
                std::string s;
                for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + v[i];
                return "(" + s + ")";
              };
              return "table " + relation + " has columns " + join(found) + ", expected " +
                     join(expected);
            }()),
      relation_(std::move(relation)),
      expected_(std::move(expected)),
      found_(std::move(found)) {}

namespace {

const std::set<std::string> kReserved = {
    "ALL",    "AND",   "ANY",   "AS",     "ASC",     "BETWEEN", "BY",     "CASE",   "CAST",
    "CHECK",  "COLUMN", "CREATE", "CROSS", "DEFAULT", "DELETE", "DESC",   "DISTINCT", "DROP",
    "ELSE",   "END",   "EXCEPT", "EXISTS", "FROM",   "FULL",    "GROUP",  "HAVING", "IN",
    "INDEX",  "INNER", "INSERT", "INTERSECT", "INTO", "IS",     "JOIN",   "KEY",    "LEFT",
    "LIKE",   "LIMIT", "NOT",   "NULL",   "ON",      "OR",      "ORDER",  "OUTER",  "PRIMARY",
    "REFERENCES", "RIGHT", "ROW", "SELECT", "SET",   "SOME",    "TABLE",  "THEN",   "TO",
    "UNION",  "UNIQUE", "UPDATE", "USING", "VALUES", "WHEN",    "WHERE",  "WITH"};

std::vector<std::string> hole_variables(const SentencePattern& s) {
  std::vector<std::string> out;
  for (const auto& t : s.terms()) {
    if (t.is_variable()) out.push_back(t.name());
  }
  return out;
}

std::vector<std::string> unique_columns(const std::vector<std::string>& names) {
  std::vector<std::string> out;
  std::map<std::string, int> seen;
  for (const auto& n : names) {
    std::string c = sql_identifier(n);
    if (int k = ++seen[c]; k > 1) c += std::to_string(k);
    out.push_back(c);
  }
  return out;
}

std::string literal(const Value& v) {
  if (v.is_numeric()) {
    const std::string s = v.numeric()->to_string();
    return v.numeric()->is_negative() ? "(" + s + ")" : s;
  }
  std::string out = "'";
  for (char c : v.text()) {
    out += c;
    if (c == '\'') out += '\'';
  }
  return out + "'";
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string_view sql_operator(BuiltinOp op) {
  switch (op) {
    case BuiltinOp::add: return "+";
    case BuiltinOp::sub: return "-";
    case BuiltinOp::mul: return "*";
    case BuiltinOp::div: return "/";
    case BuiltinOp::lt: return "<";
    case BuiltinOp::le: return "<=";
    case BuiltinOp::gt: return ">";
    case BuiltinOp::ge: return ">=";
    case BuiltinOp::ne: return "<>";
    case BuiltinOp::round: break;
  }
  return "";
}

std::string_view sql_aggregate(AggregateFn fn) {
  switch (fn) {
    case AggregateFn::sum: return "SUM";
    case AggregateFn::count: return "COUNT";
    case AggregateFn::max: return "MAX";
    case AggregateFn::min: return "MIN";
  }
  return "";
}

// A FROM item: table or derived table, with its alias and column names.
struct Source {
  std::string from;
  std::string alias;
  std::vector<std::string> cols;

  std::string col(std::size_t k) const { return alias + "." + cols[k]; }
};

// Variables bound so far in one SELECT, and its FROM and WHERE parts.
struct Scope {
  std::map<std::string, std::string> vars;
  std::vector<std::string> from;
  std::vector<std::string> where;

  void unify(const std::string& var, const std::string& expr) {
    auto [it, fresh] = vars.try_emplace(var, expr);
    if (!fresh) where.push_back(it->second + " = " + expr);
  }
  const std::string& at(const std::string& var) const {
    auto it = vars.find(var);
    if (it == vars.end()) throw UnboundVariable(var);
    return it->second;
  }
  std::string term(const Term& t) const { return t.is_constant() ? literal(Value(t.text())) : at(t.name()); }
  std::string render(const std::vector<std::string>& select, bool distinct = true) const {
    std::string s = std::string(distinct ? "SELECT DISTINCT " : "SELECT ") + join(select, ", ");
    if (!from.empty()) s += " FROM " + join(from, ", ");
    if (!where.empty()) s += " WHERE " + join(where, " AND ");
    return s;
  }
};

class Compiler {
 public:
  Compiler(const Rulebase& rb, const RelationSet& rels, const std::vector<TableMapping>& mappings)
      : rb_(rb), rels_(rels), rules_of_(rels.size()), mapping_of_(rels.size(), nullptr) {
    for (std::size_t i = 0; i < rb.rules.size(); ++i) {
      if (auto r = rels.find(skeleton_of(rb.rules[i].conclusion))) rules_of_[*r].push_back(i);
    }
    for (const auto& m : mappings) {
      if (auto r = rels.find(m.predicate())) mapping_of_[*r] = &m;
    }
  }

  const TableMapping* mapping(std::size_t r) const { return mapping_of_[r]; }
  bool has_rules(std::size_t r) const { return !rules_of_[r].empty(); }
  const std::vector<std::size_t>& rules_of(std::size_t r) const { return rules_of_[r]; }

  // SELECT producing relation r as columns x1..xk.
  std::string relation_sql(std::size_t r) {
    std::vector<std::string> branches;
    if (mapping_of_[r] || rels_.has_table(r) || !has_rules(r)) {
      const TableMapping& m = table(r);
      const std::string a = next_alias("tt");
      Scope s;
      s.from.push_back(m.relation + " " + a);
      std::vector<std::string> select;
      for (std::size_t k = 0; k < m.columns.size(); ++k) {
        select.push_back(a + "." + m.columns[k] + " AS x" + std::to_string(k + 1));
      }
      if (select.empty()) select.push_back("1 AS x0");
      branches.push_back(s.render(select));
    }
    for (auto i : rules_of_[r]) branches.push_back(rule_sql(rb_.rules[i]));
    return join(branches, "\nUNION\n");
  }

  Source source(std::size_t r) {
    if (mapping_of_[r] && !has_rules(r)) {
      const TableMapping& m = *mapping_of_[r];
      const std::string a = next_alias("tt");
      return Source{m.relation + " " + a, a, m.columns};
    }
    const std::string a = next_alias("d");
    Source s{"(" + relation_sql(r) + ") " + a, a, {}};
    for (std::size_t k = 0; k < rels_.id(r).arity(); ++k) s.cols.push_back("x" + std::to_string(k + 1));
    return s;
  }

  // Adds the reading's conditions, joining its variables into scope.
  static void bind_reading(const Reading& rd, const Source& src, Scope& s) {
    for (std::size_t k = 0; k < rd.alignment.holes.size(); ++k) {
      const auto& fill = rd.alignment.holes[k];
      if (fill.variable) {
        s.unify(*fill.variable, src.col(k));
      } else {
        s.where.push_back(src.col(k) + " = " + literal(*fill.value));
      }
    }
    for (const auto& [var, value] : rd.alignment.pinned) s.unify(var, literal(value));
  }

  // The relation a positive premise denotes: one reading directly, several
  // as a derived table over the premise's variables.
  void positive(const SentencePattern& sentence, Scope& s) {
    const auto readings = rels_.readings(sentence);
    if (readings.empty()) throw UnmappedPredicate(skeleton_of(sentence).to_string());
    if (readings.size() == 1) {
      Source src = source(readings[0].relation);
      s.from.push_back(src.from);
      bind_reading(readings[0], src, s);
      return;
    }
    const auto vars = sentence.variables();
    std::vector<std::string> branches;
    for (const auto& rd : readings) {
      Scope inner;
      Source src = source(rd.relation);
      inner.from.push_back(src.from);
      bind_reading(rd, src, inner);
      std::vector<std::string> select;
      for (std::size_t i = 0; i < vars.size(); ++i) {
        select.push_back(inner.at(vars[i]) + " AS v" + std::to_string(i + 1));
      }
      if (select.empty()) select.push_back("1 AS v0");
      branches.push_back(inner.render(select));
    }
    const std::string a = next_alias("d");
    s.from.push_back("(" + join(branches, "\nUNION\n") + ") " + a);
    for (std::size_t i = 0; i < vars.size(); ++i) s.unify(vars[i], a + ".v" + std::to_string(i + 1));
  }

  void negated(const SentencePattern& sentence, Scope& s) {
    for (const auto& rd : rels_.readings(sentence)) {
      Scope inner;
      inner.vars = s.vars;
      Source src = source(rd.relation);
      inner.from.push_back(src.from);
      bind_reading(rd, src, inner);
      s.where.push_back("NOT EXISTS (" + inner.render({"1"}, false) + ")");
    }
  }

  static void builtin(const BuiltinCall& call, Scope& s) {
    const std::string a = s.term(call.args[0]);
    const std::string b = s.term(call.args[1]);
    if (is_comparison(call.op)) {
      s.where.push_back(a + " " + std::string(sql_operator(call.op)) + " " + b);
      return;
    }
    std::string expr;
    if (call.op == BuiltinOp::round) {
      expr = "ROUND(" + a + ", " + b + ")";
    } else if (call.op == BuiltinOp::div) {
      expr = "(CAST(" + a + " AS REAL) / " + b + ")";
      s.where.push_back(b + " <> 0");
    } else {
      expr = "(" + a + " " + std::string(sql_operator(call.op)) + " " + b + ")";
    }
    const Term& out = call.args[2];
    if (out.is_constant()) {
      s.where.push_back(expr + " = " + literal(Value(out.text())));
    } else {
      s.unify(out.name(), expr);
    }
  }

  std::string rule_sql(const Rule& rule) {
    Scope s;
    for (const auto& p : rule.premises) {
      switch (p.kind) {
        case PremiseKind::positive: positive(p.sentence, s); break;
        case PremiseKind::negated: negated(p.sentence, s); break;
        case PremiseKind::builtin: builtin(*p.builtin, s); break;
        case PremiseKind::aggregate: break;
      }
    }
    const auto head = hole_variables(rule.conclusion);
    const AggregateCall* agg = rule.aggregate();
    if (!agg) {
      std::vector<std::string> select;
      for (std::size_t k = 0; k < head.size(); ++k) {
        select.push_back(s.at(head[k]) + " AS x" + std::to_string(k + 1));
      }
      if (select.empty()) select.push_back("1 AS x0");
      return s.render(select);
    }
    // Distinct premise solutions first, then the grouped fold.
    std::vector<std::string> premise_vars;
    for (const auto& p : rule.premises) {
      if (p.kind == PremiseKind::aggregate) continue;
      for (const auto& v : p.sentence.variables()) {
        if (std::find(premise_vars.begin(), premise_vars.end(), v) == premise_vars.end()) {
          premise_vars.push_back(v);
        }
      }
    }
    std::vector<std::string> inner_select;
    std::map<std::string, std::string> column;
    for (std::size_t i = 0; i < premise_vars.size(); ++i) {
      column[premise_vars[i]] = "p" + std::to_string(i + 1);
      inner_select.push_back(s.at(premise_vars[i]) + " AS p" + std::to_string(i + 1));
    }
    const std::string g = next_alias("g");
    std::vector<std::string> select;
    std::vector<std::string> group;
    for (std::size_t k = 0; k < head.size(); ++k) {
      const std::string col = head[k] == agg->output
                                  ? (agg->fn == AggregateFn::count
                                         ? std::string("COUNT(*)")
                                         : std::string(sql_aggregate(agg->fn)) + "(" + g + "." +
                                               column.at(agg->operand) + ")")
                                  : g + "." + column.at(head[k]);
      if (head[k] != agg->output) group.push_back(col);
      select.push_back(col + " AS x" + std::to_string(k + 1));
    }
    const std::string from = " FROM (" + s.render(inner_select) + ") " + g;
    if (!group.empty()) return "SELECT " + join(select, ", ") + from + " GROUP BY " + join(group, ", ");
    // A fold over no solutions derives nothing, where SQL would give one row.
    const std::string h = next_alias("h");
    std::vector<std::string> outer;
    for (std::size_t k = 0; k < head.size(); ++k) outer.push_back(h + ".x" + std::to_string(k + 1));
    return "SELECT " + join(outer, ", ") + " FROM (SELECT " + join(select, ", ") + ", COUNT(*) AS n" +
           from + ") " + h + " WHERE " + h + ".n > 0";
  }

  std::string query_sql(const Query& q, const std::vector<std::string>& out_cols) {
    const auto vars = q.pattern.variables();
    std::vector<std::string> branches;
    for (const auto& rd : rels_.readings(q.pattern)) {
      Scope s;
      Source src = source(rd.relation);
      s.from.push_back(src.from);
      bind_reading(rd, src, s);
      std::vector<std::string> select;
      for (std::size_t i = 0; i < vars.size(); ++i) select.push_back(s.at(vars[i]) + " AS " + out_cols[i]);
      if (select.empty()) select.push_back("1 AS ANSWER");
      branches.push_back(s.render(select));
    }
    if (branches.empty()) throw UnmappedPredicate(skeleton_of(q.pattern).to_string());
    return join(branches, "\nUNION\n");
  }

 private:
  const TableMapping& table(std::size_t r) const {
    if (!mapping_of_[r]) throw UnmappedPredicate(rels_.id(r).to_string());
    if (mapping_of_[r]->columns.empty()) throw UnsupportedInSql("a table without placeholders");
    return *mapping_of_[r];
  }
  std::string next_alias(const std::string& prefix) { return prefix + std::to_string(++alias_); }

  const Rulebase& rb_;
  const RelationSet& rels_;
  std::vector<std::vector<std::size_t>> rules_of_;
  std::vector<const TableMapping*> mapping_of_;
  int alias_ = 0;
};

// Relations on a cycle of the dependency graph.
std::vector<bool> recursive_relations(const std::vector<std::vector<std::size_t>>& edges) {
  const std::size_t n = edges.size();
  std::vector<int> index(n, -1), low(n, 0);
  std::vector<bool> on_stack(n, false), out(n, false);
  std::vector<std::size_t> stack;
  int counter = 0;
  std::function<void(std::size_t)> visit = [&](std::size_t v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;
    for (auto w : edges[v]) {
      if (index[w] < 0) {
        visit(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::vector<std::size_t> scc;
      std::size_t w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        scc.push_back(w);
      } while (w != v);
      const bool self = std::find(edges[v].begin(), edges[v].end(), v) != edges[v].end();
      if (scc.size() > 1 || self) {
        for (auto x : scc) out[x] = true;
      }
    }
  };
  for (std::size_t v = 0; v < n; ++v) {
    if (index[v] < 0) visit(v);
  }
  return out;
}

Value from_double(double d) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.15g", d);
  std::string s = buf;
  if (s.find_first_of("eE") != std::string::npos) {
    std::snprintf(buf, sizeof buf, "%.15f", d);
    s = buf;
    while (s.size() > 1 && s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
  }
  return Value(s);
}

}  // namespace

std::string sql_identifier(std::string_view name) {
  std::string out;
  for (unsigned char c : name) {
    out += std::isalnum(c) ? static_cast<char>(std::toupper(c)) : '_';
  }
  if (out.empty() || std::isdigit(static_cast<unsigned char>(out[0]))) out = "C" + out;
  if (kReserved.count(out)) out += "1";
  return out;
}

std::vector<TableMapping> default_mappings(const Rulebase& rb) {
  std::vector<TableMapping> out;
  std::set<std::string> used;
  for (std::size_t i = 0; i < rb.tables.size(); ++i) {
    const auto& t = rb.tables[i];
    TableMapping m;
    m.heading = t.heading;
    std::string name = t.name.empty() ? "T" + std::to_string(i + 1) : sql_identifier(t.name);
    for (int k = 2; used.count(name); ++k) name = sql_identifier(t.name) + "_" + std::to_string(k);
    used.insert(name);
    m.relation = name;
    m.columns = unique_columns(hole_variables(t.heading));
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<TableMapping> parse_mappings(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("table mapping: ") + e.what());
  }
  std::vector<TableMapping> out;
  for (const auto& [section, body] : tree) {
    const std::string prefix = "relation ";
    if (section.rfind(prefix, 0) != 0) throw ConfigError("unknown section [" + section + "]");
    TableMapping m;
    m.relation = section.substr(prefix.size());
    for (const auto& [key, value] : body) {
      const std::string v = value.get_value<std::string>();
      if (key == "heading") {
        m.heading = parse_sentence(v);
      } else if (key == "columns") {
        std::istringstream cols(v);
        std::string c;
        while (std::getline(cols, c, ',')) {
          const auto a = c.find_first_not_of(" \t");
          const auto b = c.find_last_not_of(" \t");
          if (a != std::string::npos) m.columns.push_back(c.substr(a, b - a + 1));
        }
      } else if (key == "source") {
        m.source = v == "embedded" ? "" : v;
      } else {
        throw ConfigError("unknown key '" + key + "' in [" + section + "]");
      }
    }
    if (m.heading.empty()) throw ConfigError("[" + section + "] needs a heading");
    if (m.columns.empty()) m.columns = unique_columns(hole_variables(m.heading));
    if (m.columns.size() != m.predicate().arity()) {
      throw ConfigError("[" + section + "] lists " + std::to_string(m.columns.size()) +
                        " columns for a heading with " + std::to_string(m.predicate().arity()) +
                        " placeholders");
    }
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<TableMapping> load_mappings(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_mappings(ss.str());
}

SqlPlan compile_sql(const Rulebase& rb, const Query& q, const std::vector<TableMapping>& mappings) {
  require_valid(rb);
  std::vector<SentencePattern> extra;
  for (const auto& m : mappings) extra.push_back(m.heading);
  const RelationSet rels(rb, extra);
  Compiler c(rb, rels, mappings);

  // Dependencies between relations, then everything reachable from the query.
  std::vector<std::vector<std::size_t>> edges(rels.size());
  for (std::size_t r = 0; r < rels.size(); ++r) {
    for (auto i : c.rules_of(r)) {
      for (const auto& p : rb.rules[i].premises) {
        if (p.kind != PremiseKind::positive && p.kind != PremiseKind::negated) continue;
        for (auto d : rels.resolve(p.sentence)) edges[r].push_back(d);
      }
    }
  }
  const auto recursive = recursive_relations(edges);
  std::vector<bool> reachable(rels.size(), false);
  std::vector<std::size_t> todo = rels.resolve(q.pattern);
  while (!todo.empty()) {
    const auto r = todo.back();
    todo.pop_back();
    if (reachable[r]) continue;
    reachable[r] = true;
    for (auto d : edges[r]) todo.push_back(d);
  }
  // In the engine: recursive relations and whatever depends on them.
  std::vector<bool> engine(rels.size(), false);
  for (std::size_t r = 0; r < rels.size(); ++r) engine[r] = recursive[r];
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t r = 0; r < rels.size(); ++r) {
      if (engine[r]) continue;
      for (auto d : edges[r]) {
        if (engine[d]) {
          engine[r] = changed = true;
          break;
        }
      }
    }
  }

  SqlPlan plan;
  plan.query = q;
  plan.columns = q.pattern.variables();
  const auto out_cols = unique_columns(plan.columns);
  bool query_in_engine = false;
  for (auto r : rels.resolve(q.pattern)) query_in_engine = query_in_engine || engine[r];

  std::set<std::size_t> tables_read;
  for (std::size_t r = 0; r < rels.size(); ++r) {
    if (!reachable[r]) continue;
    if (c.mapping(r)) {
      tables_read.insert(r);
    } else if (!c.has_rules(r) || rels.has_table(r)) {
      throw UnmappedPredicate(rels.id(r).to_string());
    }
  }
  for (auto r : tables_read) plan.tables.push_back(*c.mapping(r));

  if (!query_in_engine) {
    plan.sql = c.query_sql(q, out_cols);
    return plan;
  }
  // Rows the engine needs: every SQL-side relation an in-engine rule or the
  // query reads, and the table rows of in-engine relations.
  std::set<std::size_t> fetch;
  for (auto r : rels.resolve(q.pattern)) {
    if (!engine[r]) fetch.insert(r);
  }
  for (std::size_t r = 0; r < rels.size(); ++r) {
    if (!reachable[r] || !engine[r]) continue;
    plan.in_engine.push_back(rels.id(r));
    for (auto d : edges[r]) {
      if (!engine[d]) fetch.insert(d);
    }
    for (auto i : c.rules_of(r)) plan.engine_rules.rules.push_back(rb.rules[i]);
    if (c.mapping(r)) {
      const TableMapping& m = *c.mapping(r);
      std::vector<std::string> select;
      for (std::size_t k = 0; k < m.columns.size(); ++k) {
        select.push_back("tt0." + m.columns[k] + " AS x" + std::to_string(k + 1));
      }
      plan.fetches.push_back(
          SqlFetch{m.heading, "SELECT DISTINCT " + join(select, ", ") + " FROM " + m.relation + " tt0"});
    }
  }
  for (auto r : fetch) plan.fetches.push_back(SqlFetch{rels.exemplar(r), c.relation_sql(r)});
  std::sort(plan.engine_rules.rules.begin(), plan.engine_rules.rules.end(),
            [](const Rule& a, const Rule& b) { return a.source_span.first < b.source_span.first; });
  std::vector<std::string> statements;
  for (const auto& f : plan.fetches) statements.push_back(f.sql);
  plan.sql = join(statements, ";\n");
  return plan;
}

// ---- SQLite ------------------------------------------------------------------

SqliteClient::SqliteClient(const std::string& path, bool create) {
  const int flags = SQLITE_OPEN_READWRITE | (create ? SQLITE_OPEN_CREATE : 0) | SQLITE_OPEN_NOMUTEX;
  if (sqlite3_open_v2(path.c_str(), &db_, flags, nullptr) != SQLITE_OK) {
    const std::string why = db_ ? sqlite3_errmsg(db_) : "out of memory";
    sqlite3_close(db_);
    db_ = nullptr;
    throw DbUnavailable("cannot open " + path + ": " + why, 1);
  }
}

SqliteClient::~SqliteClient() { sqlite3_close(db_); }

void SqliteClient::execute(const std::string& sql) {
  char* err = nullptr;
  if (sqlite3_exec(db_, sql.c_str(), nullptr, nullptr, &err) != SQLITE_OK) {
    const std::string why = err ? err : "unknown error";
    sqlite3_free(err);
    throw InvalidArgument("SQL error: " + why);
  }
}

std::vector<SqlRow> SqliteClient::query(const std::string& sql) {
  sqlite3_stmt* st = nullptr;
  if (sqlite3_prepare_v2(db_, sql.c_str(), -1, &st, nullptr) != SQLITE_OK) {
    throw InvalidArgument(std::string("SQL error: ") + sqlite3_errmsg(db_));
  }
  std::vector<SqlRow> rows;
  int rc;
  while ((rc = sqlite3_step(st)) == SQLITE_ROW) {
    SqlRow row;
    const int n = sqlite3_column_count(st);
    for (int i = 0; i < n; ++i) {
      switch (sqlite3_column_type(st, i)) {
        case SQLITE_NULL: row.emplace_back(); break;
        case SQLITE_INTEGER: row.emplace_back(Value(std::to_string(sqlite3_column_int64(st, i)))); break;
        case SQLITE_FLOAT: row.emplace_back(from_double(sqlite3_column_double(st, i))); break;
        default:
          row.emplace_back(Value(reinterpret_cast<const char*>(sqlite3_column_text(st, i))));
      }
    }
    rows.push_back(std::move(row));
  }
  const std::string why = sqlite3_errmsg(db_);
  sqlite3_finalize(st);
  if (rc != SQLITE_DONE) throw InvalidArgument("SQL error: " + why);
  return rows;
}

std::optional<std::vector<std::string>> SqliteClient::columns(const std::string& table) {
  std::vector<std::string> out;
  for (const auto& row : query("PRAGMA table_info(" + literal(Value(table)) + ")")) {
    if (row.size() > 1 && row[1]) out.push_back(row[1]->text());
  }
  if (out.empty()) return std::nullopt;
  return out;
}

void SqliteClient::load(const Rulebase& rb, const std::vector<TableMapping>& mappings) {
  execute("BEGIN");
  for (const auto& m : mappings) {
    if (!m.source.empty()) continue;
    const FactTable* t = rb.table_for(m.predicate());
    execute("CREATE TABLE IF NOT EXISTS " + m.relation + " (" + join(m.columns, ", ") + ")");
    if (!t) continue;
    std::string placeholders;
    for (std::size_t k = 0; k < m.columns.size(); ++k) placeholders += k ? ", ?" : "?";
    sqlite3_stmt* st = nullptr;
    const std::string sql = "INSERT INTO " + m.relation + " VALUES (" + placeholders + ")";
    if (sqlite3_prepare_v2(db_, sql.c_str(), -1, &st, nullptr) != SQLITE_OK) {
      throw InvalidArgument(std::string("SQL error: ") + sqlite3_errmsg(db_));
    }
    for (const auto& row : t->rows) {
      sqlite3_reset(st);
      for (std::size_t k = 0; k < row.size(); ++k) {
        const Value& v = row[k];
        const int i = static_cast<int>(k + 1);
        const auto& n = v.numeric();
        if (n && n->is_integer() && n->to_int64()) {
          sqlite3_bind_int64(st, i, *n->to_int64());
        } else if (n) {
          sqlite3_bind_double(st, i, std::stod(n->to_string()));
        } else {
          sqlite3_bind_text(st, i, v.text().c_str(), static_cast<int>(v.text().size()), SQLITE_TRANSIENT);
        }
      }
      if (sqlite3_step(st) != SQLITE_DONE) {
        const std::string why = sqlite3_errmsg(db_);
        sqlite3_finalize(st);
        throw InvalidArgument("SQL error: " + why);
      }
    }
    sqlite3_finalize(st);
  }
  execute("COMMIT");
}

// ---- pool --------------------------------------------------------------------

ConnectionPool::ConnectionPool(Factory factory, std::size_t max, int retries,
                               std::chrono::milliseconds delay)
    : factory_(std::move(factory)), max_(std::max<std::size_t>(max, 1)), retries_(std::max(retries, 1)),
      delay_(delay) {}

std::unique_ptr<ConnectionPool> ConnectionPool::for_source(const SourceConfig& source) {
  if (source.driver != "sqlite") {
    throw ConfigError("source " + source.name + ": unsupported driver '" + source.driver + "'");
  }
  const std::string path = source.database;
  return std::make_unique<ConnectionPool>(
      [path] { return std::make_unique<SqliteClient>(path, false); }, source.max_connections,
      source.retries, source.retry_delay);
}

ConnectionPool::Lease::~Lease() {
  if (pool_ && client_) pool_->release(std::move(client_));
}

ConnectionPool::Lease ConnectionPool::acquire() {
  std::unique_lock lock(mutex_);
  cv_.wait(lock, [&] { return !idle_.empty() || open_ < max_; });
  if (!idle_.empty()) {
    auto c = std::move(idle_.back());
    idle_.pop_back();
    return Lease(this, std::move(c));
  }
  ++open_;
  lock.unlock();
  std::string last;
  for (int attempt = 1; attempt <= retries_; ++attempt) {
    try {
      return Lease(this, factory_());
    } catch (const std::exception& e) {
      last = e.what();
      if (attempt < retries_) std::this_thread::sleep_for(delay_);
    }
  }
  lock.lock();
  --open_;
  cv_.notify_one();
  throw DbUnavailable(last, retries_);
}

void ConnectionPool::release(std::unique_ptr<DbClient> client) {
  std::lock_guard lock(mutex_);
  idle_.push_back(std::move(client));
  cv_.notify_one();
}

std::size_t ConnectionPool::open_connections() const {
  std::lock_guard lock(mutex_);
  return open_;
}

// ---- execution ---------------------------------------------------------------

AnswerTable run_hybrid(const SqlPlan& plan, DbClient& db, const EngineLimits& limits) {
  for (const auto& m : plan.tables) {
    const auto found = db.columns(m.relation).value_or(std::vector<std::string>{});
    for (const auto& c : m.columns) {
      const bool has = std::any_of(found.begin(), found.end(), [&](const std::string& f) {
        return std::equal(f.begin(), f.end(), c.begin(), c.end(), [](char x, char y) {
          return std::toupper(static_cast<unsigned char>(x)) == std::toupper(static_cast<unsigned char>(y));
        });
      });
      if (!has) throw SchemaMismatch(m.relation, m.columns, found);
    }
  }
  if (!plan.in_engine.empty()) {
    Rulebase rb = plan.engine_rules;
    for (const auto& f : plan.fetches) {
      std::vector<std::vector<Value>> rows;
      const std::size_t arity = skeleton_of(f.heading).arity();
      for (const auto& r : db.query(f.sql)) {
        if (std::any_of(r.begin(), r.end(), [](const auto& v) { return !v.has_value(); })) continue;
        std::vector<Value> row;
        for (std::size_t k = 0; k < arity; ++k) row.push_back(*r[k]);
        rows.push_back(std::move(row));
      }
      rb.add_rows(f.heading, rows);
    }
    return solve(rb, plan.query, limits);
  }
  AnswerTable out;
  out.columns = plan.columns;
  std::set<std::vector<Value>> rows;
  for (const auto& r : db.query(plan.sql)) {
    if (std::any_of(r.begin(), r.end(), [](const auto& v) { return !v.has_value(); })) continue;
    std::vector<Value> row;
    bool keep = true;
    for (std::size_t c = 0; c < out.columns.size(); ++c) {
      row.push_back(*r[c]);
      keep = keep && plan.query.accepts(out.columns[c], row.back());
    }
    if (keep) rows.insert(std::move(row));
  }
  for (const auto& row : rows) {
    Binding b;
    for (std::size_t c = 0; c < row.size(); ++c) b.bind(out.columns[c], row[c]);
    out.handles.push_back(proof_handle(instantiate(plan.query.pattern, b).text));
    out.rows.push_back(row);
  }
  return out;
}

AnswerTable run_hybrid(const SqlPlan& plan, ConnectionPool& pool, const EngineLimits& limits) {
  auto lease = pool.acquire();
  return run_hybrid(plan, *lease, limits);
}

}  // namespace ee

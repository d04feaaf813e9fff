#include "eewiki/cli.h"

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "eewiki/service.h"
#include "json_io.h"

namespace ee {

namespace {

// Malformed flag values: exit 2 like any other usage error.
struct Usage : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using api::json;

struct Options {
  std::string limits;
  std::string format = "text";
  std::string config;

  std::string target;
  std::string sentence;
  std::vector<std::string> equals, min, max, approx;
  bool html = false;
  std::string search;
  bool search_given = false;
  std::string map;
  bool run = false;
  std::string data;
  std::string table;
  std::string heading;
  std::string delimiter = "\t";
  std::string host;
  int port = 0;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFound("file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Session {
 public:
  Session(const Options& o, std::ostream& out, std::ostream& err) : o_(o), out_(out), err_(err) {
    if (!o.config.empty()) config_ = load_config(o.config);
    try {
      limits_ = o.limits.empty() ? config_.limits : parse_limits(o.limits, config_.limits);
    } catch (const ConfigError& e) {
      throw Usage(std::string("--limits: ") + e.what());
    }
  }

  bool json_mode() const { return o_.format == "json"; }

  // A file, or with --config a rulebase id in the workspace.
  const Rulebase& target() {
    if (std::filesystem::is_regular_file(o_.target)) {
      rb_ = parse_rulebase(read_file(o_.target));
    } else if (!o_.config.empty() && Workspace::valid_id(o_.target)) {
      rb_ = Workspace(config_.root).rulebase(o_.target);
    } else {
      throw NotFound("file '" + o_.target + "'");
    }
    return *rb_;
  }

  int validate_cmd() {
    const auto& rb = target();
    const auto v = validate(rb);
    if (json_mode()) {
      out_ << api::validation_json(v).dump() << "\n";
    } else {
      out_ << v.render();
      if (v.ok()) {
        out_ << "ok: " << rb.rules.size() << " rules, " << rb.tables.size() << " tables\n";
      }
    }
    return v.ok() ? 0 : 1;
  }

  int ask_cmd() {
    const auto& rb = target();
    const auto t = solve(rb, query(), limits_);
    if (json_mode()) {
      out_ << api::answer_json(t).dump() << "\n";
    } else {
      out_ << t.render_text();
      for (const auto& d : t.diagnostics) err_ << "note: " << d << "\n";
    }
    return 0;
  }

  int explain_cmd() {
    const auto& rb = target();
    const auto goal = parse_sentence(o_.sentence);
    require_valid(rb);
    const Explainer ex(rb, limits_);
    const auto result = ex.explain_goal(goal);
    if (json_mode()) {
      out_ << api::explanation_json(ex, result).dump() << "\n";
      return 0;
    }
    const auto format = o_.html ? Format::html : Format::text;
    if (const auto* p = std::get_if<ProofNode>(&result)) {
      out_ << ex.render(*p, format);
    } else {
      out_ << Explainer::render(std::get<FailureNode>(result), format);
    }
    return 0;
  }

  int menu_cmd() {
    const auto& rb = target();
    if (o_.search_given) {
      std::vector<RankedEntry> results;
      if (!search_words(o_.search).empty()) results = search(rb, o_.search);
      if (json_mode()) {
        out_ << api::search_json(results).dump() << "\n";
        return 0;
      }
      for (const auto& r : results) {
        char score[32];
        std::snprintf(score, sizeof score, "%.3f", r.score);
        out_ << score << "  " << r.entry.text() << "\n";
      }
      return 0;
    }
    const auto layers = build_menu(rb);
    if (json_mode()) {
      out_ << api::menu_json(layers).dump() << "\n";
      return 0;
    }
    for (const auto& layer : layers) {
      out_ << "layer " << layer.rank << "\n";
      for (const auto& e : layer.entries) out_ << "  " << e.text() << "\n";
    }
    return 0;
  }

  int sql_cmd() {
    const auto& rb = target();
    const auto mappings = o_.map.empty() ? default_mappings(rb) : load_mappings(o_.map);
    const auto plan = compile_sql(rb, query(), mappings);
    if (!o_.run) {
      if (json_mode()) {
        out_ << api::plan_json(rb, plan).dump() << "\n";
      } else {
        out_ << plan.sql << ";\n";
        for (const auto& s : api::in_engine_sentences(rb, plan)) out_ << "-- in engine: " << s << "\n";
      }
      return 0;
    }
    std::set<std::string> sources;
    for (const auto& t : plan.tables) sources.insert(t.source);
    AnswerTable t;
    if (sources.empty() || (sources.size() == 1 && sources.begin()->empty())) {
      SqliteClient db;
      db.load(rb, mappings);
      t = run_hybrid(plan, db, limits_);
    } else if (sources.size() == 1) {
      auto it = config_.sources.find(*sources.begin());
      if (it == config_.sources.end()) throw ConfigError("unknown source '" + *sources.begin() + "'");
      auto pool = ConnectionPool::for_source(it->second);
      t = run_hybrid(plan, *pool, limits_);
    } else {
      throw ConfigError("the query reads tables from more than one source");
    }
    out_ << (json_mode() ? api::answer_json(t).dump() + "\n" : t.render_text());
    return 0;
  }

  int ingest_cmd() {
    Workspace ws(config_.root);
    const auto data = read_file(o_.data);
    IngestResult r;
    if (o_.heading.empty()) {
      r = ws.ingest_ntriples(o_.target, o_.table, data);
    } else {
      if (o_.delimiter.size() != 1) throw InvalidArgument("--delimiter must be one character");
      r = ws.ingest_rows(o_.target, o_.table, parse_sentence(o_.heading), data, o_.delimiter[0]);
    }
    if (json_mode()) {
      out_ << json{{"table", r.table}, {"added", r.added}, {"total", r.total}}.dump() << "\n";
    } else {
      out_ << r.table << ": added " << r.added << " rows, " << r.total << " in total\n";
    }
    return 0;
  }

  int serve_cmd() {
    auto config = config_;
    config.limits = limits_;
    if (!o_.host.empty()) config.host = o_.host;
    if (o_.port > 0) config.port = o_.port;
    Service service(config);
    err_ << "serving " << config.root.string() << " on http://" << config.host << ":" << config.port
         << "\n";
    err_.flush();
    if (!service.listen(config.host, config.port)) {
      throw Error("bind_failed", "cannot listen on " + config.host + ":" + std::to_string(config.port));
    }
    return 0;
  }

  int fail(const Error& e) {
    if (json_mode()) out_ << api::error_json(e, rb_ ? &*rb_ : nullptr).dump() << "\n";
    err_ << "error: " << e.what() << "\n";
    if (const auto* r = dynamic_cast<const RejectedRulebase*>(&e)) {
      for (const auto& d : r->details()) err_ << d << "\n";
    } else if (const auto* p = dynamic_cast<const ParseError*>(&e)) {
      for (const auto& d : p->diagnostics()) err_ << d.to_string() << "\n";
    }
    return 1;
  }

 private:
  // "name=value"; approx values may end in ":N", the allowed distance.
  static std::pair<std::string, std::string> split_edit(const std::string& flag, const std::string& s) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw Usage(flag + " expects variable=value, got '" + s + "'");
    }
    return {s.substr(0, eq), s.substr(eq + 1)};
  }

  Query query() const {
    const auto pattern = parse_sentence(o_.sentence);
    std::vector<std::pair<std::string, Constraint>> edits;
    for (const auto& s : o_.equals) {
      auto [k, v] = split_edit("--equals", s);
      edits.emplace_back(k, Equals{Value(v)});
    }
    std::map<std::string, Range> ranges;
    std::vector<std::string> range_order;
    const auto range_for = [&](const std::string& k) -> Range& {
      if (!ranges.count(k)) range_order.push_back(k);
      return ranges[k];
    };
    for (const auto& s : o_.min) {
      auto [k, v] = split_edit("--min", s);
      range_for(k).min = Value(v);
    }
    for (const auto& s : o_.max) {
      auto [k, v] = split_edit("--max", s);
      range_for(k).max = Value(v);
    }
    for (const auto& k : range_order) edits.emplace_back(k, ranges[k]);
    for (const auto& s : o_.approx) {
      auto [k, v] = split_edit("--approx", s);
      std::size_t distance = 0;
      const auto colon = v.rfind(':');
      if (colon != std::string::npos && colon + 1 < v.size() &&
          v.find_first_not_of("0123456789", colon + 1) == std::string::npos) {
        distance = std::stoul(v.substr(colon + 1));
        v.resize(colon);
      }
      edits.emplace_back(k, Approx{v, distance});
    }
    return specialize(pattern, edits);
  }

  const Options& o_;
  std::ostream& out_;
  std::ostream& err_;
  WorkspaceConfig config_;
  EngineLimits limits_;
  std::optional<Rulebase> rb_;
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Executable English wiki: validate, query and explain rulebases", "eewiki"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--limits", o.limits, "Engine limits, rounds=N,facts=M");
  app.add_option("--format", o.format, "Output format")->check(CLI::IsMember({"text", "json"}));
  app.add_option("--config", o.config, "Workspace configuration file");

  const auto add_target = [&](CLI::App* sub) {
    sub->add_option("target", o.target, "Rulebase file, or id with --config")->required();
  };
  const auto add_sentence = [&](CLI::App* sub) {
    sub->add_option("sentence", o.sentence, "Sentence with some- placeholders")->required();
  };
  const auto add_constraints = [&](CLI::App* sub) {
    sub->add_option("--equals", o.equals, "variable=value");
    sub->add_option("--min", o.min, "variable=value");
    sub->add_option("--max", o.max, "variable=value");
    sub->add_option("--approx", o.approx, "variable=text[:distance]");
  };

  auto* validate = app.add_subcommand("validate", "Check a rulebase");
  add_target(validate);

  auto* ask = app.add_subcommand("ask", "Answer a question");
  add_target(ask);
  add_sentence(ask);
  add_constraints(ask);

  auto* explain = app.add_subcommand("explain", "Explain a conclusion, or why it does not hold");
  add_target(explain);
  add_sentence(explain);
  explain->add_flag("--html", o.html, "Render as HTML");

  auto* menu = app.add_subcommand("menu", "Show the question menu");
  add_target(menu);
  menu->add_option("--search", o.search, "Rank sentences against free text");

  auto* sql = app.add_subcommand("sql", "Show the SQL for a question");
  add_target(sql);
  add_sentence(sql);
  add_constraints(sql);
  sql->add_option("--map", o.map, "Table mapping file");
  sql->add_flag("--run", o.run, "Run against an embedded database loaded with the tables");

  auto* ingest = app.add_subcommand("ingest", "Add N-Triples or delimited rows to a rulebase");
  ingest->add_option("id", o.target, "Rulebase id")->required();
  ingest->add_option("data", o.data, "Data file")->required();
  ingest->add_option("--table", o.table, "Table name")->required();
  ingest->add_option("--heading", o.heading, "Heading sentence for delimited rows");
  ingest->add_option("--delimiter", o.delimiter, "Cell delimiter for delimited rows");

  auto* serve = app.add_subcommand("serve", "Start the HTTP service");
  serve->add_option("--host", o.host, "Listen address");
  serve->add_option("--port", o.port, "Listen port");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }
  o.search_given = menu->count("--search") > 0;

  std::unique_ptr<Session> session;
  try {
    session = std::make_unique<Session>(o, out, err);
  } catch (const Usage& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  try {
    if (*validate) return session->validate_cmd();
    if (*ask) return session->ask_cmd();
    if (*explain) return session->explain_cmd();
    if (*menu) return session->menu_cmd();
    if (*sql) return session->sql_cmd();
    if (*ingest) return session->ingest_cmd();
    if (*serve) return session->serve_cmd();
  } catch (const Usage& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    return session->fail(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace ee

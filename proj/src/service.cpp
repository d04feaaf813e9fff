#include "eewiki/service.h"

#include <httplib.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <regex>
#include <thread>

#include "json_io.h"

namespace ee {

int http_status(const std::string& code) {
  static const std::map<std::string, int> table = {
      {"bad_request", 400},        {"empty_sentence", 400},   {"unknown_variable", 400},
      {"unbound_variable", 400},   {"bad_triple", 400},       {"width_mismatch", 400},
      {"not_found", 404},          {"not_derivable", 404},    {"method_not_allowed", 405},
      {"revision_conflict", 409},  {"parse_error", 422},      {"not_safe", 422},
      {"not_stratified", 422},     {"type_mismatch", 422},    {"limit_exceeded", 422},
      {"unknown_predicate", 422},  {"unmapped_predicate", 422}, {"unsupported_in_sql", 422},
      {"schema_mismatch", 422},    {"config_error", 422},     {"db_unavailable", 503},
  };
  auto it = table.find(code);
  return it == table.end() ? 422 : it->second;
}

namespace {

using json = nlohmann::json;
using Reply = Service::Reply;
using namespace api;

Reply reply(int status, const json& body) { return Reply{status, body.dump()}; }

Reply error_reply(const std::string& code, const std::string& message,
                  const std::optional<json>& details = std::nullopt) {
  return reply(http_status(code), error_body(code, message, details));
}

Reply error_reply(const Error& e, const Rulebase* rb = nullptr) {
  return reply(http_status(e.code()), error_json(e, rb));
}

std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

json parse_body(const std::string& body, bool required) {
  if (body.find_first_not_of(" \t\r\n") == std::string::npos) {
    if (required) throw InvalidArgument("request body is empty");
    return json::object();
  }
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception&) {
    throw InvalidArgument("request body is not valid JSON");
  }
  if (!j.is_object()) throw InvalidArgument("request body must be a JSON object");
  return j;
}

std::int64_t parse_revision(std::string s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  std::int64_t v = -1;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || v < 0) {
    throw InvalidArgument("If-Match must be a revision number");
  }
  return v;
}

}  // namespace

struct Service::Impl {
  WorkspaceConfig config;
  Workspace workspace;
  httplib::Server server;
  std::thread thread;

  struct CachedExplainer {
    std::int64_t revision = -1;
    std::shared_ptr<const Explainer> explainer;
  };
  mutable std::mutex cache_mutex;
  mutable std::map<std::string, CachedExplainer> explainers;

  explicit Impl(WorkspaceConfig c) : config(std::move(c)), workspace(config.root) {}

  std::shared_ptr<const Explainer> explainer(const std::string& id) const {
    const auto revision = workspace.get(id).revision;
    {
      std::lock_guard lock(cache_mutex);
      auto it = explainers.find(id);
      if (it != explainers.end() && it->second.revision == revision) return it->second.explainer;
    }
    const auto rb = workspace.rulebase(id);
    require_valid(rb);
    auto ex = std::make_shared<const Explainer>(rb, config.limits);
    std::lock_guard lock(cache_mutex);
    explainers[id] = CachedExplainer{revision, ex};
    return ex;
  }

  Reply list() const {
    json out = json::array();
    for (const auto& id : workspace.list()) {
      const auto e = workspace.get(id);
      out.push_back({{"id", e.id}, {"revision", e.revision}, {"updated_at", e.updated_at}});
    }
    return reply(200, {{"rulebases", out}});
  }

  Reply get(const std::string& id) const {
    const auto e = workspace.get(id);
    json tables = json::array();
    for (const auto& t : workspace.rulebase(id).tables) {
      tables.push_back({{"name", t.name}, {"heading", t.heading.to_string()}, {"rows", t.rows.size()}});
    }
    return reply(200, {{"id", e.id},
                       {"source", e.source},
                       {"revision", e.revision},
                       {"updated_at", e.updated_at},
                       {"diagnostics", diagnostics_json(e.diagnostics)},
                       {"tables", tables}});
  }

  Reply put(const std::string& id, const std::string& body,
            const std::map<std::string, std::string>& headers) {
    auto it = headers.find("if-match");
    if (it == headers.end()) throw InvalidArgument("PUT needs an If-Match revision");
    const auto expected = parse_revision(it->second);
    const auto source = req_string(parse_body(body, true), "source");
    try {
      const auto e = workspace.save(id, source, expected);
      return reply(200, {{"id", e.id},
                         {"revision", e.revision},
                         {"updated_at", e.updated_at},
                         {"diagnostics", diagnostics_json(e.diagnostics)}});
    } catch (const RevisionConflict& c) {
      return error_reply(c);
    }
  }

  Reply validate_rb(const std::string& id, const std::string& body) const {
    const auto j = parse_body(body, false);
    Rulebase rb;
    if (auto source = opt_string(j, "source")) {
      if (!workspace.exists(id)) throw NotFound("rulebase '" + id + "'");
      rb = parse_rulebase(*source);
      // Draft text is checked together with the stored tables.
      for (const auto& t : workspace.rulebase(id).tables) {
        if (t.source_span.first == 0) rb.add_rows(t.heading, t.rows, t.name);
      }
    } else {
      rb = workspace.rulebase(id);
    }
    return reply(200, validation_json(validate(rb)));
  }

  Reply menu(const std::string& id) const {
    return reply(200, menu_json(build_menu(workspace.rulebase(id))));
  }

  Reply menu_search(const std::string& id, const std::string& body) const {
    const auto text = req_string(parse_body(body, true), "text");
    if (search_words(text).empty()) return reply(200, search_json({}));
    return reply(200, search_json(search(workspace.rulebase(id), text)));
  }

  Reply query(const std::string& id, const std::string& body) const {
    const auto q = query_from(parse_body(body, true));
    const auto rb = workspace.rulebase(id);
    try {
      return reply(200, answer_json(solve(rb, q, config.limits)));
    } catch (const RejectedRulebase& e) {
      return error_reply(e, &rb);
    }
  }

  Reply node(const std::string& id, const std::string& hash) const {
    const auto ex = explainer(id);
    auto n = ex->find(hash);
    if (!n) throw NotFound("explanation node '" + hash + "'");
    auto j = node_json(*ex, *n);
    j["text"] = ex->render(*n, Format::text);
    return reply(200, j);
  }

  Reply explain(const std::string& id, const std::string& body) const {
    const auto j = parse_body(body, true);
    auto goal = parse_sentence(req_string(j, "goal"));
    if (auto it = j.find("values"); it != j.end() && !it->is_null()) {
      if (!it->is_object()) throw InvalidArgument("'values' must be an object");
      Binding b;
      for (const auto& [name, v] : it->items()) {
        if (!goal.mentions(name)) throw UnknownVariable(name);
        b.bind(name, value_of(v, "'values." + name + "'"));
      }
      goal = parse_sentence(render_partial(goal, b));
    }
    std::shared_ptr<const Explainer> ex;
    try {
      ex = explainer(id);
    } catch (const RejectedRulebase& e) {
      const auto rb = workspace.rulebase(id);
      return error_reply(e, &rb);
    }
    return reply(200, explanation_json(*ex, ex->explain_goal(goal)));
  }

  Reply sql(const std::string& id, const std::string& body) const {
    const auto j = parse_body(body, true);
    const auto q = query_from(j);
    const auto rb = workspace.rulebase(id);
    const auto text = opt_string(j, "mappings");
    const auto mappings = text ? parse_mappings(*text) : default_mappings(rb);
    try {
      return reply(200, plan_json(rb, compile_sql(rb, q, mappings)));
    } catch (const RejectedRulebase& e) {
      return error_reply(e, &rb);
    }
  }

  Reply dispatch(const std::string& method, const std::string& path, const std::string& body,
                 const std::map<std::string, std::string>& headers) {
    static const std::regex collection(R"(^/api/rulebases/?$)");
    static const std::regex item(R"(^/api/rulebases/([^/]+)(/.*)?$)");
    static const std::regex node_path(R"(^/explain/node/([^/]+)$)");

    const auto not_allowed = [&] {
      return error_reply("method_not_allowed", method + " is not allowed on " + path);
    };
    if (std::regex_match(path, collection)) {
      return method == "GET" ? list() : not_allowed();
    }
    std::smatch m;
    if (!std::regex_match(path, m, item) || !Workspace::valid_id(m[1].str())) {
      return error_reply("not_found", "no endpoint " + path);
    }
    const std::string id = m[1].str();
    const std::string rest = m[2].str();
    if (rest.empty() || rest == "/") {
      if (method == "GET") return get(id);
      if (method == "PUT") return put(id, body, headers);
      return not_allowed();
    }
    // Everything below reads an existing rulebase.
    const auto route = [&](const char* want, auto&& fn) -> Reply {
      if (method != want) return not_allowed();
      if (!workspace.exists(id)) throw NotFound("rulebase '" + id + "'");
      return fn();
    };
    if (rest == "/validate") return route("POST", [&] { return validate_rb(id, body); });
    if (rest == "/menu") return route("GET", [&] { return menu(id); });
    if (rest == "/menu/search") return route("POST", [&] { return menu_search(id, body); });
    if (rest == "/query") return route("POST", [&] { return query(id, body); });
    if (rest == "/explain") return route("POST", [&] { return explain(id, body); });
    if (rest == "/sql") return route("POST", [&] { return sql(id, body); });
    std::smatch n;
    if (std::regex_match(rest, n, node_path)) {
      const std::string hash = n[1].str();
      return route("GET", [&] { return node(id, hash); });
    }
    return error_reply("not_found", "no endpoint " + path);
  }
};

Service::Service(WorkspaceConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    std::map<std::string, std::string> headers;
    for (const auto& [k, v] : req.headers) headers.emplace(lowercase(k), v);
    const auto r = handle(req.method, req.path, req.body, headers);
    res.status = r.status;
    res.set_content(r.body, "application/json; charset=utf-8");
  };
  auto& s = impl_->server;
  s.Get(R"(/api/.*)", handler);
  s.Put(R"(/api/.*)", handler);
  s.Post(R"(/api/.*)", handler);
  s.Delete(R"(/api/.*)", handler);
  s.Patch(R"(/api/.*)", handler);
  const auto& ui = impl_->config.ui_dir;
  if (!ui.empty() && std::filesystem::is_directory(ui)) s.set_mount_point("/", ui.string());
}

Service::~Service() { stop(); }

Workspace& Service::workspace() { return impl_->workspace; }

Service::Reply Service::handle(const std::string& method, const std::string& path,
                               const std::string& body,
                               const std::map<std::string, std::string>& headers) const {
  try {
    return impl_->dispatch(method, path, body, headers);
  } catch (const Error& e) {
    return error_reply(e);
  } catch (const json::exception& e) {
    return error_reply("bad_request", e.what());
  } catch (const std::exception& e) {
    return reply(500, error_body("internal", e.what()));
  }
}

bool Service::listen(const std::string& host, int port) { return impl_->server.listen(host, port); }

int Service::start(const std::string& host) {
  const int port = impl_->server.bind_to_any_port(host);
  if (port <= 0) return port;
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return port;
}

void Service::stop() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace ee

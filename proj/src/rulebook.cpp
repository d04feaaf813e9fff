#include "eewiki/rulebook.h"

#include <algorithm>
#include <sstream>

namespace ee {

namespace {

bool is_rule_line(std::string_view line, char mark) {
  const auto tokens = split_tokens(line);
  if (tokens.size() != 1 || tokens[0].size() < 3) return false;
  return std::all_of(tokens[0].begin(), tokens[0].end(), [&](char c) { return c == mark; });
}

bool is_underline(std::string_view line) { return is_rule_line(line, '-'); }
bool is_table_marker(std::string_view line) { return is_rule_line(line, '='); }

bool is_blank(std::string_view line) { return split_tokens(line).empty(); }

bool is_comment(std::string_view line) {
  const auto pos = line.find_first_not_of(" \t\r");
  return pos != std::string_view::npos && line[pos] == '#';
}

std::string normalize_cell(std::string_view cell) {
  std::string out;
  for (const auto& tok : split_tokens(cell)) {
    if (!out.empty()) out.push_back(' ');
    out += tok;
  }
  return out;
}

bool constant_is(const Term& t, std::string_view text) { return t.is_constant() && t.text() == text; }

bool plain_operand(const Term& t) {
  return t.is_constant() || (t.prefix().empty() && t.suffix().empty());
}

struct Line {
  std::size_t number;
  std::string text;
};

class BlockParser {
 public:
  explicit BlockParser(Rulebase& rb) : rb_(rb) {}

  void parse(const std::vector<Line>& block) {
    std::vector<Line> lines;
    for (const auto& l : block) {
      if (!is_comment(l.text)) lines.push_back(l);
    }
    if (lines.empty()) return;
    const LineSpan span{lines.front().number, lines.back().number};

    std::vector<std::size_t> underlines;
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (is_underline(lines[i].text)) underlines.push_back(i);
    }
    if (!underlines.empty()) {
      parse_rule(lines, underlines, span);
    } else if (lines.size() >= 2 && is_table_marker(lines[1].text)) {
      parse_table(lines, span);
    } else {
      warn(span, "shape",
           "block is neither a rule (one or more sentences, a line of dashes, one conclusion) nor "
           "a table (heading, a line of '=', rows)");
    }
  }

 private:
  void error(LineSpan span, std::string code, std::string message) {
    rb_.diagnostics.push_back({Severity::error, span, std::move(code), std::move(message)});
  }
  void warn(LineSpan span, std::string code, std::string message) {
    rb_.diagnostics.push_back({Severity::warning, span, std::move(code), std::move(message)});
  }

  void parse_rule(const std::vector<Line>& lines, const std::vector<std::size_t>& underlines,
                  LineSpan span) {
    if (underlines.size() > 1) {
      error(span, "multiple_underlines", "a rule has exactly one line of dashes");
      return;
    }
    const std::size_t at = underlines.front();
    if (at == 0) {
      error(span, "no_premises", "a rule needs at least one sentence above the line");
      return;
    }
    if (at + 1 == lines.size()) {
      error(span, "conclusion_missing", "a rule needs one sentence below the line");
      return;
    }
    if (at + 2 < lines.size()) {
      error(span, "multiple_conclusions", "a rule has exactly one sentence below the line");
      return;
    }

    Rule rule;
    rule.source_span = span;
    for (std::size_t i = 0; i < at; ++i) {
      const LineSpan here{lines[i].number, lines[i].number};
      auto premise = parse_premise(lines[i].text, here);
      if (!premise) return;
      rule.premises.push_back(std::move(*premise));
    }
    for (std::size_t i = 0; i < rule.premises.size(); ++i) {
      if (rule.premises[i].kind == PremiseKind::aggregate && i + 1 != rule.premises.size()) {
        error(span, "aggregate_position", "an aggregate must be the last premise of its rule");
        return;
      }
    }

    const auto& last = lines[at + 1];
    auto conclusion = parse_sentence(last.text);
    const auto& terms = conclusion.terms();
    if (terms.size() >= 2 && constant_is(terms[0], "not") && constant_is(terms[1], ":")) {
      error({last.number, last.number}, "negated_conclusion", "a conclusion cannot be negated");
      return;
    }
    if (recognize_builtin(conclusion) || recognize_aggregate(conclusion)) {
      error({last.number, last.number}, "builtin_conclusion",
            "a conclusion cannot have the form of a builtin or aggregate sentence");
      return;
    }
    rule.conclusion = std::move(conclusion);
    rb_.rules.push_back(std::move(rule));
  }

  std::optional<Premise> parse_premise(const std::string& text, LineSpan here) {
    Premise p;
    auto sentence = parse_sentence(text);
    const auto& terms = sentence.terms();
    if (terms.size() >= 2 && constant_is(terms[0], "not") && constant_is(terms[1], ":")) {
      if (terms.size() == 2) {
        error(here, "empty_negation", "nothing follows 'not :'");
        return std::nullopt;
      }
      p.kind = PremiseKind::negated;
      p.sentence = SentencePattern(std::vector<Term>(terms.begin() + 2, terms.end()));
      if (recognize_builtin(p.sentence) || recognize_aggregate(p.sentence)) {
        error(here, "negated_builtin", "a negated sentence cannot be a builtin or aggregate");
        return std::nullopt;
      }
      return p;
    }
    p.sentence = std::move(sentence);
    if ((p.builtin = recognize_builtin(p.sentence))) {
      p.kind = PremiseKind::builtin;
    } else if ((p.aggregate = recognize_aggregate(p.sentence))) {
      p.kind = PremiseKind::aggregate;
    }
    return p;
  }

  void parse_table(const std::vector<Line>& lines, LineSpan span) {
    FactTable table;
    table.source_span = span;
    table.heading = parse_sentence(lines[0].text);
    const auto arity = table.predicate().arity();
    for (std::size_t i = 2; i < lines.size(); ++i) {
      const LineSpan here{lines[i].number, lines[i].number};
      if (is_table_marker(lines[i].text)) {
        error(here, "table_marker", "a table has one '=' line, directly under its heading");
        return;
      }
      std::vector<Value> row;
      std::string_view rest = lines[i].text;
      while (true) {
        const auto bar = rest.find('|');
        row.emplace_back(normalize_cell(rest.substr(0, bar)));
        if (bar == std::string_view::npos) break;
        rest.remove_prefix(bar + 1);
      }
      if (row.size() != arity) {
        error(here, "cell_count",
              "row has " + std::to_string(row.size()) + " cells but the heading has " +
                  std::to_string(arity) + " placeholders");
        return;
      }
      if (std::any_of(row.begin(), row.end(), [](const Value& v) { return v.text().empty(); })) {
        error(here, "empty_cell", "empty cell");
        return;
      }
      if (std::find(table.rows.begin(), table.rows.end(), row) == table.rows.end()) {
        table.rows.push_back(std::move(row));
      }
    }
    if (rb_.table_for(table.predicate())) {
      error(span, "duplicate_table", "another table already has this heading");
      return;
    }
    rb_.tables.push_back(std::move(table));
  }

  Rulebase& rb_;
};

}  // namespace

std::string_view to_string(BuiltinOp op) {
  switch (op) {
    case BuiltinOp::add: return "+";
    case BuiltinOp::sub: return "-";
    case BuiltinOp::mul: return "*";
    case BuiltinOp::div: return "/";
    case BuiltinOp::round: return "round";
    case BuiltinOp::lt: return "is less than";
    case BuiltinOp::le: return "is at most";
    case BuiltinOp::gt: return "is greater than";
    case BuiltinOp::ge: return "is at least";
    case BuiltinOp::ne: return "is not equal to";
  }
  return "?";
}

std::string_view to_string(AggregateFn fn) {
  switch (fn) {
    case AggregateFn::sum: return "total";
    case AggregateFn::count: return "count";
    case AggregateFn::max: return "maximum";
    case AggregateFn::min: return "minimum";
  }
  return "?";
}

bool is_comparison(BuiltinOp op) {
  return op == BuiltinOp::lt || op == BuiltinOp::le || op == BuiltinOp::gt ||
         op == BuiltinOp::ge || op == BuiltinOp::ne;
}

std::vector<std::string> BuiltinCall::inputs() const {
  std::vector<std::string> out;
  const std::size_t n = is_comparison(op) ? args.size() : args.size() - 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (args[i].is_variable() &&
        std::find(out.begin(), out.end(), args[i].name()) == out.end()) {
      out.push_back(args[i].name());
    }
  }
  return out;
}

std::optional<BuiltinCall> recognize_builtin(const SentencePattern& sentence) {
  const auto& t = sentence.terms();
  // Placeholders glued to punctuation never denote builtin operands.
  if (!std::all_of(t.begin(), t.end(), plain_operand)) return std::nullopt;
  auto result = [](BuiltinOp op, std::vector<Term> args) {
    BuiltinCall call;
    call.op = op;
    if (!is_comparison(op) && args.back().is_variable()) call.output = args.back().name();
    call.args = std::move(args);
    return call;
  };
  if (t.size() == 5 && constant_is(t[3], "=") && t[1].is_constant()) {
    static const std::pair<std::string_view, BuiltinOp> kArith[] = {
        {"+", BuiltinOp::add}, {"-", BuiltinOp::sub}, {"*", BuiltinOp::mul}, {"/", BuiltinOp::div}};
    for (const auto& [sym, op] : kArith) {
      if (t[1].text() == sym) return result(op, {t[0], t[2], t[4]});
    }
  }
  if (t.size() == 11 && constant_is(t[1], "rounded") && constant_is(t[2], "to") &&
      constant_is(t[4], "places") && constant_is(t[5], "after") && constant_is(t[6], "the") &&
      constant_is(t[7], "decimal") && constant_is(t[8], "point") && constant_is(t[9], "is")) {
    return result(BuiltinOp::round, {t[0], t[3], t[10]});
  }
  if (t.size() == 5 && constant_is(t[1], "is")) {
    if (constant_is(t[2], "less") && constant_is(t[3], "than")) return result(BuiltinOp::lt, {t[0], t[4]});
    if (constant_is(t[2], "at") && constant_is(t[3], "most")) return result(BuiltinOp::le, {t[0], t[4]});
    if (constant_is(t[2], "greater") && constant_is(t[3], "than")) return result(BuiltinOp::gt, {t[0], t[4]});
    if (constant_is(t[2], "at") && constant_is(t[3], "least")) return result(BuiltinOp::ge, {t[0], t[4]});
  }
  if (t.size() == 6 && constant_is(t[1], "is") && constant_is(t[2], "not") &&
      constant_is(t[3], "equal") && constant_is(t[4], "to")) {
    return result(BuiltinOp::ne, {t[0], t[5]});
  }
  return std::nullopt;
}

std::optional<AggregateCall> recognize_aggregate(const SentencePattern& sentence) {
  const auto& t = sentence.terms();
  if (t.size() != 7 || !t[0].is_variable() || !t[6].is_variable()) return std::nullopt;
  if (!plain_operand(t[0]) || !plain_operand(t[6])) return std::nullopt;
  if (!constant_is(t[1], "is") || !constant_is(t[2], "the") || !constant_is(t[4], "of") ||
      !constant_is(t[5], "each") || !t[3].is_constant()) {
    return std::nullopt;
  }
  static const std::pair<std::string_view, AggregateFn> kFns[] = {
      {"total", AggregateFn::sum}, {"count", AggregateFn::count},
      {"maximum", AggregateFn::max}, {"minimum", AggregateFn::min}};
  for (const auto& [word, fn] : kFns) {
    if (t[3].text() == word) return AggregateCall{fn, t[6].name(), t[0].name()};
  }
  return std::nullopt;
}

std::string Premise::to_string() const {
  return kind == PremiseKind::negated ? "not : " + sentence.to_string() : sentence.to_string();
}

std::string Rule::id() const {
  return "rule@" + std::to_string(source_span.first) + "-" + std::to_string(source_span.last);
}

std::vector<std::string> Rule::variables() const {
  std::vector<std::string> out;
  auto add = [&](const SentencePattern& s) {
    for (const auto& v : s.variables()) {
      if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
    }
  };
  for (const auto& p : premises) add(p.sentence);
  add(conclusion);
  return out;
}

const AggregateCall* Rule::aggregate() const {
  for (const auto& p : premises) {
    if (p.aggregate) return &*p.aggregate;
  }
  return nullptr;
}

std::string Diagnostic::to_string() const {
  std::ostringstream os;
  os << (severity == Severity::error ? "ERROR" : "WARNING") << " block@" << lines.first << "-"
     << lines.last << " - " << code << ": " << message;
  return os.str();
}

bool Rulebase::has_errors() const {
  return std::any_of(diagnostics.begin(), diagnostics.end(),
                     [](const Diagnostic& d) { return d.severity == Severity::error; });
}

const FactTable* Rulebase::table_for(const PredicateId& predicate) const {
  for (const auto& t : tables) {
    if (t.predicate() == predicate) return &t;
  }
  return nullptr;
}

std::size_t Rulebase::add_rows(const SentencePattern& heading,
                               const std::vector<std::vector<Value>>& rows,
                               const std::string& name) {
  const auto predicate = skeleton_of(heading);
  FactTable* table = nullptr;
  for (auto& t : tables) {
    if (t.predicate() == predicate) table = &t;
  }
  if (!table) {
    tables.push_back(FactTable{heading, {}, name, {}});
    table = &tables.back();
  }
  std::size_t added = 0;
  for (const auto& row : rows) {
    if (std::find(table->rows.begin(), table->rows.end(), row) == table->rows.end()) {
      table->rows.push_back(row);
      ++added;
    }
  }
  return added;
}

ParseError::ParseError(std::vector<Diagnostic> diagnostics)
    : Error("parse_error",
            diagnostics.empty() ? std::string("parse error") : diagnostics.front().to_string()),
      diagnostics_(std::move(diagnostics)) {}

Rulebase parse_rulebase(std::string_view text) {
  Rulebase rb;
  BlockParser parser(rb);
  std::vector<Line> block;
  std::size_t number = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(start, end - start));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    ++number;
    if (is_blank(line)) {
      if (!block.empty()) parser.parse(block);
      block.clear();
    } else {
      block.push_back({number, std::move(line)});
    }
    start = end + 1;
  }
  if (!block.empty()) parser.parse(block);
  return rb;
}

Rulebase parse_rulebase_strict(std::string_view text) {
  Rulebase rb = parse_rulebase(text);
  if (rb.has_errors()) {
    std::vector<Diagnostic> errors;
    for (const auto& d : rb.diagnostics) {
      if (d.severity == Severity::error) errors.push_back(d);
    }
    throw ParseError(std::move(errors));
  }
  return rb;
}

std::string serialize(const Rulebase& rb) {
  std::ostringstream os;
  bool first = true;
  auto separate = [&] {
    if (!first) os << "\n";
    first = false;
  };
  for (const auto& rule : rb.rules) {
    separate();
    for (const auto& p : rule.premises) os << p.to_string() << "\n";
    os << "-----\n" << rule.conclusion.to_string() << "\n";
  }
  for (const auto& table : rb.tables) {
    separate();
    os << table.heading.to_string() << "\n===\n";
    for (const auto& row : table.rows) {
      for (std::size_t i = 0; i < row.size(); ++i) os << (i ? " | " : "") << row[i].text();
      os << "\n";
    }
  }
  return os.str();
}

bool same_structure(const Rulebase& a, const Rulebase& b) {
  if (a.rules.size() != b.rules.size() || a.tables.size() != b.tables.size()) return false;
  for (std::size_t i = 0; i < a.rules.size(); ++i) {
    const auto& x = a.rules[i];
    const auto& y = b.rules[i];
    if (x.conclusion != y.conclusion || x.premises.size() != y.premises.size()) return false;
    for (std::size_t k = 0; k < x.premises.size(); ++k) {
      if (x.premises[k].kind != y.premises[k].kind ||
          x.premises[k].sentence != y.premises[k].sentence) {
        return false;
      }
    }
  }
  for (std::size_t i = 0; i < a.tables.size(); ++i) {
    const auto& x = a.tables[i];
    const auto& y = b.tables[i];
    if (x.heading != y.heading || x.rows.size() != y.rows.size()) return false;
    for (std::size_t r = 0; r < x.rows.size(); ++r) {
      if (x.rows[r].size() != y.rows[r].size()) return false;
      for (std::size_t c = 0; c < x.rows[r].size(); ++c) {
        if (x.rows[r][c].text() != y.rows[r][c].text()) return false;
      }
    }
  }
  return true;
}

}  // namespace ee

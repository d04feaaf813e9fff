#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "program.h"

namespace ee {

namespace ir {

ValueId ValuePool::intern(const Value& v) {
  auto [it, fresh] = by_text_.try_emplace(v.text(), static_cast<ValueId>(values_.size()));
  if (!fresh) return it->second;
  values_.push_back(v);
  auto [c, first] = by_value_.try_emplace(v, it->second);
  canon_.push_back(c->second);
  return it->second;
}

std::optional<ValueId> ValuePool::find(const Value& v) const {
  auto it = by_value_.find(v);
  if (it == by_value_.end()) return std::nullopt;
  return it->second;
}

namespace {

const Decimal& number(const Value& v, BuiltinOp op) {
  if (!v.numeric()) {
    throw TypeMismatch("'" + std::string(to_string(op)) + "' needs a number, got '" + v.text() + "'");
  }
  return *v.numeric();
}

}  // namespace

std::optional<Value> arithmetic(BuiltinOp op, const Value& a, const Value& b) {
  const Decimal& x = number(a, op);
  const Decimal& y = number(b, op);
  switch (op) {
    case BuiltinOp::add: return Value::of(x + y);
    case BuiltinOp::sub: return Value::of(x - y);
    case BuiltinOp::mul: return Value::of(x * y);
    case BuiltinOp::div:
      if (y.is_zero()) return std::nullopt;
      return Value::of(Decimal::divide(x, y));
    case BuiltinOp::round: {
      const auto places = y.to_int64();
      if (!places || *places < 0 || *places > 1000) {
        throw TypeMismatch("places to round to must be a small whole number, got '" + b.text() + "'");
      }
      return Value::of(x.rounded(static_cast<int>(*places)));
    }
    default: break;
  }
  throw std::logic_error("not an arithmetic builtin");
}

bool comparison(BuiltinOp op, const Value& a, const Value& b) {
  const int c = compare_values(a, b);
  switch (op) {
    case BuiltinOp::lt: return c < 0;
    case BuiltinOp::le: return c <= 0;
    case BuiltinOp::gt: return c > 0;
    case BuiltinOp::ge: return c >= 0;
    case BuiltinOp::ne: return c != 0;
    default: break;
  }
  throw std::logic_error("not a comparison builtin");
}

}  // namespace ir

int compare_values(const Value& a, const Value& b) {
  if (a.is_numeric() && b.is_numeric()) {
    const auto c = *a.numeric() <=> *b.numeric();
    return c < 0 ? -1 : (c > 0 ? 1 : 0);
  }
  const int c = a.text().compare(b.text());
  return c < 0 ? -1 : (c > 0 ? 1 : 0);
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

bool satisfies(const Constraint& c, const Value& v) {
  if (const auto* e = std::get_if<Equals>(&c)) return e->value == v;
  if (const auto* r = std::get_if<Range>(&c)) {
    if (r->min && compare_values(v, *r->min) < 0) return false;
    if (r->max && compare_values(v, *r->max) > 0) return false;
    return true;
  }
  const auto& a = std::get<Approx>(c);
  return edit_distance(v.text(), a.text) <= a.max_distance;
}

bool Query::accepts(const std::string& variable, const Value& v) const {
  for (const auto& [name, c] : constraints) {
    if (name == variable && !satisfies(c, v)) return false;
  }
  return true;
}

std::string proof_handle(std::string_view rendered) {
  std::uint64_t h = 1469598103934665603ULL;
  const auto feed = [&h](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ULL;
    }
  };
  // Numbers hash by value, so 0.60 and 0.6 name the same fact.
  std::size_t i = 0;
  while (i < rendered.size()) {
    std::size_t j = rendered.find(' ', i);
    if (j == std::string_view::npos) j = rendered.size();
    const auto token = rendered.substr(i, j - i);
    if (auto d = Decimal::parse(token)) {
      feed(d->normalized().to_string());
    } else {
      feed(token);
    }
    if (j < rendered.size()) feed(" ");
    i = j + 1;
  }
  static const char* kHex = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kHex[h & 0xF];
    h >>= 4;
  }
  return out;
}

std::string AnswerTable::render_text() const {
  std::ostringstream os;
  if (columns.empty()) {
    os << (rows.empty() ? "no" : "yes") << "\n";
    return os.str();
  }
  std::vector<std::size_t> width(columns.size());
  for (std::size_t c = 0; c < columns.size(); ++c) {
    width[c] = columns[c].size();
    for (const auto& row : rows) width[c] = std::max(width[c], row[c].text().size());
  }
  auto line = [&](const std::vector<std::string>& cells) {
    std::string s;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c) s += " | ";
      s += cells[c];
      if (c + 1 < cells.size()) s.append(width[c] - cells[c].size(), ' ');
    }
    os << s << "\n";
  };
  line(columns);
  std::vector<std::string> rule;
  for (auto w : width) rule.emplace_back(w, '-');
  line(rule);
  for (const auto& row : rows) {
    std::vector<std::string> cells;
    for (const auto& v : row) cells.push_back(v.text());
    line(cells);
  }
  os << "(" << rows.size() << (rows.size() == 1 ? " row)" : " rows)") << "\n";
  return os.str();
}

std::optional<Binding> eval_builtin(const BuiltinCall& call, const Binding& b,
                                    std::vector<std::string>* diagnostics) {
  auto value_of = [&](const Term& t) -> std::optional<Value> {
    if (t.is_constant()) return Value(t.text());
    if (const Value* v = b.find(t.name())) return *v;
    return std::nullopt;
  };
  auto input = [&](const Term& t) {
    auto v = value_of(t);
    if (!v) throw UnboundVariable(t.name());
    return *v;
  };
  const Value a = input(call.args[0]);
  const Value c = input(call.args[1]);
  if (is_comparison(call.op)) {
    if (!ir::comparison(call.op, a, c)) return std::nullopt;
    return b;
  }
  auto result = ir::arithmetic(call.op, a, c);
  if (!result) {
    if (diagnostics) {
      diagnostics->push_back("division by zero in '" + a.text() + " / " + c.text() + "'");
    }
    return std::nullopt;
  }
  const Term& slot = call.args[2];
  Binding out = b;
  if (slot.is_constant()) {
    if (!(Value(slot.text()) == *result)) return std::nullopt;
    return out;
  }
  if (!out.bind(slot.name(), *result)) return std::nullopt;
  return out;
}

Value fold_aggregate(AggregateFn fn, const std::vector<Value>& operands) {
  if (fn == AggregateFn::count) return Value::of(Decimal(static_cast<std::int64_t>(operands.size())));
  std::optional<Decimal> acc;
  for (const auto& v : operands) {
    if (!v.numeric()) {
      throw TypeMismatch("the " + std::string(to_string(fn)) + " needs numbers, got '" + v.text() + "'");
    }
    const Decimal& x = *v.numeric();
    if (!acc) {
      acc = x;
    } else if (fn == AggregateFn::sum) {
      acc = *acc + x;
    } else if (fn == AggregateFn::max) {
      if (x > *acc) acc = x;
    } else if (x < *acc) {
      acc = x;
    }
  }
  return Value::of(acc.value_or(Decimal()));
}

std::vector<GroundFact> eval_aggregate(const Rule& rule, const std::vector<Binding>& solutions) {
  const AggregateCall* agg = rule.aggregate();
  if (!agg) throw std::invalid_argument("rule has no aggregate premise");
  std::vector<std::string> premise_vars;
  for (const auto& p : rule.premises) {
    if (p.kind == PremiseKind::aggregate) continue;
    for (const auto& v : p.sentence.variables()) {
      if (std::find(premise_vars.begin(), premise_vars.end(), v) == premise_vars.end()) {
        premise_vars.push_back(v);
      }
    }
  }
  std::vector<std::string> group_vars;
  for (const auto& v : rule.conclusion.variables()) {
    if (v != agg->output) group_vars.push_back(v);
  }
  // Distinct solutions projected on the premise variables, grouped.
  std::map<std::vector<Value>, std::set<std::vector<Value>>> groups;
  for (const auto& s : solutions) {
    std::vector<Value> key;
    std::vector<Value> tuple;
    for (const auto& v : group_vars) {
      const Value* x = s.find(v);
      if (!x) throw UnboundVariable(v);
      key.push_back(*x);
    }
    for (const auto& v : premise_vars) {
      const Value* x = s.find(v);
      if (!x) throw UnboundVariable(v);
      tuple.push_back(*x);
    }
    groups[key].insert(tuple);
  }
  const auto operand_at = static_cast<std::size_t>(
      std::find(premise_vars.begin(), premise_vars.end(), agg->operand) - premise_vars.begin());
  if (operand_at == premise_vars.size()) throw UnboundVariable(agg->operand);
  std::vector<GroundFact> out;
  for (const auto& [key, tuples] : groups) {
    std::vector<Value> operands;
    for (const auto& t : tuples) operands.push_back(t[operand_at]);
    Binding b;
    for (std::size_t i = 0; i < group_vars.size(); ++i) b.bind(group_vars[i], key[i]);
    b.bind(agg->output, fold_aggregate(agg->fn, operands));
    out.push_back(instantiate(rule.conclusion, b).fact);
  }
  return out;
}

}  // namespace ee

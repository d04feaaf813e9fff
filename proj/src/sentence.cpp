#include "eewiki/sentence.h"

#include <algorithm>
#include <functional>

#include "eewiki/errors.h"

namespace ee {

namespace {

constexpr std::string_view kHole = "\xE2\x97\x8B";  // U+25CB WHITE CIRCLE

// Byte length of the whitespace character starting at s[i], or 0.
std::size_t whitespace_at(std::string_view s, std::size_t i) {
  const auto c = static_cast<unsigned char>(s[i]);
  if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f') return 1;
  if (c == 0xC2 && i + 1 < s.size()) {
    const auto d = static_cast<unsigned char>(s[i + 1]);
    if (d == 0x85 || d == 0xA0) return 2;
  }
  if (c == 0xE1 && i + 2 < s.size() && static_cast<unsigned char>(s[i + 1]) == 0x9A &&
      static_cast<unsigned char>(s[i + 2]) == 0x80) {
    return 3;  // U+1680
  }
  if (c == 0xE2 && i + 2 < s.size()) {
    const auto d = static_cast<unsigned char>(s[i + 1]);
    const auto e = static_cast<unsigned char>(s[i + 2]);
    if (d == 0x80 && (e <= 0x8A || e == 0xA8 || e == 0xA9 || e == 0xAF)) return 3;
    if (d == 0x81 && e == 0x9F) return 3;  // U+205F
  }
  if (c == 0xE3 && i + 2 < s.size() && static_cast<unsigned char>(s[i + 1]) == 0x80 &&
      static_cast<unsigned char>(s[i + 2]) == 0x80) {
    return 3;  // U+3000
  }
  return 0;
}

bool is_name_char(char c) {
  const auto u = static_cast<unsigned char>(c);
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
         c == '-' || u >= 0x80;
}

bool is_opening_punct(char c) {
  return c == '(' || c == '[' || c == '{' || c == '"' || c == '\'' || c == '<';
}

Term classify(std::string token) {
  for (std::string_view marker : {std::string_view("some-"), std::string_view("that-")}) {
    const auto at = token.find(marker);
    if (at == std::string::npos) continue;
    if (!std::all_of(token.begin(), token.begin() + static_cast<std::ptrdiff_t>(at),
                     is_opening_punct)) {
      continue;
    }
    std::size_t end = at + marker.size();
    while (end < token.size() && is_name_char(token[end])) ++end;
    while (end > at + marker.size() && token[end - 1] == '-') --end;
    if (end == at + marker.size()) continue;
    return Term::variable(token.substr(at + marker.size(), end - at - marker.size()),
                          marker == "some-", token.substr(0, at), token.substr(end));
  }
  return Term::constant(std::move(token));
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out.push_back(' ');
    out += parts[i];
  }
  return out;
}

bool starts_with(std::string_view s, std::string_view p) { return s.substr(0, p.size()) == p; }
bool ends_with(std::string_view s, std::string_view p) {
  return s.size() >= p.size() && s.substr(s.size() - p.size()) == p;
}

// Strips the hole's punctuation from a spelled value; nullopt if it does not fit.
std::optional<std::string> unwrap(std::string_view spelled, const std::string& prefix,
                                  const std::string& suffix) {
  if (spelled.size() <= prefix.size() + suffix.size()) return std::nullopt;
  if (!starts_with(spelled, prefix) || !ends_with(spelled, suffix)) return std::nullopt;
  return std::string(spelled.substr(prefix.size(), spelled.size() - prefix.size() - suffix.size()));
}

struct Aligner {
  const std::vector<Term>& terms;
  const std::vector<PredicateId::Part>& parts;
  std::size_t limit;
  std::vector<Alignment> out;
  Alignment current;

  void run(std::size_t i, std::size_t j) {
    if (out.size() >= limit) return;
    if (j == parts.size()) {
      if (i == terms.size()) out.push_back(current);
      return;
    }
    if (i == terms.size()) return;
    // Each remaining part consumes at least one token.
    if (terms.size() - i < parts.size() - j) return;
    const auto& part = parts[j];
    const Term& term = terms[i];
    if (!part.hole) {
      if (term.is_constant()) {
        if (term.text() == part.text) run(i + 1, j + 1);
        return;
      }
      auto inner = unwrap(part.text, term.prefix(), term.suffix());
      if (!inner) return;
      current.pinned.emplace_back(term.name(), Value(*inner));
      run(i + 1, j + 1);
      current.pinned.pop_back();
      return;
    }
    if (term.is_variable()) {
      if (term.prefix() != part.prefix || term.suffix() != part.suffix) return;
      current.holes.push_back(HoleFill{term.name(), std::nullopt});
      run(i + 1, j + 1);
      current.holes.pop_back();
      return;
    }
    std::string spelled;
    for (std::size_t k = i; k < terms.size() && terms[k].is_constant(); ++k) {
      if (k > i) spelled.push_back(' ');
      spelled += terms[k].text();
      auto inner = unwrap(spelled, part.prefix, part.suffix);
      if (!inner) continue;
      current.holes.push_back(HoleFill{std::nullopt, Value(*inner)});
      run(k + 1, j + 1);
      current.holes.pop_back();
      if (out.size() >= limit) return;
    }
  }
};

}  // namespace

// ---- Value ------------------------------------------------------------------

Value::Value(std::string text) : text_(std::move(text)), numeric_(Decimal::parse(text_)) {
  hash_ = numeric_ ? numeric_->hash() ^ 0x9e3779b97f4a7c15ULL : std::hash<std::string>{}(text_);
}

std::strong_ordering operator<=>(const Value& a, const Value& b) {
  if (a.numeric_ && b.numeric_) return *a.numeric_ <=> *b.numeric_;
  if (a.numeric_) return std::strong_ordering::less;
  if (b.numeric_) return std::strong_ordering::greater;
  const int c = a.text_.compare(b.text_);
  return c < 0 ? std::strong_ordering::less
               : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
}

bool operator==(const Value& a, const Value& b) {
  if (a.numeric_ && b.numeric_) return *a.numeric_ == *b.numeric_;
  if (a.numeric_ || b.numeric_) return false;
  return a.text_ == b.text_;
}

// ---- Term / SentencePattern --------------------------------------------------

Term Term::constant(std::string text) {
  Term t;
  t.text_ = std::move(text);
  return t;
}

Term Term::variable(std::string name, bool introduces, std::string prefix, std::string suffix) {
  Term t;
  t.variable_ = true;
  t.introduces_ = introduces;
  t.text_ = std::move(name);
  t.prefix_ = std::move(prefix);
  t.suffix_ = std::move(suffix);
  return t;
}

std::string Term::spelled() const {
  if (!variable_) return text_;
  return prefix_ + (introduces_ ? "some-" : "that-") + text_ + suffix_;
}

std::vector<std::string> SentencePattern::variables() const {
  std::vector<std::string> names;
  for (const auto& t : terms_) {
    if (t.is_variable() && std::find(names.begin(), names.end(), t.name()) == names.end()) {
      names.push_back(t.name());
    }
  }
  return names;
}

bool SentencePattern::is_ground() const {
  return std::none_of(terms_.begin(), terms_.end(), [](const Term& t) { return t.is_variable(); });
}

bool SentencePattern::mentions(std::string_view variable) const {
  return std::any_of(terms_.begin(), terms_.end(),
                     [&](const Term& t) { return t.is_variable() && t.name() == variable; });
}

std::string SentencePattern::to_string() const {
  std::vector<std::string> parts;
  parts.reserve(terms_.size());
  for (const auto& t : terms_) parts.push_back(t.spelled());
  return join(parts);
}

std::vector<std::string> split_tokens(std::string_view line) {
  std::vector<std::string> tokens;
  std::string current;
  for (std::size_t i = 0; i < line.size();) {
    if (const auto n = whitespace_at(line, i)) {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
      i += n;
    } else {
      current.push_back(line[i++]);
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

SentencePattern parse_sentence(std::string_view line) {
  auto tokens = split_tokens(line);
  if (tokens.empty()) throw EmptySentence();
  std::vector<Term> terms;
  terms.reserve(tokens.size());
  for (auto& tok : tokens) terms.push_back(classify(std::move(tok)));
  return SentencePattern(std::move(terms));
}

// ---- PredicateId --------------------------------------------------------------

PredicateId::PredicateId(std::vector<Part> parts) : parts_(std::move(parts)) {
  for (std::size_t i = 0; i < parts_.size(); ++i) {
    const auto& p = parts_[i];
    if (i) key_.push_back('\x1f');
    if (p.hole) {
      ++arity_;
      key_ += '\x1e' + p.prefix + '\x1d' + p.suffix;
    } else {
      key_ += p.text;
    }
  }
}

std::string PredicateId::to_string() const {
  std::vector<std::string> out;
  for (const auto& p : parts_) out.push_back(p.hole ? p.prefix + std::string(kHole) + p.suffix : p.text);
  return join(out);
}

std::string PredicateId::render(std::span<const Value> args) const {
  std::vector<std::string> out;
  std::size_t k = 0;
  for (const auto& p : parts_) {
    if (p.hole) {
      out.push_back(p.prefix + (k < args.size() ? args[k].text() : std::string(kHole)) + p.suffix);
      ++k;
    } else {
      out.push_back(p.text);
    }
  }
  return join(out);
}

std::string PredicateId::generalized(std::span<const std::string> names) const {
  std::vector<std::string> out;
  std::size_t k = 0;
  for (const auto& p : parts_) {
    if (p.hole) {
      const std::string name = k < names.size() ? names[k] : "x" + std::to_string(k + 1);
      out.push_back(p.prefix + "some-" + name + p.suffix);
      ++k;
    } else {
      out.push_back(p.text);
    }
  }
  return join(out);
}

std::size_t PredicateIdHash::operator()(const PredicateId& p) const noexcept {
  return std::hash<std::string>{}(p.key());
}

PredicateId skeleton_of(const SentencePattern& pattern) {
  std::vector<PredicateId::Part> parts;
  parts.reserve(pattern.size());
  for (const auto& t : pattern.terms()) {
    PredicateId::Part part;
    if (t.is_variable()) {
      part.hole = true;
      part.prefix = t.prefix();
      part.suffix = t.suffix();
    } else {
      part.text = t.text();
    }
    parts.push_back(std::move(part));
  }
  return PredicateId(std::move(parts));
}

// ---- Binding ------------------------------------------------------------------

bool Binding::bind(const std::string& name, const Value& value) {
  auto [it, inserted] = values_.emplace(name, value);
  return inserted || it->second == value;
}

const Value* Binding::find(std::string_view name) const {
  auto it = values_.find(std::string(name));
  return it == values_.end() ? nullptr : &it->second;
}

Binding Binding::restricted_to(std::span<const std::string> names) const {
  Binding out;
  for (const auto& n : names) {
    if (const Value* v = find(n)) out.bind(n, *v);
  }
  return out;
}

// ---- alignment / matching ---------------------------------------------------------

std::vector<Alignment> align(const SentencePattern& pattern, const PredicateId& predicate,
                             std::size_t limit) {
  Aligner a{pattern.terms(), predicate.parts(), limit, {}, {}};
  a.run(0, 0);
  return std::move(a.out);
}

bool aligns(const SentencePattern& pattern, const PredicateId& predicate) {
  return !align(pattern, predicate, 1).empty();
}

std::optional<Binding> match(const SentencePattern& pattern, const GroundFact& fact) {
  return match(pattern, fact, Binding{});
}

namespace {

std::optional<Binding> apply(const Alignment& alignment, const GroundFact& fact, Binding b) {
  for (std::size_t k = 0; k < alignment.holes.size(); ++k) {
    const auto& fill = alignment.holes[k];
    if (fill.variable ? !b.bind(*fill.variable, fact.args[k]) : !(*fill.value == fact.args[k])) {
      return std::nullopt;
    }
  }
  for (const auto& [name, value] : alignment.pinned) {
    if (!b.bind(name, value)) return std::nullopt;
  }
  return b;
}

}  // namespace

std::optional<Binding> match(const SentencePattern& pattern, const GroundFact& fact,
                             const Binding& seed) {
  if (fact.args.size() != fact.predicate.arity()) return std::nullopt;
  for (const auto& alignment : align(pattern, fact.predicate)) {
    if (auto b = apply(alignment, fact, seed)) return b;
  }
  return std::nullopt;
}

std::vector<Binding> match_all(const SentencePattern& pattern, const GroundFact& fact,
                               const Binding& seed) {
  std::vector<Binding> out;
  if (fact.args.size() != fact.predicate.arity()) return out;
  for (const auto& alignment : align(pattern, fact.predicate)) {
    auto b = apply(alignment, fact, seed);
    if (b && std::find(out.begin(), out.end(), *b) == out.end()) out.push_back(std::move(*b));
  }
  return out;
}

Instance instantiate(const SentencePattern& pattern, const Binding& binding) {
  Instance out;
  out.fact.predicate = skeleton_of(pattern);
  std::vector<std::string> words;
  for (const auto& t : pattern.terms()) {
    if (t.is_constant()) {
      words.push_back(t.text());
      continue;
    }
    const Value* v = binding.find(t.name());
    if (!v) throw UnboundVariable(t.name());
    out.fact.args.push_back(*v);
    words.push_back(t.prefix() + v->text() + t.suffix());
  }
  out.text = join(words);
  return out;
}

std::string render_partial(const SentencePattern& pattern, const Binding& binding) {
  std::vector<std::string> words;
  for (const auto& t : pattern.terms()) {
    if (t.is_constant()) {
      words.push_back(t.text());
    } else if (const Value* v = binding.find(t.name())) {
      words.push_back(t.prefix() + v->text() + t.suffix());
    } else {
      words.push_back(t.prefix() + "some-" + t.name() + t.suffix());
    }
  }
  return join(words);
}

}  // namespace ee

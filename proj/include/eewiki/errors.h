#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ee {

// Base of every domain error. code() is the stable machine code used by the
// HTTP layer and the CLI json output.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

class EmptySentence : public Error {
 public:
  EmptySentence() : Error("empty_sentence", "sentence has no tokens") {}
};

class UnboundVariable : public Error {
 public:
  explicit UnboundVariable(std::string name)
      : Error("unbound_variable", "variable '" + name + "' has no value"),
        name_(std::move(name)) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class UnknownVariable : public Error {
 public:
  explicit UnknownVariable(std::string name)
      : Error("unknown_variable", "variable '" + name + "' does not occur in the sentence"),
        name_(std::move(name)) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class TypeMismatch : public Error {
 public:
  explicit TypeMismatch(const std::string& message) : Error("type_mismatch", message) {}
};

class LimitExceeded : public Error {
 public:
  explicit LimitExceeded(const std::string& message) : Error("limit_exceeded", message) {}
};

// Raised when a query targets a rulebase that failed parsing or static checks.
// details() carries the rendered diagnostics, one per line.
class RejectedRulebase : public Error {
 public:
  RejectedRulebase(std::string code, const std::string& message, std::vector<std::string> details)
      : Error(std::move(code), message), details_(std::move(details)) {}
  const std::vector<std::string>& details() const noexcept { return details_; }

 private:
  std::vector<std::string> details_;
};

class NotDerivable : public Error {
 public:
  explicit NotDerivable(const std::string& sentence)
      : Error("not_derivable", "'" + sentence + "' is not in the model") {}
};

class UnknownPredicate : public Error {
 public:
  explicit UnknownPredicate(const std::string& sentence)
      : Error("unknown_predicate", "no rule or table defines '" + sentence + "'") {}
};

class UnmappedPredicate : public Error {
 public:
  explicit UnmappedPredicate(const std::string& skeleton)
      : Error("unmapped_predicate", "no table mapping for '" + skeleton + "'") {}
};

class UnsupportedInSql : public Error {
 public:
  explicit UnsupportedInSql(const std::string& what)
      : Error("unsupported_in_sql", what + " has no SQL rendering") {}
};

class DbUnavailable : public Error {
 public:
  DbUnavailable(const std::string& message, int attempts)
      : Error("db_unavailable", message + " (after " + std::to_string(attempts) + " attempts)"),
        attempts_(attempts) {}
  int attempts() const noexcept { return attempts_; }

 private:
  int attempts_;
};

class SchemaMismatch : public Error {
 public:
  SchemaMismatch(std::string relation, std::vector<std::string> expected,
                 std::vector<std::string> found);
  const std::string& relation() const noexcept { return relation_; }
  const std::vector<std::string>& expected() const noexcept { return expected_; }
  const std::vector<std::string>& found() const noexcept { return found_; }

 private:
  std::string relation_;
  std::vector<std::string> expected_;
  std::vector<std::string> found_;
};

class RevisionConflict : public Error {
 public:
  explicit RevisionConflict(std::int64_t current)
      : Error("revision_conflict",
              "rulebase was changed concurrently; current revision is " + std::to_string(current)),
        current_(current) {}
  std::int64_t current() const noexcept { return current_; }

 private:
  std::int64_t current_;
};

class BadTriple : public Error {
 public:
  BadTriple(std::size_t line, const std::string& why)
      : Error("bad_triple", "line " + std::to_string(line) + ": " + why), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class WidthMismatch : public Error {
 public:
  WidthMismatch(std::size_t row, std::size_t expected, std::size_t found)
      : Error("width_mismatch", "row " + std::to_string(row) + " has " + std::to_string(found) +
                                    " cells, heading needs " + std::to_string(expected)),
        row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

class NotFound : public Error {
 public:
  explicit NotFound(const std::string& what) : Error("not_found", what + " not found") {}
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& message) : Error("bad_request", message) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message) : Error("config_error", message) {}
};

}  // namespace ee

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mtbias {

// Every failure surfaced by the library derives from Error. kind() is a
// short stable tag used by the CLI's machine-readable error summary.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("parse-error", "line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error("validation-error", what) {}
};

class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what) : Error("format-error", what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error("io-error", what) {}
};

// Argument outside an operation's precondition (empty input, bad step count...).
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error("domain-error", what) {}
};

class SourceAlignmentFailure : public Error {
 public:
  explicit SourceAlignmentFailure(const std::string& what)
      : Error("source-alignment-failure", what) {}
};

class BackendError : public Error {
 public:
  explicit BackendError(const std::string& what) : Error("backend-error", what) {}
};

}  // namespace mtbias

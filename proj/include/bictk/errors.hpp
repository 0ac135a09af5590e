#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bictk {

// Every failure raised by the toolkit derives from Error. The kind tag is
// what front-ends (CLI exit codes, HTTP status) dispatch on.
enum class ErrorKind {
  parse,
  validation,
  parameter,
  domain,
  convergence,
  incomplete_data,
  empty_result,
  undefined_index,
  spec,
  not_found,
  conflict,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::parse: return "parse error";
    case ErrorKind::validation: return "validation error";
    case ErrorKind::parameter: return "parameter error";
    case ErrorKind::domain: return "domain error";
    case ErrorKind::convergence: return "convergence error";
    case ErrorKind::incomplete_data: return "incomplete-data error";
    case ErrorKind::empty_result: return "empty-result error";
    case ErrorKind::undefined_index: return "undefined-index error";
    case ErrorKind::spec: return "spec error";
    case ErrorKind::not_found: return "not found";
    case ErrorKind::conflict: return "conflict";
  }
  return "error";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ParseError : public Error {
 public:
  // line is 1-based; 0 when the failure is not tied to a line.
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(ErrorKind::parse,
              line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

struct ValidationError : Error {
  explicit ValidationError(const std::string& w) : Error(ErrorKind::validation, w) {}
};

struct ParameterError : Error {
  explicit ParameterError(const std::string& w) : Error(ErrorKind::parameter, w) {}
};

struct DomainError : Error {
  explicit DomainError(const std::string& w) : Error(ErrorKind::domain, w) {}
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& w, double residual)
      : Error(ErrorKind::convergence, w), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

struct IncompleteDataError : Error {
  explicit IncompleteDataError(const std::string& w) : Error(ErrorKind::incomplete_data, w) {}
};

struct EmptyResultError : Error {
  explicit EmptyResultError(const std::string& w) : Error(ErrorKind::empty_result, w) {}
};

struct UndefinedIndexError : Error {
  explicit UndefinedIndexError(const std::string& w) : Error(ErrorKind::undefined_index, w) {}
};

struct SpecError : Error {
  explicit SpecError(const std::string& w) : Error(ErrorKind::spec, w) {}
};

struct NotFoundError : Error {
  explicit NotFoundError(const std::string& w) : Error(ErrorKind::not_found, w) {}
};

struct ConflictError : Error {
  explicit ConflictError(const std::string& w) : Error(ErrorKind::conflict, w) {}
};

}  // namespace bictk

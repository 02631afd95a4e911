#pragma once

#include <stdexcept>
#include <string>

namespace xaistudy {

// Base for every error raised by the library. `code()` is a short stable
// identifier used by the HTTP layer and the CLI.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& message) : Error("validation", message) {}
  ValidationError(std::string code, const std::string& message) : Error(std::move(code), message) {}
};

class SchemaError : public Error {
 public:
  explicit SchemaError(const std::string& message) : Error("schema", message) {}
};

class NotFoundError : public Error {
 public:
  explicit NotFoundError(const std::string& message) : Error("not_found", message) {}
};

class ConflictError : public Error {
 public:
  explicit ConflictError(const std::string& message) : Error("conflict", message) {}
};

// Operation not allowed in the current phase / state.
class StateError : public Error {
 public:
  explicit StateError(const std::string& message) : Error("wrong_state", message) {}
  StateError(std::string code, const std::string& message) : Error(std::move(code), message) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& message) : Error("numeric", message) {}
  NumericError(std::string code, const std::string& message) : Error(std::move(code), message) {}
};

}  // namespace xaistudy

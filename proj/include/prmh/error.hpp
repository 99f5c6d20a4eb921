#pragma once

#include <stdexcept>
#include <string>

namespace prmh {

enum class ErrorKind {
  invalid_argument,
  empty_input,
  parse,
  validation,
  alignment,
  template_error,
  config,
  scoring,
  search,
  vote,
  transport,
  protocol,
  io,
};

const char* error_kind_name(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  // Number of attempts made before a transport failure was given up on.
  int attempts = 0;

 private:
  ErrorKind kind_;
};

}  // namespace prmh

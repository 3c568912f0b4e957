#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rfb {

enum class ErrorKind {
  invalid_input,
  invalid_config,
  precondition,
  rejected_proposal,
  not_found,
  capacity,
  protocol,
  timeout,
  numerical,
  internal,
  migration,
  io,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), message_(what) {}

  ErrorKind kind() const noexcept { return kind_; }
  // The text without the kind prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorKind kind_;
  std::string message_;
};

}  // namespace rfb

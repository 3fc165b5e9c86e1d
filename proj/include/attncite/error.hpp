#pragma once

#include <stdexcept>
#include <string>

namespace attncite {

// Categories map onto CLI exit codes (see cli.cpp).
enum class ErrorKind {
  kInvalidInput,   // malformed content, failed invariant
  kMissingInput,   // file or directory absent
  kModeMismatch,   // requested mode unsupported by the trace
  kUsage,          // bad flag / argument
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string message, std::string field = {})
      : std::runtime_error(field.empty() ? message : field + ": " + message),
        kind_(kind),
        field_(std::move(field)) {}

  ErrorKind kind() const noexcept { return kind_; }
  // Offending field or location, empty when not applicable.
  const std::string& field() const noexcept { return field_; }

 private:
  ErrorKind kind_;
  std::string field_;
};

}  // namespace attncite

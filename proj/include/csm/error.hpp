#pragma once

#include <stdexcept>
#include <string>

namespace csm {

/// Coarse error categories. The CLI maps each one to its own exit code.
enum class ErrorCategory {
  InvalidConfiguration,
  Index,
  DegenerateGap,
  ProtocolViolation,
  AssumptionViolation,
  Domain,
  Size,
  Validity,
  Parse,
  Constraint,
  Io,
};

const char* to_string(ErrorCategory category) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

[[noreturn]] inline void fail(ErrorCategory category, const std::string& what) {
  throw Error(category, what);
}

}  // namespace csm

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pcluster {

enum class ErrorKind {
  UnbalancedPanel,
  NonFinite,
  InvalidInput,
  PanelTooSmall,
  DegenerateInput,
  SingularDesign,
  InsufficientDof,
  DomainError,
  TooFewUnits,
};

std::string_view to_string(ErrorKind kind);

// Single exception type for the library; callers dispatch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Input-side failures (bad file, unbalanced panel) vs. numerical ones.
inline bool is_input_error(ErrorKind kind) {
  return kind == ErrorKind::UnbalancedPanel || kind == ErrorKind::NonFinite ||
         kind == ErrorKind::InvalidInput;
}

}  // namespace pcluster

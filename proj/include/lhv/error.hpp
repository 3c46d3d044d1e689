#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lhv {

enum class ErrorCode {
  invalid_argument,
  space_mismatch,
  evaluation,
  degenerate_measure,
  negative_density,
  empty_ensemble,
  unsupported_representation,
  stability,
  coefficient,
  config,
  unknown_setting,
  missing_spectrum,
  degenerate_subensemble,
  unsupported_model,
  io,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so that
/// callers (and the CLI exit-status mapping) can branch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace lhv

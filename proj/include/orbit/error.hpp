#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace orbit {

enum class ErrorCode {
  DimMismatch,
  UnsupportedTask,
  ZeroEpsilon,
  LengthMismatch,
  InvalidInterval,
  Infeasible,
  NonSpd,
  MarginNotMet,
  InvalidGamma,
  DegenerateMargin,
  TooLarge,
  ConfigUnstable,
  InvalidConfig,
  BadMagic,
  CountMismatch,
  Io,
};

std::string_view to_string(ErrorCode code);

/// Every failure surfaced by the library carries one of the codes above so
/// callers (and the CLI exit-code mapping) can branch without parsing text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), detail_(what) {}

  ErrorCode code() const noexcept { return code_; }
  /// The message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace orbit

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bsg {

enum class ErrorCode {
  SingularMetric,
  OutOfChart,
  GridTooCoarse,
  MissingDerivative,
  NotOnUnitBundle,
  NonTangentialArgument,
  StepUnderflow,
  DegenerateSpeed,
  UnknownManifold,
  ConfigInvalid,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        detail_(message) {}

  ErrorCode code() const { return code_; }
  /// The message without the code prefix.
  const std::string& detail() const { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace bsg

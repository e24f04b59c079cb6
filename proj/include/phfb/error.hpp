#pragma once

#include <stdexcept>
#include <string>

namespace phfb {

enum class ErrorCode {
  InvalidArgument,
  ShapeMismatch,
  NotSquare,
  NotSymmetric,
  NotSkew,
  NotPSD,
  ToleranceBreakdown,
  HypothesisViolated,
  ConditionsNotMet,
  NumericalBreakdown,
  GridTooShort,
  NotIndexOne,
  SolveFailure,
  InfeasibleKnobs,
  ParseError,
  IoError,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace phfb

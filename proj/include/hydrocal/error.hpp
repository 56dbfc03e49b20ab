#pragma once

#include <stdexcept>
#include <string>

namespace hydrocal {

enum class ErrorCode {
  InvalidArgument,
  CycleDetected,
  InvalidCode,
  InactiveOutlet,
  ShapeMismatch,
  MissingForcing,
  NonFiniteFlux,
  ConstantObs,
  LengthMismatch,
  DegenerateObs,
  NegativeFlow,
  EmptySeries,
  ZeroRainfall,
  WindowOutOfRange,
  ZeroEventRainfall,
  InsufficientHistory,
  NonDifferentiableCost,
  BadN,
  ZeroVariance,
  NoEvents,
  EmptyFront,
  ZeroObservedSignature,
  ParseError,
  ValidationError,
  IoError,
  BadSpec,
};

const char* to_string(ErrorCode c);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& msg)
      : std::runtime_error(std::string(to_string(code)) + ": " + msg), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode c, const std::string& msg) { throw Error(c, msg); }

}  // namespace hydrocal

#include "hydrocal/error.hpp"

namespace hydrocal {

const char* to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::CycleDetected: return "CycleDetected";
    case ErrorCode::InvalidCode: return "InvalidCode";
    case ErrorCode::InactiveOutlet: return "InactiveOutlet";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::MissingForcing: return "MissingForcing";
    case ErrorCode::NonFiniteFlux: return "NonFiniteFlux";
    case ErrorCode::ConstantObs: return "ConstantObs";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::DegenerateObs: return "DegenerateObs";
    case ErrorCode::NegativeFlow: return "NegativeFlow";
    case ErrorCode::EmptySeries: return "EmptySeries";
    case ErrorCode::ZeroRainfall: return "ZeroRainfall";
    case ErrorCode::WindowOutOfRange: return "WindowOutOfRange";
    case ErrorCode::ZeroEventRainfall: return "ZeroEventRainfall";
    case ErrorCode::InsufficientHistory: return "InsufficientHistory";
    case ErrorCode::NonDifferentiableCost: return "NonDifferentiableCost";
    case ErrorCode::BadN: return "BadN";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::NoEvents: return "NoEvents";
    case ErrorCode::EmptyFront: return "EmptyFront";
    case ErrorCode::ZeroObservedSignature: return "ZeroObservedSignature";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::BadSpec: return "BadSpec";
  }
  return "UnknownError";
}

}  // namespace hydrocal

#include "p2d2/error.hpp"

namespace p2d2 {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::EmptyGraph: return "EmptyGraph";
    case ErrorCode::DisconnectedGraph: return "DisconnectedGraph";
    case ErrorCode::InvalidGraph: return "InvalidGraph";
    case ErrorCode::InvalidCombinationMatrix: return "InvalidCombinationMatrix";
    case ErrorCode::DegenerateSpectrum: return "DegenerateSpectrum";
    case ErrorCode::GenerationExhausted: return "GenerationExhausted";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotStronglyConvex: return "NotStronglyConvex";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::InvalidC: return "InvalidC";
    case ErrorCode::InvalidRho: return "InvalidRho";
    case ErrorCode::StepTooLarge: return "StepTooLarge";
    case ErrorCode::CertificateUnavailable: return "CertificateUnavailable";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::NonFiniteIterate: return "NonFiniteIterate";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
  }
  return "Unknown";
}

bool is_numerical(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DegenerateSpectrum:
    case ErrorCode::GenerationExhausted:
    case ErrorCode::NotStronglyConvex:
    case ErrorCode::StepTooLarge:
    case ErrorCode::CertificateUnavailable:
    case ErrorCode::InsufficientData:
    case ErrorCode::NonFiniteIterate:
    case ErrorCode::NoConvergence:
    case ErrorCode::NumericalFailure:
      return true;
    default:
      return false;
  }
}

}  // namespace p2d2

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace p2d2 {

enum class ErrorCode {
  // topology
  EmptyGraph,
  DisconnectedGraph,
  InvalidGraph,
  InvalidCombinationMatrix,
  DegenerateSpectrum,
  GenerationExhausted,
  // model
  DimensionMismatch,
  NotStronglyConvex,
  TooFewSamples,
  ParseError,
  // prox / analysis
  InvalidParameter,
  InvalidC,
  InvalidRho,
  StepTooLarge,
  CertificateUnavailable,
  InsufficientData,
  // solver
  InvalidConfig,
  NonFiniteIterate,
  NoConvergence,
  NumericalFailure,
};

std::string_view to_string(ErrorCode code) noexcept;

/// True for codes that describe a numerical outcome rather than bad input.
bool is_numerical(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace p2d2

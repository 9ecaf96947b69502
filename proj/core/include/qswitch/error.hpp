#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qswitch {

enum class ErrorCode {
  // Parameter validation
  NegativeRate,
  LengthMismatch,
  NonPositiveKappaSq,
  InvalidLevelCount,
  NonFiniteValue,
  // Spectral analysis
  NoConvergence,
  GridTooCoarse,
  DegenerateDenominator,
  DegenerateGap,
  NoBracket,
  // Dynamics
  StepUnderflow,
  NonFiniteState,
  InvalidIntegrator,
  // Analysis
  InsufficientDecay,
  TooFewPoints,
  NoPulse,
  NonConvergence,
  // Protocols
  NonMonotoneCumulative,
  UnresolvedResonance,
  PulseOverlap,
  InvalidArgument,
  // Configuration
  UnknownKey,
  ParseError,
  UnitConflict,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// True for errors caused by bad user input (configs, parameters) as opposed
/// to numerical failures during a run.
bool is_validation_error(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace qswitch

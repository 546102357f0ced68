#pragma once

#include <stdexcept>
#include <string>

namespace eventpi {

// Exit codes reported by the CLI. Library exceptions map onto these.
enum class ExitCode : int {
  ok = 0,
  usage = 1,
  parse = 2,
  fit = 3,
  calibration = 4,
  bootstrap = 5,
};

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when a likelihood cannot be formed at all (e.g. no events).
struct InsufficientDataError : FitError {
  using FitError::FitError;
};

struct ModelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CalibrationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BootstrapError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// At-risk probability denominator underflowed (survival mass below 1e-300).
struct AtRiskUnderflowError : ModelError {
  using ModelError::ModelError;
};

// Truncated resampling impossible because F(tau | z) == 0.
struct DegenerateTruncationError : BootstrapError {
  using BootstrapError::BootstrapError;
};

inline ExitCode exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ParseError*>(&e)) return ExitCode::parse;
  if (dynamic_cast<const CalibrationError*>(&e)) return ExitCode::calibration;
  if (dynamic_cast<const BootstrapError*>(&e)) return ExitCode::bootstrap;
  if (dynamic_cast<const FitError*>(&e)) return ExitCode::fit;
  return ExitCode::usage;
}

}  // namespace eventpi

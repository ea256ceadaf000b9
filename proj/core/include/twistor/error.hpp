#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace twistor {

enum class ErrorCode {
  kDimension,
  kSingularity,
  kPrecondition,
  kDegeneratePair,
  kNotCospherical,
  kNormalization,
  kTolerance,
  kOutsideChart,
  kSampling,
  kWrongSubgroup,
  kNoConvergence,
  kDegenerateProblem,
  kPathing,
  kMode,
  kDegenerateInput,
  kInvalidForm,
  kUnsupportedSize,
  kParse,
};

std::string_view to_string(ErrorCode code);

/// Base exception for every failure reported by the library. The code
/// identifies the failure class; the message carries the diagnostic.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised by iterative solvers; keeps the last residual seen.
class NoConvergence : public Error {
 public:
  NoConvergence(const std::string& what, double last_residual)
      : Error(ErrorCode::kNoConvergence, what), last_residual_(last_residual) {}

  double last_residual() const noexcept { return last_residual_; }

 private:
  double last_residual_;
};

}  // namespace twistor

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace arw {

enum class ErrorCode {
  NotRepresentable,
  OddLength,
  LengthTooLarge,
  BudgetExceeded,
  EmptySpectrum,
  DegeneratePoint,
  NotPSD,
  NonConvergent,
  GridTooSmall,
  InvalidArgument,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotRepresentable: return "NotRepresentable";
    case ErrorCode::OddLength: return "OddLength";
    case ErrorCode::LengthTooLarge: return "LengthTooLarge";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::EmptySpectrum: return "EmptySpectrum";
    case ErrorCode::DegeneratePoint: return "DegeneratePoint";
    case ErrorCode::NotPSD: return "NotPSD";
    case ErrorCode::NonConvergent: return "NonConvergent";
    case ErrorCode::GridTooSmall: return "GridTooSmall";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

// Every domain failure in the library is reported through this one type; the
// code lets callers (and the CLI's JSON error output) dispatch without parsing
// messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace arw

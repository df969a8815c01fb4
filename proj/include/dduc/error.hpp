#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dduc {

enum class ErrorKind {
  MissingColumn,
  DisconnectedNetwork,
  DuplicateId,
  InvalidValue,
  SingularSusceptanceMatrix,
  ZeroDemand,
  InsufficientHistory,
  DimensionMismatch,
  InvalidPenetration,
  DegenerateState,
  InvalidConfig,
  NumericalFailure,
  SubproblemInfeasible,
  Infeasible,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MissingColumn: return "MissingColumn";
    case ErrorKind::DisconnectedNetwork: return "DisconnectedNetwork";
    case ErrorKind::DuplicateId: return "DuplicateId";
    case ErrorKind::InvalidValue: return "InvalidValue";
    case ErrorKind::SingularSusceptanceMatrix: return "SingularSusceptanceMatrix";
    case ErrorKind::ZeroDemand: return "ZeroDemand";
    case ErrorKind::InsufficientHistory: return "InsufficientHistory";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::InvalidPenetration: return "InvalidPenetration";
    case ErrorKind::DegenerateState: return "DegenerateState";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::NumericalFailure: return "NumericalFailure";
    case ErrorKind::SubproblemInfeasible: return "SubproblemInfeasible";
    case ErrorKind::Infeasible: return "Infeasible";
  }
  return "Unknown";
}

// Base of every error raised by the library. `kind()` distinguishes the
// failure; the CLI maps validation kinds to exit code 2 and solver kinds to 3.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  bool is_solver_failure() const noexcept {
    return kind_ == ErrorKind::NumericalFailure || kind_ == ErrorKind::SubproblemInfeasible ||
           kind_ == ErrorKind::Infeasible;
  }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace dduc

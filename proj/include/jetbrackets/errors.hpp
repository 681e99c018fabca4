#pragma once

#include <stdexcept>
#include <string>

namespace jb {

// Error taxonomy shared by all modules. Every failure surfaces as a typed
// exception so callers (and the CLI) can map it to a stable exit code.
enum class ErrorCode {
  NonMonomialDivisor,
  NonIntegerPowerOfSum,
  NonRationalPower,
  MissingAssignment,
  ZeroToNegativePower,
  NonIntegerExponentNeedsPositiveBase,
  SyntaxError,
  UndeclaredSymbol,
  DuplicateName,
  LengthMismatch,
  ShapeMismatch,
  NoEvolutionForm,
  UnverifiableWithoutR,
  NotInSpan,
  DependentBasis,
  NotInRange,
  IllDefinedBracket,
  NoScalingSymmetry,
  UnknownFixture,
  ValidationFailure,
  DivisionByZero,
  Internal,
};

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& msg)
      : std::runtime_error(msg), code_(code) {}
  ErrorCode code() const { return code_; }

private:
  ErrorCode code_;
};

// Parse diagnostics carry a position so the CLI can point at the offending
// line of a .sys file.
class SyntaxError : public Error {
public:
  SyntaxError(int line, int column, const std::string& msg)
      : Error(ErrorCode::SyntaxError,
              "line " + std::to_string(line) + ", col " +
                  std::to_string(column) + ": " + msg),
        line_(line), column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

private:
  int line_;
  int column_;
};

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::NonMonomialDivisor: return "NonMonomialDivisor";
    case ErrorCode::NonIntegerPowerOfSum: return "NonIntegerPowerOfSum";
    case ErrorCode::NonRationalPower: return "NonRationalPower";
    case ErrorCode::MissingAssignment: return "MissingAssignment";
    case ErrorCode::ZeroToNegativePower: return "ZeroToNegativePower";
    case ErrorCode::NonIntegerExponentNeedsPositiveBase:
      return "NonIntegerExponentNeedsPositiveBase";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::UndeclaredSymbol: return "UndeclaredSymbol";
    case ErrorCode::DuplicateName: return "DuplicateName";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NoEvolutionForm: return "NoEvolutionForm";
    case ErrorCode::UnverifiableWithoutR: return "UnverifiableWithoutR";
    case ErrorCode::NotInSpan: return "NotInSpan";
    case ErrorCode::DependentBasis: return "DependentBasis";
    case ErrorCode::NotInRange: return "NotInRange";
    case ErrorCode::IllDefinedBracket: return "IllDefinedBracket";
    case ErrorCode::NoScalingSymmetry: return "NoScalingSymmetry";
    case ErrorCode::UnknownFixture: return "UnknownFixture";
    case ErrorCode::ValidationFailure: return "ValidationFailure";
    case ErrorCode::DivisionByZero: return "DivisionByZero";
    case ErrorCode::Internal: return "Internal";
  }
  return "Unknown";
}

}  // namespace jb

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace namedcalc {

enum class ErrorCode {
  // scalar
  NegativeRadicand,
  DivisionByZero,
  UnsupportedDenominator,
  TranscendentalSign,
  RadicandTooLarge,
  NestedRadical,
  // units
  DuplicateUnit,
  UnknownUnit,
  InvalidRate,
  InconsistentRate,
  NonRationalRate,
  IncommensurableAddition,
  OddExponent,
  NoSolution,
  Underdetermined,
  // symbolic
  DimensionMismatch,
  NotUnivariate,
  SymbolicRadicalUnsupported,
  // program
  SyntaxError,
  UseBeforeDefinition,
  Redefinition,
  NotConcrete,
  Infeasible,
  // service
  NotEditable,
  ParseError,
  SchemaVersionMismatch,
  NotFound,
  RevisionConflict,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NegativeRadicand: return "NegativeRadicand";
    case ErrorCode::DivisionByZero: return "DivisionByZero";
    case ErrorCode::UnsupportedDenominator: return "UnsupportedDenominator";
    case ErrorCode::TranscendentalSign: return "TranscendentalSign";
    case ErrorCode::RadicandTooLarge: return "RadicandTooLarge";
    case ErrorCode::NestedRadical: return "NestedRadical";
    case ErrorCode::DuplicateUnit: return "DuplicateUnit";
    case ErrorCode::UnknownUnit: return "UnknownUnit";
    case ErrorCode::InvalidRate: return "InvalidRate";
    case ErrorCode::InconsistentRate: return "InconsistentRate";
    case ErrorCode::NonRationalRate: return "NonRationalRate";
    case ErrorCode::IncommensurableAddition: return "IncommensurableAddition";
    case ErrorCode::OddExponent: return "OddExponent";
    case ErrorCode::NoSolution: return "NoSolution";
    case ErrorCode::Underdetermined: return "Underdetermined";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotUnivariate: return "NotUnivariate";
    case ErrorCode::SymbolicRadicalUnsupported: return "SymbolicRadicalUnsupported";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::UseBeforeDefinition: return "UseBeforeDefinition";
    case ErrorCode::Redefinition: return "Redefinition";
    case ErrorCode::NotConcrete: return "NotConcrete";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::NotEditable: return "NotEditable";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::SchemaVersionMismatch: return "SchemaVersionMismatch";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::RevisionConflict: return "RevisionConflict";
  }
  return "Unknown";
}

/// Every failure in the library is reported as an Error carrying a code.
/// Evaluation errors additionally name the offending step, and parse errors
/// carry a 1-based source position (0 when not applicable).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  const std::string& step() const noexcept { return step_; }
  const std::string& question() const noexcept { return question_; }
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }
  // code-specific number, e.g. the nullity carried by Underdetermined
  long value() const noexcept { return value_; }

  Error& at_step(std::string step, std::string question = {}) {
    step_ = std::move(step);
    question_ = std::move(question);
    return *this;
  }

  Error& with_value(long value) {
    value_ = value;
    return *this;
  }

  Error& at_position(int line, int column) {
    line_ = line;
    column_ = column;
    return *this;
  }

  // message prefixed with the code and, when known, the step or position
  std::string describe() const {
    std::string out{to_string(code_)};
    if (!step_.empty()) out += " in step " + step_;
    if (line_ > 0) out += " at " + std::to_string(line_) + ":" + std::to_string(column_);
    out += ": ";
    out += what();
    return out;
  }

 private:
  ErrorCode code_;
  std::string step_;
  std::string question_;
  int line_ = 0;
  int column_ = 0;
  long value_ = 0;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace namedcalc

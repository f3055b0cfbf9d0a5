#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace jcc {

enum class ErrorCode {
  CycleDetected,
  MultipleRoots,
  OrphanNode,
  MissingLatency,
  NonLeafWithData,
  InvalidParameter,
  DeltaOutOfRange,
  UnknownLeaf,
  InvalidPlan,
  InstanceTooLarge,
  Infeasible,
  InfeasibleInput,
  NonConvergence,
  TerminationCapHit,
  RangeExceedsBox,
  ParseError,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above so that
// callers (the bench harness in particular) can record it without parsing text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::CycleDetected: return "CycleDetected";
    case ErrorCode::MultipleRoots: return "MultipleRoots";
    case ErrorCode::OrphanNode: return "OrphanNode";
    case ErrorCode::MissingLatency: return "MissingLatency";
    case ErrorCode::NonLeafWithData: return "NonLeafWithData";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::DeltaOutOfRange: return "DeltaOutOfRange";
    case ErrorCode::UnknownLeaf: return "UnknownLeaf";
    case ErrorCode::InvalidPlan: return "InvalidPlan";
    case ErrorCode::InstanceTooLarge: return "InstanceTooLarge";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::InfeasibleInput: return "InfeasibleInput";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::TerminationCapHit: return "TerminationCapHit";
    case ErrorCode::RangeExceedsBox: return "RangeExceedsBox";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

}  // namespace jcc

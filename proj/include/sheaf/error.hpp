#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sheaf {

enum class ErrorCode {
  UnknownEntity,
  TopologyTooLarge,
  SpaceMismatch,
  NotComparable,
  MissingRestriction,
  MissingIntersectionStalk,
  NonlinearSheaf,
  SheafMismatch,
  NoTopStalk,
  DegenerateAssignment,
  IntersectionNotOpen,
  UnmappedBin,
  UnknownBuiltin,
  InvalidArgument,
  Parse,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so the
/// CLI can map it onto its exit-code contract.
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
    case ErrorCode::UnknownEntity: return "UnknownEntity";
    case ErrorCode::TopologyTooLarge: return "TopologyTooLarge";
    case ErrorCode::SpaceMismatch: return "SpaceMismatch";
    case ErrorCode::NotComparable: return "NotComparable";
    case ErrorCode::MissingRestriction: return "MissingRestriction";
    case ErrorCode::MissingIntersectionStalk: return "MissingIntersectionStalk";
    case ErrorCode::NonlinearSheaf: return "NonlinearSheaf";
    case ErrorCode::SheafMismatch: return "SheafMismatch";
    case ErrorCode::NoTopStalk: return "NoTopStalk";
    case ErrorCode::DegenerateAssignment: return "DegenerateAssignment";
    case ErrorCode::IntersectionNotOpen: return "IntersectionNotOpen";
    case ErrorCode::UnmappedBin: return "UnmappedBin";
    case ErrorCode::UnknownBuiltin: return "UnknownBuiltin";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Parse: return "Parse";
  }
  return "Unknown";
}

}  // namespace sheaf

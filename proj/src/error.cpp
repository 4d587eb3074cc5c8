#include "govrt/error.hpp"

#include <cstdio>

namespace govrt {

std::string_view error_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::UnknownEvent: return "UnknownEvent";
    case ErrorCode::EmptyContent: return "EmptyContent";
    case ErrorCode::DuplicateContent: return "DuplicateContent";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::InvalidRecord: return "InvalidRecord";
    case ErrorCode::IllegalTransition: return "IllegalTransition";
    case ErrorCode::InsufficientEvidence: return "InsufficientEvidence";
    case ErrorCode::MissingApproval: return "MissingApproval";
    case ErrorCode::UnknownCapability: return "UnknownCapability";
    case ErrorCode::InvalidWeights: return "InvalidWeights";
    case ErrorCode::InvalidMeasurement: return "InvalidMeasurement";
    case ErrorCode::EmptyCandidateSet: return "EmptyCandidateSet";
    case ErrorCode::DuplicateCandidate: return "DuplicateCandidate";
    case ErrorCode::UnknownEntity: return "UnknownEntity";
    case ErrorCode::DuplicateNode: return "DuplicateNode";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::SelfEdge: return "SelfEdge";
    case ErrorCode::KindMismatch: return "KindMismatch";
    case ErrorCode::DuplicateEdge: return "DuplicateEdge";
    case ErrorCode::CycleViolation: return "CycleViolation";
    case ErrorCode::NoQualityComponents: return "NoQualityComponents";
    case ErrorCode::NotASkill: return "NotASkill";
    case ErrorCode::TooManySkills: return "TooManySkills";
    case ErrorCode::UnknownConfig: return "UnknownConfig";
    case ErrorCode::IncompleteContract: return "IncompleteContract";
    case ErrorCode::ComponentMismatch: return "ComponentMismatch";
    case ErrorCode::WrongStatus: return "WrongStatus";
    case ErrorCode::WrongEvaluator: return "WrongEvaluator";
    case ErrorCode::ImprovementNotMet: return "ImprovementNotMet";
    case ErrorCode::ConditionNotMet: return "ConditionNotMet";
    case ErrorCode::ConflictingMutation: return "ConflictingMutation";
    case ErrorCode::UnknownSubject: return "UnknownSubject";
    case ErrorCode::RiskOutOfRange: return "RiskOutOfRange";
    case ErrorCode::InvalidPolicy: return "InvalidPolicy";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::SeedMismatch: return "SeedMismatch";
    case ErrorCode::StorageFailure: return "StorageFailure";
    case ErrorCode::ChainBroken: return "ChainBroken";
    case ErrorCode::UnknownEventKind: return "UnknownEventKind";
    case ErrorCode::StoreLocked: return "StoreLocked";
  }
  return "Unknown";
}

ErrorCategory error_category(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::StorageFailure:
    case ErrorCode::ChainBroken:
    case ErrorCode::UnknownEventKind:
    case ErrorCode::StoreLocked:
      return ErrorCategory::integrity;
    default:
      return ErrorCategory::domain;
  }
}

std::string render_error(ErrorCode code, std::string_view detail) {
  std::string out(error_name(code));
  out += ": ";
  for (char ch : detail) {
    const auto uch = static_cast<unsigned char>(ch);
    if (ch == '\n') {
      out += "\\n";
    } else if (ch == '\r') {
      out += "\\r";
    } else if (uch < 0x20) {
      char buf[8];
      std::snprintf(buf, sizeof buf, "\\x%02x", uch);
      out += buf;
    } else {
      out += ch;
    }
  }
  return out;
}

KernelError::KernelError(ErrorCode code, std::string detail)
    : std::runtime_error(render_error(code, detail)), code_(code), detail_(std::move(detail)) {}

}  // namespace govrt

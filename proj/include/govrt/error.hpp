#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace govrt {

enum class ErrorCode {
  // registry
  UnknownEvent,
  EmptyContent,
  DuplicateContent,
  NotFound,
  InvalidRecord,
  // lifecycle
  IllegalTransition,
  InsufficientEvidence,
  MissingApproval,
  UnknownCapability,
  // selection
  InvalidWeights,
  InvalidMeasurement,
  EmptyCandidateSet,
  DuplicateCandidate,
  // graph
  UnknownEntity,
  DuplicateNode,
  UnknownNode,
  SelfEdge,
  KindMismatch,
  DuplicateEdge,
  CycleViolation,
  NoQualityComponents,
  NotASkill,
  TooManySkills,
  // mutation
  UnknownConfig,
  IncompleteContract,
  ComponentMismatch,
  WrongStatus,
  WrongEvaluator,
  ImprovementNotMet,
  ConditionNotMet,
  ConflictingMutation,
  // governance
  UnknownSubject,
  RiskOutOfRange,
  InvalidPolicy,
  // simulation
  InvalidConfig,
  SeedMismatch,
  // storage / integrity
  StorageFailure,
  ChainBroken,
  UnknownEventKind,
  StoreLocked,
};

enum class ErrorCategory { domain, integrity };

std::string_view error_name(ErrorCode code) noexcept;
ErrorCategory error_category(ErrorCode code) noexcept;

/// Every failure raised by the kernel. `what()` is the single-line rendering.
class KernelError : public std::runtime_error {
 public:
  KernelError(ErrorCode code, std::string detail);

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

/// "<Name>: <detail>" with control characters escaped so it never spans lines.
std::string render_error(ErrorCode code, std::string_view detail);

[[noreturn]] inline void fail(ErrorCode code, std::string detail) {
  throw KernelError(code, std::move(detail));
}

}  // namespace govrt

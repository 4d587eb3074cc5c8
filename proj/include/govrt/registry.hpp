#pragma once

// Domain model shared by every registry: harness tuple, capabilities, skill
// specs, reviews, evaluations and the harness state summary.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "govrt/enum_names.hpp"
#include "govrt/lifecycle.hpp"

namespace govrt {

enum class CapabilityKind { prompt, evaluator, workflow, routing_policy, skill, test, tool, benchmark };

template <>
struct EnumNames<CapabilityKind> {
  static constexpr std::array<std::pair<CapabilityKind, std::string_view>, 8> table{{
      {CapabilityKind::prompt, "prompt"},
      {CapabilityKind::evaluator, "evaluator"},
      {CapabilityKind::workflow, "workflow"},
      {CapabilityKind::routing_policy, "routing_policy"},
      {CapabilityKind::skill, "skill"},
      {CapabilityKind::test, "test"},
      {CapabilityKind::tool, "tool"},
      {CapabilityKind::benchmark, "benchmark"},
  }};
};

/// Performance, robustness, stability, reuse utility and operational risk.
struct QualityComponents {
  double p = 0.0;
  double r = 0.0;
  double s = 0.0;
  double u = 0.0;
  double rho = 0.0;

  QualityComponents clamped() const;
  bool in_range() const;
  bool operator==(const QualityComponents&) const = default;
};

/// Opaque versioned text (prompt policy, memory/context descriptor).
struct Descriptor {
  std::string text;
  std::uint64_t version = 0;

  bool operator==(const Descriptor&) const = default;
};

/// h = (p, t, e, m, g, o, k). Immutable once registered.
struct HarnessConfig {
  std::string config_id;
  Descriptor prompt;                   // p
  std::vector<std::string> tools;      // t
  std::vector<std::string> evaluators; // e
  Descriptor memory;                   // m
  std::string governance;              // g
  std::vector<std::string> artifacts;  // o: capability ids
  std::uint64_t knowledge = 0;         // k: runtime graph version

  bool operator==(const HarnessConfig&) const = default;
};

struct CapabilityRecord {
  std::string capability_id;
  CapabilityKind kind = CapabilityKind::skill;
  std::string content;
  std::string content_hash;  // hex SHA-256 of the canonical content string
  LifecycleState lifecycle = LifecycleState::experimental;
  // Evaluation events accumulated since the record entered its current state.
  std::vector<std::string> evidence;
  std::string created_by;
  QualityComponents quality;

  bool operator==(const CapabilityRecord&) const = default;
};

struct ParamDescriptor {
  std::string name;
  std::string type;

  bool operator==(const ParamDescriptor&) const = default;
};

struct SkillInterface {
  std::vector<ParamDescriptor> inputs;
  std::vector<ParamDescriptor> outputs;
  std::vector<std::string> declared_failure_modes;

  bool operator==(const SkillInterface&) const = default;
};

struct GeneratedSkillSpec {
  std::string skill_id;
  std::string capability_id;
  SkillInterface interface;

  bool operator==(const GeneratedSkillSpec&) const = default;
};

enum class ReviewDecision { approve, reject, defer };

template <>
struct EnumNames<ReviewDecision> {
  static constexpr std::array<std::pair<ReviewDecision, std::string_view>, 3> table{{
      {ReviewDecision::approve, "approve"},
      {ReviewDecision::reject, "reject"},
      {ReviewDecision::defer, "defer"},
  }};
};

struct CapabilityReview {
  std::string review_id;
  std::string subject_id;
  std::string reviewer;
  std::vector<std::string> evidence_refs;
  double risk_assessment = 0.0;
  ReviewDecision decision = ReviewDecision::defer;
  std::string rationale;

  bool operator==(const CapabilityReview&) const = default;
};

struct HarnessState {
  std::string active_config;  // empty until a config is registered
  std::uint64_t graph_version = 0;
  std::string log_head = std::string(64, '0');
  std::uint64_t cycle_count = 0;

  bool operator==(const HarnessState&) const = default;
};

/// Result of one evaluator run against a subject (capability, config or mutation).
struct Evaluation {
  std::string event_id;
  std::string subject;
  std::string evaluator;
  std::map<std::string, double> metrics;
  std::optional<QualityComponents> quality;

  bool operator==(const Evaluation&) const = default;
};

/// Named deployment context that fails_under edges can point at.
struct ContextTag {
  std::string context_id;
  std::string tag;

  bool operator==(const ContextTag&) const = default;
};

/// Ids are the first 16 bytes of a digest over the type tag and the
/// identifying fields, hex encoded.
std::string capability_id_for(CapabilityKind kind, const std::string& content_hash, const std::string& event_id);
std::string context_id_for(const std::string& tag);

/// Throws InvalidRecord when input or output names repeat.
void validate_skill_interface(const SkillInterface& iface);

}  // namespace govrt

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "govrt/enum_names.hpp"

namespace govrt {

enum class LifecycleState { experimental, validated, trusted, canonical, deprecated };

template <>
struct EnumNames<LifecycleState> {
  static constexpr std::array<std::pair<LifecycleState, std::string_view>, 5> table{{
      {LifecycleState::experimental, "experimental"},
      {LifecycleState::validated, "validated"},
      {LifecycleState::trusted, "trusted"},
      {LifecycleState::canonical, "canonical"},
      {LifecycleState::deprecated, "deprecated"},
  }};
};

inline constexpr std::array<LifecycleState, 5> kAllLifecycleStates{
    LifecycleState::experimental, LifecycleState::validated, LifecycleState::trusted,
    LifecycleState::canonical, LifecycleState::deprecated};

struct EvidenceRequirement {
  std::uint32_t min_evidence_events = 0;
  std::uint32_t min_distinct_evaluators = 0;
  double max_risk = 1.0;
  bool requires_approved_review = false;

  bool operator==(const EvidenceRequirement&) const = default;
};

using LifecycleEdge = std::pair<LifecycleState, LifecycleState>;
using EvidenceTable = std::map<LifecycleEdge, EvidenceRequirement>;

/// Promotion-edge defaults; deprecation edges are never looked up in a table.
EvidenceTable default_evidence_table();

/// Successors in the fixed order: the promotion step first, then deprecated.
std::vector<LifecycleState> legal_transitions(LifecycleState state);
bool is_legal_transition(LifecycleState from, LifecycleState to);
std::optional<LifecycleState> next_promotion(LifecycleState state);

/// Requirement for a legal edge. Deprecation is always free; promotion edges
/// missing from `table` fall back to the defaults. Throws IllegalTransition.
EvidenceRequirement required_evidence(LifecycleState from, LifecycleState to, const EvidenceTable& table);

/// What a transition request brings to the gate.
struct EvidenceSummary {
  std::uint32_t events = 0;
  std::uint32_t distinct_evaluators = 0;
  double risk = 0.0;
  bool approved_review = false;
};

/// InsufficientEvidence when counts or risk fail, then MissingApproval.
std::optional<ErrorCode> check_requirement(const EvidenceRequirement& req, const EvidenceSummary& summary);

struct LifecycleRecord {
  std::string capability_id;
  LifecycleState from_state = LifecycleState::experimental;
  LifecycleState to_state = LifecycleState::experimental;
  std::vector<std::string> evidence;
  std::optional<std::string> review;
  std::uint64_t timestamp = 0;

  bool operator==(const LifecycleRecord&) const = default;
};

/// Key used for lifecycle edges in policy files: "validated_to_trusted".
std::string edge_key(const LifecycleEdge& edge);
std::optional<LifecycleEdge> parse_edge_key(std::string_view key);

}  // namespace govrt

#pragma once

// HarnessMutation: a bounded, single-component change to a harness config,
// carried by a six-field change contract.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "govrt/enum_names.hpp"
#include "govrt/registry.hpp"

namespace govrt {

/// The seven harness tuple components.
enum class TupleComponent { prompt, tools, evaluators, memory, governance, artifacts, knowledge };

template <>
struct EnumNames<TupleComponent> {
  static constexpr std::array<std::pair<TupleComponent, std::string_view>, 7> table{{
      {TupleComponent::prompt, "prompt"},
      {TupleComponent::tools, "tools"},
      {TupleComponent::evaluators, "evaluators"},
      {TupleComponent::memory, "memory"},
      {TupleComponent::governance, "governance"},
      {TupleComponent::artifacts, "artifacts"},
      {TupleComponent::knowledge, "knowledge"},
  }};
};

/// Operational component a contract declares it modifies.
enum class ContractComponent {
  prompts,
  evaluators,
  workflows,
  routing,
  retrieval,
  memory_rules,
  skills,
  benchmarks,
  graph_relations,
};

template <>
struct EnumNames<ContractComponent> {
  static constexpr std::array<std::pair<ContractComponent, std::string_view>, 9> table{{
      {ContractComponent::prompts, "prompts"},
      {ContractComponent::evaluators, "evaluators"},
      {ContractComponent::workflows, "workflows"},
      {ContractComponent::routing, "routing"},
      {ContractComponent::retrieval, "retrieval"},
      {ContractComponent::memory_rules, "memory_rules"},
      {ContractComponent::skills, "skills"},
      {ContractComponent::benchmarks, "benchmarks"},
      {ContractComponent::graph_relations, "graph_relations"},
  }};
};

/// Which tuple slot a contract component lives in.
TupleComponent tuple_component_for(ContractComponent c);

enum class RollbackDirection { above, below };

template <>
struct EnumNames<RollbackDirection> {
  static constexpr std::array<std::pair<RollbackDirection, std::string_view>, 2> table{{
      {RollbackDirection::above, "above"},
      {RollbackDirection::below, "below"},
  }};
};

struct ExpectedImprovement {
  std::string metric;
  double min_delta = 0.0;

  bool operator==(const ExpectedImprovement&) const = default;
};

struct RollbackCondition {
  std::string metric;
  double threshold = 0.0;
  RollbackDirection direction = RollbackDirection::above;

  /// Strictly crosses the threshold in the stated direction.
  bool triggered_by(std::string_view observed_metric, double value) const;
  bool operator==(const RollbackCondition&) const = default;
};

struct ChangeContract {
  std::optional<ContractComponent> component;
  std::string targeted_failure_mode;
  std::optional<ExpectedImprovement> expected_improvement;
  std::vector<std::string> invariants_preserved;
  std::string falsifying_evaluation;  // evaluator or benchmark node id
  std::vector<RollbackCondition> rollback_conditions;

  bool operator==(const ChangeContract&) const = default;
};

/// Name of the first of the six fields that is absent or empty.
std::optional<std::string_view> first_missing_field(const ChangeContract& contract);

using DeltaValue = std::variant<Descriptor, std::vector<std::string>, std::string, std::uint64_t>;

/// Wholesale replacement value for exactly one tuple component.
struct ComponentDelta {
  TupleComponent component = TupleComponent::prompt;
  DeltaValue value;

  /// The value alternative matches the component's type.
  bool well_typed() const;
  bool operator==(const ComponentDelta&) const = default;
};

enum class MutationStatus { proposed, staged, applied, rolled_back, rejected };

template <>
struct EnumNames<MutationStatus> {
  static constexpr std::array<std::pair<MutationStatus, std::string_view>, 5> table{{
      {MutationStatus::proposed, "proposed"},
      {MutationStatus::staged, "staged"},
      {MutationStatus::applied, "applied"},
      {MutationStatus::rolled_back, "rolled_back"},
      {MutationStatus::rejected, "rejected"},
  }};
};

bool is_legal_status_edge(MutationStatus from, MutationStatus to);

struct MutationRecord {
  std::string mutation_id;
  std::string base_config;
  ChangeContract contract;
  ComponentDelta delta;
  MutationStatus status = MutationStatus::proposed;
  std::optional<std::string> result_config;
  std::vector<std::string> evidence;

  bool operator==(const MutationRecord&) const = default;
};

/// Copy of `base` with the delta's component replaced; config_id left empty.
HarnessConfig apply_delta(const HarnessConfig& base, const ComponentDelta& delta);

/// Tuple components whose values differ (config_id ignored).
std::vector<TupleComponent> differing_components(const HarnessConfig& a, const HarnessConfig& b);

/// Id over the config's components and the event that creates it.
std::string config_id_for(const HarnessConfig& components, const std::string& event_id);

}  // namespace govrt

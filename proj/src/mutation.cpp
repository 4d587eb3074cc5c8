#include "govrt/mutation.hpp"

namespace govrt {

TupleComponent tuple_component_for(ContractComponent c) {
  switch (c) {
    case ContractComponent::prompts: return TupleComponent::prompt;
    case ContractComponent::evaluators:
    case ContractComponent::benchmarks: return TupleComponent::evaluators;
    case ContractComponent::routing: return TupleComponent::tools;
    case ContractComponent::retrieval:
    case ContractComponent::memory_rules: return TupleComponent::memory;
    case ContractComponent::workflows:
    case ContractComponent::skills: return TupleComponent::artifacts;
    case ContractComponent::graph_relations: return TupleComponent::knowledge;
  }
  return TupleComponent::prompt;
}

bool RollbackCondition::triggered_by(std::string_view observed_metric, double value) const {
  if (observed_metric != metric) return false;
  return direction == RollbackDirection::above ? value > threshold : value < threshold;
}

std::optional<std::string_view> first_missing_field(const ChangeContract& c) {
  if (!c.component) return "component";
  if (c.targeted_failure_mode.empty()) return "targeted_failure_mode";
  if (!c.expected_improvement || c.expected_improvement->metric.empty()) return "expected_improvement";
  if (c.invariants_preserved.empty()) return "invariants_preserved";
  if (c.falsifying_evaluation.empty()) return "falsifying_evaluation";
  if (c.rollback_conditions.empty()) return "rollback_conditions";
  return std::nullopt;
}

bool ComponentDelta::well_typed() const {
  switch (component) {
    case TupleComponent::prompt:
    case TupleComponent::memory: return std::holds_alternative<Descriptor>(value);
    case TupleComponent::tools:
    case TupleComponent::evaluators:
    case TupleComponent::artifacts: return std::holds_alternative<std::vector<std::string>>(value);
    case TupleComponent::governance: return std::holds_alternative<std::string>(value);
    case TupleComponent::knowledge: return std::holds_alternative<std::uint64_t>(value);
  }
  return false;
}

bool is_legal_status_edge(MutationStatus from, MutationStatus to) {
  using S = MutationStatus;
  switch (from) {
    case S::proposed: return to == S::staged || to == S::rejected;
    case S::staged: return to == S::applied || to == S::rejected;
    case S::applied: return to == S::rolled_back;
    case S::rolled_back:
    case S::rejected: return false;
  }
  return false;
}

HarnessConfig apply_delta(const HarnessConfig& base, const ComponentDelta& delta) {
  if (!delta.well_typed()) fail(ErrorCode::ComponentMismatch, "delta value does not fit its component");
  HarnessConfig out = base;
  out.config_id.clear();
  switch (delta.component) {
    case TupleComponent::prompt: out.prompt = std::get<Descriptor>(delta.value); break;
    case TupleComponent::tools: out.tools = std::get<std::vector<std::string>>(delta.value); break;
    case TupleComponent::evaluators: out.evaluators = std::get<std::vector<std::string>>(delta.value); break;
    case TupleComponent::memory: out.memory = std::get<Descriptor>(delta.value); break;
    case TupleComponent::governance: out.governance = std::get<std::string>(delta.value); break;
    case TupleComponent::artifacts: out.artifacts = std::get<std::vector<std::string>>(delta.value); break;
    case TupleComponent::knowledge: out.knowledge = std::get<std::uint64_t>(delta.value); break;
  }
  return out;
}

std::vector<TupleComponent> differing_components(const HarnessConfig& a, const HarnessConfig& b) {
  std::vector<TupleComponent> out;
  if (a.prompt != b.prompt) out.push_back(TupleComponent::prompt);
  if (a.tools != b.tools) out.push_back(TupleComponent::tools);
  if (a.evaluators != b.evaluators) out.push_back(TupleComponent::evaluators);
  if (a.memory != b.memory) out.push_back(TupleComponent::memory);
  if (a.governance != b.governance) out.push_back(TupleComponent::governance);
  if (a.artifacts != b.artifacts) out.push_back(TupleComponent::artifacts);
  if (a.knowledge != b.knowledge) out.push_back(TupleComponent::knowledge);
  return out;
}

}  // namespace govrt

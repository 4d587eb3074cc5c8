#pragma once

// Kernel commands. Each one validates against the working state, then emits
// events; the reducer applies them immediately so later steps in the same
// transaction see the effects. A throw anywhere discards the whole
// transaction.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "govrt/event.hpp"
#include "govrt/policy.hpp"
#include "govrt/state.hpp"

namespace govrt {

class CommandContext {
 public:
  CommandContext(KernelState& state, EventLog& log, const GovernancePolicy& policy, std::string actor,
                 std::uint64_t tick)
      : state_(state), log_(log), policy_(policy), actor_(std::move(actor)), tick_(tick) {}

  const KernelState& state() const noexcept { return state_; }
  const EventLog& log() const noexcept { return log_; }
  const GovernancePolicy& policy() const noexcept { return policy_; }
  const std::string& actor() const noexcept { return actor_; }
  void set_actor(std::string actor) { actor_ = std::move(actor); }
  std::uint64_t tick() const noexcept { return tick_; }

  /// Id the next emitted event will carry.
  std::string next_event_id() const { return event_id(log_.size()); }
  const TraceEvent& emit(EventKind kind, Json payload);

 private:
  KernelState& state_;
  EventLog& log_;
  const GovernancePolicy& policy_;
  std::string actor_;
  std::uint64_t tick_;
};

namespace ops {

// registry-core
CapabilityRecord register_capability(CommandContext& ctx, const std::string& content, CapabilityKind kind,
                                     const std::string& created_by);
HarnessConfig register_config(CommandContext& ctx, HarnessConfig components, bool activate);
GeneratedSkillSpec register_skill_spec(CommandContext& ctx, const std::string& capability_id,
                                       const SkillInterface& iface);
/// Registers the tag and its context node on first use.
ContextTag ensure_context(CommandContext& ctx, const std::string& tag);

// runtime-graph
GraphNode add_node(CommandContext& ctx, const std::string& entity_id, NodeKind kind);
/// add_node unless the node already exists.
const GraphNode& ensure_node(CommandContext& ctx, const std::string& entity_id, NodeKind kind);
GraphEdge add_edge(CommandContext& ctx, const std::string& src, Relation rel, const std::string& dst);
/// Computes q for a capability node and caches it when it changed.
double quality(CommandContext& ctx, const std::string& node_id, const QualityWeights& w);

// evaluations and observations
Evaluation record_evaluation(CommandContext& ctx, const std::string& subject, const std::string& evaluator,
                             std::map<std::string, double> metrics, std::optional<QualityComponents> quality);
SelectionRecord select_config(CommandContext& ctx, std::vector<CandidateMeasurement> candidates,
                              const ObjectiveWeights& w);
Observation record_observation(CommandContext& ctx, const std::string& config_id,
                               std::map<std::string, double> metrics);

// lifecycle-engine
/// Empty `evidence` means the record's own evidence list.
LifecycleRecord transition(CommandContext& ctx, const std::string& capability_id, LifecycleState target,
                           std::vector<std::string> evidence, std::optional<std::string> review);
/// Evidence summary transition() would use.
EvidenceSummary summarize_evidence(const KernelState& s, const std::string& capability_id,
                                   const std::vector<std::string>& evidence, const std::optional<std::string>& review);

// governance-kernel
CapabilityReview review(CommandContext& ctx, const std::string& subject_id, std::vector<std::string> evidence,
                        double risk, const std::string& reviewer, const std::string& rationale);

// mutation-engine
MutationRecord propose_mutation(CommandContext& ctx, const std::string& base, const ChangeContract& contract,
                                const ComponentDelta& delta);

struct StageOutcome {
  MutationRecord record;
  std::optional<KernelError> rejection;  // set when the validation falsified the mutation
};
/// A falsified mutation is rejected and recorded; the outcome carries the
/// error so the caller can report it after committing.
StageOutcome stage_mutation(CommandContext& ctx, const std::string& mutation_id, const std::string& validation_event);
MutationRecord reject_mutation(CommandContext& ctx, const std::string& mutation_id, const std::string& reason,
                               const std::string& detail);
HarnessConfig apply_mutation(CommandContext& ctx, const std::string& mutation_id);

struct RollbackTrigger {
  std::string metric;
  double value = 0.0;
  bool operator_order = false;
};
HarnessConfig rollback_mutation(CommandContext& ctx, const std::string& mutation_id, const RollbackTrigger& trigger);

}  // namespace ops

/// The review gate: reject above risk_gate, approve below
/// auto_approve_below_risk with evidence, otherwise defer until
/// `deferring_reviewers` (distinct, this one included) reaches the quorum.
ReviewDecision review_decision(double risk, bool has_evidence, std::size_t deferring_reviewers,
                               const GovernancePolicy& policy);

/// Looks an id up in every registry: {"type": ..., "record": ...}. NotFound.
Json resolve(const KernelState& s, const std::string& id);

}  // namespace govrt

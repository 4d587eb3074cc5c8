#pragma once

// Kernel state as a pure fold over TraceEvents. Commands emit events and the
// reducer here is the only code that changes registries, graph or harness
// state, both live and during replay.

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "govrt/event.hpp"
#include "govrt/graph.hpp"
#include "govrt/mutation.hpp"
#include "govrt/registry.hpp"
#include "govrt/selection.hpp"

namespace govrt {

struct SelectionRecord {
  std::string event_id;
  std::vector<CandidateMeasurement> candidates;
  ObjectiveWeights weights;
  SelectionResult result;

  bool operator==(const SelectionRecord&) const = default;
};

struct Observation {
  std::string event_id;
  std::string config_id;
  std::map<std::string, double> metrics;

  bool operator==(const Observation&) const = default;
};

struct Registries {
  std::map<std::string, CapabilityRecord> capabilities;
  std::map<std::string, HarnessConfig> configs;
  std::map<std::string, GeneratedSkillSpec> skill_specs;
  std::map<std::string, CapabilityReview> reviews;
  std::map<std::string, MutationRecord> mutations;
  std::map<std::string, Evaluation> evaluations;  // keyed by event id
  std::map<std::string, ContextTag> contexts;
  std::vector<LifecycleRecord> lifecycle_history;
  std::vector<SelectionRecord> selections;
  std::vector<Observation> observations;
  std::set<std::string> retired_configs;
  // Bookkeeping for freshness checks: event index of each review, and the
  // index at which each capability entered its current lifecycle state.
  std::map<std::string, std::uint64_t> review_index;
  std::map<std::string, std::uint64_t> state_entered;

  bool operator==(const Registries&) const = default;
};

struct KernelState {
  Registries reg;
  RuntimeGraph graph;
  HarnessState harness;
  std::uint64_t clock = 0;       // tick of the last applied event
  std::uint64_t next_event = 0;  // index the next event will get

  bool operator==(const KernelState&) const = default;
};

/// Folds one event into `state`. Throws UnknownEventKind / InvalidRecord on
/// payloads it cannot interpret.
void apply_event(KernelState& state, const TraceEvent& event);

/// Verifies the chain first (ChainBroken) and folds from `base`.
KernelState replay(std::span<const TraceEvent> events, KernelState base = {});

Json state_to_json(const KernelState& state);
KernelState state_from_json(const Json& j);

void to_json(Json& j, const SelectionRecord& v);
void from_json(const Json& j, SelectionRecord& v);
void to_json(Json& j, const Observation& v);
void from_json(const Json& j, Observation& v);

// Lookups shared by commands and the cycle driver.
const HarnessConfig* find_config(const KernelState& s, const std::string& id);
const CapabilityRecord* find_capability(const KernelState& s, const std::string& id);
const MutationRecord* find_mutation(const KernelState& s, const std::string& id);
/// Applied mutation whose result is `config_id`, if any.
const MutationRecord* mutation_producing(const KernelState& s, const std::string& config_id);
/// Most recent approve review of `subject` recorded at or after event `since`.
const CapabilityReview* fresh_approval(const KernelState& s, const std::string& subject, std::uint64_t since = 0);

}  // namespace govrt

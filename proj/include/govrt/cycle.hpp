#pragma once

// One pass of the governed evolution loop: generate, evaluate, select,
// review, stage, apply, promote/deprecate, then check rollback conditions.
// A cycle is a single transaction, so an error leaves no trace of it.
//
// Workload strings may refer to things created earlier in the same
// workload: "@N" is the N-th artifact, "@cfg:N" the N-th config and
// "@active" the active config at the time the reference is resolved.

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "govrt/kernel.hpp"

namespace govrt {

struct WorkloadArtifact {
  CapabilityKind kind = CapabilityKind::skill;
  std::string content;
  std::vector<std::string> depends_on;
  std::optional<SkillInterface> interface;
};

struct WorkloadConfig {
  HarnessConfig components;
  bool activate = false;
};

struct WorkloadEvaluation {
  std::string subject;
  std::string evaluator;
  std::map<std::string, double> metrics;
  std::optional<QualityComponents> quality;
};

struct WorkloadEdge {
  std::string src;
  Relation relation = Relation::depends_on;
  std::string dst;
};

struct WorkloadFailure {
  std::string subject;
  std::string context;  // tag
};

struct WorkloadCandidate {
  std::string config;
  double q = 0.0, r = 0.0, v = 0.0, u = 0.0, c = 0.0;
  std::set<ConstraintFlag> flags;
};

struct WorkloadMutation {
  std::string base = "@active";
  ChangeContract contract;
  ComponentDelta delta;
  double risk = 0.0;
  std::vector<std::string> reviewers;
  std::map<std::string, double> validation;  // metrics reported by the falsifying evaluator
};

struct Workload {
  std::vector<WorkloadArtifact> artifacts;
  std::vector<WorkloadConfig> configs;
  std::vector<WorkloadEdge> edges;
  std::vector<WorkloadEvaluation> evaluations;
  std::vector<WorkloadFailure> failures;
  std::vector<WorkloadCandidate> candidates;
  std::vector<WorkloadMutation> mutations;
  std::vector<std::string> promotion_reviewers;
  std::vector<std::string> deprecations;
  std::map<std::string, double> observation;
  bool promote = true;
};

#define GOVRT_JSON_PAIR(Type)           \
  void to_json(Json& j, const Type& v); \
  void from_json(const Json& j, Type& v);
GOVRT_JSON_PAIR(WorkloadArtifact)
GOVRT_JSON_PAIR(WorkloadConfig)
GOVRT_JSON_PAIR(WorkloadEvaluation)
GOVRT_JSON_PAIR(WorkloadEdge)
GOVRT_JSON_PAIR(WorkloadFailure)
GOVRT_JSON_PAIR(WorkloadCandidate)
GOVRT_JSON_PAIR(WorkloadMutation)
#undef GOVRT_JSON_PAIR

void to_json(Json& j, const Workload& w);
void from_json(const Json& j, Workload& w);
Workload load_workload(const std::filesystem::path& path);

struct ScoredConfig {
  std::string config_id;
  double score = 0.0;
  bool operator==(const ScoredConfig&) const = default;
};

struct CycleReport {
  std::uint64_t cycle_index = 0;
  std::vector<std::string> generated;
  std::vector<ScoredConfig> evaluated;
  std::vector<std::string> reviews;
  std::vector<std::string> staged_mutations;
  std::vector<LifecycleRecord> promotions;
  std::vector<LifecycleRecord> deprecations;
  std::vector<std::string> rollbacks;

  bool operator==(const CycleReport&) const = default;
};

void to_json(Json& j, const CycleReport& r);
void from_json(const Json& j, CycleReport& r);

/// Metrics the simulated environment reports for the active config at the
/// end of a cycle; merged over the workload's static observation.
using ObserveFn = std::function<std::map<std::string, double>(const KernelState&)>;

CycleReport run_cycle(CommandContext& ctx, const Workload& workload, const ObserveFn& observe = {});
CycleReport run_cycle(Kernel& kernel, const Workload& workload, const ObserveFn& observe = {},
                      const std::string& actor = "kernel");

/// Rebuilds the report of cycle `cycle_index` from the events alone.
CycleReport reconstruct_report(std::span<const TraceEvent> events, std::uint64_t cycle_index);

struct AuditReport {
  std::vector<ChainViolation> violations;
  std::size_t events = 0;
  std::string head;
  bool replay_matches = true;

  bool ok() const { return violations.empty() && replay_matches; }
};
void to_json(Json& j, const AuditReport& r);

/// Chain check, per-record integrity checks and replay-vs-live comparison.
AuditReport audit_verify(const Kernel& kernel);
/// Chain check over raw log lines only.
AuditReport audit_verify_lines(std::span<const std::string> lines);

}  // namespace govrt

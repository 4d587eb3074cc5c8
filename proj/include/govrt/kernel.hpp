#pragma once

// The single writer. Every command runs as a transaction over a private
// copy of the state; on success the events are made durable and the copy is
// published, on any failure both are discarded. Readers take immutable
// snapshots at any time.

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <type_traits>

#include "govrt/command.hpp"
#include "govrt/store.hpp"

namespace govrt {

class Kernel {
 public:
  /// In-memory kernel; nothing touches disk.
  explicit Kernel(GovernancePolicy policy = {});

  /// Opens (and for read_write, creates) a store. The store's policy file is
  /// used unless `policy_override` is given; overrides are not persisted.
  static std::unique_ptr<Kernel> open(const std::filesystem::path& root, Store::Mode mode,
                                      std::optional<GovernancePolicy> policy_override = std::nullopt);

  std::shared_ptr<const KernelState> snapshot() const;
  HarnessState snapshot_state() const { return snapshot()->harness; }
  const GovernancePolicy& policy() const noexcept { return policy_; }
  void set_policy(GovernancePolicy policy);

  /// Copy of the committed events.
  std::vector<TraceEvent> events() const;
  std::size_t event_count() const;
  Store* store() noexcept { return store_ ? &*store_ : nullptr; }
  const Store* store() const noexcept { return store_ ? &*store_ : nullptr; }

  void set_snapshot_interval(std::size_t every) { snapshot_interval_ = every; }

  /// Runs `body(CommandContext&)` as one atomic command.
  template <typename F>
  auto transact(const std::string& actor, F&& body) -> std::invoke_result_t<F, CommandContext&>;

  // Single-command conveniences.
  CapabilityRecord register_capability(const std::string& content, CapabilityKind kind, const std::string& created_by,
                                       const std::string& actor = "operator");
  HarnessConfig register_config(HarnessConfig components, bool activate, const std::string& actor = "operator");
  GraphNode add_node(const std::string& entity_id, NodeKind kind, const std::string& actor = "operator");
  GraphEdge add_edge(const std::string& src, Relation rel, const std::string& dst, const std::string& actor = "operator");
  double quality(const std::string& node_id, const std::string& actor = "operator");
  Evaluation record_evaluation(const std::string& subject, const std::string& evaluator,
                               std::map<std::string, double> metrics, std::optional<QualityComponents> quality,
                               const std::string& actor = "operator");
  LifecycleRecord transition(const std::string& capability_id, LifecycleState target,
                             std::vector<std::string> evidence = {}, std::optional<std::string> review = std::nullopt,
                             const std::string& actor = "operator");
  CapabilityReview review(const std::string& subject_id, std::vector<std::string> evidence, double risk,
                          const std::string& reviewer, const std::string& rationale = "");
  MutationRecord propose(const std::string& base, const ChangeContract& contract, const ComponentDelta& delta,
                         const std::string& actor = "operator");
  /// Throws ImprovementNotMet after committing the rejection.
  MutationRecord stage(const std::string& mutation_id, const std::string& validation_event,
                       const std::string& actor = "operator");
  HarnessConfig apply(const std::string& mutation_id, const std::string& actor = "operator");
  HarnessConfig rollback(const std::string& mutation_id, const ops::RollbackTrigger& trigger,
                         const std::string& actor = "operator");
  SelectionRecord select(std::vector<CandidateMeasurement> candidates, const std::string& actor = "operator");

 private:
  void commit(KernelState&& working, std::size_t log_before);

  GovernancePolicy policy_;
  std::optional<Store> store_;
  std::size_t snapshot_interval_ = 1000;

  mutable std::mutex write_mu_;  // serializes commands and guards log_
  mutable std::mutex read_mu_;   // guards the published state pointer
  std::shared_ptr<const KernelState> state_;
  EventLog log_;
};

template <typename F>
auto Kernel::transact(const std::string& actor, F&& body) -> std::invoke_result_t<F, CommandContext&> {
  std::lock_guard<std::mutex> guard(write_mu_);
  KernelState working = *snapshot();
  const std::size_t before = log_.size();
  CommandContext ctx(working, log_, policy_, actor, working.clock + 1);
  try {
    if constexpr (std::is_void_v<std::invoke_result_t<F, CommandContext&>>) {
      body(ctx);
      commit(std::move(working), before);
    } else {
      auto result = body(ctx);
      commit(std::move(working), before);
      return result;
    }
  } catch (...) {
    log_.truncate(before);
    throw;
  }
}

}  // namespace govrt

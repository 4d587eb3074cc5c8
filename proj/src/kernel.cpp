#include "govrt/kernel.hpp"

#include <fstream>

namespace govrt {

Kernel::Kernel(GovernancePolicy policy) : policy_(std::move(policy)), state_(std::make_shared<const KernelState>()) {
  policy_.validate();
}

std::unique_ptr<Kernel> Kernel::open(const std::filesystem::path& root, Store::Mode mode,
                                     std::optional<GovernancePolicy> policy_override) {
  Store store(root, mode);
  GovernancePolicy policy;
  if (std::filesystem::exists(store.policy_file())) {
    policy = load_policy(store.policy_file());
  } else if (store.writable()) {
    std::ofstream(store.policy_file()) << policy_to_toml(policy);
  }
  if (policy_override) policy = *policy_override;

  auto kernel = std::make_unique<Kernel>(policy);
  const auto lines = store.read_lines();
  for (std::size_t i = 0; i < lines.size(); ++i) {
    TraceEvent e;
    try {
      e = decode_line(lines[i]);
    } catch (const KernelError& err) {
      if (err.code() == ErrorCode::UnknownEventKind) throw;
      fail(ErrorCode::ChainBroken, "event " + std::to_string(i) + " unreadable: " + err.detail());
    }
    if (encode_line(e) != lines[i]) fail(ErrorCode::ChainBroken, "event " + std::to_string(i) + " is not canonical");
    kernel->log_.adopt(std::move(e));
  }
  KernelState base = store.load_snapshot(kernel->log_).value_or(KernelState{});
  const auto& all = kernel->log_.events();
  KernelState state = replay(std::span<const TraceEvent>(all).subspan(base.next_event), std::move(base));
  kernel->state_ = std::make_shared<const KernelState>(std::move(state));
  kernel->store_.emplace(std::move(store));
  return kernel;
}

std::shared_ptr<const KernelState> Kernel::snapshot() const {
  std::lock_guard<std::mutex> guard(read_mu_);
  return state_;
}

void Kernel::set_policy(GovernancePolicy policy) {
  policy.validate();
  std::lock_guard<std::mutex> guard(write_mu_);
  policy_ = std::move(policy);
}

std::vector<TraceEvent> Kernel::events() const {
  std::lock_guard<std::mutex> guard(write_mu_);
  return log_.events();
}

std::size_t Kernel::event_count() const {
  std::lock_guard<std::mutex> guard(write_mu_);
  return log_.size();
}

void Kernel::commit(KernelState&& working, std::size_t log_before) {
  if (log_.size() == log_before) return;
  if (store_) {
    // Durable before acknowledged: the events hit disk before the state is published.
    store_->append(std::span<const TraceEvent>(log_.events()).subspan(log_before));
  }
  const std::size_t after = log_.size();
  auto published = std::make_shared<const KernelState>(std::move(working));
  {
    std::lock_guard<std::mutex> guard(read_mu_);
    state_ = published;
  }
  if (store_ && snapshot_interval_ > 0 && after / snapshot_interval_ != log_before / snapshot_interval_) {
    try {
      store_->write_snapshot(*published);
    } catch (const KernelError&) {
      // Snapshots are an optimization; the log alone is authoritative.
    }
  }
}

CapabilityRecord Kernel::register_capability(const std::string& content, CapabilityKind kind,
                                             const std::string& created_by, const std::string& actor) {
  return transact(actor, [&](CommandContext& c) { return ops::register_capability(c, content, kind, created_by); });
}

HarnessConfig Kernel::register_config(HarnessConfig components, bool activate, const std::string& actor) {
  return transact(actor, [&](CommandContext& c) { return ops::register_config(c, std::move(components), activate); });
}

GraphNode Kernel::add_node(const std::string& entity_id, NodeKind kind, const std::string& actor) {
  return transact(actor, [&](CommandContext& c) { return ops::add_node(c, entity_id, kind); });
}

GraphEdge Kernel::add_edge(const std::string& src, Relation rel, const std::string& dst, const std::string& actor) {
  return transact(actor, [&](CommandContext& c) { return ops::add_edge(c, src, rel, dst); });
}

double Kernel::quality(const std::string& node_id, const std::string& actor) {
  return transact(actor, [&](CommandContext& c) { return ops::quality(c, node_id, c.policy().quality_weights); });
}

Evaluation Kernel::record_evaluation(const std::string& subject, const std::string& evaluator,
                                     std::map<std::string, double> metrics, std::optional<QualityComponents> quality,
                                     const std::string& actor) {
  return transact(actor, [&](CommandContext& c) {
    return ops::record_evaluation(c, subject, evaluator, std::move(metrics), quality);
  });
}

LifecycleRecord Kernel::transition(const std::string& capability_id, LifecycleState target,
                                   std::vector<std::string> evidence, std::optional<std::string> review,
                                   const std::string& actor) {
  return transact(actor, [&](CommandContext& c) {
    return ops::transition(c, capability_id, target, std::move(evidence), std::move(review));
  });
}

CapabilityReview Kernel::review(const std::string& subject_id, std::vector<std::string> evidence, double risk,
                                const std::string& reviewer, const std::string& rationale) {
  return transact(reviewer, [&](CommandContext& c) {
    return ops::review(c, subject_id, std::move(evidence), risk, reviewer, rationale);
  });
}

MutationRecord Kernel::propose(const std::string& base, const ChangeContract& contract, const ComponentDelta& delta,
                               const std::string& actor) {
  return transact(actor, [&](CommandContext& c) { return ops::propose_mutation(c, base, contract, delta); });
}

MutationRecord Kernel::stage(const std::string& mutation_id, const std::string& validation_event,
                             const std::string& actor) {
  auto outcome =
      transact(actor, [&](CommandContext& c) { return ops::stage_mutation(c, mutation_id, validation_event); });
  if (outcome.rejection) throw *outcome.rejection;
  return outcome.record;
}

HarnessConfig Kernel::apply(const std::string& mutation_id, const std::string& actor) {
  return transact(actor, [&](CommandContext& c) { return ops::apply_mutation(c, mutation_id); });
}

HarnessConfig Kernel::rollback(const std::string& mutation_id, const ops::RollbackTrigger& trigger,
                               const std::string& actor) {
  return transact(actor, [&](CommandContext& c) { return ops::rollback_mutation(c, mutation_id, trigger); });
}

SelectionRecord Kernel::select(std::vector<CandidateMeasurement> candidates, const std::string& actor) {
  return transact(actor, [&](CommandContext& c) { return ops::select_config(c, std::move(candidates), c.policy().weights); });
}

}  // namespace govrt

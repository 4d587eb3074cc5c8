#include <algorithm>
#include <cmath>
#include <set>

#include "govrt/command.hpp"
#include "govrt/serialize.hpp"

namespace govrt {

const TraceEvent& CommandContext::emit(EventKind kind, Json payload) {
  const TraceEvent& e = log_.append(kind, actor_, tick_, std::move(payload));
  apply_event(state_, e);
  return e;
}

namespace ops {
namespace {

bool event_exists(const CommandContext& ctx, const std::string& id) {
  auto index = parse_event_id(id);
  return index && *index < ctx.log().size();
}

void require_events(const CommandContext& ctx, const std::vector<std::string>& ids) {
  for (const auto& id : ids) {
    if (!event_exists(ctx, id)) fail(ErrorCode::UnknownEvent, "no event " + id);
  }
}

void require_finite_metrics(const std::map<std::string, double>& metrics) {
  for (const auto& [name, value] : metrics) {
    if (!std::isfinite(value)) fail(ErrorCode::InvalidRecord, "metric '" + name + "' is not finite");
  }
}

std::string hex_digest_of(const Json& j) { return to_hex(sha256(canonical_serialize(j))); }

GraphNode make_node(CommandContext& ctx, const std::string& id, NodeKind kind) {
  const KernelState& s = ctx.state();
  GraphNode node;
  node.node_id = id;
  node.kind = kind;
  node.tau.created_tick = ctx.tick();
  node.tau.graph_version = s.graph.version() + 1;
  auto unknown = [&](std::string_view why) {
    fail(ErrorCode::UnknownEntity, std::string(to_string(kind)) + " " + id + ": " + std::string(why));
  };
  if (is_capability_node(kind)) {
    const CapabilityRecord* cap = find_capability(s, id);
    if (!cap) unknown("no such capability");
    if (node_kind_for(cap->kind) != kind) unknown("capability kind is " + std::string(to_string(cap->kind)));
    node.content_hash = cap->content_hash;
    node.q = quality_score(cap->quality, ctx.policy().quality_weights);
    node.tau.lifecycle = cap->lifecycle;
  } else if (kind == NodeKind::config) {
    const HarnessConfig* cfg = find_config(s, id);
    if (!cfg) unknown("no such config");
    node.content_hash = hex_digest_of(Json(*cfg));
    node.tau.retired = s.reg.retired_configs.count(id) > 0;
  } else if (kind == NodeKind::mutation) {
    const MutationRecord* m = find_mutation(s, id);
    if (!m) unknown("no such mutation");
    node.content_hash =
        hex_digest_of(Json{{"base_config", m->base_config}, {"contract", m->contract}, {"delta", m->delta}});
  } else if (kind == NodeKind::context) {
    auto it = s.reg.contexts.find(id);
    if (it == s.reg.contexts.end()) unknown("no such context");
    node.content_hash = to_hex(content_digest(it->second.tag));
    node.tag = it->second.tag;
  } else {  // trace
    if (!event_exists(ctx, id)) unknown("no such event");
    node.content_hash = to_hex(ctx.log().at(*parse_event_id(id)).this_hash);
  }
  return node;
}

}  // namespace

CapabilityRecord register_capability(CommandContext& ctx, const std::string& content, CapabilityKind kind,
                                     const std::string& created_by) {
  if (!event_exists(ctx, created_by)) fail(ErrorCode::UnknownEvent, "created_by " + created_by + " does not resolve");
  if (content.empty()) fail(ErrorCode::EmptyContent, "capability content is empty");
  const std::string hash = to_hex(content_digest(content));
  for (const auto& [id, cap] : ctx.state().reg.capabilities) {
    if (cap.content_hash == hash && cap.kind == kind && cap.lifecycle != LifecycleState::deprecated) {
      fail(ErrorCode::DuplicateContent, std::string(to_string(kind)) + " content already registered as " + id);
    }
  }
  CapabilityRecord rec;
  rec.capability_id = capability_id_for(kind, hash, ctx.next_event_id());
  rec.kind = kind;
  rec.content = content;
  rec.content_hash = hash;
  rec.created_by = created_by;
  ctx.emit(EventKind::artifact_registered, Json{{"entity", "capability"}, {"record", rec}});
  return rec;
}

HarnessConfig register_config(CommandContext& ctx, HarnessConfig components, bool activate) {
  for (const auto& id : components.artifacts) {
    if (!find_capability(ctx.state(), id)) fail(ErrorCode::UnknownCapability, "config artifact " + id);
  }
  if (components.knowledge > ctx.state().graph.version()) {
    fail(ErrorCode::InvalidRecord, "config refers to graph version " + std::to_string(components.knowledge) +
                                       " beyond current " + std::to_string(ctx.state().graph.version()));
  }
  components.config_id = config_id_for(components, ctx.next_event_id());
  ctx.emit(EventKind::artifact_registered,
           Json{{"entity", "config"}, {"record", components}, {"activate", activate}});
  return components;
}

GeneratedSkillSpec register_skill_spec(CommandContext& ctx, const std::string& capability_id,
                                       const SkillInterface& iface) {
  const CapabilityRecord* cap = find_capability(ctx.state(), capability_id);
  if (!cap) fail(ErrorCode::UnknownCapability, capability_id);
  if (cap->kind != CapabilityKind::skill) fail(ErrorCode::NotASkill, capability_id + " is a " + std::string(to_string(cap->kind)));
  validate_skill_interface(iface);
  GeneratedSkillSpec spec{derive_id(Json::array({"skill_spec", capability_id, ctx.next_event_id()})), capability_id,
                          iface};
  ctx.emit(EventKind::artifact_registered, Json{{"entity", "skill_spec"}, {"record", spec}});
  return spec;
}

ContextTag ensure_context(CommandContext& ctx, const std::string& tag) {
  if (tag.empty()) fail(ErrorCode::InvalidRecord, "empty context tag");
  ContextTag ct{context_id_for(tag), tag};
  if (!ctx.state().reg.contexts.count(ct.context_id)) {
    ctx.emit(EventKind::artifact_registered, Json{{"entity", "context"}, {"record", ct}});
  }
  ensure_node(ctx, ct.context_id, NodeKind::context);
  return ct;
}

GraphNode add_node(CommandContext& ctx, const std::string& entity_id, NodeKind kind) {
  if (ctx.state().graph.find(entity_id)) fail(ErrorCode::DuplicateNode, entity_id);
  GraphNode node = make_node(ctx, entity_id, kind);
  ctx.emit(EventKind::graph_updated, Json{{"op", "add_node"}, {"node", node}});
  return node;
}

const GraphNode& ensure_node(CommandContext& ctx, const std::string& entity_id, NodeKind kind) {
  if (!ctx.state().graph.find(entity_id)) add_node(ctx, entity_id, kind);
  return ctx.state().graph.node(entity_id);
}

GraphEdge add_edge(CommandContext& ctx, const std::string& src, Relation rel, const std::string& dst) {
  ctx.state().graph.check_edge(src, rel, dst);
  GraphEdge edge = RuntimeGraph::normalize(GraphEdge{src, rel, dst, ctx.next_event_id()});
  ctx.emit(EventKind::graph_updated, Json{{"op", "add_edge"}, {"edge", edge}});
  return edge;
}

double quality(CommandContext& ctx, const std::string& node_id, const QualityWeights& w) {
  const GraphNode& node = ctx.state().graph.node(node_id);
  if (!is_capability_node(node.kind)) {
    fail(ErrorCode::NoQualityComponents, node_id + " is a " + std::string(to_string(node.kind)) + " node");
  }
  w.validate();
  const double q = quality_score(find_capability(ctx.state(), node_id)->quality, w);
  if (node.q != q) ctx.emit(EventKind::graph_updated, Json{{"op", "quality"}, {"node_id", node_id}, {"q", q}});
  return q;
}

Evaluation record_evaluation(CommandContext& ctx, const std::string& subject, const std::string& evaluator,
                             std::map<std::string, double> metrics, std::optional<QualityComponents> quality) {
  const KernelState& s = ctx.state();
  if (!find_capability(s, subject) && !find_config(s, subject) && !find_mutation(s, subject)) {
    fail(ErrorCode::UnknownSubject, subject);
  }
  const CapabilityRecord* ev = find_capability(s, evaluator);
  if (!ev) fail(ErrorCode::UnknownEntity, "evaluator " + evaluator);
  if (ev->kind != CapabilityKind::evaluator && ev->kind != CapabilityKind::benchmark) {
    fail(ErrorCode::KindMismatch, evaluator + " is a " + std::string(to_string(ev->kind)) + ", not an evaluator");
  }
  require_finite_metrics(metrics);
  if (quality) {
    for (double x : {quality->p, quality->r, quality->s, quality->u, quality->rho}) {
      if (!std::isfinite(x)) fail(ErrorCode::InvalidRecord, "quality component is not finite");
    }
    quality = quality->clamped();
  }
  Evaluation out{ctx.next_event_id(), subject, evaluator, std::move(metrics), quality};
  Json body = out;
  body.erase("event_id");
  ctx.emit(EventKind::evaluation_recorded, Json{{"type", "evaluation"}, {"evaluation", std::move(body)}});
  return out;
}

SelectionRecord select_config(CommandContext& ctx, std::vector<CandidateMeasurement> candidates,
                              const ObjectiveWeights& w) {
  for (const auto& c : candidates) {
    if (!find_config(ctx.state(), c.config_id)) fail(ErrorCode::UnknownConfig, c.config_id);
  }
  SelectionRecord rec{ctx.next_event_id(), std::move(candidates), w, {}};
  rec.result = select(rec.candidates, w);
  Json body = rec;
  body.erase("event_id");
  body["type"] = "selection";
  ctx.emit(EventKind::evaluation_recorded, std::move(body));
  return rec;
}

Observation record_observation(CommandContext& ctx, const std::string& config_id,
                               std::map<std::string, double> metrics) {
  if (!find_config(ctx.state(), config_id)) fail(ErrorCode::UnknownConfig, config_id);
  require_finite_metrics(metrics);
  Observation obs{ctx.next_event_id(), config_id, std::move(metrics)};
  ctx.emit(EventKind::evaluation_recorded,
           Json{{"type", "observation"}, {"config_id", obs.config_id}, {"metrics", obs.metrics}});
  return obs;
}

EvidenceSummary summarize_evidence(const KernelState& s, const std::string& capability_id,
                                   const std::vector<std::string>& evidence, const std::optional<std::string>& review) {
  EvidenceSummary sum;
  std::set<std::string> events;
  std::set<std::string> evaluators;
  for (const auto& id : evidence) {
    auto it = s.reg.evaluations.find(id);
    if (it == s.reg.evaluations.end() || it->second.subject != capability_id) continue;
    events.insert(id);
    evaluators.insert(it->second.evaluator);
  }
  sum.events = static_cast<std::uint32_t>(events.size());
  sum.distinct_evaluators = static_cast<std::uint32_t>(evaluators.size());
  if (const CapabilityRecord* cap = find_capability(s, capability_id)) sum.risk = cap->quality.rho;
  if (review) {
    auto it = s.reg.reviews.find(*review);
    sum.approved_review = it != s.reg.reviews.end() && it->second.subject_id == capability_id &&
                          it->second.decision == ReviewDecision::approve;
  }
  return sum;
}

LifecycleRecord transition(CommandContext& ctx, const std::string& capability_id, LifecycleState target,
                           std::vector<std::string> evidence, std::optional<std::string> review) {
  const KernelState& s = ctx.state();
  const CapabilityRecord* cap = find_capability(s, capability_id);
  if (!cap) fail(ErrorCode::UnknownCapability, capability_id);
  if (!is_legal_transition(cap->lifecycle, target)) {
    fail(ErrorCode::IllegalTransition,
         std::string(to_string(cap->lifecycle)) + " -> " + std::string(to_string(target)));
  }
  if (evidence.empty()) evidence = cap->evidence;
  require_events(ctx, evidence);
  if (review && !s.reg.reviews.count(*review)) fail(ErrorCode::NotFound, "review " + *review);
  const EvidenceRequirement req = required_evidence(cap->lifecycle, target, ctx.policy().evidence_table);
  const EvidenceSummary sum = summarize_evidence(s, capability_id, evidence, review);
  if (auto err = check_requirement(req, sum)) {
    std::string detail = edge_key({cap->lifecycle, target}) + ": ";
    if (*err == ErrorCode::MissingApproval) {
      detail += "an approved review of " + capability_id + " is required";
    } else {
      detail += std::to_string(sum.events) + "/" + std::to_string(req.min_evidence_events) + " events, " +
                std::to_string(sum.distinct_evaluators) + "/" + std::to_string(req.min_distinct_evaluators) +
                " evaluators, risk " + Json(sum.risk).dump() + " (max " + Json(req.max_risk).dump() + ")";
    }
    fail(*err, detail);
  }
  LifecycleRecord rec{capability_id, cap->lifecycle, target, std::move(evidence),
                      sum.approved_review ? review : std::nullopt, ctx.tick()};
  ctx.emit(EventKind::lifecycle_transition, Json{{"record", rec}});
  return rec;
}

CapabilityReview review(CommandContext& ctx, const std::string& subject_id, std::vector<std::string> evidence,
                        double risk, const std::string& reviewer, const std::string& rationale) {
  const KernelState& s = ctx.state();
  const bool is_capability = find_capability(s, subject_id) != nullptr;
  if (!is_capability && !find_mutation(s, subject_id)) fail(ErrorCode::UnknownSubject, subject_id);
  if (!std::isfinite(risk) || risk < 0.0 || risk > 1.0) {
    fail(ErrorCode::RiskOutOfRange, "risk " + Json(std::isfinite(risk) ? risk : -1.0).dump() + " outside [0,1]");
  }
  if (reviewer.empty()) fail(ErrorCode::InvalidRecord, "reviewer is empty");
  require_events(ctx, evidence);

  // Defer band: distinct deferring reviewers since the subject entered its
  // current state, this one included, count toward the quorum.
  std::uint64_t since = 0;
  if (is_capability) since = s.reg.state_entered.at(subject_id);
  std::set<std::string> reviewers{reviewer};
  for (const auto& [id, r] : s.reg.reviews) {
    if (r.subject_id == subject_id && r.decision == ReviewDecision::defer && s.reg.review_index.at(id) >= since) {
      reviewers.insert(r.reviewer);
    }
  }
  const ReviewDecision decision = review_decision(risk, !evidence.empty(), reviewers.size(), ctx.policy());
  CapabilityReview rec{derive_id(Json::array({"review", subject_id, reviewer, ctx.next_event_id()})),
                       subject_id,
                       reviewer,
                       std::move(evidence),
                       risk,
                       decision,
                       rationale};
  ctx.emit(EventKind::review_recorded, Json{{"record", rec}});
  return rec;
}

MutationRecord propose_mutation(CommandContext& ctx, const std::string& base, const ChangeContract& contract,
                                const ComponentDelta& delta) {
  const KernelState& s = ctx.state();
  if (!find_config(s, base)) fail(ErrorCode::UnknownConfig, base);
  if (auto missing = first_missing_field(contract)) fail(ErrorCode::IncompleteContract, std::string(*missing));
  const GraphNode* falsifier = s.graph.find(contract.falsifying_evaluation);
  if (!falsifier) fail(ErrorCode::UnknownNode, "falsifying_evaluation " + contract.falsifying_evaluation);
  if (falsifier->kind != NodeKind::evaluator && falsifier->kind != NodeKind::benchmark) {
    fail(ErrorCode::KindMismatch, "falsifying_evaluation " + contract.falsifying_evaluation + " is a " +
                                      std::string(to_string(falsifier->kind)) + " node");
  }
  const TupleComponent slot = tuple_component_for(*contract.component);
  if (delta.component != slot) {
    fail(ErrorCode::ComponentMismatch, "contract targets " + std::string(to_string(*contract.component)) + " (" +
                                           std::string(to_string(slot)) + ") but delta replaces " +
                                           std::string(to_string(delta.component)));
  }
  if (!delta.well_typed()) fail(ErrorCode::ComponentMismatch, "delta value does not fit " + std::string(to_string(slot)));
  for (const auto& rc : contract.rollback_conditions) {
    if (rc.metric.empty() || !std::isfinite(rc.threshold)) fail(ErrorCode::IncompleteContract, "rollback_conditions");
  }
  if (slot == TupleComponent::artifacts) {
    for (const auto& id : std::get<std::vector<std::string>>(delta.value)) {
      if (!find_capability(s, id)) fail(ErrorCode::UnknownCapability, "delta artifact " + id);
    }
  }
  if (slot == TupleComponent::knowledge && std::get<std::uint64_t>(delta.value) > s.graph.version()) {
    fail(ErrorCode::InvalidRecord, "delta refers to a future graph version");
  }
  MutationRecord rec;
  rec.mutation_id = derive_id(Json::array({"mutation", base, ctx.next_event_id()}));
  rec.base_config = base;
  rec.contract = contract;
  rec.delta = delta;
  ctx.emit(EventKind::mutation_proposed, Json{{"record", rec}});
  add_node(ctx, rec.mutation_id, NodeKind::mutation);
  return rec;
}

MutationRecord reject_mutation(CommandContext& ctx, const std::string& mutation_id, const std::string& reason,
                               const std::string& detail) {
  const MutationRecord* m = find_mutation(ctx.state(), mutation_id);
  if (!m) fail(ErrorCode::NotFound, "mutation " + mutation_id);
  if (!is_legal_status_edge(m->status, MutationStatus::rejected)) {
    fail(ErrorCode::WrongStatus, mutation_id + " is " + std::string(to_string(m->status)));
  }
  const std::string falsifier = m->contract.falsifying_evaluation;
  ctx.emit(EventKind::mutation_rejected, Json{{"mutation_id", mutation_id}, {"reason", reason}, {"detail", detail}});
  // Rejected mutations stay in the graph as negative evidence.
  ensure_node(ctx, mutation_id, NodeKind::mutation);
  if (ctx.state().graph.find(falsifier) && !ctx.state().graph.has_edge(mutation_id, Relation::fails_under, falsifier)) {
    add_edge(ctx, mutation_id, Relation::fails_under, falsifier);
  }
  return *find_mutation(ctx.state(), mutation_id);
}

StageOutcome stage_mutation(CommandContext& ctx, const std::string& mutation_id, const std::string& validation_event) {
  const KernelState& s = ctx.state();
  const MutationRecord* m = find_mutation(s, mutation_id);
  if (!m) fail(ErrorCode::NotFound, "mutation " + mutation_id);
  if (m->status != MutationStatus::proposed) {
    fail(ErrorCode::WrongStatus, mutation_id + " is " + std::string(to_string(m->status)) + ", expected proposed");
  }
  auto it = s.reg.evaluations.find(validation_event);
  if (it == s.reg.evaluations.end()) fail(ErrorCode::UnknownEvent, "no evaluation " + validation_event);
  const Evaluation& val = it->second;
  if (val.evaluator != m->contract.falsifying_evaluation) {
    fail(ErrorCode::WrongEvaluator, "validation by " + val.evaluator + ", contract names " +
                                        m->contract.falsifying_evaluation);
  }
  if (val.subject != mutation_id) fail(ErrorCode::WrongEvaluator, "validation " + validation_event + " is about " + val.subject);
  for (const auto& [id, other] : s.reg.mutations) {
    if (id != mutation_id && other.status == MutationStatus::staged && other.base_config == m->base_config) {
      fail(ErrorCode::ConflictingMutation, id + " is already staged against " + m->base_config);
    }
  }
  const ExpectedImprovement& want = *m->contract.expected_improvement;
  auto metric = val.metrics.find(want.metric);
  std::optional<std::string> falsified;
  if (metric == val.metrics.end()) {
    falsified = "validation lacks metric '" + want.metric + "'";
  } else if (metric->second < want.min_delta) {
    falsified = want.metric + " " + Json(metric->second).dump() + " < required " + Json(want.min_delta).dump();
  }
  if (falsified) {
    MutationRecord rec = reject_mutation(ctx, mutation_id, std::string(error_name(ErrorCode::ImprovementNotMet)), *falsified);
    return {std::move(rec), KernelError(ErrorCode::ImprovementNotMet, *falsified)};
  }
  ctx.emit(EventKind::mutation_staged, Json{{"mutation_id", mutation_id}, {"validation", validation_event}});
  return {*find_mutation(ctx.state(), mutation_id), std::nullopt};
}

HarnessConfig apply_mutation(CommandContext& ctx, const std::string& mutation_id) {
  const KernelState& s = ctx.state();
  const MutationRecord* m = find_mutation(s, mutation_id);
  if (!m) fail(ErrorCode::NotFound, "mutation " + mutation_id);
  if (m->status != MutationStatus::staged) {
    fail(ErrorCode::WrongStatus, mutation_id + " is " + std::string(to_string(m->status)) + ", expected staged");
  }
  if (!fresh_approval(s, mutation_id)) fail(ErrorCode::MissingApproval, "no approve review for " + mutation_id);
  const std::string base_id = m->base_config;
  HarnessConfig next = apply_delta(*find_config(s, base_id), m->delta);
  next.config_id = config_id_for(next, ctx.next_event_id());
  ctx.emit(EventKind::mutation_applied, Json{{"mutation_id", mutation_id}, {"config", next}});
  ensure_node(ctx, base_id, NodeKind::config);
  ensure_node(ctx, next.config_id, NodeKind::config);
  add_edge(ctx, next.config_id, Relation::mutated_from, base_id);
  return next;
}

HarnessConfig rollback_mutation(CommandContext& ctx, const std::string& mutation_id, const RollbackTrigger& trigger) {
  const KernelState& s = ctx.state();
  const MutationRecord* m = find_mutation(s, mutation_id);
  if (!m) fail(ErrorCode::NotFound, "mutation " + mutation_id);
  if (m->status != MutationStatus::applied) {
    fail(ErrorCode::WrongStatus, mutation_id + " is " + std::string(to_string(m->status)) + ", expected applied");
  }
  const auto& conds = m->contract.rollback_conditions;
  const bool matched = std::any_of(conds.begin(), conds.end(),
                                   [&](const RollbackCondition& c) { return c.triggered_by(trigger.metric, trigger.value); });
  if (!matched && !trigger.operator_order) {
    fail(ErrorCode::ConditionNotMet, trigger.metric + "=" + Json(std::isfinite(trigger.value) ? trigger.value : 0.0).dump() +
                                         " crosses no rollback condition of " + mutation_id);
  }
  if (!std::isfinite(trigger.value)) fail(ErrorCode::InvalidRecord, "trigger value is not finite");
  const std::string base = m->base_config;
  Json trig{{"metric", trigger.metric}, {"value", trigger.value}, {"operator_order", trigger.operator_order && !matched}};
  ctx.emit(EventKind::rollback_event, Json{{"mutation_id", mutation_id},
                                           {"restored_config", base},
                                           {"retired_config", *m->result_config},
                                           {"trigger", std::move(trig)}});
  return *find_config(ctx.state(), base);
}

}  // namespace ops

ReviewDecision review_decision(double risk, bool has_evidence, std::size_t deferring_reviewers,
                               const GovernancePolicy& policy) {
  if (risk > policy.risk_gate) return ReviewDecision::reject;
  if (!has_evidence) return ReviewDecision::defer;
  if (risk < policy.auto_approve_below_risk) return ReviewDecision::approve;
  if (deferring_reviewers >= policy.reviewer_quorum) return ReviewDecision::approve;
  return ReviewDecision::defer;
}

Json resolve(const KernelState& s, const std::string& id) {
  const auto& r = s.reg;
  if (auto it = r.capabilities.find(id); it != r.capabilities.end()) return {{"type", "capability"}, {"record", it->second}};
  if (auto it = r.configs.find(id); it != r.configs.end()) return {{"type", "config"}, {"record", it->second}};
  if (auto it = r.mutations.find(id); it != r.mutations.end()) return {{"type", "mutation"}, {"record", it->second}};
  if (auto it = r.reviews.find(id); it != r.reviews.end()) return {{"type", "review"}, {"record", it->second}};
  if (auto it = r.skill_specs.find(id); it != r.skill_specs.end()) return {{"type", "skill_spec"}, {"record", it->second}};
  if (auto it = r.contexts.find(id); it != r.contexts.end()) return {{"type", "context"}, {"record", it->second}};
  if (auto it = r.evaluations.find(id); it != r.evaluations.end()) return {{"type", "evaluation"}, {"record", it->second}};
  fail(ErrorCode::NotFound, id);
}

}  // namespace govrt

#include "govrt/cycle.hpp"

#include <algorithm>

#include "govrt/serialize.hpp"

namespace govrt {

// ---- workload files -------------------------------------------------------

void to_json(Json& j, const WorkloadArtifact& a) {
  j = Json{{"kind", a.kind}, {"content", a.content}, {"depends_on", a.depends_on}};
  put_optional(j, "interface", a.interface);
}
void from_json(const Json& j, WorkloadArtifact& a) {
  a.kind = get_field<CapabilityKind>(j, "kind");
  a.content = get_field<std::string>(j, "content");
  a.depends_on = get_field_or<std::vector<std::string>>(j, "depends_on", {});
  a.interface = get_optional<SkillInterface>(j, "interface");
}

void to_json(Json& j, const WorkloadConfig& c) {
  j = c.components;
  j.erase("config_id");
  j["activate"] = c.activate;
}
void from_json(const Json& j, WorkloadConfig& c) {
  c.components = j.get<HarnessConfig>();
  c.activate = get_field_or<bool>(j, "activate", false);
}

void to_json(Json& j, const WorkloadEvaluation& e) {
  j = Json{{"subject", e.subject}, {"evaluator", e.evaluator}, {"metrics", e.metrics}};
  put_optional(j, "quality", e.quality);
}
void from_json(const Json& j, WorkloadEvaluation& e) {
  e.subject = get_field<std::string>(j, "subject");
  e.evaluator = get_field<std::string>(j, "evaluator");
  e.metrics = get_field_or<std::map<std::string, double>>(j, "metrics", {});
  e.quality = get_optional<QualityComponents>(j, "quality");
}

void to_json(Json& j, const WorkloadEdge& e) { j = Json{{"src", e.src}, {"relation", e.relation}, {"dst", e.dst}}; }
void from_json(const Json& j, WorkloadEdge& e) {
  e.src = get_field<std::string>(j, "src");
  e.relation = get_field<Relation>(j, "relation");
  e.dst = get_field<std::string>(j, "dst");
}

void to_json(Json& j, const WorkloadFailure& f) { j = Json{{"subject", f.subject}, {"context", f.context}}; }
void from_json(const Json& j, WorkloadFailure& f) {
  f.subject = get_field<std::string>(j, "subject");
  f.context = get_field<std::string>(j, "context");
}

void to_json(Json& j, const WorkloadCandidate& c) {
  j = Json{{"config", c.config}, {"q", c.q}, {"r", c.r}, {"v", c.v}, {"u", c.u}, {"c", c.c}, {"flags", c.flags}};
}
void from_json(const Json& j, WorkloadCandidate& c) {
  c.config = get_field<std::string>(j, "config");
  c.q = get_field<double>(j, "q");
  c.r = get_field<double>(j, "r");
  c.v = get_field<double>(j, "v");
  c.u = get_field<double>(j, "u");
  c.c = get_field<double>(j, "c");
  c.flags = get_field_or<std::set<ConstraintFlag>>(j, "flags", {});
}

void to_json(Json& j, const WorkloadMutation& m) {
  j = Json{{"base", m.base},   {"contract", m.contract},   {"delta", m.delta},
           {"risk", m.risk},   {"reviewers", m.reviewers}, {"validation", m.validation}};
}
void from_json(const Json& j, WorkloadMutation& m) {
  m.base = get_field_or<std::string>(j, "base", "@active");
  m.contract = get_field<ChangeContract>(j, "contract");
  m.delta = get_field<ComponentDelta>(j, "delta");
  m.risk = get_field<double>(j, "risk");
  m.reviewers = get_field_or<std::vector<std::string>>(j, "reviewers", {});
  m.validation = get_field_or<std::map<std::string, double>>(j, "validation", {});
}

void to_json(Json& j, const Workload& w) {
  j = Json{{"artifacts", w.artifacts},
           {"configs", w.configs},
           {"edges", w.edges},
           {"evaluations", w.evaluations},
           {"failures", w.failures},
           {"candidates", w.candidates},
           {"mutations", w.mutations},
           {"promotion_reviewers", w.promotion_reviewers},
           {"deprecations", w.deprecations},
           {"observation", w.observation},
           {"promote", w.promote}};
}

void from_json(const Json& j, Workload& w) {
  if (!j.is_object()) fail(ErrorCode::InvalidRecord, "workload must be a table");
  w.artifacts = get_field_or<std::vector<WorkloadArtifact>>(j, "artifacts", {});
  w.configs = get_field_or<std::vector<WorkloadConfig>>(j, "configs", {});
  w.edges = get_field_or<std::vector<WorkloadEdge>>(j, "edges", {});
  w.evaluations = get_field_or<std::vector<WorkloadEvaluation>>(j, "evaluations", {});
  w.failures = get_field_or<std::vector<WorkloadFailure>>(j, "failures", {});
  w.candidates = get_field_or<std::vector<WorkloadCandidate>>(j, "candidates", {});
  w.mutations = get_field_or<std::vector<WorkloadMutation>>(j, "mutations", {});
  w.promotion_reviewers = get_field_or<std::vector<std::string>>(j, "promotion_reviewers", {});
  w.deprecations = get_field_or<std::vector<std::string>>(j, "deprecations", {});
  w.observation = get_field_or<std::map<std::string, double>>(j, "observation", {});
  w.promote = get_field_or<bool>(j, "promote", true);
}

Workload load_workload(const std::filesystem::path& path) { return load_structured_file(path).get<Workload>(); }

void to_json(Json& j, const CycleReport& r) {
  Json evaluated = Json::array();
  for (const auto& e : r.evaluated) evaluated.push_back(Json{{"config_id", e.config_id}, {"score", e.score}});
  j = Json{{"cycle_index", r.cycle_index},   {"generated", r.generated},
           {"evaluated", std::move(evaluated)}, {"reviews", r.reviews},
           {"staged_mutations", r.staged_mutations}, {"promotions", r.promotions},
           {"deprecations", r.deprecations}, {"rollbacks", r.rollbacks}};
}

void from_json(const Json& j, CycleReport& r) {
  r.cycle_index = get_field<std::uint64_t>(j, "cycle_index");
  r.generated = get_field<std::vector<std::string>>(j, "generated");
  r.evaluated.clear();
  for (const auto& e : require_field(j, "evaluated")) {
    r.evaluated.push_back({get_field<std::string>(e, "config_id"), get_field<double>(e, "score")});
  }
  r.reviews = get_field<std::vector<std::string>>(j, "reviews");
  r.staged_mutations = get_field<std::vector<std::string>>(j, "staged_mutations");
  r.promotions = get_field<std::vector<LifecycleRecord>>(j, "promotions");
  r.deprecations = get_field<std::vector<LifecycleRecord>>(j, "deprecations");
  r.rollbacks = get_field<std::vector<std::string>>(j, "rollbacks");
}

// ---- the cycle -------------------------------------------------------------

namespace {

std::vector<ScoredConfig> ranked(const std::map<std::string, double>& scores) {
  std::vector<ScoredConfig> out;
  for (const auto& [id, score] : scores) out.push_back({id, score});
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.score > b.score; });
  return out;
}

class CycleRun {
 public:
  CycleRun(CommandContext& ctx, const Workload& w) : ctx_(ctx), w_(w) {}

  CycleReport run(const ObserveFn& observe) {
    report_.cycle_index = state().harness.cycle_count;
    trace_id_ = ctx_
                    .emit(EventKind::cycle_started, Json{{"cycle_index", report_.cycle_index},
                                                         {"policy_digest", policy_digest(ctx_.policy())}})
                    .id();
    generate();
    evaluate_and_select();
    review_mutations();
    review_capabilities();
    stage_and_apply();
    promote_and_deprecate();
    observe_and_rollback(observe);
    ctx_.emit(EventKind::cycle_completed, Json{{"cycle_index", report_.cycle_index}, {"report", report_}});
    return report_;
  }

 private:
  const KernelState& state() const { return ctx_.state(); }

  std::string ref(const std::string& r) const {
    if (r == "@active") {
      if (state().harness.active_config.empty()) fail(ErrorCode::UnknownConfig, "no active config");
      return state().harness.active_config;
    }
    if (r.rfind("@cfg:", 0) == 0) return pick(configs_, r.substr(5), r);
    if (r.rfind("@", 0) == 0) return pick(artifacts_, r.substr(1), r);
    return r;
  }

  static std::string pick(const std::vector<std::string>& ids, const std::string& digits, const std::string& r) {
    std::size_t pos = 0;
    std::size_t n = 0;
    try {
      n = std::stoul(digits, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != digits.size() || n >= ids.size()) fail(ErrorCode::InvalidRecord, "bad workload reference " + r);
    return ids[n];
  }

  std::vector<std::string> refs(const std::vector<std::string>& rs) const {
    std::vector<std::string> out;
    for (const auto& r : rs) out.push_back(ref(r));
    return out;
  }

  // Capability nodes are created on demand with the kind their record implies.
  void ensure_entity_node(const std::string& id) {
    if (state().graph.find(id)) return;
    if (const CapabilityRecord* cap = find_capability(state(), id)) {
      ops::add_node(ctx_, id, node_kind_for(cap->kind));
    } else if (find_config(state(), id)) {
      ops::add_node(ctx_, id, NodeKind::config);
    } else if (find_mutation(state(), id)) {
      ops::add_node(ctx_, id, NodeKind::mutation);
    } else {
      fail(ErrorCode::UnknownNode, id);
    }
  }

  void generate() {
    for (const auto& a : w_.artifacts) {
      const CapabilityRecord rec = ops::register_capability(ctx_, a.content, a.kind, trace_id_);
      artifacts_.push_back(rec.capability_id);
      report_.generated.push_back(rec.capability_id);
      ops::ensure_node(ctx_, trace_id_, NodeKind::trace);
      ops::add_node(ctx_, rec.capability_id, node_kind_for(a.kind));
      ops::add_edge(ctx_, rec.capability_id, Relation::generated_by, trace_id_);
      for (const auto& dep : a.depends_on) {
        const std::string target = ref(dep);
        ensure_entity_node(target);
        ops::add_edge(ctx_, rec.capability_id, Relation::depends_on, target);
      }
      if (a.interface) ops::register_skill_spec(ctx_, rec.capability_id, *a.interface);
    }
    for (const auto& c : w_.configs) {
      HarnessConfig comps = c.components;
      comps.artifacts = refs(comps.artifacts);
      comps.evaluators = refs(comps.evaluators);
      const HarnessConfig cfg = ops::register_config(ctx_, std::move(comps), c.activate);
      configs_.push_back(cfg.config_id);
      ops::add_node(ctx_, cfg.config_id, NodeKind::config);
    }
    for (const auto& e : w_.edges) {
      const std::string src = ref(e.src);
      const std::string dst = ref(e.dst);
      ensure_entity_node(src);
      ensure_entity_node(dst);
      ops::add_edge(ctx_, src, e.relation, dst);
    }
  }

  void evaluate_and_select() {
    for (const auto& e : w_.evaluations) {
      const std::string subject = ref(e.subject);
      const std::string evaluator = ref(e.evaluator);
      ops::record_evaluation(ctx_, subject, evaluator, e.metrics, e.quality);
      const GraphNode* s = state().graph.find(subject);
      const GraphNode* d = state().graph.find(evaluator);
      if (s && d && kind_allowed(Relation::validated_by, s->kind, d->kind) &&
          !state().graph.has_edge(subject, Relation::validated_by, evaluator)) {
        ops::add_edge(ctx_, subject, Relation::validated_by, evaluator);
      }
    }
    for (const auto& f : w_.failures) {
      const std::string subject = ref(f.subject);
      const ContextTag tag = ops::ensure_context(ctx_, f.context);
      ensure_entity_node(subject);
      if (!state().graph.has_edge(subject, Relation::fails_under, tag.context_id)) {
        ops::add_edge(ctx_, subject, Relation::fails_under, tag.context_id);
      }
    }
    if (w_.candidates.empty()) return;
    std::vector<CandidateMeasurement> cands;
    for (const auto& c : w_.candidates) {
      CandidateMeasurement m{ref(c.config), c.q, c.r, c.v, c.u, c.c, c.flags};
      if (m.c > ctx_.policy().cost_budget) m.constraint_flags.insert(ConstraintFlag::cost_exceeded);
      const GraphNode* node = state().graph.find(m.config_id);
      if (state().reg.retired_configs.count(m.config_id) || (node && !state().graph.eligible_for_selection(m.config_id))) {
        m.constraint_flags.insert(ConstraintFlag::governance_violation);
      }
      cands.push_back(std::move(m));
    }
    const SelectionRecord sel = ops::select_config(ctx_, std::move(cands), ctx_.policy().weights);
    report_.evaluated = ranked(sel.result.scores);
  }

  void review_mutations() {
    for (const auto& wm : w_.mutations) {
      ChangeContract contract = wm.contract;
      contract.falsifying_evaluation = ref(contract.falsifying_evaluation);
      ComponentDelta delta = wm.delta;
      if (auto* ids = std::get_if<std::vector<std::string>>(&delta.value); ids && delta.component == TupleComponent::artifacts) {
        *ids = refs(*ids);
      }
      const MutationRecord rec = ops::propose_mutation(ctx_, ref(wm.base), contract, delta);
      const Evaluation val =
          ops::record_evaluation(ctx_, rec.mutation_id, contract.falsifying_evaluation, wm.validation, std::nullopt);
      ReviewDecision decision = ReviewDecision::defer;
      for (const auto& reviewer : wm.reviewers) {
        const CapabilityReview r = ops::review(ctx_, rec.mutation_id, {val.event_id}, wm.risk, reviewer, "mutation gate");
        report_.reviews.push_back(r.review_id);
        decision = r.decision;
        if (decision != ReviewDecision::defer) break;
      }
      if (decision == ReviewDecision::reject) {
        ops::reject_mutation(ctx_, rec.mutation_id, "review_rejected", "risk " + Json(wm.risk).dump() + " above gate");
      } else if (decision == ReviewDecision::approve) {
        approved_.push_back({rec.mutation_id, val.event_id});
      }
    }
  }

  void review_capabilities() {
    if (w_.promotion_reviewers.empty()) return;
    for (const auto& id : capability_ids()) {
      const CapabilityRecord& cap = *find_capability(state(), id);
      auto next = next_promotion(cap.lifecycle);
      if (!next || cap.lifecycle == LifecycleState::deprecated) continue;
      const auto req = required_evidence(cap.lifecycle, *next, ctx_.policy().evidence_table);
      const std::uint64_t since = state().reg.state_entered.at(id);
      if (!req.requires_approved_review || fresh_approval(state(), id, since)) continue;
      EvidenceSummary sum = ops::summarize_evidence(state(), id, cap.evidence, std::nullopt);
      sum.approved_review = true;
      if (check_requirement(req, sum)) continue;  // not ready for review yet
      const std::vector<std::string> evidence = cap.evidence;
      const double risk = cap.quality.rho;
      for (const auto& reviewer : w_.promotion_reviewers) {
        const CapabilityReview r = ops::review(ctx_, id, evidence, risk, reviewer, "promotion gate");
        report_.reviews.push_back(r.review_id);
        if (r.decision != ReviewDecision::defer) break;
      }
    }
  }

  void stage_and_apply() {
    std::vector<std::string> staged;
    for (const auto& [mutation_id, validation] : approved_) {
      const ops::StageOutcome out = ops::stage_mutation(ctx_, mutation_id, validation);
      if (out.rejection) continue;  // recorded as mutation_rejected
      staged.push_back(mutation_id);
      report_.staged_mutations.push_back(mutation_id);
    }
    for (const auto& mutation_id : staged) ops::apply_mutation(ctx_, mutation_id);
  }

  void promote_and_deprecate() {
    std::set<std::string> deprecated_now;
    for (const auto& r : w_.deprecations) {
      const std::string id = ref(r);
      const CapabilityRecord* cap = find_capability(state(), id);
      if (!cap) fail(ErrorCode::UnknownCapability, id);
      if (cap->lifecycle == LifecycleState::deprecated) continue;
      report_.deprecations.push_back(ops::transition(ctx_, id, LifecycleState::deprecated, {}, std::nullopt));
      deprecated_now.insert(id);
    }
    if (!w_.promote) return;
    for (const auto& id : capability_ids()) {
      const CapabilityRecord& cap = *find_capability(state(), id);
      auto next = next_promotion(cap.lifecycle);
      if (!next || cap.lifecycle == LifecycleState::deprecated || cap.evidence.empty()) continue;
      const CapabilityReview* approval = fresh_approval(state(), id, state().reg.state_entered.at(id));
      std::optional<std::string> review;
      if (approval) review = approval->review_id;
      const auto req = required_evidence(cap.lifecycle, *next, ctx_.policy().evidence_table);
      if (check_requirement(req, ops::summarize_evidence(state(), id, cap.evidence, review))) continue;
      const std::vector<std::string> evidence = cap.evidence;
      report_.promotions.push_back(ops::transition(ctx_, id, *next, evidence, review));
    }
  }

  void observe_and_rollback(const ObserveFn& observe) {
    std::map<std::string, double> metrics = w_.observation;
    if (observe) {
      for (auto& [k, v] : observe(state())) metrics[k] = v;
    }
    const std::string active = state().harness.active_config;
    if (metrics.empty() || active.empty()) return;
    ops::record_observation(ctx_, active, metrics);
    const MutationRecord* m = mutation_producing(state(), active);
    if (!m) return;
    const std::string mutation_id = m->mutation_id;
    const auto conditions = m->contract.rollback_conditions;
    for (const auto& cond : conditions) {
      auto it = metrics.find(cond.metric);
      if (it == metrics.end() || !cond.triggered_by(it->first, it->second)) continue;
      ops::rollback_mutation(ctx_, mutation_id, {it->first, it->second, false});
      report_.rollbacks.push_back(mutation_id);
      break;
    }
  }

  std::vector<std::string> capability_ids() const {
    std::vector<std::string> ids;
    for (const auto& [id, cap] : state().reg.capabilities) ids.push_back(id);
    return ids;
  }

  CommandContext& ctx_;
  const Workload& w_;
  CycleReport report_;
  std::string trace_id_;
  std::vector<std::string> artifacts_;
  std::vector<std::string> configs_;
  std::vector<std::pair<std::string, std::string>> approved_;
};

}  // namespace

CycleReport run_cycle(CommandContext& ctx, const Workload& workload, const ObserveFn& observe) {
  return CycleRun(ctx, workload).run(observe);
}

CycleReport run_cycle(Kernel& kernel, const Workload& workload, const ObserveFn& observe, const std::string& actor) {
  return kernel.transact(actor, [&](CommandContext& ctx) { return run_cycle(ctx, workload, observe); });
}

CycleReport reconstruct_report(std::span<const TraceEvent> events, std::uint64_t cycle_index) {
  CycleReport r;
  r.cycle_index = cycle_index;
  bool inside = false;
  bool closed = false;
  for (const TraceEvent& e : events) {
    if (e.kind == EventKind::cycle_started && get_field<std::uint64_t>(e.payload, "cycle_index") == cycle_index) {
      inside = true;
      continue;
    }
    if (!inside) continue;
    if (e.kind == EventKind::cycle_completed) {
      closed = true;
      break;
    }
    switch (e.kind) {
      case EventKind::artifact_registered:
        if (get_field<std::string>(e.payload, "entity") == "capability") {
          r.generated.push_back(get_field<std::string>(require_field(e.payload, "record"), "capability_id"));
        }
        break;
      case EventKind::evaluation_recorded:
        if (get_field<std::string>(e.payload, "type") == "selection") {
          r.evaluated = ranked(get_field<SelectionResult>(e.payload, "result").scores);
        }
        break;
      case EventKind::review_recorded:
        r.reviews.push_back(get_field<std::string>(require_field(e.payload, "record"), "review_id"));
        break;
      case EventKind::mutation_staged: r.staged_mutations.push_back(get_field<std::string>(e.payload, "mutation_id")); break;
      case EventKind::lifecycle_transition: {
        auto rec = get_field<LifecycleRecord>(e.payload, "record");
        (rec.to_state == LifecycleState::deprecated ? r.deprecations : r.promotions).push_back(std::move(rec));
        break;
      }
      case EventKind::rollback_event: r.rollbacks.push_back(get_field<std::string>(e.payload, "mutation_id")); break;
      default: break;
    }
  }
  if (!closed) fail(ErrorCode::NotFound, "cycle " + std::to_string(cycle_index) + " is not in the log");
  return r;
}

// ---- audit -------------------------------------------------------------------

void to_json(Json& j, const AuditReport& r) {
  Json v = Json::array();
  for (const auto& x : r.violations) v.push_back(Json{{"index", x.index}, {"reason", x.reason}});
  j = Json{{"events", r.events}, {"head", r.head}, {"ok", r.ok()}, {"replay_matches", r.replay_matches},
           {"violations", std::move(v)}};
}

AuditReport audit_verify_lines(std::span<const std::string> lines) {
  AuditReport report;
  report.events = lines.size();
  report.violations = verify_lines(lines);
  report.head = std::string(64, '0');
  if (!lines.empty()) {
    try {
      report.head = to_hex(decode_line(lines.back()).this_hash);
    } catch (const KernelError&) {
      report.head = "unreadable";
    }
  }
  return report;
}

AuditReport audit_verify(const Kernel& kernel) {
  const auto live = kernel.snapshot();
  const std::vector<TraceEvent> events = kernel.events();
  AuditReport report;
  if (const Store* store = kernel.store()) {
    report = audit_verify_lines(store->read_lines());
  } else {
    report.events = events.size();
    report.violations = verify_chain(events);
    report.head = to_hex(events.empty() ? kZeroDigest : events.back().this_hash);
  }
  const std::uint64_t state_index = events.size();
  for (const auto& [id, cap] : live->reg.capabilities) {
    if (to_hex(content_digest(cap.content)) != cap.content_hash) {
      report.violations.push_back({state_index, "capability " + id + " content hash mismatch"});
    }
  }
  for (const auto& problem : live->graph.verify()) report.violations.push_back({state_index, "graph: " + problem});
  if (live->harness.log_head != report.head) {
    report.violations.push_back({state_index, "harness log_head differs from chain head"});
  }
  try {
    const KernelState replayed = replay(events);
    report.replay_matches = canonical_serialize(state_to_json(replayed)) == canonical_serialize(state_to_json(*live));
  } catch (const KernelError& e) {
    report.replay_matches = false;
    report.violations.push_back({state_index, std::string("replay failed: ") + e.what()});
  }
  return report;
}

}  // namespace govrt

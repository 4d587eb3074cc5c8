#include "govrt/state.hpp"

#include "govrt/serialize.hpp"

namespace govrt {

void to_json(Json& j, const SelectionRecord& v) {
  j = Json{{"event_id", v.event_id}, {"candidates", v.candidates}, {"weights", v.weights}, {"result", v.result}};
}
void from_json(const Json& j, SelectionRecord& v) {
  v.event_id = get_field_or<std::string>(j, "event_id", "");
  v.candidates = get_field<std::vector<CandidateMeasurement>>(j, "candidates");
  v.weights = get_field<ObjectiveWeights>(j, "weights");
  v.result = get_field<SelectionResult>(j, "result");
}

void to_json(Json& j, const Observation& v) {
  j = Json{{"event_id", v.event_id}, {"config_id", v.config_id}, {"metrics", v.metrics}};
}
void from_json(const Json& j, Observation& v) {
  v.event_id = get_field_or<std::string>(j, "event_id", "");
  v.config_id = get_field<std::string>(j, "config_id");
  v.metrics = get_field<std::map<std::string, double>>(j, "metrics");
}

namespace {

template <typename Map>
auto& must_find(Map& m, const std::string& key, std::string_view what) {
  auto it = m.find(key);
  if (it == m.end()) fail(ErrorCode::InvalidRecord, "event refers to unknown " + std::string(what) + " " + key);
  return it->second;
}

void apply_registration(KernelState& s, const TraceEvent& e) {
  const auto entity = get_field<std::string>(e.payload, "entity");
  const Json& record = require_field(e.payload, "record");
  auto& reg = s.reg;
  if (entity == "capability") {
    auto cap = record.get<CapabilityRecord>();
    reg.state_entered[cap.capability_id] = e.index;
    std::string id = cap.capability_id;
    reg.capabilities.insert_or_assign(std::move(id), std::move(cap));
  } else if (entity == "config") {
    auto cfg = record.get<HarnessConfig>();
    if (get_field_or<bool>(e.payload, "activate", false) || s.harness.active_config.empty()) {
      s.harness.active_config = cfg.config_id;
    }
    std::string id = cfg.config_id;
    reg.configs.insert_or_assign(std::move(id), std::move(cfg));
  } else if (entity == "skill_spec") {
    auto spec = record.get<GeneratedSkillSpec>();
    std::string id = spec.skill_id;
    reg.skill_specs.insert_or_assign(std::move(id), std::move(spec));
  } else if (entity == "context") {
    auto ctx = record.get<ContextTag>();
    std::string id = ctx.context_id;
    reg.contexts.insert_or_assign(std::move(id), std::move(ctx));
  } else {
    fail(ErrorCode::InvalidRecord, "unknown registered entity '" + entity + "'");
  }
}

void apply_evaluation(KernelState& s, const TraceEvent& e) {
  const auto type = get_field<std::string>(e.payload, "type");
  if (type == "evaluation") {
    auto ev = get_field<Evaluation>(e.payload, "evaluation");
    ev.event_id = e.id();
    if (auto it = s.reg.capabilities.find(ev.subject); it != s.reg.capabilities.end()) {
      it->second.evidence.push_back(ev.event_id);
      if (ev.quality) it->second.quality = ev.quality->clamped();
    }
    s.reg.evaluations.insert_or_assign(ev.event_id, std::move(ev));
  } else if (type == "selection") {
    SelectionRecord rec = e.payload.get<SelectionRecord>();
    rec.event_id = e.id();
    if (rec.result.winner) s.harness.active_config = *rec.result.winner;
    s.reg.selections.push_back(std::move(rec));
  } else if (type == "observation") {
    Observation obs = e.payload.get<Observation>();
    obs.event_id = e.id();
    s.reg.observations.push_back(std::move(obs));
  } else {
    fail(ErrorCode::InvalidRecord, "unknown evaluation type '" + type + "'");
  }
}

void apply_graph(KernelState& s, const TraceEvent& e) {
  const auto op = get_field<std::string>(e.payload, "op");
  if (op == "add_node") {
    s.graph.insert_node(get_field<GraphNode>(e.payload, "node"));
  } else if (op == "add_edge") {
    s.graph.insert_edge(get_field<GraphEdge>(e.payload, "edge"));
  } else if (op == "quality") {
    s.graph.set_quality(get_field<std::string>(e.payload, "node_id"), get_field<double>(e.payload, "q"));
  } else {
    fail(ErrorCode::InvalidRecord, "unknown graph op '" + op + "'");
  }
}

}  // namespace

void apply_event(KernelState& s, const TraceEvent& e) {
  auto& reg = s.reg;
  const Json& p = e.payload;
  if (!p.is_object()) fail(ErrorCode::InvalidRecord, "event " + e.id() + " payload is not an object");
  switch (e.kind) {
    case EventKind::artifact_registered: apply_registration(s, e); break;
    case EventKind::lifecycle_transition: {
      auto rec = get_field<LifecycleRecord>(p, "record");
      auto& cap = must_find(reg.capabilities, rec.capability_id, "capability");
      cap.lifecycle = rec.to_state;
      cap.evidence.clear();
      reg.state_entered[rec.capability_id] = e.index;
      s.graph.set_lifecycle(rec.capability_id, rec.to_state);
      reg.lifecycle_history.push_back(std::move(rec));
      break;
    }
    case EventKind::mutation_proposed: {
      auto rec = get_field<MutationRecord>(p, "record");
      std::string id = rec.mutation_id;
      reg.mutations.insert_or_assign(std::move(id), std::move(rec));
      break;
    }
    case EventKind::mutation_staged: {
      auto& m = must_find(reg.mutations, get_field<std::string>(p, "mutation_id"), "mutation");
      m.status = MutationStatus::staged;
      m.evidence.push_back(get_field<std::string>(p, "validation"));
      break;
    }
    case EventKind::mutation_applied: {
      auto& m = must_find(reg.mutations, get_field<std::string>(p, "mutation_id"), "mutation");
      auto cfg = get_field<HarnessConfig>(p, "config");
      m.status = MutationStatus::applied;
      m.result_config = cfg.config_id;
      s.harness.active_config = cfg.config_id;
      std::string id = cfg.config_id;
      reg.configs.insert_or_assign(std::move(id), std::move(cfg));
      break;
    }
    case EventKind::mutation_rejected: {
      auto& m = must_find(reg.mutations, get_field<std::string>(p, "mutation_id"), "mutation");
      m.status = MutationStatus::rejected;
      m.evidence.push_back(e.id());
      break;
    }
    case EventKind::rollback_event: {
      auto& m = must_find(reg.mutations, get_field<std::string>(p, "mutation_id"), "mutation");
      m.status = MutationStatus::rolled_back;
      m.evidence.push_back(e.id());
      const auto retired = get_field<std::string>(p, "retired_config");
      s.harness.active_config = get_field<std::string>(p, "restored_config");
      reg.retired_configs.insert(retired);
      s.graph.set_retired(retired);
      break;
    }
    case EventKind::review_recorded: {
      auto rec = get_field<CapabilityReview>(p, "record");
      reg.review_index[rec.review_id] = e.index;
      std::string id = rec.review_id;
      reg.reviews.insert_or_assign(std::move(id), std::move(rec));
      break;
    }
    case EventKind::graph_updated: apply_graph(s, e); break;
    case EventKind::evaluation_recorded: apply_evaluation(s, e); break;
    case EventKind::cycle_started: break;
    case EventKind::cycle_completed:
      s.harness.cycle_count = get_field<std::uint64_t>(p, "cycle_index") + 1;
      break;
  }
  s.clock = e.tick;
  s.next_event = e.index + 1;
  s.harness.log_head = to_hex(e.this_hash);
  s.harness.graph_version = s.graph.version();
}

KernelState replay(std::span<const TraceEvent> events, KernelState base) {
  if (!events.empty()) {
    if (events.front().index != base.next_event) {
      fail(ErrorCode::ChainBroken, "replay suffix starts at " + std::to_string(events.front().index) +
                                       ", state expects " + std::to_string(base.next_event));
    }
    if (base.next_event > 0 && to_hex(events.front().prev_hash) != base.harness.log_head) {
      fail(ErrorCode::ChainBroken, "replay suffix does not link to the base state");
    }
  }
  // verify_chain expects indices from zero; check links and hashes directly.
  for (std::size_t i = 0; i < events.size(); ++i) {
    const TraceEvent& e = events[i];
    const bool links = i == 0 ? (base.next_event > 0 || e.prev_hash == kZeroDigest)
                              : (e.prev_hash == events[i - 1].this_hash && e.index == events[i - 1].index + 1);
    if (!links || compute_event_hash(e.prev_hash, e.index, e.kind, e.actor, e.tick, e.payload) != e.this_hash) {
      fail(ErrorCode::ChainBroken, "chain broken at event " + std::to_string(e.index));
    }
  }
  for (const TraceEvent& e : events) apply_event(base, e);
  return base;
}

Json state_to_json(const KernelState& s) {
  const auto& r = s.reg;
  Json reg{{"capabilities", r.capabilities},
           {"configs", r.configs},
           {"skill_specs", r.skill_specs},
           {"reviews", r.reviews},
           {"mutations", r.mutations},
           {"evaluations", r.evaluations},
           {"contexts", r.contexts},
           {"lifecycle_history", r.lifecycle_history},
           {"selections", r.selections},
           {"observations", r.observations},
           {"retired_configs", r.retired_configs},
           {"review_index", r.review_index},
           {"state_entered", r.state_entered}};
  return Json{{"registries", std::move(reg)},
              {"graph", s.graph},
              {"harness", s.harness},
              {"clock", s.clock},
              {"next_event", s.next_event}};
}

KernelState state_from_json(const Json& j) {
  KernelState s;
  const Json& r = require_field(j, "registries");
  s.reg.capabilities = get_field<std::map<std::string, CapabilityRecord>>(r, "capabilities");
  s.reg.configs = get_field<std::map<std::string, HarnessConfig>>(r, "configs");
  s.reg.skill_specs = get_field<std::map<std::string, GeneratedSkillSpec>>(r, "skill_specs");
  s.reg.reviews = get_field<std::map<std::string, CapabilityReview>>(r, "reviews");
  s.reg.mutations = get_field<std::map<std::string, MutationRecord>>(r, "mutations");
  s.reg.evaluations = get_field<std::map<std::string, Evaluation>>(r, "evaluations");
  s.reg.contexts = get_field<std::map<std::string, ContextTag>>(r, "contexts");
  s.reg.lifecycle_history = get_field<std::vector<LifecycleRecord>>(r, "lifecycle_history");
  s.reg.selections = get_field<std::vector<SelectionRecord>>(r, "selections");
  s.reg.observations = get_field<std::vector<Observation>>(r, "observations");
  s.reg.retired_configs = get_field<std::set<std::string>>(r, "retired_configs");
  s.reg.review_index = get_field<std::map<std::string, std::uint64_t>>(r, "review_index");
  s.reg.state_entered = get_field<std::map<std::string, std::uint64_t>>(r, "state_entered");
  s.graph = get_field<RuntimeGraph>(j, "graph");
  s.harness = get_field<HarnessState>(j, "harness");
  s.clock = get_field<std::uint64_t>(j, "clock");
  s.next_event = get_field<std::uint64_t>(j, "next_event");
  return s;
}

const HarnessConfig* find_config(const KernelState& s, const std::string& id) {
  auto it = s.reg.configs.find(id);
  return it == s.reg.configs.end() ? nullptr : &it->second;
}

const CapabilityRecord* find_capability(const KernelState& s, const std::string& id) {
  auto it = s.reg.capabilities.find(id);
  return it == s.reg.capabilities.end() ? nullptr : &it->second;
}

const MutationRecord* find_mutation(const KernelState& s, const std::string& id) {
  auto it = s.reg.mutations.find(id);
  return it == s.reg.mutations.end() ? nullptr : &it->second;
}

const MutationRecord* mutation_producing(const KernelState& s, const std::string& config_id) {
  for (const auto& [id, m] : s.reg.mutations) {
    if (m.status == MutationStatus::applied && m.result_config == config_id) return &m;
  }
  return nullptr;
}

const CapabilityReview* fresh_approval(const KernelState& s, const std::string& subject, std::uint64_t since) {
  const CapabilityReview* best = nullptr;
  std::uint64_t best_index = 0;
  for (const auto& [id, rev] : s.reg.reviews) {
    if (rev.subject_id != subject || rev.decision != ReviewDecision::approve) continue;
    const std::uint64_t at = s.reg.review_index.at(id);
    if (at < since) continue;
    if (!best || at > best_index) {
      best = &rev;
      best_index = at;
    }
  }
  return best;
}

}  // namespace govrt

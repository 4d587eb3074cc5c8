#include "govrt/serialize.hpp"

namespace govrt {

void to_json(Json& j, const QualityComponents& v) {
  j = Json{{"p", v.p}, {"r", v.r}, {"s", v.s}, {"u", v.u}, {"rho", v.rho}};
}
void from_json(const Json& j, QualityComponents& v) {
  v.p = get_field<double>(j, "p");
  v.r = get_field<double>(j, "r");
  v.s = get_field<double>(j, "s");
  v.u = get_field<double>(j, "u");
  v.rho = get_field<double>(j, "rho");
}

void to_json(Json& j, const Descriptor& v) { j = Json{{"text", v.text}, {"version", v.version}}; }
void from_json(const Json& j, Descriptor& v) {
  v.text = get_field<std::string>(j, "text");
  v.version = get_field<std::uint64_t>(j, "version");
}

void to_json(Json& j, const HarnessConfig& v) {
  j = Json{{"config_id", v.config_id}, {"p", v.prompt},       {"t", v.tools},      {"e", v.evaluators},
           {"m", v.memory},            {"g", v.governance}, {"o", v.artifacts}, {"k", v.knowledge}};
}
void from_json(const Json& j, HarnessConfig& v) {
  v.config_id = get_field_or<std::string>(j, "config_id", "");
  v.prompt = get_field<Descriptor>(j, "p");
  v.tools = get_field<std::vector<std::string>>(j, "t");
  v.evaluators = get_field<std::vector<std::string>>(j, "e");
  v.memory = get_field<Descriptor>(j, "m");
  v.governance = get_field<std::string>(j, "g");
  v.artifacts = get_field<std::vector<std::string>>(j, "o");
  v.knowledge = get_field<std::uint64_t>(j, "k");
}

void to_json(Json& j, const CapabilityRecord& v) {
  j = Json{{"capability_id", v.capability_id},
           {"kind", v.kind},
           {"content", v.content},
           {"content_hash", v.content_hash},
           {"lifecycle", v.lifecycle},
           {"evidence", v.evidence},
           {"created_by", v.created_by},
           {"quality", v.quality}};
}
void from_json(const Json& j, CapabilityRecord& v) {
  v.capability_id = get_field<std::string>(j, "capability_id");
  v.kind = get_field<CapabilityKind>(j, "kind");
  v.content = get_field<std::string>(j, "content");
  v.content_hash = get_field<std::string>(j, "content_hash");
  v.lifecycle = get_field<LifecycleState>(j, "lifecycle");
  v.evidence = get_field<std::vector<std::string>>(j, "evidence");
  v.created_by = get_field<std::string>(j, "created_by");
  v.quality = get_field<QualityComponents>(j, "quality");
}

void to_json(Json& j, const ParamDescriptor& v) { j = Json{{"name", v.name}, {"type", v.type}}; }
void from_json(const Json& j, ParamDescriptor& v) {
  v.name = get_field<std::string>(j, "name");
  v.type = get_field_or<std::string>(j, "type", "");
}

void to_json(Json& j, const SkillInterface& v) {
  j = Json{{"inputs", v.inputs}, {"outputs", v.outputs}, {"declared_failure_modes", v.declared_failure_modes}};
}
void from_json(const Json& j, SkillInterface& v) {
  v.inputs = get_field_or<std::vector<ParamDescriptor>>(j, "inputs", {});
  v.outputs = get_field_or<std::vector<ParamDescriptor>>(j, "outputs", {});
  v.declared_failure_modes = get_field_or<std::vector<std::string>>(j, "declared_failure_modes", {});
}

void to_json(Json& j, const GeneratedSkillSpec& v) {
  j = Json{{"skill_id", v.skill_id}, {"capability_id", v.capability_id}, {"interface", v.interface}};
}
void from_json(const Json& j, GeneratedSkillSpec& v) {
  v.skill_id = get_field<std::string>(j, "skill_id");
  v.capability_id = get_field<std::string>(j, "capability_id");
  v.interface = get_field<SkillInterface>(j, "interface");
}

void to_json(Json& j, const CapabilityReview& v) {
  j = Json{{"review_id", v.review_id},         {"subject_id", v.subject_id},
           {"reviewer", v.reviewer},           {"evidence_refs", v.evidence_refs},
           {"risk_assessment", v.risk_assessment}, {"decision", v.decision},
           {"rationale", v.rationale}};
}
void from_json(const Json& j, CapabilityReview& v) {
  v.review_id = get_field<std::string>(j, "review_id");
  v.subject_id = get_field<std::string>(j, "subject_id");
  v.reviewer = get_field<std::string>(j, "reviewer");
  v.evidence_refs = get_field<std::vector<std::string>>(j, "evidence_refs");
  v.risk_assessment = get_field<double>(j, "risk_assessment");
  v.decision = get_field<ReviewDecision>(j, "decision");
  v.rationale = get_field_or<std::string>(j, "rationale", "");
}

void to_json(Json& j, const HarnessState& v) {
  j = Json{{"active_config", v.active_config},
           {"graph_version", v.graph_version},
           {"log_head", v.log_head},
           {"cycle_count", v.cycle_count}};
}
void from_json(const Json& j, HarnessState& v) {
  v.active_config = get_field<std::string>(j, "active_config");
  v.graph_version = get_field<std::uint64_t>(j, "graph_version");
  v.log_head = get_field<std::string>(j, "log_head");
  v.cycle_count = get_field<std::uint64_t>(j, "cycle_count");
}

void to_json(Json& j, const Evaluation& v) {
  j = Json{{"event_id", v.event_id}, {"subject", v.subject}, {"evaluator", v.evaluator}, {"metrics", v.metrics}};
  put_optional(j, "quality", v.quality);
}
void from_json(const Json& j, Evaluation& v) {
  v.event_id = get_field_or<std::string>(j, "event_id", "");
  v.subject = get_field<std::string>(j, "subject");
  v.evaluator = get_field<std::string>(j, "evaluator");
  v.metrics = get_field_or<std::map<std::string, double>>(j, "metrics", {});
  v.quality = get_optional<QualityComponents>(j, "quality");
}

void to_json(Json& j, const ContextTag& v) { j = Json{{"context_id", v.context_id}, {"tag", v.tag}}; }
void from_json(const Json& j, ContextTag& v) {
  v.context_id = get_field<std::string>(j, "context_id");
  v.tag = get_field<std::string>(j, "tag");
}

void to_json(Json& j, const EvidenceRequirement& v) {
  j = Json{{"min_evidence_events", v.min_evidence_events},
           {"min_distinct_evaluators", v.min_distinct_evaluators},
           {"max_risk", v.max_risk},
           {"requires_approved_review", v.requires_approved_review}};
}
void from_json(const Json& j, EvidenceRequirement& v) {
  v.min_evidence_events = get_field_or<std::uint32_t>(j, "min_evidence_events", 0);
  v.min_distinct_evaluators = get_field_or<std::uint32_t>(j, "min_distinct_evaluators", 0);
  v.max_risk = get_field_or<double>(j, "max_risk", 1.0);
  v.requires_approved_review = get_field_or<bool>(j, "requires_approved_review", false);
}

void to_json(Json& j, const LifecycleRecord& v) {
  j = Json{{"capability_id", v.capability_id},
           {"from_state", v.from_state},
           {"to_state", v.to_state},
           {"evidence", v.evidence},
           {"timestamp", v.timestamp}};
  put_optional(j, "review", v.review);
}
void from_json(const Json& j, LifecycleRecord& v) {
  v.capability_id = get_field<std::string>(j, "capability_id");
  v.from_state = get_field<LifecycleState>(j, "from_state");
  v.to_state = get_field<LifecycleState>(j, "to_state");
  v.evidence = get_field<std::vector<std::string>>(j, "evidence");
  v.review = get_optional<std::string>(j, "review");
  v.timestamp = get_field<std::uint64_t>(j, "timestamp");
}

void to_json(Json& j, const ObjectiveWeights& v) {
  j = Json{{"alpha", v.alpha}, {"beta", v.beta}, {"gamma", v.gamma}, {"delta", v.delta}, {"lambda", v.lambda}};
}
void from_json(const Json& j, ObjectiveWeights& v) {
  v.alpha = get_field<double>(j, "alpha");
  v.beta = get_field<double>(j, "beta");
  v.gamma = get_field<double>(j, "gamma");
  v.delta = get_field<double>(j, "delta");
  v.lambda = get_field<double>(j, "lambda");
}

void to_json(Json& j, const CandidateMeasurement& v) {
  j = Json{{"config_id", v.config_id}, {"q", v.q}, {"r", v.r}, {"v", v.v}, {"u", v.u}, {"c", v.c},
           {"constraint_flags", v.constraint_flags}};
}
void from_json(const Json& j, CandidateMeasurement& v) {
  v.config_id = get_field<std::string>(j, "config_id");
  v.q = get_field<double>(j, "q");
  v.r = get_field<double>(j, "r");
  v.v = get_field<double>(j, "v");
  v.u = get_field<double>(j, "u");
  v.c = get_field<double>(j, "c");
  v.constraint_flags = get_field_or<std::set<ConstraintFlag>>(j, "constraint_flags", {});
}

void to_json(Json& j, const SelectionResult& v) {
  j = Json{{"scores", v.scores}, {"excluded", v.excluded}, {"tie_broken", v.tie_broken}};
  put_optional(j, "winner", v.winner);
}
void from_json(const Json& j, SelectionResult& v) {
  v.winner = get_optional<std::string>(j, "winner");
  v.scores = get_field<std::map<std::string, double>>(j, "scores");
  v.excluded = get_field<std::map<std::string, std::set<ConstraintFlag>>>(j, "excluded");
  v.tie_broken = get_field<bool>(j, "tie_broken");
}

void to_json(Json& j, const Temporal& v) {
  j = Json{{"created_tick", v.created_tick}, {"graph_version", v.graph_version}, {"retired", v.retired}};
  put_optional(j, "lifecycle", v.lifecycle);
}
void from_json(const Json& j, Temporal& v) {
  v.created_tick = get_field<std::uint64_t>(j, "created_tick");
  v.graph_version = get_field<std::uint64_t>(j, "graph_version");
  v.retired = get_field_or<bool>(j, "retired", false);
  v.lifecycle = get_optional<LifecycleState>(j, "lifecycle");
}

void to_json(Json& j, const GraphNode& v) {
  j = Json{{"node_id", v.node_id}, {"kind", v.kind}, {"c", v.content_hash}, {"tau", v.tau}, {"ell", v.lineage}};
  put_optional(j, "q", v.q);
  put_optional(j, "tag", v.tag);
}
void from_json(const Json& j, GraphNode& v) {
  v.node_id = get_field<std::string>(j, "node_id");
  v.kind = get_field<NodeKind>(j, "kind");
  v.content_hash = get_field<std::string>(j, "c");
  v.tau = get_field<Temporal>(j, "tau");
  v.lineage = get_field<std::vector<std::string>>(j, "ell");
  v.q = get_optional<double>(j, "q");
  v.tag = get_optional<std::string>(j, "tag");
}

void to_json(Json& j, const GraphEdge& v) {
  j = Json{{"src", v.src}, {"relation", v.relation}, {"dst", v.dst}, {"recorded_by", v.recorded_by}};
}
void from_json(const Json& j, GraphEdge& v) {
  v.src = get_field<std::string>(j, "src");
  v.relation = get_field<Relation>(j, "relation");
  v.dst = get_field<std::string>(j, "dst");
  v.recorded_by = get_field_or<std::string>(j, "recorded_by", "");
}

void to_json(Json& j, const QualityWeights& v) {
  j = Json{{"omega_p", v.omega_p},
           {"omega_r", v.omega_r},
           {"omega_s", v.omega_s},
           {"omega_u", v.omega_u},
           {"omega_rho", v.omega_rho}};
}
void from_json(const Json& j, QualityWeights& v) {
  v.omega_p = get_field<double>(j, "omega_p");
  v.omega_r = get_field<double>(j, "omega_r");
  v.omega_s = get_field<double>(j, "omega_s");
  v.omega_u = get_field<double>(j, "omega_u");
  v.omega_rho = get_field<double>(j, "omega_rho");
}

void to_json(Json& j, const LineageEntry& v) {
  j = Json{{"node_id", v.node_id}, {"depth", v.depth}};
  put_optional(j, "parent", v.parent);
  put_optional(j, "via", v.via);
}
void from_json(const Json& j, LineageEntry& v) {
  v.node_id = get_field<std::string>(j, "node_id");
  v.depth = get_field<std::size_t>(j, "depth");
  v.parent = get_optional<std::string>(j, "parent");
  v.via = get_optional<Relation>(j, "via");
}

void to_json(Json& j, const LineageReport& v) {
  j = Json{{"ancestry", v.ancestry}, {"annotations", v.annotations}};
}
void from_json(const Json& j, LineageReport& v) {
  v.ancestry = get_field<std::vector<LineageEntry>>(j, "ancestry");
  v.annotations = get_field<std::vector<GraphEdge>>(j, "annotations");
}

void to_json(Json& j, const CompositionProposal& v) {
  j = Json{{"skills", v.skills}, {"total_quality", v.total_quality}, {"exhaustive", v.exhaustive}};
}
void from_json(const Json& j, CompositionProposal& v) {
  v.skills = get_field<std::vector<std::string>>(j, "skills");
  v.total_quality = get_field<double>(j, "total_quality");
  v.exhaustive = get_field<bool>(j, "exhaustive");
}

void to_json(Json& j, const RuntimeGraph& g) {
  Json nodes = Json::array();
  for (const auto& [id, n] : g.nodes()) nodes.push_back(n);
  j = Json{{"version", g.version()}, {"nodes", std::move(nodes)}, {"edges", g.edges()}};
}
void from_json(const Json& j, RuntimeGraph& g) {
  std::map<std::string, GraphNode> nodes;
  for (const auto& n : require_field(j, "nodes")) {
    auto node = n.get<GraphNode>();
    std::string id = node.node_id;
    nodes.emplace(std::move(id), std::move(node));
  }
  g = RuntimeGraph::from_parts(get_field<std::uint64_t>(j, "version"), std::move(nodes),
                               get_field<std::vector<GraphEdge>>(j, "edges"));
}

void to_json(Json& j, const ExpectedImprovement& v) { j = Json{{"metric", v.metric}, {"min_delta", v.min_delta}}; }
void from_json(const Json& j, ExpectedImprovement& v) {
  v.metric = get_field_or<std::string>(j, "metric", "");
  v.min_delta = get_field_or<double>(j, "min_delta", 0.0);
}

void to_json(Json& j, const RollbackCondition& v) {
  j = Json{{"metric", v.metric}, {"threshold", v.threshold}, {"direction", v.direction}};
}
void from_json(const Json& j, RollbackCondition& v) {
  v.metric = get_field<std::string>(j, "metric");
  v.threshold = get_field<double>(j, "threshold");
  v.direction = get_field<RollbackDirection>(j, "direction");
}

// Absent contract fields decode as empty so the completeness gate can name them.
void to_json(Json& j, const ChangeContract& v) {
  j = Json{{"targeted_failure_mode", v.targeted_failure_mode},
           {"invariants_preserved", v.invariants_preserved},
           {"falsifying_evaluation", v.falsifying_evaluation},
           {"rollback_conditions", v.rollback_conditions}};
  put_optional(j, "component", v.component);
  put_optional(j, "expected_improvement", v.expected_improvement);
}
void from_json(const Json& j, ChangeContract& v) {
  v.component = get_optional<ContractComponent>(j, "component");
  v.targeted_failure_mode = get_field_or<std::string>(j, "targeted_failure_mode", "");
  v.expected_improvement = get_optional<ExpectedImprovement>(j, "expected_improvement");
  v.invariants_preserved = get_field_or<std::vector<std::string>>(j, "invariants_preserved", {});
  v.falsifying_evaluation = get_field_or<std::string>(j, "falsifying_evaluation", "");
  v.rollback_conditions = get_field_or<std::vector<RollbackCondition>>(j, "rollback_conditions", {});
}

void to_json(Json& j, const ComponentDelta& v) {
  j = Json{{"component", v.component}};
  std::visit([&](const auto& value) { j["value"] = value; }, v.value);
}
void from_json(const Json& j, ComponentDelta& v) {
  v.component = get_field<TupleComponent>(j, "component");
  switch (v.component) {
    case TupleComponent::prompt:
    case TupleComponent::memory: v.value = get_field<Descriptor>(j, "value"); break;
    case TupleComponent::tools:
    case TupleComponent::evaluators:
    case TupleComponent::artifacts: v.value = get_field<std::vector<std::string>>(j, "value"); break;
    case TupleComponent::governance: v.value = get_field<std::string>(j, "value"); break;
    case TupleComponent::knowledge: v.value = get_field<std::uint64_t>(j, "value"); break;
  }
}

void to_json(Json& j, const MutationRecord& v) {
  j = Json{{"mutation_id", v.mutation_id}, {"base_config", v.base_config}, {"contract", v.contract},
           {"delta", v.delta},             {"status", v.status},           {"evidence", v.evidence}};
  put_optional(j, "result_config", v.result_config);
}
void from_json(const Json& j, MutationRecord& v) {
  v.mutation_id = get_field<std::string>(j, "mutation_id");
  v.base_config = get_field<std::string>(j, "base_config");
  v.contract = get_field<ChangeContract>(j, "contract");
  v.delta = get_field<ComponentDelta>(j, "delta");
  v.status = get_field<MutationStatus>(j, "status");
  v.evidence = get_field<std::vector<std::string>>(j, "evidence");
  v.result_config = get_optional<std::string>(j, "result_config");
}

Json evidence_table_to_json(const EvidenceTable& table) {
  Json j = Json::object();
  for (const auto& [edge, req] : table) j[edge_key(edge)] = req;
  return j;
}

EvidenceTable evidence_table_from_json(const Json& j) {
  EvidenceTable table = default_evidence_table();
  if (!j.is_object()) fail(ErrorCode::InvalidPolicy, "evidence table must be a table");
  for (const auto& [key, value] : j.items()) {
    auto edge = parse_edge_key(key);
    if (!edge || !is_legal_transition(edge->first, edge->second) || edge->second == LifecycleState::deprecated) {
      fail(ErrorCode::InvalidPolicy, "evidence entry '" + key + "' is not a promotion edge");
    }
    table[*edge] = value.get<EvidenceRequirement>();
  }
  return table;
}

}  // namespace govrt

namespace govrt {

std::string config_id_for(const HarnessConfig& components, const std::string& event_id) {
  Json body = components;
  body.erase("config_id");
  return derive_id(Json::array({"config", std::move(body), event_id}));
}

}  // namespace govrt

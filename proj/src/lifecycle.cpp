#include "govrt/lifecycle.hpp"

namespace govrt {

EvidenceTable default_evidence_table() {
  using S = LifecycleState;
  EvidenceTable table;
  table[{S::experimental, S::validated}] = EvidenceRequirement{1, 0, 1.0, false};
  table[{S::validated, S::trusted}] = EvidenceRequirement{3, 2, 0.5, true};
  table[{S::trusted, S::canonical}] = EvidenceRequirement{5, 0, 0.25, true};
  return table;
}

std::optional<LifecycleState> next_promotion(LifecycleState state) {
  switch (state) {
    case LifecycleState::experimental: return LifecycleState::validated;
    case LifecycleState::validated: return LifecycleState::trusted;
    case LifecycleState::trusted: return LifecycleState::canonical;
    case LifecycleState::canonical:
    case LifecycleState::deprecated: return std::nullopt;
  }
  return std::nullopt;
}

std::vector<LifecycleState> legal_transitions(LifecycleState state) {
  std::vector<LifecycleState> out;
  if (state == LifecycleState::deprecated) return out;
  if (auto next = next_promotion(state)) out.push_back(*next);
  out.push_back(LifecycleState::deprecated);
  return out;
}

bool is_legal_transition(LifecycleState from, LifecycleState to) {
  if (from == LifecycleState::deprecated) return false;
  return to == LifecycleState::deprecated || next_promotion(from) == to;
}

EvidenceRequirement required_evidence(LifecycleState from, LifecycleState to, const EvidenceTable& table) {
  if (!is_legal_transition(from, to)) {
    fail(ErrorCode::IllegalTransition,
         std::string(to_string(from)) + " -> " + std::string(to_string(to)) + " is not a legal edge");
  }
  if (to == LifecycleState::deprecated) return EvidenceRequirement{0, 0, 1.0, false};
  if (auto it = table.find({from, to}); it != table.end()) return it->second;
  return default_evidence_table().at({from, to});
}

std::optional<ErrorCode> check_requirement(const EvidenceRequirement& req, const EvidenceSummary& summary) {
  if (summary.events < req.min_evidence_events || summary.distinct_evaluators < req.min_distinct_evaluators ||
      summary.risk > req.max_risk) {
    return ErrorCode::InsufficientEvidence;
  }
  if (req.requires_approved_review && !summary.approved_review) return ErrorCode::MissingApproval;
  return std::nullopt;
}

std::string edge_key(const LifecycleEdge& edge) {
  return std::string(to_string(edge.first)) + "_to_" + std::string(to_string(edge.second));
}

std::optional<LifecycleEdge> parse_edge_key(std::string_view key) {
  const auto sep = key.find("_to_");
  if (sep == std::string_view::npos) return std::nullopt;
  auto from = parse_enum<LifecycleState>(key.substr(0, sep));
  auto to = parse_enum<LifecycleState>(key.substr(sep + 4));
  if (!from || !to) return std::nullopt;
  return LifecycleEdge{*from, *to};
}

}  // namespace govrt

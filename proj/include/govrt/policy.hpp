#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "govrt/canonical.hpp"
#include "govrt/graph.hpp"
#include "govrt/lifecycle.hpp"
#include "govrt/selection.hpp"

namespace govrt {

struct GovernancePolicy {
  ObjectiveWeights weights;
  QualityWeights quality_weights;
  EvidenceTable evidence_table = default_evidence_table();
  double risk_gate = 0.5;
  double cost_budget = 1.0;
  double auto_approve_below_risk = 0.3;
  std::uint32_t reviewer_quorum = 2;

  /// Throws InvalidPolicy (weights report InvalidWeights).
  void validate() const;
  bool operator==(const GovernancePolicy&) const = default;
};

void to_json(Json& j, const GovernancePolicy& p);
/// Missing keys keep their defaults; the result is validated.
void from_json(const Json& j, GovernancePolicy& p);

/// Hex digest of the canonical policy form, recorded in cycle_started.
std::string policy_digest(const GovernancePolicy& p);

/// TOML text; what `store/policy` holds.
std::string policy_to_toml(const GovernancePolicy& p);
GovernancePolicy parse_policy(std::string_view text, std::string_view origin = "<policy>");
GovernancePolicy load_policy(const std::filesystem::path& path);

}  // namespace govrt

#pragma once

// JSON mappings for every domain record. Canonical bytes come from
// canonical_serialize() over these trees; optional fields are omitted when
// empty so that equal records always produce equal bytes.

#include "govrt/canonical.hpp"
#include "govrt/graph.hpp"
#include "govrt/lifecycle.hpp"
#include "govrt/mutation.hpp"
#include "govrt/registry.hpp"
#include "govrt/selection.hpp"

namespace govrt {

#define GOVRT_JSON_PAIR(Type)           \
  void to_json(Json& j, const Type& v); \
  void from_json(const Json& j, Type& v);

GOVRT_JSON_PAIR(QualityComponents)
GOVRT_JSON_PAIR(Descriptor)
GOVRT_JSON_PAIR(HarnessConfig)
GOVRT_JSON_PAIR(CapabilityRecord)
GOVRT_JSON_PAIR(ParamDescriptor)
GOVRT_JSON_PAIR(SkillInterface)
GOVRT_JSON_PAIR(GeneratedSkillSpec)
GOVRT_JSON_PAIR(CapabilityReview)
GOVRT_JSON_PAIR(HarnessState)
GOVRT_JSON_PAIR(Evaluation)
GOVRT_JSON_PAIR(ContextTag)
GOVRT_JSON_PAIR(EvidenceRequirement)
GOVRT_JSON_PAIR(LifecycleRecord)
GOVRT_JSON_PAIR(ObjectiveWeights)
GOVRT_JSON_PAIR(CandidateMeasurement)
GOVRT_JSON_PAIR(SelectionResult)
GOVRT_JSON_PAIR(Temporal)
GOVRT_JSON_PAIR(GraphNode)
GOVRT_JSON_PAIR(GraphEdge)
GOVRT_JSON_PAIR(QualityWeights)
GOVRT_JSON_PAIR(LineageEntry)
GOVRT_JSON_PAIR(LineageReport)
GOVRT_JSON_PAIR(CompositionProposal)
GOVRT_JSON_PAIR(RuntimeGraph)
GOVRT_JSON_PAIR(ExpectedImprovement)
GOVRT_JSON_PAIR(RollbackCondition)
GOVRT_JSON_PAIR(ChangeContract)
GOVRT_JSON_PAIR(ComponentDelta)
GOVRT_JSON_PAIR(MutationRecord)

#undef GOVRT_JSON_PAIR

Json evidence_table_to_json(const EvidenceTable& table);
/// Entries missing from `j` keep their defaults; unknown or illegal edge keys throw InvalidPolicy.
EvidenceTable evidence_table_from_json(const Json& j);

template <typename T>
void put_optional(Json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

template <typename T>
std::optional<T> get_optional(const Json& j, std::string_view key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::InvalidRecord, "field '" + std::string(key) + "': " + e.what());
  }
}

}  // namespace govrt

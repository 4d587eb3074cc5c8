#include "govrt/registry.hpp"

#include <algorithm>
#include <set>

namespace govrt {
namespace {

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }
bool in01(double v) { return v >= 0.0 && v <= 1.0; }

void check_unique_names(const std::vector<ParamDescriptor>& params, std::string_view side) {
  std::set<std::string> seen;
  for (const auto& p : params) {
    if (p.name.empty()) fail(ErrorCode::InvalidRecord, std::string(side) + " parameter with empty name");
    if (!seen.insert(p.name).second) {
      fail(ErrorCode::InvalidRecord, "duplicate " + std::string(side) + " name '" + p.name + "'");
    }
  }
}

}  // namespace

QualityComponents QualityComponents::clamped() const {
  return {clamp01(p), clamp01(r), clamp01(s), clamp01(u), clamp01(rho)};
}

bool QualityComponents::in_range() const {
  return in01(p) && in01(r) && in01(s) && in01(u) && in01(rho);
}

std::string capability_id_for(CapabilityKind kind, const std::string& content_hash, const std::string& event_id) {
  return derive_id(Json::array({"capability", to_string(kind), content_hash, event_id}));
}

std::string context_id_for(const std::string& tag) { return derive_id(Json::array({"context", tag})); }

void validate_skill_interface(const SkillInterface& iface) {
  check_unique_names(iface.inputs, "input");
  check_unique_names(iface.outputs, "output");
}

}  // namespace govrt

#include "govrt/policy.hpp"

#include <cmath>
#include <sstream>

#include "govrt/serialize.hpp"

namespace govrt {
namespace {

bool in01(double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; }

void override_double(const Json& table, const char* key, double& slot) {
  auto it = table.find(key);
  if (it == table.end()) return;
  if (!it->is_number()) fail(ErrorCode::InvalidPolicy, std::string("'") + key + "' must be a number");
  slot = it->get<double>();
}

const Json* subtable(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) return nullptr;
  if (!it->is_object()) fail(ErrorCode::InvalidPolicy, std::string("[") + key + "] must be a table");
  return &*it;
}

std::string number_text(double v) { return Json(v).dump(); }

}  // namespace

void GovernancePolicy::validate() const {
  weights.validate();
  quality_weights.validate();
  if (!in01(risk_gate)) fail(ErrorCode::InvalidPolicy, "risk_gate must lie in [0,1]");
  if (!in01(auto_approve_below_risk)) fail(ErrorCode::InvalidPolicy, "auto_approve_below_risk must lie in [0,1]");
  if (auto_approve_below_risk > risk_gate) {
    fail(ErrorCode::InvalidPolicy, "auto_approve_below_risk must not exceed risk_gate");
  }
  if (!std::isfinite(cost_budget) || cost_budget < 0.0) fail(ErrorCode::InvalidPolicy, "cost_budget must be >= 0");
  if (reviewer_quorum == 0) fail(ErrorCode::InvalidPolicy, "reviewer_quorum must be positive");
  for (const auto& [edge, req] : evidence_table) {
    if (!in01(req.max_risk)) fail(ErrorCode::InvalidPolicy, "max_risk for " + edge_key(edge) + " must lie in [0,1]");
  }
}

void to_json(Json& j, const GovernancePolicy& p) {
  j = Json{{"weights", p.weights},
           {"quality_weights", p.quality_weights},
           {"evidence", evidence_table_to_json(p.evidence_table)},
           {"risk_gate", p.risk_gate},
           {"cost_budget", p.cost_budget},
           {"auto_approve_below_risk", p.auto_approve_below_risk},
           {"reviewer_quorum", p.reviewer_quorum}};
}

void from_json(const Json& j, GovernancePolicy& p) {
  if (!j.is_object()) fail(ErrorCode::InvalidPolicy, "policy must be a table");
  static const std::set<std::string> known{"weights",     "quality_weights", "evidence",       "risk_gate",
                                           "cost_budget", "auto_approve_below_risk", "reviewer_quorum"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) fail(ErrorCode::InvalidPolicy, "unknown policy key '" + key + "'");
  }
  p = GovernancePolicy{};
  if (const Json* w = subtable(j, "weights")) {
    override_double(*w, "alpha", p.weights.alpha);
    override_double(*w, "beta", p.weights.beta);
    override_double(*w, "gamma", p.weights.gamma);
    override_double(*w, "delta", p.weights.delta);
    override_double(*w, "lambda", p.weights.lambda);
  }
  if (const Json* w = subtable(j, "quality_weights")) {
    override_double(*w, "omega_p", p.quality_weights.omega_p);
    override_double(*w, "omega_r", p.quality_weights.omega_r);
    override_double(*w, "omega_s", p.quality_weights.omega_s);
    override_double(*w, "omega_u", p.quality_weights.omega_u);
    override_double(*w, "omega_rho", p.quality_weights.omega_rho);
  }
  if (const Json* e = subtable(j, "evidence")) {
    try {
      p.evidence_table = evidence_table_from_json(*e);
    } catch (const KernelError& err) {
      if (err.code() == ErrorCode::InvalidPolicy) throw;
      fail(ErrorCode::InvalidPolicy, err.detail());
    }
  }
  override_double(j, "risk_gate", p.risk_gate);
  override_double(j, "cost_budget", p.cost_budget);
  override_double(j, "auto_approve_below_risk", p.auto_approve_below_risk);
  if (auto it = j.find("reviewer_quorum"); it != j.end()) {
    if (!it->is_number_integer() || it->get<std::int64_t>() <= 0) {
      fail(ErrorCode::InvalidPolicy, "reviewer_quorum must be a positive integer");
    }
    p.reviewer_quorum = it->get<std::uint32_t>();
  }
  p.validate();
}

std::string policy_digest(const GovernancePolicy& p) { return to_hex(sha256(canonical_serialize(Json(p)))); }

std::string policy_to_toml(const GovernancePolicy& p) {
  std::ostringstream out;
  out << "risk_gate = " << number_text(p.risk_gate) << "\n"
      << "auto_approve_below_risk = " << number_text(p.auto_approve_below_risk) << "\n"
      << "cost_budget = " << number_text(p.cost_budget) << "\n"
      << "reviewer_quorum = " << p.reviewer_quorum << "\n\n"
      << "[weights]\n"
      << "alpha = " << number_text(p.weights.alpha) << "\n"
      << "beta = " << number_text(p.weights.beta) << "\n"
      << "gamma = " << number_text(p.weights.gamma) << "\n"
      << "delta = " << number_text(p.weights.delta) << "\n"
      << "lambda = " << number_text(p.weights.lambda) << "\n\n"
      << "[quality_weights]\n"
      << "omega_p = " << number_text(p.quality_weights.omega_p) << "\n"
      << "omega_r = " << number_text(p.quality_weights.omega_r) << "\n"
      << "omega_s = " << number_text(p.quality_weights.omega_s) << "\n"
      << "omega_u = " << number_text(p.quality_weights.omega_u) << "\n"
      << "omega_rho = " << number_text(p.quality_weights.omega_rho) << "\n";
  for (const auto& [edge, req] : p.evidence_table) {
    out << "\n[evidence." << edge_key(edge) << "]\n"
        << "min_evidence_events = " << req.min_evidence_events << "\n"
        << "min_distinct_evaluators = " << req.min_distinct_evaluators << "\n"
        << "max_risk = " << number_text(req.max_risk) << "\n"
        << "requires_approved_review = " << (req.requires_approved_review ? "true" : "false") << "\n";
  }
  return out.str();
}

GovernancePolicy parse_policy(std::string_view text, std::string_view origin) {
  Json j;
  try {
    j = parse_structured_text(text, origin);
  } catch (const KernelError& e) {
    fail(ErrorCode::InvalidPolicy, e.detail());
  }
  return j.get<GovernancePolicy>();
}

GovernancePolicy load_policy(const std::filesystem::path& path) {
  Json j;
  try {
    j = load_structured_file(path);
  } catch (const KernelError& e) {
    fail(ErrorCode::InvalidPolicy, e.detail());
  }
  return j.get<GovernancePolicy>();
}

}  // namespace govrt

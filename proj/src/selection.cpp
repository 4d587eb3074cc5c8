#include "govrt/selection.hpp"

#include <algorithm>
#include <cmath>

namespace govrt {
namespace {

bool in01(double v) { return v >= 0.0 && v <= 1.0; }

void validate_set(std::span<const CandidateMeasurement> candidates, const ObjectiveWeights& w) {
  w.validate();
  if (candidates.empty()) fail(ErrorCode::EmptyCandidateSet, "no candidates to select from");
  std::set<std::string> ids;
  for (const auto& m : candidates) {
    m.validate();
    if (!ids.insert(m.config_id).second) fail(ErrorCode::DuplicateCandidate, m.config_id);
  }
}

}  // namespace

void ObjectiveWeights::validate() const {
  const double ws[] = {alpha, beta, gamma, delta, lambda};
  bool any_positive = false;
  for (double x : ws) {
    if (!std::isfinite(x) || x < 0.0) fail(ErrorCode::InvalidWeights, "objective weights must be finite and >= 0");
    any_positive = any_positive || x > 0.0;
  }
  if (!any_positive) fail(ErrorCode::InvalidWeights, "at least one objective weight must be > 0");
}

ObjectiveWeights ObjectiveWeights::scaled(double kappa) const {
  return {alpha * kappa, beta * kappa, gamma * kappa, delta * kappa, lambda * kappa};
}

void CandidateMeasurement::validate() const {
  if (config_id.empty()) fail(ErrorCode::InvalidMeasurement, "candidate without config_id");
  if (!in01(q) || !in01(r) || !in01(v) || !in01(u)) {
    fail(ErrorCode::InvalidMeasurement, config_id + ": q, r, v, u must lie in [0,1]");
  }
  if (!(c >= 0.0) || !std::isfinite(c)) fail(ErrorCode::InvalidMeasurement, config_id + ": cost must be >= 0");
}

double score(const CandidateMeasurement& m, const ObjectiveWeights& w) {
  return w.alpha * m.q + w.beta * m.r + w.gamma * m.v + w.delta * m.u - w.lambda * m.c;
}

SelectionResult select(std::span<const CandidateMeasurement> candidates, const ObjectiveWeights& w) {
  validate_set(candidates, w);
  SelectionResult result;
  const std::string* best_id = nullptr;
  double best = 0.0;
  std::size_t at_best = 0;
  for (const auto& m : candidates) {
    if (!m.constraint_flags.empty()) {
      result.excluded[m.config_id] = m.constraint_flags;
      continue;
    }
    const double f = score(m, w);
    result.scores[m.config_id] = f;
    if (!best_id || f > best) {
      best_id = &m.config_id;
      best = f;
      at_best = 1;
    } else if (f == best) {
      ++at_best;
      if (m.config_id < *best_id) best_id = &m.config_id;
    }
  }
  if (best_id) result.winner = *best_id;
  result.tie_broken = at_best > 1;
  return result;
}

std::vector<std::pair<std::string, double>> rank(std::span<const CandidateMeasurement> candidates,
                                                 const ObjectiveWeights& w) {
  validate_set(candidates, w);
  std::vector<std::pair<std::string, double>> out;
  for (const auto& m : candidates) {
    if (m.constraint_flags.empty()) out.emplace_back(m.config_id, score(m, w));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return out;
}

}  // namespace govrt

#pragma once

// Governance-aware harness selection: F(h) = aQ + bR + gV + dU - lC over the
// candidates that survive the hard constraint filter.

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "govrt/enum_names.hpp"

namespace govrt {

struct ObjectiveWeights {
  double alpha = 1.0;   // task quality
  double beta = 1.0;    // robustness
  double gamma = 1.0;   // validation consistency
  double delta = 1.0;   // reuse value
  double lambda = 1.0;  // operational cost

  /// Throws InvalidWeights unless all weights are finite, >= 0 and one is > 0.
  void validate() const;
  ObjectiveWeights scaled(double kappa) const;
  bool operator==(const ObjectiveWeights&) const = default;
};

enum class ConstraintFlag { cost_exceeded, safety_violation, irreproducible, governance_violation, robustness_floor };

template <>
struct EnumNames<ConstraintFlag> {
  static constexpr std::array<std::pair<ConstraintFlag, std::string_view>, 5> table{{
      {ConstraintFlag::cost_exceeded, "cost_exceeded"},
      {ConstraintFlag::safety_violation, "safety_violation"},
      {ConstraintFlag::irreproducible, "irreproducible"},
      {ConstraintFlag::governance_violation, "governance_violation"},
      {ConstraintFlag::robustness_floor, "robustness_floor"},
  }};
};

struct CandidateMeasurement {
  std::string config_id;
  double q = 0.0;  // task quality
  double r = 0.0;  // robustness
  double v = 0.0;  // validation consistency
  double u = 0.0;  // reuse value
  double c = 0.0;  // operational cost, normalized units
  std::set<ConstraintFlag> constraint_flags;

  /// Throws InvalidMeasurement when q, r, v, u leave [0,1] or c < 0.
  void validate() const;
  bool operator==(const CandidateMeasurement&) const = default;
};

struct SelectionResult {
  std::optional<std::string> winner;
  std::map<std::string, double> scores;  // survivors only
  std::map<std::string, std::set<ConstraintFlag>> excluded;
  bool tie_broken = false;

  bool operator==(const SelectionResult&) const = default;
};

double score(const CandidateMeasurement& m, const ObjectiveWeights& w);

/// Argmax over unflagged candidates; ties go to the smallest config_id.
/// Throws EmptyCandidateSet, DuplicateCandidate, InvalidWeights, InvalidMeasurement.
SelectionResult select(std::span<const CandidateMeasurement> candidates, const ObjectiveWeights& w);

/// Survivors by descending score, ties by ascending config_id.
std::vector<std::pair<std::string, double>> rank(std::span<const CandidateMeasurement> candidates,
                                                 const ObjectiveWeights& w);

}  // namespace govrt

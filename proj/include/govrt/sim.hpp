#pragma once

// Deterministic synthetic workload. Simulated actors (generator, evaluator,
// governor, mutator, environment) draw from per-actor substreams of one
// seed and submit one workload per governance cycle. Nothing is executed;
// outcomes come from the quality model.

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "govrt/cycle.hpp"

namespace govrt {

/// mt19937_64 seeded from SHA-256(seed, actor name); uniform() uses the top
/// 53 bits so draws are identical on every platform.
class Substream {
 public:
  Substream(std::uint64_t seed, std::string_view actor);
  std::uint64_t next() { return engine_(); }
  double uniform();                            // [0, 1)
  double around(double mean, double spread);   // mean + spread * U(-1, 1)
  bool chance(double p) { return uniform() < p; }
  std::size_t below(std::size_t n);            // [0, n), n > 0

 private:
  std::mt19937_64 engine_;
};

struct QualityModel {
  double mean = 0.7;
  double spread = 0.15;
  bool operator==(const QualityModel&) const = default;
};

struct RegressionInjection {
  std::uint64_t cycle = 0;
  std::string component = "error_rate";  // observed metric the regression degrades
  double magnitude = 0.0;
  bool operator==(const RegressionInjection&) const = default;
};

struct SimulationConfig {
  std::uint64_t seed = 1;
  std::uint64_t cycles = 10;
  std::map<CapabilityKind, double> generators{{CapabilityKind::skill, 1.0}};  // expected artifacts per cycle
  std::map<CapabilityKind, QualityModel> quality_model;  // p, r, s, u; kinds not listed use the default model
  QualityModel risk_model{0.15, 0.1};                    // rho of evaluated artifacts
  QualityModel candidate_model{0.6, 0.2};                // q, r, v, u of config measurements
  QualityModel cost_model{0.5, 0.3};
  std::map<std::string, double> drift;                   // component (p, r, s, u, rho) -> per-cycle additive change
  std::vector<RegressionInjection> regression_injection;
  std::uint64_t evaluations_per_cycle = 4;
  double mutation_rate = 0.5;
  QualityModel improvement_model{0.05, 0.05};            // validated quality_delta of proposed mutations
  QualityModel mutation_risk{0.25, 0.2};
  double base_error_rate = 0.05;
  double error_threshold = 0.2;                          // rollback condition of simulated mutations
  double deprecate_below = 0.2;                          // governor deprecates when robustness drops below
  double failure_below = 0.4;                            // evaluator files fails_under below this robustness
  GovernancePolicy policy;

  /// Throws InvalidConfig.
  void validate() const;
  bool operator==(const SimulationConfig&) const = default;
};

void to_json(Json& j, const QualityModel& m);
void from_json(const Json& j, QualityModel& m);
void to_json(Json& j, const RegressionInjection& r);
void from_json(const Json& j, RegressionInjection& r);
void to_json(Json& j, const SimulationConfig& c);
void from_json(const Json& j, SimulationConfig& c);
SimulationConfig load_simulation_config(const std::filesystem::path& path);

struct CycleMetrics {
  std::uint64_t cycle = 0;
  std::uint64_t registrations = 0;
  std::map<std::string, std::uint64_t> promotions;  // by edge key
  std::uint64_t deprecations = 0;
  std::uint64_t proposed = 0;
  std::uint64_t staged = 0;
  std::uint64_t applied = 0;
  std::uint64_t rejected = 0;
  std::uint64_t rollbacks = 0;
  std::uint64_t reviews = 0;
  std::string winner;  // empty when no selection or nobody survived

  bool operator==(const CycleMetrics&) const = default;
};

struct RegressionOutcome {
  RegressionInjection injection;
  std::string config_id;                  // config active when it was injected
  std::optional<std::uint64_t> detected;  // cycle of the rollback that retired it
  std::optional<std::uint64_t> lag;

  bool operator==(const RegressionOutcome&) const = default;
};

struct SimulationMetrics {
  std::uint64_t seed = 0;
  std::uint64_t cycles = 0;
  std::vector<CycleMetrics> per_cycle;
  std::map<std::string, std::uint64_t> census;  // final lifecycle census
  std::vector<RegressionOutcome> regression_detection_lag;
  std::uint64_t events = 0;
  std::string log_head;

  bool operator==(const SimulationMetrics&) const = default;
};

void to_json(Json& j, const CycleMetrics& m);
void to_json(Json& j, const RegressionOutcome& r);
void to_json(Json& j, const SimulationMetrics& m);
/// One row per cycle, for plotting.
std::string metrics_csv(const SimulationMetrics& m);

/// Counts every metric from the audit log itself.
SimulationMetrics metrics_from_log(std::span<const TraceEvent> events, const KernelState& final_state,
                                   std::uint64_t seed, const std::vector<RegressionOutcome>& regressions);

/// Runs `config.cycles` cycles against `kernel` (which should be fresh).
SimulationMetrics run_scenario(const SimulationConfig& config, Kernel& kernel);
SimulationMetrics run_scenario(const SimulationConfig& config);

enum class NormalizerVariant { no_drift, heavy_drift, drift_with_mutation };

template <>
struct EnumNames<NormalizerVariant> {
  static constexpr std::array<std::pair<NormalizerVariant, std::string_view>, 3> table{{
      {NormalizerVariant::no_drift, "no_drift"},
      {NormalizerVariant::heavy_drift, "heavy_drift"},
      {NormalizerVariant::drift_with_mutation, "drift_with_mutation"},
  }};
};

struct NormalizerResult {
  NormalizerVariant variant = NormalizerVariant::no_drift;
  SimulationMetrics metrics;
  std::string normalizer;                  // original skill
  std::optional<std::string> successor;    // mutated successor, if any
  std::vector<LifecycleState> path;        // realized lifecycle path of the normalizer
  LifecycleState final_state = LifecycleState::experimental;
  std::string subject;                     // successor if present, else the normalizer
  LineageReport lineage;                   // lineage of `subject`
  bool subject_eligible = false;
};

void to_json(Json& j, const NormalizerResult& r);

/// The schema-normalizer scenario. Requires cycles >= 12 (InvalidConfig).
NormalizerResult scenario_normalizer(std::uint64_t seed, std::uint64_t cycles, NormalizerVariant variant,
                                     Kernel& kernel);
NormalizerResult scenario_normalizer(std::uint64_t seed, std::uint64_t cycles, NormalizerVariant variant);

/// Runs each config and lays the metrics side by side: rows are
/// policies x cycles, plus per-policy totals and deltas against the first.
/// SeedMismatch when seeds differ, InvalidConfig when anything but the
/// policy differs or fewer than two configs are given.
Json compare_policies(const std::vector<SimulationConfig>& configs);

}  // namespace govrt

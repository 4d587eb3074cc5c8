#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "govrt/cycle.hpp"
#include "govrt/serialize.hpp"

namespace govrt::testing {

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("govrt-test-" + std::to_string(rd()) + "-" + std::to_string(++counter));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

 private:
  std::filesystem::path path_;
};

/// Two evaluators, a benchmark, a skill and an active config, registered by
/// one cycle so everything has a generating trace.
struct World {
  std::string eval_a, eval_b, bench, skill, config;
};

inline World bootstrap(Kernel& kernel, const std::string& tag = "") {
  Workload w;
  w.artifacts.push_back({CapabilityKind::evaluator, "evaluator A" + tag, {}, std::nullopt});
  w.artifacts.push_back({CapabilityKind::evaluator, "evaluator B" + tag, {}, std::nullopt});
  w.artifacts.push_back({CapabilityKind::benchmark, "benchmark" + tag, {}, std::nullopt});
  w.artifacts.push_back({CapabilityKind::skill, "skill" + tag, {}, SkillInterface{{{"in", "json"}}, {{"out", "json"}}, {}}});
  HarnessConfig h;
  h.prompt = {"prompt" + tag, 1};
  h.tools = {"search"};
  h.evaluators = {"@0", "@1"};
  h.memory = {"memory", 1};
  h.governance = "default";
  h.artifacts = {"@3"};
  w.configs.push_back({h, true});
  w.promote = false;
  const CycleReport r = run_cycle(kernel, w);
  World out{r.generated[0], r.generated[1], r.generated[2], r.generated[3], kernel.snapshot()->harness.active_config};
  return out;
}

inline ChangeContract prompt_contract(const std::string& falsifier, double min_delta = 0.05) {
  ChangeContract c;
  c.component = ContractComponent::prompts;
  c.targeted_failure_mode = "format drift";
  c.expected_improvement = ExpectedImprovement{"quality_delta", min_delta};
  c.invariants_preserved = {"output schema"};
  c.falsifying_evaluation = falsifier;
  c.rollback_conditions = {{"error_rate", 0.2, RollbackDirection::above}};
  return c;
}

inline std::string canon(const Json& j) { return canonical_serialize(j); }

}  // namespace govrt::testing

#include "govrt/sim.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "govrt/serialize.hpp"

namespace govrt {

// ---- random substreams ---------------------------------------------------------

namespace {

std::uint64_t substream_seed(std::uint64_t seed, std::string_view actor) {
  const Digest d = sha256(std::to_string(seed) + "/" + std::string(actor));
  std::uint64_t out = 0;
  for (int i = 0; i < 8; ++i) out = (out << 8) | d[static_cast<std::size_t>(i)];
  return out;
}

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

}  // namespace

Substream::Substream(std::uint64_t seed, std::string_view actor) : engine_(substream_seed(seed, actor)) {}

double Substream::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Substream::around(double mean, double spread) { return mean + spread * (2.0 * uniform() - 1.0); }

std::size_t Substream::below(std::size_t n) {
  const auto i = static_cast<std::size_t>(uniform() * static_cast<double>(n));
  return std::min(i, n - 1);
}

// ---- config ----------------------------------------------------------------------

namespace {

[[noreturn]] void bad_config(const std::string& what) { fail(ErrorCode::InvalidConfig, what); }

void check_finite(double x, const std::string& name) {
  if (!std::isfinite(x)) bad_config(name + " must be finite");
}

void check_model(const QualityModel& m, const std::string& name) {
  check_finite(m.mean, name + ".mean");
  check_finite(m.spread, name + ".spread");
  if (m.spread < 0.0) bad_config(name + ".spread must be >= 0");
}

const std::set<std::string> kConfigKeys{
    "seed",          "cycles",          "generators",       "quality_model",       "risk_model",
    "candidate_model", "cost_model",    "drift",            "regression_injection", "evaluations_per_cycle",
    "mutation_rate", "improvement_model", "mutation_risk",  "base_error_rate",     "error_threshold",
    "deprecate_below", "failure_below", "policy"};

const std::set<std::string> kDriftComponents{"p", "r", "s", "u", "rho"};

}  // namespace

void to_json(Json& j, const QualityModel& m) { j = Json{{"mean", m.mean}, {"spread", m.spread}}; }
void from_json(const Json& j, QualityModel& m) {
  m.mean = get_field_or<double>(j, "mean", m.mean);
  m.spread = get_field_or<double>(j, "spread", m.spread);
}

void to_json(Json& j, const RegressionInjection& r) {
  j = Json{{"cycle", r.cycle}, {"component", r.component}, {"magnitude", r.magnitude}};
}
void from_json(const Json& j, RegressionInjection& r) {
  r.cycle = get_field<std::uint64_t>(j, "cycle");
  r.component = get_field_or<std::string>(j, "component", "error_rate");
  r.magnitude = get_field<double>(j, "magnitude");
}

void SimulationConfig::validate() const {
  for (const auto& [kind, rate] : generators) {
    check_finite(rate, "generators." + std::string(to_string(kind)));
    if (rate < 0.0) bad_config("generator rates must be >= 0");
  }
  for (const auto& [kind, m] : quality_model) check_model(m, "quality_model." + std::string(to_string(kind)));
  check_model(risk_model, "risk_model");
  check_model(candidate_model, "candidate_model");
  check_model(cost_model, "cost_model");
  check_model(improvement_model, "improvement_model");
  check_model(mutation_risk, "mutation_risk");
  for (const auto& [comp, rate] : drift) {
    if (!kDriftComponents.count(comp)) bad_config("drift component '" + comp + "' is not one of p, r, s, u, rho");
    check_finite(rate, "drift." + comp);
  }
  for (const auto& r : regression_injection) {
    check_finite(r.magnitude, "regression magnitude");
    if (r.cycle >= cycles) {
      bad_config("regression at cycle " + std::to_string(r.cycle) + " outside [0, " + std::to_string(cycles) + ")");
    }
    if (r.component.empty()) bad_config("regression component must be named");
  }
  for (double x : {mutation_rate, base_error_rate, error_threshold, deprecate_below, failure_below}) {
    check_finite(x, "probabilities and thresholds");
  }
  if (mutation_rate < 0.0 || mutation_rate > 1.0) bad_config("mutation_rate must be in [0, 1]");
  try {
    policy.validate();
  } catch (const KernelError& e) {
    bad_config(std::string("policy: ") + e.what());
  }
}

void to_json(Json& j, const SimulationConfig& c) {
  Json gens = Json::object();
  for (const auto& [k, v] : c.generators) gens[std::string(to_string(k))] = v;
  Json models = Json::object();
  for (const auto& [k, v] : c.quality_model) models[std::string(to_string(k))] = v;
  j = Json{{"seed", c.seed},
           {"cycles", c.cycles},
           {"generators", std::move(gens)},
           {"quality_model", std::move(models)},
           {"risk_model", c.risk_model},
           {"candidate_model", c.candidate_model},
           {"cost_model", c.cost_model},
           {"drift", c.drift},
           {"regression_injection", c.regression_injection},
           {"evaluations_per_cycle", c.evaluations_per_cycle},
           {"mutation_rate", c.mutation_rate},
           {"improvement_model", c.improvement_model},
           {"mutation_risk", c.mutation_risk},
           {"base_error_rate", c.base_error_rate},
           {"error_threshold", c.error_threshold},
           {"deprecate_below", c.deprecate_below},
           {"failure_below", c.failure_below},
           {"policy", c.policy}};
}

void from_json(const Json& j, SimulationConfig& c) {
  if (!j.is_object()) bad_config("simulation config must be a table");
  for (const auto& [key, _] : j.items()) {
    if (!kConfigKeys.count(key)) bad_config("unknown key '" + key + "'");
  }
  try {
    c.seed = get_field_or<std::uint64_t>(j, "seed", c.seed);
    c.cycles = get_field_or<std::uint64_t>(j, "cycles", c.cycles);
    if (auto it = j.find("generators"); it != j.end()) {
      c.generators.clear();
      for (const auto& [k, v] : it->items()) {
        auto kind = parse_enum<CapabilityKind>(k);
        if (!kind) bad_config("unknown artifact kind '" + k + "'");
        c.generators[*kind] = v.get<double>();
      }
    }
    if (auto it = j.find("quality_model"); it != j.end()) {
      for (const auto& [k, v] : it->items()) {
        auto kind = parse_enum<CapabilityKind>(k);
        if (!kind) bad_config("unknown artifact kind '" + k + "'");
        QualityModel m;
        from_json(v, m);
        c.quality_model[*kind] = m;
      }
    }
    for (auto [key, model] : {std::pair{"risk_model", &c.risk_model}, std::pair{"candidate_model", &c.candidate_model},
                              std::pair{"cost_model", &c.cost_model}, std::pair{"improvement_model", &c.improvement_model},
                              std::pair{"mutation_risk", &c.mutation_risk}}) {
      if (auto it = j.find(key); it != j.end()) from_json(*it, *model);
    }
    c.drift = get_field_or<std::map<std::string, double>>(j, "drift", c.drift);
    if (auto it = j.find("regression_injection"); it != j.end()) {
      c.regression_injection.clear();
      for (const auto& r : *it) {
        RegressionInjection inj;
        from_json(r, inj);
        c.regression_injection.push_back(inj);
      }
    }
    c.evaluations_per_cycle = get_field_or<std::uint64_t>(j, "evaluations_per_cycle", c.evaluations_per_cycle);
    c.mutation_rate = get_field_or<double>(j, "mutation_rate", c.mutation_rate);
    c.base_error_rate = get_field_or<double>(j, "base_error_rate", c.base_error_rate);
    c.error_threshold = get_field_or<double>(j, "error_threshold", c.error_threshold);
    c.deprecate_below = get_field_or<double>(j, "deprecate_below", c.deprecate_below);
    c.failure_below = get_field_or<double>(j, "failure_below", c.failure_below);
    if (auto it = j.find("policy"); it != j.end()) c.policy = it->get<GovernancePolicy>();
  } catch (const KernelError& e) {
    if (e.code() == ErrorCode::InvalidConfig) throw;
    bad_config(e.what());
  } catch (const nlohmann::json::exception& e) {
    bad_config(e.what());
  }
  c.validate();
}

SimulationConfig load_simulation_config(const std::filesystem::path& path) {
  return load_structured_file(path).get<SimulationConfig>();
}

// ---- metrics -----------------------------------------------------------------------

void to_json(Json& j, const CycleMetrics& m) {
  j = Json{{"cycle", m.cycle},         {"registrations", m.registrations}, {"promotions", m.promotions},
           {"deprecations", m.deprecations}, {"proposed", m.proposed},     {"staged", m.staged},
           {"applied", m.applied},     {"rejected", m.rejected},           {"rollbacks", m.rollbacks},
           {"reviews", m.reviews},     {"winner", m.winner}};
}

void to_json(Json& j, const RegressionOutcome& r) {
  j = Json{{"injection", r.injection}, {"config_id", r.config_id}, {"detected", nullptr}, {"lag", nullptr}};
  if (r.detected) j["detected"] = *r.detected;
  if (r.lag) j["lag"] = *r.lag;
}

void to_json(Json& j, const SimulationMetrics& m) {
  j = Json{{"seed", m.seed},
           {"cycles", m.cycles},
           {"per_cycle", m.per_cycle},
           {"census", m.census},
           {"regression_detection_lag", m.regression_detection_lag},
           {"events", m.events},
           {"log_head", m.log_head}};
}

std::string metrics_csv(const SimulationMetrics& m) {
  std::ostringstream out;
  out << "cycle,registrations,promotions,deprecations,proposed,staged,applied,rejected,rollbacks,reviews,winner\n";
  for (const auto& c : m.per_cycle) {
    std::uint64_t promotions = 0;
    for (const auto& [_, n] : c.promotions) promotions += n;
    out << c.cycle << ',' << c.registrations << ',' << promotions << ',' << c.deprecations << ',' << c.proposed << ','
        << c.staged << ',' << c.applied << ',' << c.rejected << ',' << c.rollbacks << ',' << c.reviews << ','
        << c.winner << '\n';
  }
  return out.str();
}

SimulationMetrics metrics_from_log(std::span<const TraceEvent> events, const KernelState& final_state,
                                   std::uint64_t seed, const std::vector<RegressionOutcome>& regressions) {
  SimulationMetrics m;
  m.seed = seed;
  m.events = events.size();
  m.log_head = to_hex(events.empty() ? kZeroDigest : events.back().this_hash);
  for (LifecycleState s : kAllLifecycleStates) m.census[std::string(to_string(s))] = 0;
  for (const auto& [_, cap] : final_state.reg.capabilities) ++m.census[std::string(to_string(cap.lifecycle))];

  std::map<std::string, std::uint64_t> retired_at;  // config -> cycle of its rollback
  CycleMetrics* cur = nullptr;
  for (const TraceEvent& e : events) {
    if (e.kind == EventKind::cycle_started) {
      m.per_cycle.push_back({});
      cur = &m.per_cycle.back();
      cur->cycle = get_field<std::uint64_t>(e.payload, "cycle_index");
      continue;
    }
    if (!cur) continue;
    switch (e.kind) {
      case EventKind::artifact_registered:
        if (get_field<std::string>(e.payload, "entity") == "capability") ++cur->registrations;
        break;
      case EventKind::lifecycle_transition: {
        const auto rec = get_field<LifecycleRecord>(e.payload, "record");
        if (rec.to_state == LifecycleState::deprecated) {
          ++cur->deprecations;
        } else {
          ++cur->promotions[edge_key({rec.from_state, rec.to_state})];
        }
        break;
      }
      case EventKind::mutation_proposed: ++cur->proposed; break;
      case EventKind::mutation_staged: ++cur->staged; break;
      case EventKind::mutation_applied: ++cur->applied; break;
      case EventKind::mutation_rejected: ++cur->rejected; break;
      case EventKind::rollback_event:
        ++cur->rollbacks;
        retired_at.emplace(get_field<std::string>(e.payload, "retired_config"), cur->cycle);
        break;
      case EventKind::review_recorded: ++cur->reviews; break;
      case EventKind::evaluation_recorded:
        if (get_field<std::string>(e.payload, "type") == "selection") {
          cur->winner = get_field<SelectionResult>(e.payload, "result").winner.value_or("");
        }
        break;
      default: break;
    }
  }
  for (RegressionOutcome r : regressions) {
    auto it = retired_at.find(r.config_id);
    if (it != retired_at.end() && it->second >= r.injection.cycle) {
      r.detected = it->second;
      r.lag = it->second - r.injection.cycle;
    }
    m.regression_detection_lag.push_back(std::move(r));
  }
  return m;
}

// ---- synthetic workload ------------------------------------------------------------

namespace {

const std::vector<std::string> kReviewers{"gov-a", "gov-b", "gov-c"};

class Scenario {
 public:
  Scenario(const SimulationConfig& cfg, Kernel& kernel) : cfg_(cfg), kernel_(kernel) {}

  SimulationMetrics run() {
    for (std::uint64_t c = 0; c < cfg_.cycles; ++c) {
      const Workload w = build(c);
      try {
        const ObserveFn observe = [this, c](const KernelState& s) { return environment(c, s); };
        run_cycle(kernel_, w, observe, "kernel");
      } catch (const KernelError& e) {
        throw KernelError(e.code(), "cycle " + std::to_string(c) + ": " + e.detail());
      }
      note_new_capabilities(c);
    }
    const auto events = kernel_.events();
    SimulationMetrics m = metrics_from_log(events, *kernel_.snapshot(), cfg_.seed, outcomes_);
    m.cycles = cfg_.cycles;
    return m;
  }

 private:
  Substream stream(const std::string& actor, std::uint64_t cycle) const {
    return Substream(cfg_.seed, actor + "/" + std::to_string(cycle));
  }

  const QualityModel& model_for(CapabilityKind kind) const {
    static const QualityModel fallback;
    auto it = cfg_.quality_model.find(kind);
    return it == cfg_.quality_model.end() ? fallback : it->second;
  }

  double drift(const std::string& comp, std::uint64_t age) const {
    auto it = cfg_.drift.find(comp);
    return it == cfg_.drift.end() ? 0.0 : it->second * static_cast<double>(age);
  }

  Workload build(std::uint64_t c) {
    Workload w;
    const auto state = kernel_.snapshot();
    if (c == 0) bootstrap(w);
    generate(c, w);
    evaluate(c, *state, w);
    candidates(c, *state, w);
    mutate(c, *state, w);
    w.promotion_reviewers = kReviewers;
    return w;
  }

  void bootstrap(Workload& w) {
    const std::string tag = " (seed " + std::to_string(cfg_.seed) + ")";
    w.artifacts.push_back({CapabilityKind::evaluator, "schema conformance evaluator" + tag, {}, std::nullopt});
    w.artifacts.push_back({CapabilityKind::evaluator, "regression replay evaluator" + tag, {}, std::nullopt});
    w.artifacts.push_back({CapabilityKind::benchmark, "held-out task benchmark" + tag, {}, std::nullopt});
    for (int i = 0; i < 3; ++i) {
      HarnessConfig h;
      h.prompt = {"baseline prompt policy variant " + std::to_string(i), 1};
      h.tools = {"search", "python"};
      h.evaluators = {"@0", "@1"};
      h.memory = {"episodic memory, 32 turns", 1};
      h.governance = "default";
      h.artifacts = {};
      w.configs.push_back({h, i == 0});
    }
    bootstrap_configs_ = 3;
  }

  void generate(std::uint64_t c, Workload& w) {
    Substream rng = stream("generator", c);
    std::size_t n = 0;
    for (const auto& [kind, rate] : cfg_.generators) {
      const double whole = std::floor(rate);
      const bool extra = rng.chance(rate - whole);
      const auto count = static_cast<std::size_t>(whole) + (extra ? 1 : 0);
      for (std::size_t i = 0; i < count; ++i) {
        WorkloadArtifact a;
        a.kind = kind;
        a.content = std::string(to_string(kind)) + " artifact c" + std::to_string(c) + "-" + std::to_string(n) +
                    " seed " + std::to_string(cfg_.seed);
        const bool dep = rng.chance(0.3);
        if (dep && !w.artifacts.empty()) a.depends_on.push_back("@" + std::to_string(w.artifacts.size() - 1));
        if (kind == CapabilityKind::skill) {
          a.interface = SkillInterface{{{"payload", "json"}}, {{"result", "json"}}, {"malformed input"}};
        }
        new_refs_.push_back("@" + std::to_string(w.artifacts.size()));
        w.artifacts.push_back(std::move(a));
        ++n;
      }
    }
  }

  void evaluate(std::uint64_t c, const KernelState& s, Workload& w) {
    // Pool: evaluable capabilities already registered plus this cycle's artifacts.
    std::vector<std::pair<std::string, std::pair<CapabilityKind, std::uint64_t>>> pool;
    for (const auto& [id, cap] : s.reg.capabilities) {
      if (cap.kind == CapabilityKind::evaluator || cap.kind == CapabilityKind::benchmark) continue;
      if (cap.lifecycle == LifecycleState::deprecated || cap.lifecycle == LifecycleState::canonical) continue;
      pool.push_back({id, {cap.kind, born_.at(id)}});
    }
    for (const auto& r : new_refs_) {
      const std::size_t i = std::stoul(r.substr(1));
      if (w.artifacts[i].kind == CapabilityKind::evaluator || w.artifacts[i].kind == CapabilityKind::benchmark) continue;
      pool.push_back({r, {w.artifacts[i].kind, c}});
    }
    new_refs_.clear();
    Substream rng = stream("evaluator", c);
    std::set<std::string> failing;
    for (std::uint64_t k = 0; k < cfg_.evaluations_per_cycle; ++k) {
      const double pick = rng.uniform();
      const double judge = rng.uniform();
      double draws[5];
      for (double& d : draws) d = rng.uniform();
      if (pool.empty() || evaluators_.empty()) continue;
      const auto& [subject, info] = pool[std::min(static_cast<std::size_t>(pick * pool.size()), pool.size() - 1)];
      const std::string& evaluator =
          evaluators_[std::min(static_cast<std::size_t>(judge * evaluators_.size()), evaluators_.size() - 1)];
      const QualityModel& m = model_for(info.first);
      const std::uint64_t age = c - info.second;
      auto comp = [&](double u, const QualityModel& qm, const std::string& name) {
        return clamp01(qm.mean + qm.spread * (2.0 * u - 1.0) + drift(name, age));
      };
      QualityComponents q{comp(draws[0], m, "p"), comp(draws[1], m, "r"), comp(draws[2], m, "s"),
                          comp(draws[3], m, "u"), comp(draws[4], cfg_.risk_model, "rho")};
      w.evaluations.push_back({subject, evaluator, {{"robustness", q.r}}, q});
      if (q.r < cfg_.failure_below && failing.insert(subject).second) w.failures.push_back({subject, "distribution-shift"});
      if (q.r < cfg_.deprecate_below) w.deprecations.push_back(subject);
    }
  }

  void candidates(std::uint64_t c, const KernelState& s, Workload& w) {
    std::vector<std::pair<std::string, std::string>> ids;  // (workload ref, stable key)
    if (c == 0) {
      for (std::size_t i = 0; i < bootstrap_configs_; ++i) ids.push_back({"@cfg:" + std::to_string(i), "boot" + std::to_string(i)});
    }
    for (const auto& [id, _] : s.reg.configs) {
      if (!s.reg.retired_configs.count(id)) ids.push_back({id, id});
    }
    for (const auto& [ref, key] : ids) {
      Substream rng = stream("candidate/" + key, c);
      const double bonus = 0.05 * static_cast<double>(depth(s, ref));
      const QualityModel& m = cfg_.candidate_model;
      WorkloadCandidate cand;
      cand.config = ref;
      cand.q = clamp01(rng.around(m.mean, m.spread) + bonus);
      cand.r = clamp01(rng.around(m.mean, m.spread));
      cand.v = clamp01(rng.around(m.mean, m.spread));
      cand.u = clamp01(rng.around(m.mean, m.spread));
      cand.c = std::max(0.0, rng.around(cfg_.cost_model.mean, cfg_.cost_model.spread));
      w.candidates.push_back(cand);
    }
  }

  // Number of applied mutations between a config and its bootstrap ancestor.
  static std::uint64_t depth(const KernelState& s, const std::string& id) {
    std::uint64_t d = 0;
    std::string cur = id;
    while (const MutationRecord* m = mutation_producing(s, cur)) {
      ++d;
      cur = m->base_config;
    }
    return d;
  }

  void mutate(std::uint64_t c, const KernelState& s, Workload& w) {
    Substream rng = stream("mutator", c);
    const bool propose = rng.chance(cfg_.mutation_rate);
    const double improvement = rng.around(cfg_.improvement_model.mean, cfg_.improvement_model.spread);
    const double risk = clamp01(rng.around(cfg_.mutation_risk.mean, cfg_.mutation_risk.spread));
    if (!propose || c == 0 || benchmark_.empty() || s.harness.active_config.empty()) return;
    WorkloadMutation m;
    m.contract.component = ContractComponent::prompts;
    m.contract.targeted_failure_mode = "instruction drift on long payloads";
    m.contract.expected_improvement = ExpectedImprovement{"quality_delta", 0.03};
    m.contract.invariants_preserved = {"output schema unchanged"};
    m.contract.falsifying_evaluation = benchmark_;
    m.contract.rollback_conditions = {{"error_rate", cfg_.error_threshold, RollbackDirection::above}};
    m.delta = {TupleComponent::prompt, Descriptor{"prompt revision from cycle " + std::to_string(c), c + 1}};
    m.risk = risk;
    m.reviewers = kReviewers;
    m.validation = {{"quality_delta", improvement}};
    w.mutations.push_back(std::move(m));
  }

  std::map<std::string, double> environment(std::uint64_t c, const KernelState& s) {
    Substream rng = stream("environment", c);
    std::map<std::string, double> metrics{{"error_rate", clamp01(rng.around(cfg_.base_error_rate, 0.02))}};
    const std::string& active = s.harness.active_config;
    for (const auto& inj : cfg_.regression_injection) {
      if (inj.cycle == c && attached_.insert(&inj).second) outcomes_.push_back({inj, active, std::nullopt, std::nullopt});
    }
    for (const auto& o : outcomes_) {
      if (o.config_id == active) metrics[o.injection.component] += o.injection.magnitude;
    }
    return metrics;
  }

  void note_new_capabilities(std::uint64_t c) {
    const auto s = kernel_.snapshot();
    for (const auto& [id, cap] : s->reg.capabilities) {
      if (!born_.emplace(id, c).second) continue;
      if (cap.kind == CapabilityKind::evaluator) evaluators_.push_back(id);
      if (cap.kind == CapabilityKind::benchmark && benchmark_.empty()) benchmark_ = id;
    }
  }

  const SimulationConfig& cfg_;
  Kernel& kernel_;
  std::size_t bootstrap_configs_ = 0;
  std::vector<std::string> new_refs_;
  std::map<std::string, std::uint64_t> born_;
  std::vector<std::string> evaluators_;
  std::string benchmark_;
  std::set<const RegressionInjection*> attached_;
  std::vector<RegressionOutcome> outcomes_;
};

}  // namespace

SimulationMetrics run_scenario(const SimulationConfig& config, Kernel& kernel) {
  config.validate();
  return Scenario(config, kernel).run();
}

SimulationMetrics run_scenario(const SimulationConfig& config) {
  config.validate();
  Kernel kernel(config.policy);
  return Scenario(config, kernel).run();
}

// ---- schema normalizer -----------------------------------------------------------------

void to_json(Json& j, const NormalizerResult& r) {
  j = Json{{"variant", r.variant},
           {"metrics", r.metrics},
           {"normalizer", r.normalizer},
           {"path", r.path},
           {"final_state", r.final_state},
           {"subject", r.subject},
           {"lineage", r.lineage},
           {"subject_eligible", r.subject_eligible}};
  put_optional(j, "successor", r.successor);
}

namespace {

constexpr std::uint64_t kDriftStart = 4;  // first cycle after the normalizer reaches trusted
constexpr double kMutateBelow = 0.7;
constexpr double kFailBelow = 0.5;
constexpr double kDeprecateBelow = 0.25;

class NormalizerScript {
 public:
  NormalizerScript(std::uint64_t seed, NormalizerVariant v, Kernel& kernel) : seed_(seed), variant_(v), kernel_(kernel) {}

  void cycle(std::uint64_t c) {
    Workload w;
    w.promotion_reviewers = {"gov-a", "gov-b"};
    Substream rng(seed_, "normalizer/" + std::to_string(c));
    auto jitter = [&rng] { return rng.around(0.0, 0.02); };
    if (c == 0) {
      w.artifacts.push_back({CapabilityKind::evaluator, "schema validator", {}, std::nullopt});
      w.artifacts.push_back({CapabilityKind::evaluator, "downstream compatibility checker", {}, std::nullopt});
      w.artifacts.push_back({CapabilityKind::benchmark, "inconsistent payload corpus", {}, std::nullopt});
      w.artifacts.push_back({CapabilityKind::skill,
                             "normalize(payload): temporary script that coerces inconsistent payload fields "
                             "into the canonical schema",
                             {},
                             SkillInterface{{{"payload", "json"}}, {{"normalized", "json"}}, {"binary payloads"}}});
      HarnessConfig h;
      h.prompt = {"ingest payloads, normalize, hand off downstream", 1};
      h.tools = {"json-schema"};
      h.evaluators = {"@0", "@1"};
      h.memory = {"payload history, last 100", 1};
      h.governance = "default";
      h.artifacts = {"@3"};
      w.configs.push_back({h, true});
    }
    const std::string subject = c == 0 ? "@3" : normalizer_;
    const std::string evaluator = c == 0 ? "@" + std::to_string(c % 2) : evaluators_[c % 2];

    // The original normalizer, degrading once drift sets in.
    const bool drifting = variant_ != NormalizerVariant::no_drift && c >= kDriftStart;
    const double steps = drifting ? static_cast<double>(c - kDriftStart + 1) : 0.0;
    QualityComponents q{0.9 + jitter(), 0.9 - 0.15 * steps + jitter(), 0.85 + jitter(), 0.8 + jitter(),
                        0.1 + 0.08 * steps + jitter()};
    q = q.clamped();
    const bool alive = c == 0 || kernel_.snapshot()->reg.capabilities.at(normalizer_).lifecycle != LifecycleState::deprecated;
    if (alive) {
      w.evaluations.push_back({subject, evaluator, {{"robustness", q.r}}, q});
      if (c == 2) w.failures.push_back({subject, "binary payloads"});
      if (q.r < kFailBelow) w.failures.push_back({subject, "schema drift"});
      if (q.r < kDeprecateBelow) w.deprecations.push_back(subject);
    }

    if (variant_ == NormalizerVariant::drift_with_mutation && drifting && !successor_ && q.r < kMutateBelow) {
      w.failures.push_back({normalizer_, "schema drift"});
      w.artifacts.push_back({CapabilityKind::skill,
                             "normalize_v2(payload): schema-version aware normalizer that tolerates drifted fields",
                             {},
                             SkillInterface{{{"payload", "json"}, {"schema_version", "string"}},
                                            {{"normalized", "json"}},
                                            {"binary payloads"}}});
      w.edges.push_back({"@0", Relation::mutated_from, normalizer_});
      w.edges.push_back({"@0", Relation::supersedes, normalizer_});
      const HarnessConfig* active = find_config(*kernel_.snapshot(), kernel_.snapshot()->harness.active_config);
      std::vector<std::string> artifacts;
      for (const auto& a : active->artifacts) artifacts.push_back(a == normalizer_ ? "@0" : a);
      WorkloadMutation m;
      m.contract.component = ContractComponent::skills;
      m.contract.targeted_failure_mode = "schema drift in upstream payloads";
      m.contract.expected_improvement = ExpectedImprovement{"quality_delta", 0.05};
      m.contract.invariants_preserved = {"normalized output validates against the canonical schema"};
      m.contract.falsifying_evaluation = benchmark_;
      m.contract.rollback_conditions = {{"error_rate", 0.2, RollbackDirection::above}};
      m.delta = {TupleComponent::artifacts, artifacts};
      m.risk = 0.1;
      m.reviewers = {"gov-a"};
      m.validation = {{"quality_delta", 0.12}};
      w.mutations.push_back(std::move(m));
      w.evaluations.push_back({"@0", evaluators_[(c + 1) % 2], {}, fresh_quality(jitter)});
      mutated_this_cycle_ = true;
    } else if (successor_) {
      w.evaluations.push_back({*successor_, evaluators_[c % 2], {}, fresh_quality(jitter)});
    }
    w.observation = {{"error_rate", 0.03 + std::abs(jitter())}};

    try {
      run_cycle(kernel_, w, {}, "kernel");
    } catch (const KernelError& e) {
      throw KernelError(e.code(), "cycle " + std::to_string(c) + ": " + e.detail());
    }
    learn_ids(c);
  }

  NormalizerResult finish(std::uint64_t cycles) {
    NormalizerResult r;
    r.variant = variant_;
    const auto s = kernel_.snapshot();
    const auto events = kernel_.events();
    r.metrics = metrics_from_log(events, *s, seed_, {});
    r.metrics.cycles = cycles;
    r.normalizer = normalizer_;
    r.successor = successor_;
    r.path.push_back(LifecycleState::experimental);
    for (const auto& rec : s->reg.lifecycle_history) {
      if (rec.capability_id == normalizer_) r.path.push_back(rec.to_state);
    }
    r.final_state = s->reg.capabilities.at(normalizer_).lifecycle;
    r.subject = successor_.value_or(normalizer_);
    r.lineage = s->graph.lineage(r.subject);
    r.subject_eligible = s->graph.eligible_for_selection(r.subject);
    return r;
  }

 private:
  template <typename J>
  static QualityComponents fresh_quality(J& jitter) {
    return QualityComponents{0.9 + jitter(), 0.88 + jitter(), 0.85 + jitter(), 0.8 + jitter(), 0.08 + jitter()}.clamped();
  }

  void learn_ids(std::uint64_t c) {
    const auto s = kernel_.snapshot();
    if (c == 0) {
      for (const auto& [id, cap] : s->reg.capabilities) {
        if (cap.kind == CapabilityKind::evaluator) evaluators_.push_back(id);
        if (cap.kind == CapabilityKind::benchmark) benchmark_ = id;
        if (cap.kind == CapabilityKind::skill) normalizer_ = id;
      }
      // map order is by id; keep the generation order instead
      std::sort(evaluators_.begin(), evaluators_.end(), [&](const auto& a, const auto& b) {
        return s->reg.capabilities.at(a).content < s->reg.capabilities.at(b).content;
      });
    }
    if (mutated_this_cycle_) {
      for (const auto& [id, cap] : s->reg.capabilities) {
        if (cap.kind == CapabilityKind::skill && id != normalizer_) successor_ = id;
      }
      mutated_this_cycle_ = false;
    }
  }

  std::uint64_t seed_;
  NormalizerVariant variant_;
  Kernel& kernel_;
  std::vector<std::string> evaluators_;
  std::string benchmark_;
  std::string normalizer_;
  std::optional<std::string> successor_;
  bool mutated_this_cycle_ = false;
};

}  // namespace

NormalizerResult scenario_normalizer(std::uint64_t seed, std::uint64_t cycles, NormalizerVariant variant,
                                     Kernel& kernel) {
  if (cycles < 12) bad_config("the normalizer scenario needs at least 12 cycles, got " + std::to_string(cycles));
  NormalizerScript script(seed, variant, kernel);
  for (std::uint64_t c = 0; c < cycles; ++c) script.cycle(c);
  return script.finish(cycles);
}

NormalizerResult scenario_normalizer(std::uint64_t seed, std::uint64_t cycles, NormalizerVariant variant) {
  Kernel kernel;
  return scenario_normalizer(seed, cycles, variant, kernel);
}

// ---- policy comparison ---------------------------------------------------------------------

Json compare_policies(const std::vector<SimulationConfig>& configs) {
  if (configs.size() < 2) bad_config("compare needs at least two configs");
  Json base = configs.front();
  base.erase("policy");
  for (const auto& c : configs) {
    if (c.seed != configs.front().seed) {
      fail(ErrorCode::SeedMismatch, "seed " + std::to_string(c.seed) + " differs from " + std::to_string(configs.front().seed));
    }
    Json other = c;
    other.erase("policy");
    if (other != base) bad_config("configs differ in more than their policy");
  }

  struct Totals {
    std::int64_t registrations = 0, promotions = 0, deprecations = 0, proposed = 0, staged = 0, applied = 0,
                 rejected = 0, rollbacks = 0, reviews = 0, detected = 0, lag_sum = 0;
    Json to_json() const {
      return Json{{"registrations", registrations}, {"promotions", promotions}, {"deprecations", deprecations},
                  {"proposed", proposed},           {"staged", staged},         {"applied", applied},
                  {"rejected", rejected},           {"rollbacks", rollbacks},   {"reviews", reviews},
                  {"regressions_detected", detected}, {"detection_lag_sum", lag_sum}};
    }
  };

  Json policies = Json::array();
  Json rows = Json::array();
  Json totals = Json::array();
  std::vector<Totals> all;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const SimulationMetrics m = run_scenario(configs[i]);
    Totals t;
    for (const auto& c : m.per_cycle) {
      Json row = c;
      row["policy"] = i;
      rows.push_back(std::move(row));
      t.registrations += static_cast<std::int64_t>(c.registrations);
      for (const auto& [_, n] : c.promotions) t.promotions += static_cast<std::int64_t>(n);
      t.deprecations += static_cast<std::int64_t>(c.deprecations);
      t.proposed += static_cast<std::int64_t>(c.proposed);
      t.staged += static_cast<std::int64_t>(c.staged);
      t.applied += static_cast<std::int64_t>(c.applied);
      t.rejected += static_cast<std::int64_t>(c.rejected);
      t.rollbacks += static_cast<std::int64_t>(c.rollbacks);
      t.reviews += static_cast<std::int64_t>(c.reviews);
    }
    for (const auto& r : m.regression_detection_lag) {
      if (r.lag) {
        ++t.detected;
        t.lag_sum += static_cast<std::int64_t>(*r.lag);
      }
    }
    policies.push_back(Json{{"policy", i}, {"digest", policy_digest(configs[i].policy)}, {"settings", configs[i].policy}});
    Json tj = t.to_json();
    tj["policy"] = i;
    tj["census"] = m.census;
    totals.push_back(std::move(tj));
    all.push_back(t);
  }
  Json deltas = Json::array();
  for (std::size_t i = 1; i < all.size(); ++i) {
    const Json a = all[i].to_json();
    const Json b = all[0].to_json();
    Json d{{"policy", i}, {"against", 0}};
    for (const auto& [k, v] : a.items()) d[k] = v.get<std::int64_t>() - b.at(k).get<std::int64_t>();
    deltas.push_back(std::move(d));
  }
  return Json{{"seed", configs.front().seed}, {"cycles", configs.front().cycles}, {"policies", std::move(policies)},
              {"rows", std::move(rows)},     {"totals", std::move(totals)},      {"deltas", std::move(deltas)}};
}

}  // namespace govrt

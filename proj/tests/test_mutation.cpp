#include <gtest/gtest.h>

#include "oracles.hpp"
#include "support.hpp"

using namespace govrt;
using govrt::testing::bootstrap;
using govrt::testing::canon;
using govrt::testing::prompt_contract;

namespace {

std::optional<ErrorCode> attempt(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const KernelError& e) {
    return e.code();
  }
  return std::nullopt;
}

ComponentDelta prompt_delta(const std::string& text, std::uint64_t version = 2) {
  return ComponentDelta{TupleComponent::prompt, Descriptor{text, version}};
}

std::string validate(Kernel& k, const std::string& mutation, const std::string& by, double delta) {
  return k.record_evaluation(mutation, by, {{"quality_delta", delta}}, std::nullopt).event_id;
}

// Proposed, validated, staged and approved; ready for apply.
MutationRecord ready(Kernel& k, const govrt::testing::World& w, const ChangeContract& c, const ComponentDelta& d) {
  const auto m = k.propose(k.snapshot()->harness.active_config, c, d);
  const auto ev = validate(k, m.mutation_id, c.falsifying_evaluation, 0.5);
  k.stage(m.mutation_id, ev);
  const auto r = k.review(m.mutation_id, {ev}, 0.1, "gov-a");
  EXPECT_EQ(r.decision, ReviewDecision::approve);
  (void)w;
  return m;
}

// Field-wise diff over the serialized tuple, independent of the library's differing_components.
std::set<std::string> json_diff(const HarnessConfig& a, const HarnessConfig& b) {
  Json ja = a, jb = b;
  std::set<std::string> out;
  for (const char* key : {"p", "t", "e", "m", "g", "o", "k"}) {
    if (canon(ja.at(key)) != canon(jb.at(key))) out.insert(key);
  }
  return out;
}

std::string slot_key(ContractComponent c) {
  switch (c) {
    case ContractComponent::prompts: return "p";
    case ContractComponent::routing: return "t";
    case ContractComponent::evaluators:
    case ContractComponent::benchmarks: return "e";
    case ContractComponent::retrieval:
    case ContractComponent::memory_rules: return "m";
    case ContractComponent::workflows:
    case ContractComponent::skills: return "o";
    case ContractComponent::graph_relations: return "k";
  }
  return "?";
}

}  // namespace

TEST(Mutation, ValidProposal) {
  Kernel k;
  const auto w = bootstrap(k);
  const auto m = k.propose(w.config, prompt_contract(w.bench), prompt_delta("tighter"));
  EXPECT_EQ(m.status, MutationStatus::proposed);
  EXPECT_FALSE(m.result_config);
  EXPECT_EQ(k.snapshot()->graph.node(m.mutation_id).kind, NodeKind::mutation);
  EXPECT_TRUE(k.snapshot()->graph.out_edges(m.mutation_id, Relation::mutated_from).empty());
}

TEST(Mutation, ProposalErrors) {
  Kernel k;
  const auto w = bootstrap(k);
  auto c = prompt_contract(w.bench);
  EXPECT_EQ(attempt([&] { k.propose("nope", c, prompt_delta("x")); }), ErrorCode::UnknownConfig);
  c.rollback_conditions.clear();
  try {
    k.propose(w.config, c, prompt_delta("x"));
    ADD_FAILURE();
  } catch (const KernelError& e) {
    EXPECT_EQ(e.code(), ErrorCode::IncompleteContract);
    EXPECT_EQ(e.detail(), "rollback_conditions");
  }
  c = prompt_contract(w.bench);
  EXPECT_EQ(attempt([&] { k.propose(w.config, c, ComponentDelta{TupleComponent::tools, std::vector<std::string>{}}); }),
            ErrorCode::ComponentMismatch);
  EXPECT_EQ(attempt([&] { k.propose(w.config, c, ComponentDelta{TupleComponent::prompt, std::string("raw")}); }),
            ErrorCode::ComponentMismatch);
  c.falsifying_evaluation = w.skill;
  EXPECT_EQ(attempt([&] { k.propose(w.config, c, prompt_delta("x")); }), ErrorCode::KindMismatch);
}

TEST(Mutation, BlankedFieldsMatchCompletenessPredicate) {
  Kernel k;
  const auto w = bootstrap(k);
  std::mt19937_64 rng(31);
  const std::array<std::string, 6> names{"component",       "targeted_failure_mode", "expected_improvement",
                                         "invariants_preserved", "falsifying_evaluation", "rollback_conditions"};
  int accepted = 0;
  for (int i = 0; i < 200; ++i) {
    ChangeContract c = prompt_contract(w.bench);
    std::array<bool, 6> blank{};
    for (auto& b : blank) b = rng() % 6 == 0;
    if (blank[0]) c.component.reset();
    if (blank[1]) c.targeted_failure_mode.clear();
    if (blank[2]) {
      if (rng() % 2) {
        c.expected_improvement.reset();
      } else {
        c.expected_improvement->metric.clear();
      }
    }
    if (blank[3]) c.invariants_preserved.clear();
    if (blank[4]) c.falsifying_evaluation.clear();
    if (blank[5]) c.rollback_conditions.clear();
    const bool complete = std::none_of(blank.begin(), blank.end(), [](bool b) { return b; });
    try {
      k.propose(w.config, c, prompt_delta("candidate " + std::to_string(i)));
      EXPECT_TRUE(complete) << "case " << i;
      ++accepted;
    } catch (const KernelError& e) {
      EXPECT_FALSE(complete) << "case " << i;
      EXPECT_EQ(e.code(), ErrorCode::IncompleteContract);
      const auto first = std::find(blank.begin(), blank.end(), true) - blank.begin();
      EXPECT_EQ(e.detail(), names[first]);
    }
  }
  EXPECT_GT(accepted, 40);
}

TEST(Mutation, StageThreshold) {
  Kernel k;
  const auto w = bootstrap(k);
  const auto good = k.propose(w.config, prompt_contract(w.bench, 0.05), prompt_delta("a"));
  k.stage(good.mutation_id, validate(k, good.mutation_id, w.bench, 0.10));
  EXPECT_EQ(find_mutation(*k.snapshot(), good.mutation_id)->status, MutationStatus::staged);

  Kernel k2;
  const auto w2 = bootstrap(k2);
  const auto bad = k2.propose(w2.config, prompt_contract(w2.bench, 0.05), prompt_delta("b"));
  EXPECT_EQ(attempt([&] { k2.stage(bad.mutation_id, validate(k2, bad.mutation_id, w2.bench, 0.01)); }),
            ErrorCode::ImprovementNotMet);
  const auto s = k2.snapshot();
  EXPECT_EQ(find_mutation(*s, bad.mutation_id)->status, MutationStatus::rejected);
  EXPECT_EQ(k2.events().back().kind, EventKind::graph_updated);
  bool rejected_event = false;
  for (const auto& e : k2.events()) {
    if (e.kind == EventKind::mutation_rejected) {
      rejected_event = true;
      EXPECT_EQ(e.payload.at("reason"), "ImprovementNotMet");
    }
  }
  EXPECT_TRUE(rejected_event);
  EXPECT_TRUE(s->graph.has_edge(bad.mutation_id, Relation::fails_under, w2.bench));
}

TEST(Mutation, StageErrors) {
  Kernel k;
  const auto w = bootstrap(k);
  const auto m = k.propose(w.config, prompt_contract(w.bench), prompt_delta("a"));
  EXPECT_EQ(attempt([&] { k.stage(m.mutation_id, validate(k, m.mutation_id, w.eval_a, 0.5)); }),
            ErrorCode::WrongEvaluator);
  EXPECT_EQ(attempt([&] { k.stage(m.mutation_id, "ev-999999"); }), ErrorCode::UnknownEvent);
  const auto ok = validate(k, m.mutation_id, w.bench, 0.5);
  k.stage(m.mutation_id, ok);
  EXPECT_EQ(attempt([&] { k.stage(m.mutation_id, ok); }), ErrorCode::WrongStatus);
  const auto m2 = k.propose(w.config, prompt_contract(w.bench), prompt_delta("b"));
  EXPECT_EQ(attempt([&] { k.stage(m2.mutation_id, validate(k, m2.mutation_id, w.bench, 0.5)); }),
            ErrorCode::ConflictingMutation);
}

TEST(Mutation, FuzzedThresholdsMatchComparison) {
  Kernel k;
  const auto w = bootstrap(k);
  std::mt19937_64 rng(32);
  for (int i = 0; i < 200; ++i) {
    // Steps of 0.01 so equality is exercised.
    const double threshold = static_cast<double>(rng() % 20) / 100.0;
    const double delta = static_cast<double>(rng() % 20) / 100.0;
    const auto m = k.propose(w.config, prompt_contract(w.bench, threshold), prompt_delta("v" + std::to_string(i)));
    const auto got = attempt([&] { k.stage(m.mutation_id, validate(k, m.mutation_id, w.bench, delta)); });
    const auto status = find_mutation(*k.snapshot(), m.mutation_id)->status;
    if (delta >= threshold) {
      EXPECT_FALSE(got) << delta << " vs " << threshold;
      EXPECT_EQ(status, MutationStatus::staged);
      // Clear the stage slot for the next case.
      k.transact("operator", [&](CommandContext& ctx) { ops::reject_mutation(ctx, m.mutation_id, "operator", "clear"); });
    } else {
      EXPECT_EQ(got, ErrorCode::ImprovementNotMet) << delta << " vs " << threshold;
      EXPECT_EQ(status, MutationStatus::rejected);
    }
  }
}

TEST(Mutation, ApplyNeedsStagingAndApproval) {
  Kernel k;
  const auto w = bootstrap(k);
  const auto m = k.propose(w.config, prompt_contract(w.bench), prompt_delta("a"));
  EXPECT_EQ(attempt([&] { k.apply(m.mutation_id); }), ErrorCode::WrongStatus);
  const auto ev = validate(k, m.mutation_id, w.bench, 0.5);
  k.stage(m.mutation_id, ev);
  EXPECT_EQ(attempt([&] { k.apply(m.mutation_id); }), ErrorCode::MissingApproval);
  k.review(m.mutation_id, {ev}, 0.4, "gov-a");  // defers
  EXPECT_EQ(attempt([&] { k.apply(m.mutation_id); }), ErrorCode::MissingApproval);
  k.review(m.mutation_id, {ev}, 0.4, "gov-b");  // quorum of two
  const HarnessConfig next = k.apply(m.mutation_id);
  EXPECT_EQ(k.snapshot()->harness.active_config, next.config_id);
  EXPECT_EQ(find_mutation(*k.snapshot(), m.mutation_id)->result_config, next.config_id);
  EXPECT_EQ(attempt([&] { k.apply(m.mutation_id); }), ErrorCode::WrongStatus);
}

TEST(Mutation, PromptMutationChangesOnlyPrompt) {
  Kernel k;
  const auto w = bootstrap(k);
  const HarnessConfig base = *find_config(*k.snapshot(), w.config);
  const auto m = ready(k, w, prompt_contract(w.bench), prompt_delta("rewritten", 7));
  const HarnessConfig next = k.apply(m.mutation_id);
  EXPECT_EQ(json_diff(base, next), std::set<std::string>{"p"});
  EXPECT_EQ(next.prompt, (Descriptor{"rewritten", 7}));
  EXPECT_EQ(*find_config(*k.snapshot(), w.config), base);  // base is never edited
}

TEST(Mutation, TwoAppliesFormMutatedFromChain) {
  Kernel k;
  const auto w = bootstrap(k);
  const auto m1 = ready(k, w, prompt_contract(w.bench), prompt_delta("one"));
  const auto h1 = k.apply(m1.mutation_id);
  const auto m2 = ready(k, w, prompt_contract(w.bench), prompt_delta("two", 3));
  const auto h2 = k.apply(m2.mutation_id);
  const auto rep = k.snapshot()->graph.lineage(h2.config_id);
  std::vector<std::string> via_mutation;
  for (const auto& e : rep.ancestry) {
    if (e.via == Relation::mutated_from) via_mutation.push_back(e.node_id);
  }
  EXPECT_EQ(via_mutation, (std::vector<std::string>{h1.config_id, w.config}));
}

TEST(Mutation, RollbackConditions) {
  Kernel k;
  const auto w = bootstrap(k);
  const auto m = ready(k, w, prompt_contract(w.bench), prompt_delta("a"));
  const auto next = k.apply(m.mutation_id);
  EXPECT_EQ(attempt([&] { k.rollback(m.mutation_id, {"latency", 9.0, false}); }), ErrorCode::ConditionNotMet);
  EXPECT_EQ(attempt([&] { k.rollback(m.mutation_id, {"error_rate", 0.2, false}); }), ErrorCode::ConditionNotMet);
  const auto restored = k.rollback(m.mutation_id, {"error_rate", 0.35, false});
  EXPECT_EQ(restored.config_id, w.config);
  const auto s = k.snapshot();
  EXPECT_EQ(s->harness.active_config, w.config);
  EXPECT_EQ(find_mutation(*s, m.mutation_id)->status, MutationStatus::rolled_back);
  ASSERT_TRUE(find_config(*s, next.config_id));  // kept for audit
  EXPECT_FALSE(s->graph.eligible_for_selection(next.config_id));
  EXPECT_EQ(attempt([&] { k.rollback(m.mutation_id, {"error_rate", 0.35, false}); }), ErrorCode::WrongStatus);
}

TEST(Mutation, OperatorOrderRollback) {
  Kernel k;
  const auto w = bootstrap(k);
  const auto m = ready(k, w, prompt_contract(w.bench), prompt_delta("a"));
  k.apply(m.mutation_id);
  k.rollback(m.mutation_id, {"operator", 0.0, true});
  const auto& e = k.events();
  const auto it = std::find_if(e.begin(), e.end(), [](const TraceEvent& x) { return x.kind == EventKind::rollback_event; });
  ASSERT_NE(it, e.end());
  EXPECT_EQ(it->payload.at("trigger").at("operator_order"), true);
}

TEST(Mutation, SeededApplyRollbackRestoresConfigBytes) {
  Kernel k;
  const auto w = bootstrap(k);
  std::mt19937_64 rng(33);
  const std::array<ContractComponent, 9> comps{
      ContractComponent::prompts, ContractComponent::evaluators,  ContractComponent::workflows,
      ContractComponent::routing, ContractComponent::retrieval,   ContractComponent::memory_rules,
      ContractComponent::skills,  ContractComponent::benchmarks,  ContractComponent::graph_relations};
  for (int trial = 0; trial < 200; ++trial) {
    const auto s0 = k.snapshot();
    const HarnessConfig before = *find_config(*s0, s0->harness.active_config);
    const std::string before_bytes = canon(Json(before));

    ChangeContract c = prompt_contract(w.bench);
    c.component = comps[rng() % comps.size()];
    const TupleComponent slot = tuple_component_for(*c.component);
    ComponentDelta d{slot, {}};
    const std::string tag = std::to_string(trial);
    switch (slot) {
      case TupleComponent::prompt:
      case TupleComponent::memory: d.value = Descriptor{"text " + tag, static_cast<std::uint64_t>(trial + 2)}; break;
      case TupleComponent::tools: d.value = std::vector<std::string>{"tool-" + tag}; break;
      case TupleComponent::evaluators: d.value = std::vector<std::string>{w.eval_b, "extra-" + tag}; break;
      case TupleComponent::artifacts:
        d.value = rng() % 2 ? std::vector<std::string>{w.skill, w.bench} : std::vector<std::string>{w.bench};
        break;
      case TupleComponent::knowledge: d.value = std::uint64_t{1 + rng() % s0->graph.version()}; break;
      case TupleComponent::governance: d.value = std::string("strict"); break;
    }
    const auto m = ready(k, w, c, d);
    const HarnessConfig after = k.apply(m.mutation_id);
    const auto diff = json_diff(before, after);
    // A delta equal to the current value is legal and changes nothing.
    EXPECT_LE(diff.size(), 1u) << "trial " << trial;
    if (!diff.empty()) {
      EXPECT_EQ(*diff.begin(), slot_key(*c.component)) << "trial " << trial;
    }
    EXPECT_EQ(differing_components(before, after).size(), diff.size());

    k.rollback(m.mutation_id, {"error_rate", 0.2 + 0.01 * static_cast<double>(1 + rng() % 50), false});
    const auto s1 = k.snapshot();
    EXPECT_EQ(canon(Json(*find_config(*s1, s1->harness.active_config))), before_bytes) << "trial " << trial;
  }
}

TEST(Mutation, StatusEdgesObservedInLogAreLegal) {
  Kernel k;
  const auto w = bootstrap(k);
  const auto m = ready(k, w, prompt_contract(w.bench), prompt_delta("a"));
  k.apply(m.mutation_id);
  k.rollback(m.mutation_id, {"error_rate", 0.5, false});
  const auto bad = k.propose(w.config, prompt_contract(w.bench), prompt_delta("b"));
  attempt([&] { k.stage(bad.mutation_id, validate(k, bad.mutation_id, w.bench, 0.0)); });

  std::map<std::string, MutationStatus> status;
  int edges = 0;
  for (const auto& e : k.events()) {
    std::optional<MutationStatus> to;
    std::string id;
    switch (e.kind) {
      case EventKind::mutation_proposed:
        status[e.payload.at("record").at("mutation_id")] = MutationStatus::proposed;
        continue;
      case EventKind::mutation_staged: to = MutationStatus::staged; break;
      case EventKind::mutation_applied: to = MutationStatus::applied; break;
      case EventKind::rollback_event: to = MutationStatus::rolled_back; break;
      case EventKind::mutation_rejected: to = MutationStatus::rejected; break;
      default: continue;
    }
    id = e.payload.at("mutation_id");
    EXPECT_TRUE(is_legal_status_edge(status.at(id), *to));
    status[id] = *to;
    ++edges;
  }
  EXPECT_EQ(edges, 4);
}

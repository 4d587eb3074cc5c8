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

ReviewDecision three_way(double risk, bool evidence, std::size_t deferring, double gate, double autob, unsigned quorum) {
  if (risk > gate) return ReviewDecision::reject;
  if (evidence && risk < autob) return ReviewDecision::approve;
  if (evidence && deferring >= quorum) return ReviewDecision::approve;
  return ReviewDecision::defer;
}

Workload one_mutation(const std::string& falsifier, double improvement, double risk) {
  Workload w;
  WorkloadMutation m;
  m.contract = prompt_contract(falsifier);
  m.delta = ComponentDelta{TupleComponent::prompt, Descriptor{"revised " + Json(improvement).dump(), 2}};
  m.risk = risk;
  m.reviewers = {"gov-a", "gov-b"};
  m.validation = {{"quality_delta", improvement}};
  w.mutations.push_back(m);
  w.promote = false;
  return w;
}

}  // namespace

TEST(Review, Examples) {
  const GovernancePolicy p;
  EXPECT_EQ(review_decision(0.1, true, 1, p), ReviewDecision::approve);
  EXPECT_EQ(review_decision(0.9, true, 1, p), ReviewDecision::reject);
  EXPECT_EQ(review_decision(0.4, true, 1, p), ReviewDecision::defer);
  EXPECT_EQ(review_decision(0.4, true, 2, p), ReviewDecision::approve);
  EXPECT_EQ(review_decision(0.1, false, 5, p), ReviewDecision::defer);
  EXPECT_EQ(review_decision(0.5, true, 1, p), ReviewDecision::defer);  // gate is inclusive
}

TEST(Review, FuzzedGatesMatchThreeWayPredicate) {
  std::mt19937_64 rng(41);
  for (int i = 0; i < 5000; ++i) {
    GovernancePolicy p;
    // Tenths so that risk often sits exactly on a threshold.
    p.risk_gate = static_cast<double>(rng() % 11) / 10.0;
    p.auto_approve_below_risk = static_cast<double>(rng() % 11) / 10.0 * p.risk_gate;
    p.reviewer_quorum = 1 + static_cast<unsigned>(rng() % 3);
    p.validate();
    const double risk = static_cast<double>(rng() % 11) / 10.0;
    const bool evidence = rng() % 4 != 0;
    const std::size_t deferring = 1 + rng() % 3;
    EXPECT_EQ(review_decision(risk, evidence, deferring, p),
              three_way(risk, evidence, deferring, p.risk_gate, p.auto_approve_below_risk, p.reviewer_quorum));
  }
}

TEST(Review, QuorumNeedsDistinctReviewers) {
  Kernel k;
  const auto w = bootstrap(k);
  const auto ev = k.record_evaluation(w.skill, w.eval_a, {}, std::nullopt).event_id;
  EXPECT_EQ(k.review(w.skill, {ev}, 0.4, "gov-a").decision, ReviewDecision::defer);
  EXPECT_EQ(k.review(w.skill, {ev}, 0.4, "gov-a").decision, ReviewDecision::defer);
  EXPECT_EQ(k.review(w.skill, {ev}, 0.4, "gov-b").decision, ReviewDecision::approve);
  EXPECT_EQ(k.review(w.skill, {ev}, 0.45, "gov-c").decision, ReviewDecision::approve);
}

TEST(Review, Errors) {
  Kernel k;
  const auto w = bootstrap(k);
  EXPECT_EQ(attempt([&] { k.review("ghost", {}, 0.1, "gov"); }), ErrorCode::UnknownSubject);
  EXPECT_EQ(attempt([&] { k.review(w.skill, {}, 1.1, "gov"); }), ErrorCode::RiskOutOfRange);
  EXPECT_EQ(attempt([&] { k.review(w.skill, {}, -0.1, "gov"); }), ErrorCode::RiskOutOfRange);
  EXPECT_EQ(attempt([&] { k.review(w.skill, {}, NAN, "gov"); }), ErrorCode::RiskOutOfRange);
}

TEST(Policy, ValidationAndRoundTrip) {
  GovernancePolicy p;
  p.auto_approve_below_risk = 0.6;
  EXPECT_EQ(attempt([&] { p.validate(); }), ErrorCode::InvalidPolicy);
  p = GovernancePolicy{};
  p.reviewer_quorum = 0;
  EXPECT_EQ(attempt([&] { p.validate(); }), ErrorCode::InvalidPolicy);
  p = GovernancePolicy{};
  p.weights.alpha = -1;
  EXPECT_EQ(attempt([&] { p.validate(); }), ErrorCode::InvalidWeights);

  p = GovernancePolicy{};
  p.risk_gate = 0.7;
  p.cost_budget = 2.5;
  p.evidence_table[{LifecycleState::validated, LifecycleState::trusted}].min_evidence_events = 4;
  const GovernancePolicy back = parse_policy(policy_to_toml(p));
  EXPECT_EQ(back, p);
  EXPECT_EQ(policy_digest(back), policy_digest(p));
  EXPECT_NE(policy_digest(p), policy_digest(GovernancePolicy{}));
  EXPECT_EQ(Json(p).get<GovernancePolicy>(), p);
}

TEST(Policy, PartialFileKeepsDefaults) {
  const auto p = parse_policy("risk_gate = 0.8\n[weights]\nlambda = 2.0\n");
  EXPECT_EQ(p.risk_gate, 0.8);
  EXPECT_EQ(p.weights.lambda, 2.0);
  EXPECT_EQ(p.auto_approve_below_risk, 0.3);
  EXPECT_EQ(p.evidence_table, default_evidence_table());
  EXPECT_THROW(parse_policy("risk_gate = 0.2\nauto_approve_below_risk = 0.3\n"), KernelError);
  EXPECT_THROW(parse_policy("[evidence.validated_to_canonical]\nmin_evidence_events = 1\n"), KernelError);
}

TEST(Cycle, EmptyWorkload) {
  Kernel k;
  const auto r0 = run_cycle(k, Workload{});
  const auto r1 = run_cycle(k, Workload{});
  EXPECT_EQ(r0.cycle_index, 0u);
  EXPECT_EQ(r1.cycle_index, 1u);
  EXPECT_TRUE(r1.generated.empty() && r1.evaluated.empty() && r1.reviews.empty() && r1.staged_mutations.empty() &&
              r1.promotions.empty() && r1.deprecations.empty() && r1.rollbacks.empty());
  EXPECT_EQ(k.snapshot_state().cycle_count, 2u);
}

TEST(Cycle, OneArtifactWithEvidenceIsPromoted) {
  Kernel k;
  const auto w = bootstrap(k);
  Workload wl;
  wl.artifacts.push_back({CapabilityKind::workflow, "triage workflow", {}, std::nullopt});
  wl.evaluations.push_back({"@0", w.eval_a, {{"accuracy", 0.8}}, std::nullopt});
  const auto r = run_cycle(k, wl);
  ASSERT_EQ(r.promotions.size(), 1u);
  EXPECT_EQ(r.promotions[0].capability_id, r.generated[0]);
  EXPECT_EQ(r.promotions[0].from_state, LifecycleState::experimental);
  EXPECT_EQ(r.promotions[0].to_state, LifecycleState::validated);
}

TEST(Cycle, FailedCycleLeavesNoTrace) {
  Kernel k;
  const auto w = bootstrap(k);
  const auto before = canon(state_to_json(*k.snapshot()));
  const auto events = k.event_count();
  Workload wl;
  wl.artifacts.push_back({CapabilityKind::tool, "fine tool", {}, std::nullopt});
  wl.evaluations.push_back({"@0", w.eval_a, {}, std::nullopt});
  wl.deprecations.push_back("@7");  // bad reference, raised late in the cycle
  EXPECT_THROW(run_cycle(k, wl), KernelError);
  EXPECT_EQ(canon(state_to_json(*k.snapshot())), before);
  EXPECT_EQ(k.event_count(), events);
  // The cycle index is not consumed either.
  EXPECT_EQ(run_cycle(k, Workload{}).cycle_index, 1u);
}

TEST(Cycle, MutationPassesGatesInOrder) {
  Kernel k;
  const auto w = bootstrap(k);
  const auto r = run_cycle(k, one_mutation(w.bench, 0.2, 0.1));
  ASSERT_EQ(r.staged_mutations.size(), 1u);
  const auto s = k.snapshot();
  const auto* m = find_mutation(*s, r.staged_mutations[0]);
  EXPECT_EQ(m->status, MutationStatus::applied);
  EXPECT_EQ(s->harness.active_config, *m->result_config);

  // Risk above the gate: rejected by review and kept as negative evidence.
  const auto r2 = run_cycle(k, one_mutation(w.bench, 0.2, 0.9));
  EXPECT_TRUE(r2.staged_mutations.empty());
  // Improvement below the contract: falsified at staging.
  const auto r3 = run_cycle(k, one_mutation(w.bench, 0.01, 0.1));
  EXPECT_TRUE(r3.staged_mutations.empty());
  int rejected = 0;
  for (const auto& [id, mut] : k.snapshot()->reg.mutations) rejected += mut.status == MutationStatus::rejected;
  EXPECT_EQ(rejected, 2);
  EXPECT_TRUE(oracle::gate_violations(k.events()).empty());
}

TEST(Cycle, ObservedRegressionRollsBack) {
  Kernel k;
  const auto w = bootstrap(k);
  run_cycle(k, one_mutation(w.bench, 0.2, 0.1));
  Workload quiet;
  quiet.observation = {{"error_rate", 0.1}};
  EXPECT_TRUE(run_cycle(k, quiet).rollbacks.empty());
  Workload bad;
  bad.observation = {{"error_rate", 0.35}};
  const auto r = run_cycle(k, bad);
  ASSERT_EQ(r.rollbacks.size(), 1u);
  EXPECT_EQ(k.snapshot_state().active_config, w.config);
}

TEST(Cycle, PromotionsPassReviewGate) {
  Kernel k;
  const auto w = bootstrap(k);
  for (int c = 0; c < 8; ++c) {
    Workload wl;
    wl.evaluations.push_back({w.skill, c % 2 ? w.eval_a : w.eval_b, {{"accuracy", 0.9}},
                              QualityComponents{0.9, 0.9, 0.9, 0.9, 0.1}});
    wl.promotion_reviewers = {"gov-a", "gov-b"};
    run_cycle(k, wl);
  }
  const auto cap = *find_capability(*k.snapshot(), w.skill);
  EXPECT_EQ(cap.lifecycle, LifecycleState::trusted);
  EXPECT_TRUE(oracle::gate_violations(k.events()).empty());
}

TEST(Cycle, ReportsAreReconstructibleAndResolve) {
  Kernel k;
  const auto w = bootstrap(k);
  std::vector<CycleReport> reports;
  for (int c = 0; c < 6; ++c) {
    Workload wl;
    wl.artifacts.push_back({CapabilityKind::skill, "skill v" + std::to_string(c), {w.skill}, std::nullopt});
    wl.evaluations.push_back({"@0", w.eval_a, {}, QualityComponents{0.8, 0.7, 0.6, 0.5, 0.1}});
    wl.evaluations.push_back({w.skill, w.eval_b, {}, QualityComponents{0.8, 0.7, 0.6, 0.5, 0.1}});
    wl.candidates.push_back({"@active", 0.5, 0.5, 0.5, 0.5, 0.2, {}});
    if (c == 3) wl.deprecations.push_back("@0");
    if (c == 1) {
      auto m = one_mutation(w.bench, 0.3, 0.05).mutations[0];
      wl.mutations.push_back(m);
    }
    wl.promotion_reviewers = {"gov-a"};
    wl.observation = {{"error_rate", c == 4 ? 0.5 : 0.05}};
    reports.push_back(run_cycle(k, wl));
  }
  const auto events = k.events();
  const auto s = k.snapshot();
  for (const auto& r : reports) {
    EXPECT_EQ(canon(Json(reconstruct_report(events, r.cycle_index))), canon(Json(r)));
    for (const auto& id : r.generated) EXPECT_NO_THROW(resolve(*s, id));
    for (const auto& id : r.reviews) EXPECT_NO_THROW(resolve(*s, id));
    for (const auto& id : r.staged_mutations) EXPECT_NO_THROW(resolve(*s, id));
    for (const auto& id : r.rollbacks) EXPECT_NO_THROW(resolve(*s, id));
    for (const auto& e : r.evaluated) EXPECT_NO_THROW(resolve(*s, e.config_id));
  }
  EXPECT_EQ(reports[4].rollbacks.size(), 1u);
  EXPECT_EQ(reports[3].deprecations.size(), 1u);
}

// Each observable action leaves exactly one event of its kind.
TEST(Cycle, ObservableActionsEmitEvents) {
  Kernel k;
  const auto w = bootstrap(k);
  std::map<EventKind, int> expected;
  auto count = [&] {
    std::map<EventKind, int> got;
    for (const auto& e : k.events()) ++got[e.kind];
    return got;
  };
  const auto base = count();
  k.record_evaluation(w.skill, w.eval_a, {{"cost", 0.3}}, std::nullopt);
  ++expected[EventKind::evaluation_recorded];
  k.review(w.skill, {}, 0.2, "gov-a");
  ++expected[EventKind::review_recorded];
  k.add_edge(w.skill, Relation::validated_by, w.eval_a);
  ++expected[EventKind::graph_updated];
  k.transition(w.skill, LifecycleState::validated);
  ++expected[EventKind::lifecycle_transition];
  auto got = count();
  for (const auto& [kind, n] : expected) EXPECT_EQ(got[kind] - (base.count(kind) ? base.at(kind) : 0), n) << to_string(kind);
}
